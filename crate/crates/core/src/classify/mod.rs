//! People-counting classifiers: KNN, Gaussian naive Bayes, an RBF SVM
//! trained by SMO and a random forest, with z-scoring, optional PCA, the
//! stratified split harness and median label smoothing.

mod counting;
mod dataset;
mod eval;
mod forest;
mod knn;
mod model;
mod naive_bayes;
mod pca;
mod smooth;
mod standardize;
mod svm;

pub use counting::CountingModel;
pub use dataset::{FeatureSelect, LabeledDataset, RowKey};
pub use eval::{evaluate, evaluate_predictions, Evaluation, MEDIAN_WINDOW};
pub use forest::{ForestParams, RandomForest};
pub use knn::Knn;
pub use model::{Classifier, Learner, Method, Prediction, TrainParams, MODEL_FORMAT_VERSION};
pub use naive_bayes::GaussianNb;
pub use pca::PcaTransform;
pub use smooth::median_smooth;
pub use standardize::Standardizer;
pub use svm::{smo, BinarySvm, SmoTrace, Svm, SvmParams};
