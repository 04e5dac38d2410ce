use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::model::{load_versioned, save_versioned, Classifier, Method, Prediction, TrainParams};
use crate::error::Result;
use crate::features::{FeatureMode, FeatureVector, SPATIAL_NAMES};

/// The pair of classifiers behind seamless counting: one on spatial
/// features for the interval before the window fills, one on the full
/// vector afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingModel {
    pub spatial: Classifier,
    pub full: Classifier,
}

impl CountingModel {
    /// `spatial` holds the ten spatial columns; `full` holds the columns
    /// `full_columns` of complete feature vectors.
    pub fn train(spatial: &LabeledDataset, full: &LabeledDataset, full_columns: Vec<usize>, method: Method, p: &TrainParams) -> Result<Self> {
        let sp_params = TrainParams { pca: None, ..*p };
        Ok(Self {
            spatial: Classifier::train(spatial, FeatureMode::SpatialOnly, (0..SPATIAL_NAMES.len()).collect(), method, &sp_params)?,
            full: Classifier::train(full, FeatureMode::Full, full_columns, method, p)?,
        })
    }

    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction> {
        match fv.mode() {
            FeatureMode::SpatialOnly => self.spatial.predict(fv),
            FeatureMode::Full => self.full.predict(fv),
        }
    }

    pub fn method(&self) -> Method {
        self.full.method()
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        save_versioned(self, out)
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        load_versioned(input)
    }
}
