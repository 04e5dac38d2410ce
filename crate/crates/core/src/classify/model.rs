use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::forest::{ForestParams, RandomForest};
use super::knn::Knn;
use super::naive_bayes::GaussianNb;
use super::pca::PcaTransform;
use super::standardize::Standardizer;
use super::svm::{Svm, SvmParams};
use crate::error::{Error, Result};
use crate::features::{FeatureMode, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Knn,
    NaiveBayes,
    Svm,
    RandomForest,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Knn, Method::NaiveBayes, Method::Svm, Method::RandomForest];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Knn => "knn",
            Method::NaiveBayes => "naive_bayes",
            Method::Svm => "svm",
            Method::RandomForest => "random_forest",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub knn_k: usize,
    pub svm: SvmParams,
    pub forest: ForestParams,
    /// Project standardized features onto the principal components that
    /// retain this share of variance.
    pub pca: Option<f64>,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            svm: SvmParams::default(),
            forest: ForestParams::default(),
            pca: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Learner {
    Knn(Knn),
    NaiveBayes(GaussianNb),
    Svm(Svm),
    RandomForest(RandomForest),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    /// One score per class in `Classifier::labels` order.
    pub scores: Vec<f64>,
}

/// A fitted classifier together with its preprocessing: column selection
/// from the feature vector, z-scoring and optional PCA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub mode: FeatureMode,
    /// Columns taken from `FeatureVector::values`.
    pub columns: Vec<usize>,
    pub names: Vec<String>,
    /// Sorted class labels; learners work with their indices.
    pub labels: Vec<usize>,
    pub standardizer: Standardizer,
    pub pca: Option<PcaTransform>,
    pub learner: Learner,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile<T> {
    version: u32,
    model: T,
}

impl Classifier {
    /// Trains on every column of `ds`; `columns` records where those come
    /// from in a feature vector of the given mode.
    pub fn train(ds: &LabeledDataset, mode: FeatureMode, columns: Vec<usize>, method: Method, p: &TrainParams) -> Result<Self> {
        ds.validate()?;
        if columns.len() != ds.dim() {
            return Err(Error::Shape(format!("{} columns for {} features", columns.len(), ds.dim())));
        }
        let labels = ds.classes();
        let targets: Vec<usize> = ds.labels.iter().map(|l| labels.binary_search(l).unwrap()).collect();
        let standardizer = Standardizer::fit(&ds.rows);
        let mut rows = standardizer.apply_all(&ds.rows);
        let pca = match p.pca {
            Some(r) => {
                let t = PcaTransform::fit(&rows, r)?;
                rows = rows.iter().map(|x| t.transform(x)).collect();
                Some(t)
            }
            None => None,
        };
        let k = labels.len();
        let learner = match method {
            Method::Knn => Learner::Knn(Knn::fit(rows, targets, k, p.knn_k)),
            Method::NaiveBayes => Learner::NaiveBayes(GaussianNb::fit(&rows, &targets, k)),
            Method::Svm => Learner::Svm(Svm::fit(&rows, &targets, k, &p.svm)),
            Method::RandomForest => Learner::RandomForest(RandomForest::fit(&rows, &targets, k, &p.forest)),
        };
        Ok(Self {
            mode,
            columns,
            names: ds.names.clone(),
            labels,
            standardizer,
            pca,
            learner,
        })
    }

    pub fn method(&self) -> Method {
        match self.learner {
            Learner::Knn(_) => Method::Knn,
            Learner::NaiveBayes(_) => Method::NaiveBayes,
            Learner::Svm(_) => Method::Svm,
            Learner::RandomForest(_) => Method::RandomForest,
        }
    }

    /// Predicts from already selected raw feature values.
    pub fn predict_row(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape(format!("row has {} values, model expects {}", row.len(), self.columns.len())));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature {}", self.names[i])));
        }
        let mut x = self.standardizer.apply(row);
        if let Some(p) = &self.pca {
            x = p.transform(&x);
        }
        let scores = match &self.learner {
            Learner::Knn(m) => m.scores(&x),
            Learner::NaiveBayes(m) => m.scores(&x),
            Learner::Svm(m) => m.scores(&x),
            Learner::RandomForest(m) => m.scores(&x),
        };
        // First maximum wins, so ties resolve to the smaller count.
        let best = scores.iter().enumerate().fold(0, |b, (i, s)| if *s > scores[b] { i } else { b });
        Ok(Prediction {
            label: self.labels[best],
            scores,
        })
    }

    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction> {
        if fv.mode() != self.mode {
            return Err(Error::ModeMismatch {
                expected: self.mode.as_str().into(),
                actual: fv.mode().as_str().into(),
            });
        }
        let values = fv.values();
        let row = self
            .columns
            .iter()
            .map(|&c| values.get(c).copied())
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Shape("feature vector shorter than model columns".into()))?;
        self.predict_row(&row)
    }

    pub fn accuracy(&self, ds: &LabeledDataset) -> Result<f64> {
        let mut ok = 0;
        for (r, l) in ds.rows.iter().zip(&ds.labels) {
            ok += usize::from(self.predict_row(r)?.label == *l);
        }
        Ok(ok as f64 / ds.len().max(1) as f64)
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        save_versioned(self, out)
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        load_versioned(input)
    }
}

pub(crate) fn save_versioned<T: Serialize, W: Write>(model: &T, out: W) -> Result<()> {
    serde_json::to_writer(
        out,
        &ModelFile {
            version: MODEL_FORMAT_VERSION,
            model,
        },
    )?;
    Ok(())
}

pub(crate) fn load_versioned<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<T> {
    let v: serde_json::Value = serde_json::from_reader(input)?;
    let version = v.get("version").and_then(serde_json::Value::as_u64);
    if version != Some(MODEL_FORMAT_VERSION as u64) {
        return Err(Error::Format(format!("model format version {version:?} (expected {MODEL_FORMAT_VERSION})")));
    }
    let f: ModelFile<T> = serde_json::from_value(v)?;
    Ok(f.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::dataset::RowKey;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn clouds(n_per: usize, d: usize, sep: f64, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = LabeledDataset::new((0..d).map(|j| format!("f{j}")).collect());
        for c in 1..=3usize {
            for i in 0..n_per {
                let row = (0..d)
                    .map(|j| {
                        let centre = if j % 3 == c - 1 { sep } else { 0.0 };
                        centre + rng.sample::<f64, _>(StandardNormal)
                    })
                    .collect();
                ds.push(
                    row,
                    c,
                    RowKey {
                        sequence: c as u64,
                        frame: i as u64,
                    },
                );
            }
        }
        ds
    }

    fn train(ds: &LabeledDataset, m: Method, p: &TrainParams) -> Classifier {
        Classifier::train(ds, FeatureMode::Full, (0..ds.dim()).collect(), m, p).unwrap()
    }

    #[test]
    fn one_nn_fits_training_set() {
        let ds = clouds(30, 4, 1.0, 1);
        let p = TrainParams {
            knn_k: 1,
            ..TrainParams::default()
        };
        let m = train(&ds, Method::Knn, &p);
        assert_eq!(m.accuracy(&ds).unwrap(), 1.0);
        assert_eq!(m.predict_row(&ds.rows[17]).unwrap().label, ds.labels[17]);
    }

    #[test]
    fn naive_bayes_threshold_between_unit_gaussians() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ds = LabeledDataset::new(vec!["x".into()]);
        for i in 0..20_000 {
            let c = i % 2;
            let x = 4.0 * c as f64 + rng.sample::<f64, _>(StandardNormal);
            ds.push(vec![x], c + 1, RowKey { sequence: 0, frame: i as u64 });
        }
        let m = train(&ds, Method::NaiveBayes, &TrainParams::default());
        // Scan for the posterior crossing.
        let mut t = -2.0;
        while m.predict_row(&[t]).unwrap().label == 1 {
            t += 0.001;
        }
        assert!((t - 2.0f64).abs() < 0.1, "threshold {t}");
        let s = m.predict_row(&[1.0]).unwrap().scores;
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn well_separated_three_classes() {
        let ds = clouds(100, 6, 4.0, 3);
        let (tr, te) = ds.split(0.7, 9).unwrap();
        for m in Method::ALL {
            let c = train(&tr, m, &TrainParams::default());
            let acc = c.accuracy(&te).unwrap();
            assert!(acc >= 0.95, "{m:?} accuracy {acc}");
        }
    }

    #[test]
    fn save_load_round_trip() {
        let ds = clouds(20, 3, 2.0, 4);
        let p = TrainParams {
            pca: Some(0.8),
            forest: ForestParams {
                trees: 5,
                ..ForestParams::default()
            },
            ..TrainParams::default()
        };
        for m in Method::ALL {
            let c = train(&ds, m, &p);
            let mut buf = Vec::new();
            c.save(&mut buf).unwrap();
            let back = Classifier::load(buf.as_slice()).unwrap();
            let mut again = Vec::new();
            back.save(&mut again).unwrap();
            assert_eq!(buf, again);
            for r in &ds.rows {
                assert_eq!(c.predict_row(r).unwrap(), back.predict_row(r).unwrap());
            }
        }
        let bad = br#"{"version":99,"model":null}"#;
        assert!(matches!(Classifier::load(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn mode_mismatch_rejected() {
        let ds = clouds(10, 10, 2.0, 5);
        let c = Classifier::train(&ds, FeatureMode::Full, (0..10).collect(), Method::Knn, &TrainParams::default()).unwrap();
        let fv = FeatureVector {
            track_id: 1,
            frame: 3,
            frame_span: (0, 3),
            spatial: [0.0; 10],
            spatial_empty: false,
            frequency: None,
        };
        assert!(matches!(c.predict(&fv), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn training_rejects_bad_data() {
        let mut ds = clouds(5, 2, 1.0, 6);
        ds.rows[2][0] = f64::INFINITY;
        assert!(matches!(
            Classifier::train(&ds, FeatureMode::Full, vec![0, 1], Method::Svm, &TrainParams::default()),
            Err(Error::NonFinite(_))
        ));
        let one = clouds(5, 2, 1.0, 6).subset(&[0, 1, 2]);
        assert!(Classifier::train(&one, FeatureMode::Full, vec![0, 1], Method::Svm, &TrainParams::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn affine_rescaling_leaves_predictions(scale in proptest::collection::vec(0.01f64..100.0, 4), shift in proptest::collection::vec(-50.0f64..50.0, 4)) {
            let ds = clouds(15, 4, 2.5, 7);
            let probe = clouds(5, 4, 2.5, 8);
            let mut moved = ds.clone();
            for r in moved.rows.iter_mut() {
                for j in 0..4 { r[j] = r[j] * scale[j] + shift[j]; }
            }
            for m in [Method::Knn, Method::Svm] {
                let a = train(&ds, m, &TrainParams::default());
                let b = train(&moved, m, &TrainParams::default());
                for r in &probe.rows {
                    let rm: Vec<f64> = r.iter().enumerate().map(|(j, v)| v * scale[j] + shift[j]).collect();
                    prop_assert_eq!(a.predict_row(r).unwrap().label, b.predict_row(&rm).unwrap().label);
                }
            }
        }
    }
}
