use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::run::{run_scenario, Branch, Sample};
use crate::classify::{evaluate, CountingModel, FeatureSelect, LabeledDataset, Method, RowKey, TrainParams};
use crate::error::{Error, Result};
use crate::features::{FeatureCsv, FeatureMode, FeatureVector, FrequencyKind, SPATIAL_NAMES};
use crate::sim::ScenarioConfig;

/// The feature sets compared in the ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    #[default]
    Both,
    Spatial,
    Frequency,
    /// Both, projected onto the principal components.
    Pca,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [FeatureSet::Both, FeatureSet::Spatial, FeatureSet::Frequency, FeatureSet::Pca];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Both => "both",
            FeatureSet::Spatial => "spatial",
            FeatureSet::Frequency => "frequency",
            FeatureSet::Pca => "pca",
        }
    }

    pub fn select(self) -> FeatureSelect {
        match self {
            FeatureSet::Both | FeatureSet::Pca => FeatureSelect::all(),
            FeatureSet::Spatial => FeatureSelect::spatial_only(),
            FeatureSet::Frequency => FeatureSelect::frequency_only(),
        }
    }

    /// Training parameters with PCA switched on for the PCA set only.
    pub fn params(self, base: &TrainParams, retained: f64) -> TrainParams {
        TrainParams {
            pca: (self == FeatureSet::Pca).then_some(retained),
            ..*base
        }
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature set '{s}'")))
    }
}

/// Labelled feature vectors gathered from pipeline runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingData {
    /// Spatial features of every labelled frame.
    pub spatial: LabeledDataset,
    /// Spatial plus MODWT features of frames with a full window.
    pub full: LabeledDataset,
    /// Spatial plus CVD features of the same frames.
    pub cvd: LabeledDataset,
}

fn full_names(kind: &FrequencyKind) -> Vec<String> {
    SPATIAL_NAMES.iter().map(|s| s.to_string()).chain(kind.names()).collect()
}

impl TrainingData {
    /// Datasets from one run's samples; unlabelled samples are skipped.
    pub fn from_samples(samples: &[Sample], cfg: &PipelineConfig) -> Self {
        let spatial_names = SPATIAL_NAMES.iter().map(|s| s.to_string()).collect();
        let mut d = Self {
            spatial: LabeledDataset::new(spatial_names),
            full: LabeledDataset::new(full_names(&cfg.frequency)),
            cvd: LabeledDataset::new(full_names(&cfg.cvd_kind())),
        };
        for s in samples {
            let Some(label) = s.label else { continue };
            let key = RowKey {
                sequence: s.vector.track_id,
                frame: s.vector.frame,
            };
            d.spatial.push(s.vector.spatial.to_vec(), label, key);
            if s.vector.mode() == FeatureMode::Full {
                d.full.push(s.vector.values(), label, key);
                if let Some(c) = &s.cvd {
                    let mut row = s.vector.spatial.to_vec();
                    row.extend_from_slice(c);
                    d.cvd.push(row, label, key);
                }
            }
        }
        d
    }

    pub fn append(&mut self, other: &TrainingData) -> Result<()> {
        // Keep one sequence offset for all three so keys stay comparable.
        let offset = [&self.spatial, &self.full, &self.cvd]
            .iter()
            .flat_map(|d| d.keys.iter().map(|k| k.sequence + 1))
            .max()
            .unwrap_or(0);
        for (mine, theirs) in [(&mut self.spatial, &other.spatial), (&mut self.full, &other.full), (&mut self.cvd, &other.cvd)] {
            if mine.is_empty() && mine.names.is_empty() {
                mine.names = theirs.names.clone();
            }
            if mine.names != theirs.names {
                return Err(Error::Dataset("cannot append datasets with different columns".into()));
            }
            mine.rows.extend(theirs.rows.iter().cloned());
            mine.labels.extend_from_slice(&theirs.labels);
            mine.keys.extend(theirs.keys.iter().map(|k| RowKey {
                sequence: k.sequence + offset,
                frame: k.frame,
            }));
        }
        Ok(())
    }
}

/// Runs the oracle-counting pipeline on each scenario and seed and gathers
/// the labelled feature vectors. CVD features are gathered as well.
pub fn generate_training_data(cfg: &PipelineConfig, scenarios: &[ScenarioConfig]) -> Result<TrainingData> {
    let cfg = PipelineConfig {
        cvd_baseline: true,
        ..cfg.clone()
    };
    let mut data = TrainingData::default();
    for scn in scenarios {
        let run = run_scenario(scn, &cfg, &[Branch::oracle(&cfg)])?;
        data.append(&TrainingData::from_samples(&run.outputs[0].samples, &cfg))?;
    }
    Ok(data)
}

/// Trains the spatial-only and full classifiers of one method on the
/// columns of `full` chosen by `select`.
pub fn train_counting(spatial: &LabeledDataset, full: &LabeledDataset, select: &FeatureSelect, method: Method, p: &TrainParams) -> Result<CountingModel> {
    let n_freq = full.dim().saturating_sub(SPATIAL_NAMES.len());
    let cols = select.columns(n_freq)?;
    CountingModel::train(spatial, &full.select_columns(&cols), cols, method, p)
}

/// Writes samples as a feature CSV; `cvd` selects the CVD statistics as
/// the frequency block.
pub fn write_samples_csv<W: Write>(samples: &[Sample], kind: &FrequencyKind, cvd: bool, out: W) -> Result<()> {
    let mut csv = FeatureCsv::new(out, kind)?;
    for s in samples {
        if cvd {
            let v = FeatureVector {
                frequency: s.cvd.clone(),
                ..s.vector.clone()
            };
            csv.write(&v, s.label)?;
        } else {
            csv.write(&s.vector, s.label)?;
        }
    }
    csv.flush()
}

/// One cell of the ablation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub method: Method,
    pub features: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub accuracy_bm: f64,
    pub accuracy_am: f64,
}

/// A named column choice of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub select: FeatureSelect,
    pub pca: bool,
}

/// Feature-set rows, then each band alone and each band with the spatial
/// features (approximation first, then the detail levels from coarse to fine).
pub fn default_grid_axes(n_bands: usize, pca_name: &str) -> Vec<GridAxis> {
    let mut axes: Vec<GridAxis> = FeatureSet::ALL
        .iter()
        .map(|f| GridAxis {
            name: match f {
                FeatureSet::Both => "spatial+frequency".to_string(),
                FeatureSet::Pca => pca_name.to_string(),
                other => other.as_str().to_string(),
            },
            select: f.select(),
            pca: *f == FeatureSet::Pca,
        })
        .collect();
    let band_name = |b: usize| if b + 1 == n_bands { "approx".to_string() } else { format!("level{}", b + 1) };
    for spatial in [false, true] {
        for b in (0..n_bands).rev() {
            axes.push(GridAxis {
                name: if spatial { format!("spatial+{}", band_name(b)) } else { band_name(b) },
                select: FeatureSelect {
                    spatial,
                    frequency: true,
                    bands: Some(vec![b]),
                },
                pca: false,
            });
        }
    }
    axes
}

/// Trains each method on each axis with a stratified split of `full` and
/// scores the held-out part before and after median smoothing.
pub fn eval_grid(
    full: &LabeledDataset,
    methods: &[Method],
    axes: &[GridAxis],
    p: &TrainParams,
    pca_retained: f64,
    train_frac: f64,
    seed: u64,
    window: usize,
) -> Result<Vec<GridRow>> {
    let (train, test) = full.split(train_frac, seed)?;
    if test.is_empty() || train.is_empty() {
        return Err(Error::Dataset(format!("split of {} rows left a part empty", full.len())));
    }
    eval_grid_on(&train, &test, methods, axes, p, pca_retained, window)
}

/// The grid with a given training and test set, e.g. from different runs.
pub fn eval_grid_on(
    train: &LabeledDataset,
    test: &LabeledDataset,
    methods: &[Method],
    axes: &[GridAxis],
    p: &TrainParams,
    pca_retained: f64,
    window: usize,
) -> Result<Vec<GridRow>> {
    if train.names != test.names {
        return Err(Error::Dataset("training and test features differ".into()));
    }
    let n_freq = train.dim().saturating_sub(SPATIAL_NAMES.len());
    let mut rows = Vec::new();
    for axis in axes {
        let cols = axis.select.columns(n_freq)?;
        let (tr, te) = (train.select_columns(&cols), test.select_columns(&cols));
        let params = TrainParams {
            pca: axis.pca.then_some(pca_retained),
            ..*p
        };
        for &method in methods {
            let model = crate::classify::Classifier::train(&tr, FeatureMode::Full, cols.clone(), method, &params)?;
            let e = evaluate(&model, &te, window)?;
            rows.push(GridRow {
                method,
                features: axis.name.clone(),
                n_train: tr.len(),
                n_test: te.len(),
                n_features: cols.len(),
                accuracy_bm: e.accuracy_bm,
                accuracy_am: e.accuracy_am,
            });
        }
    }
    Ok(rows)
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "features", "n_features", "n_train", "n_test", "acc_bm", "acc_am"])?;
    for r in rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.features.clone(),
            r.n_features.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            format!("{:.4}", 100.0 * r.accuracy_bm),
            format!("{:.4}", 100.0 * r.accuracy_am),
        ])?;
    }
    w.flush()?;
    Ok(())
}
