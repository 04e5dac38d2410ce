use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use grouptrack::classify::{FeatureSelect, Method, TrainParams};
use grouptrack::pipeline::{FeatureSet, PipelineConfig};
use grouptrack::sim::{Fidelity, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CounterKind {
    /// Conventional tracking; every track counts as one person.
    Off,
    /// Counts from the ground truth, used to produce training features.
    Oracle,
    /// A trained counting model.
    Model,
}

/// Everything a batch needs. Every field has a default, so an empty file
/// is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Read recorded frames written by `simulate` instead of simulating.
    pub dataset_dir: Option<PathBuf>,
    pub scenarios: Vec<u8>,
    pub seeds: Vec<u64>,
    pub duration_s: f64,
    pub fidelity: Fidelity,
    /// Write radar cubes (about 0.6 MB per frame) next to the ground truth.
    pub write_cubes: bool,
    pub counter: CounterKind,
    pub method: Method,
    pub features: FeatureSet,
    /// Restrict the frequency features to these bands (0 = level 1, the
    /// last index is the approximation).
    pub bands: Option<Vec<usize>>,
    pub pca_retained: f64,
    pub model: Option<PathBuf>,
    pub cvd_model: Option<PathBuf>,
    /// Also run classifier-off tracking on the same frames.
    pub compare_conventional: bool,
    /// Write labelled feature CSVs from signal-level runs.
    pub write_features: bool,
    pub train_frac: f64,
    pub split_seed: u64,
    pub train: TrainParams,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            dataset_dir: None,
            scenarios: (1..=6).collect(),
            seeds: vec![1],
            duration_s: 60.0,
            fidelity: Fidelity::Signal,
            write_cubes: true,
            counter: CounterKind::Model,
            method: Method::Svm,
            features: FeatureSet::Both,
            bands: None,
            pca_retained: 0.8,
            model: None,
            cvd_model: None,
            compare_conventional: true,
            write_features: true,
            train_frac: 0.7,
            split_seed: 0,
            train: TrainParams::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Command-line overrides of the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Scenario ids, e.g. 1,3,6.
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Option<Vec<u8>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Seconds per scenario.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, value_parser = parse_fidelity)]
    pub fidelity: Option<Fidelity>,
    #[arg(long)]
    pub write_cubes: Option<bool>,
    #[arg(long)]
    pub mti: Option<bool>,
    #[arg(long)]
    pub count_feedback: Option<bool>,
    #[arg(long)]
    pub cvd_baseline: Option<bool>,
    #[arg(long, value_enum)]
    pub counter: Option<CounterKind>,
    /// knn, naive_bayes, svm or random_forest.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// both, spatial, frequency or pca.
    #[arg(long, value_parser = parse_features)]
    pub features: Option<FeatureSet>,
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    #[arg(long)]
    pub pca_retained: Option<f64>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub cvd_model: Option<PathBuf>,
    #[arg(long)]
    pub compare_conventional: Option<bool>,
    #[arg(long)]
    pub write_features: Option<bool>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: grouptrack::Error| e.to_string())
}

fn parse_features(s: &str) -> Result<FeatureSet, String> {
    s.parse().map_err(|e: grouptrack::Error| e.to_string())
}

fn parse_fidelity(s: &str) -> Result<Fidelity, String> {
    match s {
        "signal" => Ok(Fidelity::Signal),
        "point_cloud" => Ok(Fidelity::PointCloud),
        _ => Err(format!("unknown fidelity '{s}' (signal or point_cloud)")),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The file named by `--config` (or the defaults) with the flags applied.
    pub fn resolve(o: &Overrides) -> CliResult<Self> {
        let mut c = match &o.config {
            Some(path) => Self::from_toml(&std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident).+ = $value:expr) => {
                if let Some(v) = $value.clone() {
                    c.$($field).+ = v;
                }
            };
        }
        set!(output_dir = o.out);
        set!(scenarios = o.scenarios);
        set!(seeds = o.seeds);
        set!(duration_s = o.duration);
        set!(fidelity = o.fidelity);
        set!(write_cubes = o.write_cubes);
        set!(pipeline.mti = o.mti);
        set!(pipeline.count_feedback = o.count_feedback);
        set!(pipeline.cvd_baseline = o.cvd_baseline);
        set!(counter = o.counter);
        set!(method = o.method);
        set!(features = o.features);
        set!(pca_retained = o.pca_retained);
        set!(compare_conventional = o.compare_conventional);
        set!(write_features = o.write_features);
        if o.dataset.is_some() {
            c.dataset_dir = o.dataset.clone();
        }
        if o.bands.is_some() {
            c.bands = o.bands.clone();
        }
        if o.model.is_some() {
            c.model = o.model.clone();
        }
        if o.cvd_model.is_some() {
            c.cvd_model = o.cvd_model.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.pipeline.validate()?;
        if self.scenarios.is_empty() || self.seeds.is_empty() {
            return Err(CliError::Config("at least one scenario and one seed are needed".into()));
        }
        for scn in self.scenario_configs() {
            scn.validate()?;
        }
        if !(self.pca_retained > 0.0 && self.pca_retained <= 1.0) {
            return Err(CliError::Config(format!("pca_retained {} outside (0, 1]", self.pca_retained)));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(CliError::Config(format!("train_frac {} outside (0, 1)", self.train_frac)));
        }
        self.feature_select()?;
        Ok(())
    }

    pub fn scenario_configs(&self) -> Vec<ScenarioConfig> {
        self.scenarios
            .iter()
            .flat_map(|&s| {
                self.seeds.iter().map(move |&seed| ScenarioConfig {
                    duration_s: self.duration_s,
                    fidelity: self.fidelity,
                    ..ScenarioConfig::preset(s, seed)
                })
            })
            .collect()
    }

    pub fn feature_select(&self) -> CliResult<FeatureSelect> {
        let mut sel = self.features.select();
        if let Some(b) = &self.bands {
            if !sel.frequency {
                return Err(CliError::Config("bands need frequency features".into()));
            }
            sel.bands = Some(b.clone());
        }
        sel.columns(self.pipeline.frequency.len())?;
        Ok(sel)
    }

    pub fn train_params(&self) -> TrainParams {
        self.features.params(&self.train, self.pca_retained)
    }

    /// Model file name for a method under the configured feature choice.
    pub fn model_name(&self, method: Method, cvd: bool) -> String {
        let mut name = method.as_str().to_string();
        if cvd {
            name.push_str("_cvd");
        } else {
            if self.features != FeatureSet::Both {
                name.push('_');
                name.push_str(self.features.as_str());
            }
            if let Some(b) = &self.bands {
                let b: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                name.push_str("_bands");
                name.push_str(&b.join("-"));
            }
        }
        name + ".json"
    }

    pub fn models_dir(&self) -> PathBuf {
        self.output_dir.join("models")
    }

    pub fn model_path(&self, cvd: bool) -> PathBuf {
        let explicit = if cvd { &self.cvd_model } else { &self.model };
        explicit.clone().unwrap_or_else(|| self.models_dir().join(self.model_name(self.method, cvd)))
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.output_dir.join("runs")
    }

    pub fn data_dir(&self) -> PathBuf {
        self.output_dir.join("data")
    }
}

/// Directory name of one scenario and seed.
pub fn run_name(scn: &ScenarioConfig) -> String {
    format!("s{}_seed{}", scn.scenario_id, scn.seed)
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seeds = [4]\nmethod = \"knn\"\n[pipeline]\nmti = false\n").unwrap();
        let o = Overrides {
            config: Some(path),
            scenarios: Some(vec![3]),
            mti: Some(true),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(&o).unwrap();
        assert_eq!((c.scenarios.as_slice(), c.seeds.as_slice(), c.method), (&[3u8][..], &[4u64][..], Method::Knn));
        assert!(c.pipeline.mti);
    }

    #[test]
    fn rejects_bad_settings() {
        for text in [
            "scenarios = [7]",
            "bogus = 1",
            "pca_retained = 0.0",
            "features = \"spatial\"\nbands = [0]",
            "bands = [9]",
        ] {
            assert!(RunConfig::from_toml(text).and_then(|c| c.validate()).is_err(), "{text}");
        }
    }

    #[test]
    fn model_names_follow_the_feature_choice() {
        let mut c = RunConfig::default();
        assert_eq!(c.model_name(Method::Svm, false), "svm.json");
        assert_eq!(c.model_name(Method::Svm, true), "svm_cvd.json");
        c.features = FeatureSet::Pca;
        c.bands = Some(vec![0, 4]);
        assert_eq!(c.model_name(Method::Knn, false), "knn_pca_bands0-4.json");
    }
}
