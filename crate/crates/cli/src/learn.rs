use std::path::{Path, PathBuf};

use clap::ValueEnum;
use grouptrack::classify::{FeatureSelect, LabeledDataset, Method, TrainParams};
use grouptrack::features::FeatureMode;
use grouptrack::pipeline::{default_grid_axes, eval_grid, eval_grid_on, train_counting, write_grid_csv, GridAxis, GridRow};

use crate::config::{create_dir, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{open, run_dirs};
use crate::simulate::{create, finish};

/// Labelled features gathered from one or more CSV files.
pub struct FeatureData {
    pub spatial: LabeledDataset,
    pub full: LabeledDataset,
    /// Spatial plus CVD features, when every input has a CVD sibling.
    pub cvd: Option<LabeledDataset>,
}

fn read_csv(path: &Path, mode: FeatureMode) -> CliResult<LabeledDataset> {
    LabeledDataset::from_feature_csv(open(path)?, mode).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// `features_cvd.csv` next to a `features.csv`.
fn cvd_sibling(path: &Path) -> Option<PathBuf> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix(".csv")?;
    let p = path.with_file_name(format!("{stem}_cvd.csv"));
    p.exists().then_some(p)
}

/// The given CSV files, or every `features.csv` of the run directories.
pub fn feature_files(cfg: &RunConfig, given: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    if !given.is_empty() {
        return Ok(given.to_vec());
    }
    let files: Vec<PathBuf> = run_dirs(cfg)?.into_iter().map(|d| d.join("features.csv")).filter(|p| p.exists()).collect();
    if files.is_empty() {
        return Err(CliError::Data(format!("no features.csv under {}", cfg.runs_dir().display())));
    }
    Ok(files)
}

pub fn load_features(files: &[PathBuf]) -> CliResult<FeatureData> {
    let mut d = FeatureData {
        spatial: LabeledDataset::default(),
        full: LabeledDataset::default(),
        cvd: Some(LabeledDataset::default()),
    };
    for f in files {
        d.spatial.append(&read_csv(f, FeatureMode::SpatialOnly)?)?;
        d.full.append(&read_csv(f, FeatureMode::Full)?)?;
        d.cvd = match (d.cvd.take(), cvd_sibling(f)) {
            (Some(mut acc), Some(c)) => {
                acc.append(&read_csv(&c, FeatureMode::Full)?)?;
                Some(acc)
            }
            _ => None,
        };
    }
    Ok(d)
}

pub fn train(cfg: &RunConfig, inputs: &[PathBuf], all: bool) -> CliResult<()> {
    let files = feature_files(cfg, inputs)?;
    let data = load_features(&files)?;
    println!(
        "{} files: {} spatial rows, {} full rows, classes {:?}",
        files.len(),
        data.spatial.len(),
        data.full.len(),
        data.full.class_counts()
    );
    let methods: Vec<Method> = if all { Method::ALL.to_vec() } else { vec![cfg.method] };
    let select = cfg.feature_select()?;
    let dir = cfg.models_dir();
    create_dir(&dir)?;
    for m in methods {
        let mut jobs = vec![(cfg.model_name(m, false), &data.full, select.clone(), cfg.train_params())];
        if let Some(cvd) = &data.cvd {
            jobs.push((cfg.model_name(m, true), cvd, FeatureSelect::all(), TrainParams { pca: None, ..cfg.train }));
        }
        for (name, full, sel, params) in jobs {
            let model = train_counting(&data.spatial, full, &sel, m, &params)?;
            let acc = model.full.accuracy(&full.select_columns(&model.full.columns))?;
            let path = dir.join(&name);
            let mut w = create(&path)?;
            model.save(&mut w)?;
            finish(w, &path)?;
            println!("{}: training accuracy {:.2}%", path.display(), 100.0 * acc);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ablation {
    /// Spatial+frequency, spatial, frequency and PCA.
    Features,
    /// Each frequency band alone.
    Levels,
    /// Each frequency band with the spatial features.
    SpatialLevels,
    All,
}

fn axes(cfg: &RunConfig, ablation: Ablation) -> Vec<GridAxis> {
    let n_bands = cfg.pipeline.frequency.len() / 8;
    let pca_name = format!("pca{}", (100.0 * cfg.pca_retained).round());
    let all = default_grid_axes(n_bands, &pca_name);
    let (a, b) = match ablation {
        Ablation::Features => (0, 4),
        Ablation::Levels => (4, 4 + n_bands),
        Ablation::SpatialLevels => (4 + n_bands, all.len()),
        Ablation::All => (0, all.len()),
    };
    all[a..b].to_vec()
}

fn print_grid(rows: &[GridRow]) {
    println!("{:<14} {:<20} {:>5} {:>8} {:>8}", "method", "features", "cols", "BM %", "AM %");
    for r in rows {
        println!(
            "{:<14} {:<20} {:>5} {:>8.2} {:>8.2}",
            r.method.as_str(),
            r.features,
            r.n_features,
            100.0 * r.accuracy_bm,
            100.0 * r.accuracy_am
        );
    }
}

/// The comparison grid, on a split of the inputs or on separate test files.
pub fn eval(cfg: &RunConfig, inputs: &[PathBuf], tests: &[PathBuf], ablation: Ablation, methods: &[Method]) -> CliResult<Vec<GridRow>> {
    let train = load_features(&feature_files(cfg, inputs)?)?;
    let test = if tests.is_empty() { None } else { Some(load_features(tests)?) };
    let window = cfg.pipeline.median_window;
    let grid = |full: &LabeledDataset, test: Option<&LabeledDataset>, axes: &[GridAxis]| -> CliResult<Vec<GridRow>> {
        Ok(match test {
            Some(t) => eval_grid_on(full, t, methods, axes, &cfg.train, cfg.pca_retained, window)?,
            None => eval_grid(full, methods, axes, &cfg.train, cfg.pca_retained, cfg.train_frac, cfg.split_seed, window)?,
        })
    };
    let mut rows = grid(&train.full, test.as_ref().map(|t| &t.full), &axes(cfg, ablation))?;
    let cvd_test = test.as_ref().map(|t| t.cvd.as_ref());
    if let (Some(cvd), true) = (&train.cvd, matches!(ablation, Ablation::Features | Ablation::All)) {
        // The CVD baseline rows, when every input has CVD features.
        if cvd_test != Some(None) {
            let cvd_axes = [
                GridAxis {
                    name: "spatial+cvd".into(),
                    select: FeatureSelect::all(),
                    pca: false,
                },
                GridAxis {
                    name: "cvd".into(),
                    select: FeatureSelect::frequency_only(),
                    pca: false,
                },
            ];
            rows.extend(grid(cvd, cvd_test.flatten(), &cvd_axes)?);
        }
    }
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("grid.csv");
    let mut w = create(&path)?;
    write_grid_csv(&rows, &mut w)?;
    finish(w, &path)?;
    print_grid(&rows);
    Ok(rows)
}
