use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use grouptrack::classify::LabeledDataset;
use grouptrack::features::FeatureMode;
use grouptrack::metrics::{read_prediction_jsonl, scenario_report, write_report_csv, ScenarioReport, TrackFrame, TrackPoint};
use grouptrack::sim::{read_truth_jsonl, ScenarioConfig};
use grouptrack::track::{read_track_log, TrackStatus};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::run::{open, run_dirs};
use crate::simulate::{create, finish};

/// Recomputes a run's report from the files in its directory. `log` names
/// the prediction log to score.
fn rebuild(dir: &Path, log: &str, cfg: &RunConfig) -> CliResult<ScenarioReport> {
    let path = dir.join("scenario.toml");
    let mut text = String::new();
    open(&path)?.read_to_string(&mut text).map_err(|e| CliError::io(&path, e))?;
    let scn = ScenarioConfig::from_toml(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let truth = read_truth_jsonl(open(&dir.join("truth.jsonl"))?, scn.grouping_radius_m())?;
    let mut tracks: Vec<TrackFrame> = truth
        .iter()
        .map(|t| TrackFrame {
            frame: t.frame,
            tracks: Vec::new(),
        })
        .collect();
    let index: BTreeMap<u64, usize> = truth.iter().enumerate().map(|(i, t)| (t.frame, i)).collect();
    for r in read_track_log(open(&dir.join("tracks.jsonl"))?)? {
        if r.status != TrackStatus::Confirmed {
            continue;
        }
        let &i = index
            .get(&r.frame)
            .ok_or_else(|| CliError::Data(format!("{}: track log frame {} outside the truth", dir.display(), r.frame)))?;
        tracks[i].tracks.push(TrackPoint { id: r.id, x: r.x, y: r.y });
    }
    let preds = read_prediction_jsonl(open(&dir.join(log))?)?;
    let name = dir.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
    Ok(scenario_report(&name, &truth, &tracks, &preds, &cfg.pipeline.report)?)
}

pub fn report(cfg: &RunConfig, dirs: &[PathBuf], bins: Option<usize>) -> CliResult<()> {
    let dirs = if dirs.is_empty() { run_dirs(cfg)? } else { dirs.to_vec() };
    if dirs.is_empty() {
        return Err(CliError::Data(format!("no run directories under {}", cfg.runs_dir().display())));
    }
    for (log, file) in [("predictions.jsonl", "report.csv"), ("cvd_predictions.jsonl", "report_cvd.csv")] {
        let with_log: Vec<&PathBuf> = dirs.iter().filter(|d| d.join(log).exists()).collect();
        if with_log.is_empty() {
            continue;
        }
        let reports = with_log.iter().map(|d| rebuild(d, log, cfg)).collect::<CliResult<Vec<_>>>()?;
        let path = cfg.output_dir.join(file);
        let mut w = create(&path)?;
        write_report_csv(&reports, &mut w)?;
        finish(w, &path)?;
        println!("{}: {} runs", path.display(), reports.len());
    }
    if let Some(bins) = bins {
        let files: Vec<PathBuf> = dirs.iter().map(|d| d.join("features.csv")).filter(|p| p.exists()).collect();
        let mut full = LabeledDataset::default();
        for f in &files {
            let ds = LabeledDataset::from_feature_csv(open(f)?, FeatureMode::Full).map_err(|e| CliError::Data(format!("{}: {e}", f.display())))?;
            full.append(&ds)?;
        }
        if full.is_empty() {
            return Err(CliError::Data("no labelled full feature vectors for histograms".into()));
        }
        let path = cfg.output_dir.join("histograms.csv");
        write_histograms(&full, bins, &path)?;
        println!("{}: {} features over {} vectors", path.display(), full.dim(), full.len());
    }
    Ok(())
}

/// Per-feature histograms split by true count, on bins shared by all counts.
fn write_histograms(ds: &LabeledDataset, bins: usize, path: &Path) -> CliResult<()> {
    let bins = bins.max(1);
    let mut out = String::from("feature,label,bin,lo,hi,count\n");
    let labels = ds.classes();
    for (c, name) in ds.names.iter().enumerate() {
        let (lo, hi) = ds.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r[c]), b.max(r[c])));
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        for &label in &labels {
            let mut counts = vec![0usize; bins];
            for (r, _) in ds.rows.iter().zip(&ds.labels).filter(|(_, l)| **l == label) {
                let b = (((r[c] - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            for (b, n) in counts.iter().enumerate() {
                let a = lo + b as f64 * width;
                out.push_str(&format!("{name},{label},{b},{a:e},{:e},{n}\n", a + width));
            }
        }
    }
    let mut w = create(path)?;
    std::io::Write::write_all(&mut w, out.as_bytes()).map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}
