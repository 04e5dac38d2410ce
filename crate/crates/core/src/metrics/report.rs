use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::ospa::{ospa_frame, OspaConfig, OspaFrame};
use crate::classify::{evaluate_predictions, median_smooth, RowKey};
use crate::error::{Error, Result};
use crate::features::FeatureMode;
use crate::sim::TruthFrame;

/// One line of the prediction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub frame: u64,
    pub track_id: u64,
    pub label_bm: usize,
    pub label_am: usize,
    pub scores: Vec<f64>,
    pub mode: FeatureMode,
}

pub fn write_prediction_jsonl<W: Write>(records: &[PredictionRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_prediction_jsonl<R: BufRead>(input: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// A confirmed track in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

/// Per-frame track stream, one entry per frame in frame order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackFrame {
    pub frame: u64,
    pub tracks: Vec<TrackPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub ospa: f64,
    pub d_loc: f64,
    pub d_card: f64,
}

impl From<(u64, OspaFrame)> for FrameRecord {
    fn from((frame, f): (u64, OspaFrame)) -> Self {
        Self {
            frame,
            ospa: f.ospa,
            d_loc: f.d_loc,
            d_card: f.d_card,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    /// Percent; `None` when no prediction could be scored.
    pub acc_bm: Option<f64>,
    pub acc_am: Option<f64>,
    pub mean_ospa: f64,
    pub mean_dloc: f64,
    pub mean_dcard: f64,
    /// Predictions with a true group to score against.
    pub n_scored: usize,
    /// Predictions for tracks with no true group nearby.
    pub n_unmatched: usize,
    pub frames: Vec<FrameRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub ospa: OspaConfig,
    /// A prediction is scored against the nearest true group centroid
    /// within this distance of its track.
    pub label_radius_m: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            ospa: OspaConfig::default(),
            label_radius_m: 1.5,
        }
    }
}

/// Count of the true group whose centroid is nearest to (x, y), if within `radius`.
pub fn nearest_group_count(truth: &TruthFrame, x: f64, y: f64, radius: f64) -> Option<usize> {
    truth
        .groups
        .iter()
        .map(|g| ((g.centroid.0 - x).hypot(g.centroid.1 - y), g.count()))
        .filter(|(d, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

/// OSPA over time and counting accuracy for one run.
///
/// Track counts in the OSPA come from the smoothed labels of the
/// prediction log; tracks without a prediction count as one person.
pub fn scenario_report(
    scenario: &str,
    truth: &[TruthFrame],
    tracks: &[TrackFrame],
    predictions: &[PredictionRecord],
    cfg: &ReportConfig,
) -> Result<ScenarioReport> {
    cfg.ospa.validate()?;
    if truth.len() != tracks.len() {
        return Err(Error::Misaligned(format!("{} truth frames, {} track frames", truth.len(), tracks.len())));
    }
    if let Some((t, k)) = truth.iter().zip(tracks).find(|(t, k)| t.frame != k.frame) {
        return Err(Error::Misaligned(format!("truth frame {} against track frame {}", t.frame, k.frame)));
    }
    let index: HashMap<u64, usize> = truth.iter().enumerate().map(|(i, t)| (t.frame, i)).collect();
    let mut counts: HashMap<(u64, u64), usize> = HashMap::new();
    let (mut t_lab, mut bm, mut am, mut keys) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut n_unmatched = 0;
    for p in predictions {
        let &i = index
            .get(&p.frame)
            .ok_or_else(|| Error::Misaligned(format!("prediction at frame {} outside the truth stream", p.frame)))?;
        let tp = tracks[i]
            .tracks
            .iter()
            .find(|t| t.id == p.track_id)
            .ok_or_else(|| Error::Misaligned(format!("prediction for track {} absent at frame {}", p.track_id, p.frame)))?;
        counts.insert((p.frame, p.track_id), p.label_am);
        match nearest_group_count(&truth[i], tp.x, tp.y, cfg.label_radius_m) {
            Some(c) => {
                t_lab.push(c);
                bm.push(p.label_bm);
                am.push(p.label_am);
                keys.push(RowKey {
                    sequence: p.track_id,
                    frame: p.frame,
                });
            }
            None => n_unmatched += 1,
        }
    }
    let frames: Vec<FrameRecord> = truth
        .iter()
        .zip(tracks)
        .map(|(t, k)| {
            let people: Vec<(f64, f64)> = t.persons.iter().map(|p| (p.x, p.y)).collect();
            let pos: Vec<(f64, f64)> = k.tracks.iter().map(|p| (p.x, p.y)).collect();
            let q: i64 = k.tracks.iter().map(|p| counts.get(&(k.frame, p.id)).copied().unwrap_or(1) as i64 - 1).sum();
            (t.frame, ospa_frame(&people, &pos, q, &cfg.ospa)).into()
        })
        .collect();
    let n = frames.len().max(1) as f64;
    let mean = |f: fn(&FrameRecord) -> f64| frames.iter().map(f).sum::<f64>() / n;
    let (acc_bm, acc_am) = if t_lab.is_empty() {
        (None, None)
    } else {
        // The log already carries smoothed labels, so both columns are
        // scored as they are.
        let b = evaluate_predictions(&t_lab, &bm, &keys, 1)?;
        let a = evaluate_predictions(&t_lab, &am, &keys, 1)?;
        (Some(100.0 * b.accuracy_bm), Some(100.0 * a.accuracy_bm))
    };
    Ok(ScenarioReport {
        scenario: scenario.to_string(),
        acc_bm,
        acc_am,
        mean_ospa: mean(|f| f.ospa),
        mean_dloc: mean(|f| f.d_loc),
        mean_dcard: mean(|f| f.d_card),
        n_scored: t_lab.len(),
        n_unmatched,
        frames,
    })
}

/// Fills `label_am` of each record by median-smoothing its track's raw labels.
pub fn smooth_prediction_log(records: &mut [PredictionRecord], window: usize) {
    let mut by_track: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_track.entry(r.track_id).or_default().push(i);
    }
    for idx in by_track.values_mut() {
        idx.sort_by_key(|&i| records[i].frame);
        let raw: Vec<usize> = idx.iter().map(|&i| records[i].label_bm).collect();
        for (&i, s) in idx.iter().zip(median_smooth(&raw, window)) {
            records[i].label_am = s;
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.4}"))
}

pub const REPORT_HEADER: [&str; 6] = ["scenario", "acc_bm", "acc_am", "mean_ospa", "mean_dloc", "mean_dcard"];

pub fn write_report_csv<W: Write>(reports: &[ScenarioReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.scenario.clone(),
            fmt_opt(r.acc_bm),
            fmt_opt(r.acc_am),
            format!("{:.6}", r.mean_ospa),
            format!("{:.6}", r.mean_dloc),
            format!("{:.6}", r.mean_dcard),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_frames_csv<W: Write>(frames: &[FrameRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "ospa", "d_loc", "d_card"])?;
    for f in frames {
        w.write_record([
            f.frame.to_string(),
            format!("{:.6}", f.ospa),
            format!("{:.6}", f.d_loc),
            format!("{:.6}", f.d_card),
        ])?;
    }
    w.flush()?;
    Ok(())
}
