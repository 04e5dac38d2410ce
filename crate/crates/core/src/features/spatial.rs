//! Footprint features from the range-azimuth map around a track.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::datacube::{db_to_power, RaMap};

pub const SPATIAL_NAMES: [&str; 10] = [
    "az_width",
    "range_length",
    "az_bin_mean",
    "az_bin_median",
    "az_bin_var",
    "az_bin_count",
    "az_profile_mean",
    "az_profile_median",
    "az_profile_var",
    "pixel_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchConfig {
    /// Rows kept on each side of the track's range bin.
    pub half_range: usize,
    /// Columns kept on each side of the track's azimuth column.
    pub half_azimuth: usize,
    /// Footprint threshold relative to the patch peak, in dB.
    pub threshold_db: f64,
}

impl Default for PatchConfig {
    fn default() -> Self {
        Self {
            half_range: 3,
            half_azimuth: 8,
            threshold_db: -6.0,
        }
    }
}

/// Linear-power window of an RA map. `row0`/`col0` locate it in the map, so
/// angle-bin features are absolute column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RaPatch {
    pub power: Array2<f64>,
    pub row0: usize,
    pub col0: usize,
}

impl RaPatch {
    pub fn extract(map: &RaMap, x: f64, y: f64, cfg: &PatchConfig) -> Self {
        let (nr, nc) = map.power_db.dim();
        let res = map.params.range_resolution();
        let r = ((x.hypot(y) / res).round() as usize).min(nr - 1);
        let c = map.nearest_column(x.atan2(y).to_degrees());
        let (r0, r1) = (r.saturating_sub(cfg.half_range), (r + cfg.half_range + 1).min(nr));
        let (c0, c1) = (c.saturating_sub(cfg.half_azimuth), (c + cfg.half_azimuth + 1).min(nc));
        let power = Array2::from_shape_fn((r1 - r0, c1 - c0), |(i, j)| db_to_power(map.power_db[[r0 + i, c0 + j]]));
        Self { power, row0: r0, col0: c0 }
    }
}

/// Per-frame spatial features, flagged when the footprint was empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpatialFeatures {
    pub values: [f64; 10],
    pub empty: bool,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// The ten footprint features. Pixels at or above `threshold_db` relative
/// to the patch peak are occupied. The angle profile is the column maximum
/// divided by the patch peak, taken over every column of the patch.
pub fn spatial_features(patch: &RaPatch, threshold_db: f64) -> SpatialFeatures {
    let peak = patch.power.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || patch.power.is_empty() {
        return SpatialFeatures {
            values: [0.0; 10],
            empty: true,
        };
    }
    let thr = peak * 10f64.powf(threshold_db / 10.0);
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for ((i, j), &p) in patch.power.indexed_iter() {
        if p >= thr {
            rows.push(patch.row0 + i);
            cols.push((patch.col0 + j) as f64);
        }
    }
    let width = cols.iter().cloned().fold(f64::MIN, f64::max) - cols.iter().cloned().fold(f64::MAX, f64::min) + 1.0;
    let length = (rows.iter().max().unwrap() - rows.iter().min().unwrap() + 1) as f64;
    let mut distinct = cols.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let profile: Vec<f64> = patch
        .power
        .columns()
        .into_iter()
        .map(|c| c.iter().cloned().fold(0.0, f64::max) / peak)
        .collect();
    SpatialFeatures {
        values: [
            width,
            length,
            mean(&cols),
            median(&cols),
            var(&cols),
            distinct.len() as f64,
            mean(&profile),
            median(&profile),
            var(&profile),
            cols.len() as f64,
        ],
        empty: false,
    }
}

/// Average of the non-empty frames; all-empty input gives zeros, flagged.
pub fn average_spatial<'a>(frames: impl IntoIterator<Item = &'a SpatialFeatures>) -> SpatialFeatures {
    let mut acc = [0.0; 10];
    let mut n = 0usize;
    for f in frames.into_iter().filter(|f| !f.empty) {
        for (a, v) in acc.iter_mut().zip(&f.values) {
            *a += v;
        }
        n += 1;
    }
    if n == 0 {
        return SpatialFeatures {
            values: [0.0; 10],
            empty: true,
        };
    }
    acc.iter_mut().for_each(|a| *a /= n as f64);
    SpatialFeatures { values: acc, empty: false }
}
