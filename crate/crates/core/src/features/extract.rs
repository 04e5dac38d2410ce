use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::buffer::FrameEntry;
use super::spatial::{spatial_features, PatchConfig, RaPatch};
use crate::datacube::{RaMap, RangeProfiles};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub patch: PatchConfig,
    /// Range bins searched on each side of the track's bin for the strongest return.
    pub range_search: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            patch: PatchConfig::default(),
            range_search: 1,
        }
    }
}

/// Slow-time samples of one frame at a track: the channels are summed after
/// steering towards the track's azimuth, at the strongest range bin near
/// the track. Without steering, off-boresight targets would cancel in the sum.
pub fn slow_time_series(profiles: &RangeProfiles, x: f64, y: f64, search: usize) -> Vec<Complex64> {
    let (nr, nc, nch) = profiles.data.dim();
    let params = &profiles.params;
    let r = x.hypot(y);
    let centre = ((r / params.range_resolution()).round() as usize).min(nr - 1);
    let u = params.element_spacing * if r > 0.0 { x / r } else { 0.0 };
    let steer: Vec<Complex64> = (0..nch)
        .map(|k| Complex64::from_polar(1.0 / nch as f64, -std::f64::consts::TAU * u * k as f64))
        .collect();
    let beam = |bin: usize| -> Vec<Complex64> { (0..nc).map(|m| (0..nch).map(|k| profiles.data[[bin, m, k]] * steer[k]).sum()).collect() };
    let mut best = beam(centre);
    let mut best_e: f64 = best.iter().map(|v| v.norm_sqr()).sum();
    for bin in centre.saturating_sub(search)..=(centre + search).min(nr - 1) {
        if bin == centre {
            continue;
        }
        let s = beam(bin);
        let e: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        if e > best_e {
            best = s;
            best_e = e;
        }
    }
    best
}

/// Buffer entry for a track observed at `(x, y)` in this frame. Both inputs
/// should come from clutter-suppressed data.
pub fn frame_entry(profiles: &RangeProfiles, ra: &RaMap, x: f64, y: f64, cfg: &ExtractConfig) -> FrameEntry {
    let patch = RaPatch::extract(ra, x, y, &cfg.patch);
    FrameEntry {
        series: slow_time_series(profiles, x, y, cfg.range_search),
        spatial: spatial_features(&patch, cfg.patch.threshold_db),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datacube::{range_azimuth_from_profiles, range_profiles, RadarCube, RadarParams, AZIMUTH_FFT_SIZE};

    fn target_cube(p: &RadarParams, range: f64, az_deg: f64) -> RadarCube {
        let mut cube = RadarCube::zeros(*p, 0);
        let kr = range / p.range_resolution();
        let u = p.element_spacing * az_deg.to_radians().sin();
        let (ns, nc, nch) = cube.data.dim();
        for s in 0..ns {
            for c in 0..nc {
                for k in 0..nch {
                    let ph = std::f64::consts::TAU * (kr * s as f64 / ns as f64 + 0.05 * c as f64 + u * k as f64);
                    cube.data[[s, c, k]] = Complex64::from_polar(1.0, ph);
                }
            }
        }
        cube
    }

    #[test]
    fn steering_recovers_off_boresight_target() {
        let p = RadarParams::default();
        let r = 8.0 * p.range_resolution();
        let az = 25.0f64;
        let prof = range_profiles(&target_cube(&p, r, az)).unwrap();
        let (x, y) = (r * az.to_radians().sin(), r * az.to_radians().cos());
        let s = slow_time_series(&prof, x, y, 1);
        assert_eq!(s.len(), 90);
        // Coherent gain: each sample is the full per-channel amplitude.
        let per_channel = prof.data[[8, 0, 0]].norm();
        assert!((s[0].norm() - per_channel).abs() < 1e-9 * per_channel);
        // A plain channel sum would nearly cancel at this angle.
        let plain: Complex64 = (0..15).map(|k| prof.data[[8, 0, k]]).sum::<Complex64>() / 15.0;
        assert!(plain.norm() < 0.2 * per_channel);
    }

    #[test]
    fn entry_has_footprint() {
        let p = RadarParams::default();
        let r = 8.0 * p.range_resolution();
        let prof = range_profiles(&target_cube(&p, r, 0.0)).unwrap();
        let ra = range_azimuth_from_profiles(&prof, AZIMUTH_FFT_SIZE);
        let e = frame_entry(&prof, &ra, 0.0, r, &ExtractConfig::default());
        assert!(!e.spatial.empty);
        assert_eq!(e.spatial.values[1], 1.0);
        assert!(e.spatial.values[0] >= 1.0);
    }
}
