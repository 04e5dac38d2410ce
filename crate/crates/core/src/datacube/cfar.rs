use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::detection::Detection;
use super::transform::{db_to_power, RdMap};
use crate::error::{Error, Result};

/// Two-dimensional cell-averaging CFAR settings.
///
/// Training and guard sizes are per side: a window spans
/// `guard + train` cells each way along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarConfig {
    pub train_range: usize,
    pub train_doppler: usize,
    pub guard_range: usize,
    pub guard_doppler: usize,
    /// Design false-alarm probability per cell.
    pub pfa: f64,
    /// Doppler bins on each side of zero Doppler that are never tested.
    /// `None` disables the notch.
    pub zero_doppler_notch: Option<usize>,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            train_range: 8,
            train_doppler: 4,
            guard_range: 4,
            guard_doppler: 2,
            pfa: 1e-4,
            zero_doppler_notch: Some(2),
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_range == 0 && self.train_doppler == 0 {
            return Err(Error::Config("CFAR needs at least one training cell".into()));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::Config(format!("CFAR pfa {} outside (0, 1)", self.pfa)));
        }
        Ok(())
    }
}

/// Threshold multiplier for `n` training cells of exponentially distributed
/// noise power.
pub fn ca_cfar_alpha(n: usize, pfa: f64) -> f64 {
    let n = n as f64;
    n * (pfa.powf(-1.0 / n) - 1.0)
}

/// Summed-area table with a zero first row and column.
struct Integral {
    sums: Array2<f64>,
}

impl Integral {
    fn new(power: &Array2<f64>) -> Self {
        let (nr, nc) = power.dim();
        let mut sums = Array2::<f64>::zeros((nr + 1, nc + 1));
        for r in 0..nr {
            let mut row = 0.0;
            for c in 0..nc {
                row += power[[r, c]];
                sums[[r + 1, c + 1]] = sums[[r, c + 1]] + row;
            }
        }
        Self { sums }
    }

    /// Sum over rows `r0..r1` and columns `c0..c1` (half-open).
    fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        self.sums[[r1, c1]] - self.sums[[r0, c1]] - self.sums[[r1, c0]] + self.sums[[r0, c0]]
    }
}

/// Cell-averaging CFAR over the range-Doppler power map. Cells near the map
/// edge use the truncated window. Azimuth is left at zero.
pub fn cfar_detect(map: &RdMap, cfg: &CfarConfig) -> Result<Vec<Detection>> {
    cfg.validate()?;
    if map.power_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("range-Doppler map".into()));
    }
    let power = map.power_db.mapv(db_to_power);
    let (nr, nd) = power.dim();
    let integral = Integral::new(&power);
    let params = &map.params;
    let center = nd / 2;
    let outer_r = cfg.guard_range + cfg.train_range;
    let outer_d = cfg.guard_doppler + cfg.train_doppler;

    let mut out = Vec::new();
    for r in 0..nr {
        let (or0, or1) = (r.saturating_sub(outer_r), (r + outer_r + 1).min(nr));
        let (gr0, gr1) = (r.saturating_sub(cfg.guard_range), (r + cfg.guard_range + 1).min(nr));
        for d in 0..nd {
            if let Some(notch) = cfg.zero_doppler_notch {
                if d.abs_diff(center) <= notch {
                    continue;
                }
            }
            let (od0, od1) = (d.saturating_sub(outer_d), (d + outer_d + 1).min(nd));
            let (gd0, gd1) = (d.saturating_sub(cfg.guard_doppler), (d + cfg.guard_doppler + 1).min(nd));
            let n_train = (or1 - or0) * (od1 - od0) - (gr1 - gr0) * (gd1 - gd0);
            if n_train == 0 {
                continue;
            }
            let train_sum = integral.rect(or0, or1, od0, od1) - integral.rect(gr0, gr1, gd0, gd1);
            let noise = (train_sum / n_train as f64).max(f64::MIN_POSITIVE);
            let cell = power[[r, d]];
            if cell > ca_cfar_alpha(n_train, cfg.pfa) * noise {
                let range_m = r as f64 * params.range_resolution();
                let vel = (d as f64 - center as f64) * params.velocity_resolution();
                out.push(Detection {
                    range_bin: r,
                    doppler_bin: d,
                    range_m,
                    radial_velocity: vel,
                    azimuth_deg: 0.0,
                    snr_db: 10.0 * (cell / noise).log10(),
                    frame_index: map.frame_index,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datacube::params::RadarParams;
    use crate::datacube::transform::power_to_db;
    use ndarray::Array3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};
    use rustfft::num_complex::Complex64;

    fn map_from_power(power: Array2<f64>) -> RdMap {
        let (nr, nd) = power.dim();
        let params = RadarParams {
            samples_per_chirp: nr,
            chirps_per_frame: nd,
            ..RadarParams::default()
        };
        RdMap {
            power_db: power.mapv(power_to_db),
            spectra: Array3::<Complex64>::zeros((nr, nd, 1)),
            frame_index: 0,
            params,
        }
    }

    fn noise_power(rng: &mut ChaCha8Rng, nr: usize, nd: usize) -> Array2<f64> {
        Array2::from_shape_fn((nr, nd), |_| Exp1.sample(rng))
    }

    fn no_notch() -> CfarConfig {
        CfarConfig {
            zero_doppler_notch: None,
            ..CfarConfig::default()
        }
    }

    #[test]
    fn alpha_matches_closed_form() {
        // N (Pfa^(-1/N) - 1) tends to ln(1/Pfa) for large N.
        assert!((ca_cfar_alpha(100_000, 1e-4) - (1e4f64).ln()).abs() < 1e-3);
        assert!(ca_cfar_alpha(280, 1e-4) > 1.0);
    }

    #[test]
    fn flat_map_has_no_detections() {
        let map = map_from_power(Array2::from_elem((56, 90), 2.0));
        assert!(cfar_detect(&map, &no_notch()).unwrap().is_empty());
    }

    #[test]
    fn zero_training_cells_rejected() {
        let map = map_from_power(Array2::from_elem((8, 8), 1.0));
        let cfg = CfarConfig {
            train_range: 0,
            train_doppler: 0,
            ..CfarConfig::default()
        };
        assert!(cfar_detect(&map, &cfg).is_err());
    }

    #[test]
    fn false_alarms_per_ten_thousand_cells() {
        // 100 maps of 10^4 cells: expect about one alarm per map.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let maps = 100;
        let mut total = 0usize;
        for _ in 0..maps {
            let map = map_from_power(noise_power(&mut rng, 100, 100));
            total += cfar_detect(&map, &no_notch()).unwrap().len();
        }
        let mean = total as f64 / maps as f64;
        // Poisson(1) mean over 100 maps has sd 0.1; allow +-4 sd.
        assert!((mean - 1.0).abs() <= 0.4, "mean false alarms {mean}");
    }

    #[test]
    fn injected_point_detected_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut power = noise_power(&mut rng, 56, 90);
        power[[20, 60]] = 1000.0;
        let map = map_from_power(power);
        let dets = cfar_detect(&map, &no_notch()).unwrap();
        assert!(dets.iter().any(|d| d.range_bin == 20 && d.doppler_bin == 60));
        // Only the injected cell fires in its neighbourhood; elsewhere at most
        // a couple of ordinary false alarms are expected at this Pfa.
        let near = dets.iter().filter(|d| d.range_bin.abs_diff(20) <= 8 && d.doppler_bin.abs_diff(60) <= 4).count();
        assert_eq!(near, 1);
        assert!(dets.len() <= 4, "{} detections", dets.len());
        let peak = dets.iter().find(|d| d.range_bin == 20).unwrap();
        assert!(peak.snr_db > 25.0);
    }

    #[test]
    fn notch_suppresses_zero_doppler() {
        let mut power = Array2::from_elem((56, 90), 1.0);
        power[[10, 45]] = 1e6;
        power[[10, 47]] = 1e6;
        power[[30, 60]] = 1e6;
        let dets = cfar_detect(&map_from_power(power), &CfarConfig::default()).unwrap();
        let cells: Vec<_> = dets.iter().map(|d| (d.range_bin, d.doppler_bin)).collect();
        assert_eq!(cells, vec![(30, 60)]);
    }
}
