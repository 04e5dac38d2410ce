use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::detection::Detection;
use super::transform::{fft_unitary, RdMap, WindowKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AzimuthConfig {
    /// Zero-padded spatial FFT length.
    pub fft_size: usize,
    pub window: WindowKind,
}

impl Default for AzimuthConfig {
    fn default() -> Self {
        Self {
            fft_size: 64,
            window: WindowKind::Hann,
        }
    }
}

/// Zero-padded spatial power spectrum of one array snapshot, indexed by FFT
/// bin (not shifted).
pub fn spatial_spectrum(snapshot: &[Complex64], cfg: &AzimuthConfig) -> Vec<f64> {
    let n = cfg.fft_size.max(snapshot.len());
    let w = cfg.window.coefficients(snapshot.len());
    let mut buf = vec![Complex64::default(); n];
    for (i, (x, w)) in snapshot.iter().zip(&w).enumerate() {
        buf[i] = x * w;
    }
    fft_unitary(&mut buf);
    buf.iter().map(|v| v.norm_sqr()).collect()
}

/// Azimuth in degrees of the strongest spatial frequency, refined by a
/// parabola through the log power of the peak and its neighbours.
pub fn azimuth_from_snapshot(snapshot: &[Complex64], spacing: f64, cfg: &AzimuthConfig) -> f64 {
    let spec = spatial_spectrum(snapshot, cfg);
    let n = spec.len();
    let signed = |i: usize| if i >= n / 2 { i as f64 - n as f64 } else { i as f64 };
    // Only bins that map to a real angle are eligible.
    let limit = spacing * n as f64;
    let (mut best, mut best_v) = (0usize, f64::NEG_INFINITY);
    for (i, &v) in spec.iter().enumerate() {
        if signed(i).abs() <= limit && v > best_v {
            best = i;
            best_v = v;
        }
    }
    let floor = 1e-300;
    let l = spec[(best + n - 1) % n].max(floor).ln();
    let c = spec[best].max(floor).ln();
    let r = spec[(best + 1) % n].max(floor).ln();
    let denom = l - 2.0 * c + r;
    let delta = if denom.abs() > 1e-12 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let u = (signed(best) + delta) / n as f64;
    (u / spacing).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Azimuth of a detection from its range-Doppler cell's channel vector.
pub fn estimate_azimuth(map: &RdMap, det: &Detection, cfg: &AzimuthConfig) -> Result<f64> {
    let (nr, nd, _) = map.spectra.dim();
    if det.range_bin >= nr || det.doppler_bin >= nd {
        return Err(Error::OutOfMap {
            range_bin: det.range_bin,
            doppler_bin: det.doppler_bin,
        });
    }
    let snapshot: Vec<Complex64> = map.spectra.slice(ndarray::s![det.range_bin, det.doppler_bin, ..]).to_vec();
    Ok(azimuth_from_snapshot(&snapshot, map.params.element_spacing, cfg))
}

/// Steering vector for a uniform linear array.
pub fn steering_vector(channels: usize, spacing: f64, az_deg: f64) -> Vec<Complex64> {
    let u = spacing * az_deg.to_radians().sin();
    (0..channels)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * u * k as f64))
        .collect()
}

/// Half-power width, in degrees, of the spatial spectrum main lobe around
/// broadside for an `channels`-element array.
pub fn half_power_beamwidth_deg(channels: usize, spacing: f64, cfg: &AzimuthConfig) -> f64 {
    let spec = spatial_spectrum(&steering_vector(channels, spacing, 0.0), cfg);
    let n = spec.len();
    let peak = spec[0];
    let mut k = 0usize;
    while k < n / 2 && spec[k + 1] >= peak / 2.0 {
        k += 1;
    }
    // Linear interpolation of the crossing between bins k and k + 1.
    let (a, b) = (spec[k], spec[k + 1]);
    let frac = if a > b { (a - peak / 2.0) / (a - b) } else { 0.0 };
    let u = (k as f64 + frac) / n as f64;
    2.0 * (u / spacing).clamp(-1.0, 1.0).asin().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datacube::params::RadarParams;
    use ndarray::Array3;

    fn map_with_snapshot(snapshot: &[Complex64]) -> RdMap {
        let p = RadarParams::default();
        let mut spectra = Array3::<Complex64>::zeros((4, 4, snapshot.len()));
        for (k, v) in snapshot.iter().enumerate() {
            spectra[[1, 2, k]] = *v;
        }
        RdMap::from_spectra(spectra, 0, p)
    }

    fn det_at(r: usize, d: usize) -> Detection {
        Detection {
            range_bin: r,
            doppler_bin: d,
            range_m: 0.0,
            radial_velocity: 0.0,
            azimuth_deg: 0.0,
            snr_db: 0.0,
            frame_index: 0,
        }
    }

    #[test]
    fn broadside_is_zero() {
        let cfg = AzimuthConfig::default();
        let map = map_with_snapshot(&steering_vector(15, 0.5, 0.0));
        let az = estimate_azimuth(&map, &det_at(1, 2), &cfg).unwrap();
        assert!(az.abs() <= 0.5);
    }

    #[test]
    fn twenty_degrees_within_half_bin() {
        let cfg = AzimuthConfig::default();
        let az = azimuth_from_snapshot(&steering_vector(15, 0.5, 20.0), 0.5, &cfg);
        // Half a padded bin expressed in degrees at 20 degrees.
        let half_bin = (0.5 / 64.0 / (0.5 * 20f64.to_radians().cos())).to_degrees();
        assert!((az - 20.0).abs() <= half_bin, "az {az}, tol {half_bin}");
    }

    #[test]
    fn mirrored_phases_negate_estimate() {
        let cfg = AzimuthConfig::default();
        for az in [-33.0, -12.5, 3.3, 17.0, 29.0] {
            let v = steering_vector(15, 0.5, az);
            let mirrored: Vec<_> = v.iter().map(|x| x.conj()).collect();
            let a = azimuth_from_snapshot(&v, 0.5, &cfg);
            let b = azimuth_from_snapshot(&mirrored, 0.5, &cfg);
            assert!((a + b).abs() <= 0.5);
        }
    }

    #[test]
    fn halving_the_array_doubles_beamwidth() {
        let p = RadarParams::default();
        let cfg = AzimuthConfig {
            fft_size: 4096,
            ..AzimuthConfig::default()
        };
        let full = half_power_beamwidth_deg(15, 0.5, &cfg);
        let reduced = half_power_beamwidth_deg(8, 0.5, &cfg);
        let ratio = reduced / full;
        assert!((1.7..=2.1).contains(&ratio), "ratio {ratio}");
        let nominal = p.angular_resolution_deg(8) / p.angular_resolution_deg(15);
        assert!((nominal - 15.0 / 8.0).abs() < 1e-12);
        // The reduced array still finds the target.
        let az = azimuth_from_snapshot(&steering_vector(8, 0.5, 20.0), 0.5, &AzimuthConfig::default());
        assert!((az - 20.0).abs() < 1.5);
    }

    #[test]
    fn outside_map_rejected() {
        let map = map_with_snapshot(&steering_vector(15, 0.5, 0.0));
        assert!(estimate_azimuth(&map, &det_at(9, 0), &AzimuthConfig::default()).is_err());
    }
}
