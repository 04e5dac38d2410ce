//! Spectrogram and cadence-velocity diagram of a slow-time series, used by
//! the CVD baseline.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::level_stats;
use crate::datacube::{fft_plan, fft_shift, fft_unitary, WindowKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvdConfig {
    /// STFT window length in samples.
    pub window_len: usize,
    pub hop: usize,
}

impl Default for CvdConfig {
    fn default() -> Self {
        Self { window_len: 90, hop: 45 }
    }
}

/// Magnitude STFT with a Hann window, shape `(time window l, Doppler bin k)`,
/// Doppler centred.
pub fn spectrogram(series: &[Complex64], cfg: &CvdConfig) -> Result<Array2<f64>> {
    if cfg.window_len < 2 || cfg.hop == 0 || series.len() < cfg.window_len {
        return Err(Error::InvalidParams(format!(
            "spectrogram of {} samples with window {} hop {}",
            series.len(),
            cfg.window_len,
            cfg.hop
        )));
    }
    let w = WindowKind::Hann.coefficients(cfg.window_len);
    let n_w = (series.len() - cfg.window_len) / cfg.hop + 1;
    let mut out = Array2::zeros((n_w, cfg.window_len));
    let mut buf = vec![Complex64::default(); cfg.window_len];
    for l in 0..n_w {
        let start = l * cfg.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = series[start + i] * w[i];
        }
        fft_unitary(&mut buf);
        fft_shift(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            out[[l, k]] = b.norm();
        }
    }
    Ok(out)
}

/// `S_C(ε, k) = Σ_l |S(l, k)| w(l) exp(-j2π ε l / N_w)` for every Doppler bin
/// `k`; rows are cadence bins `ε`.
pub fn cvd(spec: &Array2<f64>, window: &[f64]) -> Result<Array2<Complex64>> {
    let (n_w, n_k) = spec.dim();
    if n_w < 2 {
        return Err(Error::InvalidParams(format!("CVD needs at least 2 windows, got {n_w}")));
    }
    if window.len() != n_w {
        return Err(Error::Shape(format!("window length {} for {} time windows", window.len(), n_w)));
    }
    let fft = fft_plan(n_w);
    let mut out = Array2::zeros((n_w, n_k));
    let mut buf = vec![Complex64::default(); n_w];
    for k in 0..n_k {
        for l in 0..n_w {
            buf[l] = Complex64::new(spec[[l, k]].abs() * window[l], 0.0);
        }
        fft.process(&mut buf);
        for e in 0..n_w {
            out[[e, k]] = buf[e];
        }
    }
    Ok(out)
}

/// Cadence frequency in Hz of each CVD row.
pub fn cadence_axis(n_w: usize, hop: usize, fs: f64) -> Vec<f64> {
    let rate = fs / hop as f64;
    (0..n_w).map(|e| e as f64 * rate / n_w as f64).collect()
}

/// Row of the strongest cadence among the non-negative frequencies. Rows 0
/// and 1 are skipped: the time window's main lobe spreads the mean there.
pub fn dominant_cadence(map: &Array2<Complex64>) -> usize {
    let n_w = map.nrows();
    (2.min(n_w / 2)..=n_w / 2)
        .max_by(|&a, &b| {
            let ea: f64 = map.row(a).iter().map(|v| v.norm()).sum();
            let eb: f64 = map.row(b).iter().map(|v| v.norm()).sum();
            ea.total_cmp(&eb).then(b.cmp(&a))
        })
        .unwrap_or(0)
}

/// Baseline frequency features: the eight statistics of the dominant
/// cadence slice of the CVD magnitude.
pub fn cvd_features(series: &[Complex64], cfg: &CvdConfig) -> Result<[f64; 8]> {
    let spec = spectrogram(series, cfg)?;
    let window = WindowKind::Hann.coefficients(spec.nrows());
    let map = cvd(&spec, &window)?;
    let row = dominant_cadence(&map);
    let slice: Vec<f64> = map.row(row).iter().map(|v| v.norm()).collect();
    Ok(level_stats(&slice))
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dft_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (nw, nk) = (rng.random_range(2..=64), rng.random_range(1..=64));
            let spec = Array2::from_shape_fn((nw, nk), |_| rng.random_range(0.0..5.0));
            let w: Vec<f64> = (0..nw).map(|_| rng.random_range(0.0..1.0)).collect();
            let fast = cvd(&spec, &w).unwrap();
            let slow = oracle::cvd(&spec, &w);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_spectrogram_sits_at_zero_cadence() {
        let spec = Array2::from_elem((32, 8), 2.0);
        let map = cvd(&spec, &[1.0; 32]).unwrap();
        for ((e, _), v) in map.indexed_iter() {
            if e == 0 {
                assert!((v.re - 64.0).abs() < 1e-9);
            } else {
                assert!(v.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn two_hz_modulation_peaks_at_two_hz() {
        let (n_w, hop, fs) = (39, 45, 900.0);
        let rate = fs / hop as f64;
        let spec = Array2::from_shape_fn((n_w, 16), |(l, k)| {
            (1.0 + k as f64) * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * 2.0 * l as f64 / rate).cos())
        });
        let map = cvd(&spec, &WindowKind::Hann.coefficients(n_w)).unwrap();
        let axis = cadence_axis(n_w, hop, fs);
        let nearest = (0..n_w / 2).min_by(|&a, &b| (axis[a] - 2.0).abs().total_cmp(&(axis[b] - 2.0).abs())).unwrap();
        assert_eq!(dominant_cadence(&map), nearest);
    }

    #[test]
    fn short_inputs_rejected() {
        assert!(cvd(&Array2::zeros((1, 4)), &[1.0]).is_err());
        assert!(spectrogram(&[Complex64::default(); 10], &CvdConfig::default()).is_err());
        let series = vec![Complex64::new(1.0, 0.0); 1800];
        assert_eq!(spectrogram(&series, &CvdConfig::default()).unwrap().dim(), (39, 90));
        assert!(cvd_features(&series, &CvdConfig::default()).unwrap().iter().all(|v| v.is_finite()));
    }
}
