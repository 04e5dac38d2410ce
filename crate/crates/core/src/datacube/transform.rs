//! FFT chain: range profiles, range-Doppler spectra and range-azimuth maps.
//!
//! All FFTs are scaled by `1/sqrt(N)` so every axis transform is unitary.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{Array2, Array3, Axis};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::cube::RadarCube;
use super::params::RadarParams;
use crate::error::Result;

/// Power assigned to empty cells, in dB.
pub const DB_FLOOR: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rectangular,
    #[default]
    Hann,
}

impl WindowKind {
    /// Window coefficients of length `n`.
    ///
    /// The Hann variant omits the zero end points so every element contributes.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).cos())
                .collect(),
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// In-place unitary forward FFT.
pub fn fft_unitary(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n).process(buf);
    let s = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Rotates so the zero-frequency bin sits at index `n / 2`.
pub fn fft_shift<T: Clone>(buf: &mut [T]) {
    let n = buf.len();
    buf.rotate_right(n / 2);
}

/// Unitary windowed Doppler spectrum of a slow-time series, zero Doppler centered.
pub fn doppler_spectrum(series: &[Complex64], window: WindowKind) -> Vec<Complex64> {
    let w = window.coefficients(series.len());
    let mut buf: Vec<Complex64> = series.iter().zip(&w).map(|(x, w)| x * w).collect();
    fft_unitary(&mut buf);
    fft_shift(&mut buf);
    buf
}

pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Fast-time FFT of a cube: shape `(range_bin, chirp, channel)`, rectangular window.
#[derive(Debug, Clone)]
pub struct RangeProfiles {
    pub data: Array3<Complex64>,
    pub frame_index: u64,
    pub params: RadarParams,
}

pub fn range_profiles(cube: &RadarCube) -> Result<RangeProfiles> {
    cube.validate()?;
    let (ns, nc, nch) = cube.data.dim();
    let mut out = Array3::<Complex64>::zeros((ns, nc, nch));
    let mut buf = vec![Complex64::default(); ns];
    for c in 0..nc {
        for ch in 0..nch {
            for s in 0..ns {
                buf[s] = cube.data[[s, c, ch]];
            }
            fft_unitary(&mut buf);
            for s in 0..ns {
                out[[s, c, ch]] = buf[s];
            }
        }
    }
    Ok(RangeProfiles {
        data: out,
        frame_index: cube.frame_index,
        params: cube.params,
    })
}

/// Complex range-Doppler spectra `(range_bin, doppler_bin, channel)`.
pub fn range_doppler_spectra(profiles: &RangeProfiles, window: WindowKind) -> Array3<Complex64> {
    let (nr, nc, nch) = profiles.data.dim();
    let w = window.coefficients(nc);
    let mut out = Array3::<Complex64>::zeros((nr, nc, nch));
    let mut buf = vec![Complex64::default(); nc];
    for r in 0..nr {
        for ch in 0..nch {
            for c in 0..nc {
                buf[c] = profiles.data[[r, c, ch]] * w[c];
            }
            fft_unitary(&mut buf);
            fft_shift(&mut buf);
            for c in 0..nc {
                out[[r, c, ch]] = buf[c];
            }
        }
    }
    out
}

/// Range-Doppler power map with the per-cell channel vectors kept for
/// azimuth estimation.
#[derive(Debug, Clone)]
pub struct RdMap {
    /// Non-coherent channel sum, dB, `(range_bin, doppler_bin)`.
    pub power_db: Array2<f64>,
    pub spectra: Array3<Complex64>,
    pub frame_index: u64,
    pub params: RadarParams,
}

impl RdMap {
    pub fn range_bins(&self) -> usize {
        self.power_db.nrows()
    }

    pub fn doppler_bins(&self) -> usize {
        self.power_db.ncols()
    }

    pub fn from_spectra(spectra: Array3<Complex64>, frame_index: u64, params: RadarParams) -> Self {
        let power_db = spectra.map_axis(Axis(2), |lane| power_to_db(lane.iter().map(|v| v.norm_sqr()).sum()));
        Self {
            power_db,
            spectra,
            frame_index,
            params,
        }
    }

    /// Location of the strongest cell.
    pub fn peak(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for ((r, d), &v) in self.power_db.indexed_iter() {
            if v > best_v {
                best_v = v;
                best = (r, d);
            }
        }
        best
    }
}

/// Fast-time then slow-time FFT per channel, channel powers summed.
pub fn range_doppler_transform(cube: &RadarCube, window: WindowKind) -> Result<RdMap> {
    let profiles = range_profiles(cube)?;
    Ok(range_doppler_from_profiles(&profiles, window))
}

pub fn range_doppler_from_profiles(profiles: &RangeProfiles, window: WindowKind) -> RdMap {
    let spectra = range_doppler_spectra(profiles, window);
    RdMap::from_spectra(spectra, profiles.frame_index, profiles.params)
}

/// Subtracts the slow-time mean for every (sample, channel) pair.
pub fn mti_suppress(cube: &RadarCube) -> RadarCube {
    let mut out = cube.clone();
    let nc = cube.data.dim().1 as f64;
    for mut lane in out.data.lanes_mut(Axis(1)) {
        let mean = lane.iter().sum::<Complex64>() / nc;
        lane.mapv_inplace(|v| v - mean);
    }
    out
}

/// Range-azimuth power map restricted to the antenna beamwidth.
#[derive(Debug, Clone)]
pub struct RaMap {
    /// Doppler-integrated power in dB, `(range_bin, azimuth_bin)`.
    pub power_db: Array2<f64>,
    /// Azimuth of each column in degrees, ascending.
    pub azimuth_deg: Vec<f64>,
    /// Signed spatial-FFT bin of each column.
    pub fft_bins: Vec<i32>,
    pub fft_size: usize,
    pub frame_index: u64,
    pub params: RadarParams,
}

impl RaMap {
    /// Column whose azimuth is nearest to `az_deg`.
    pub fn nearest_column(&self, az_deg: f64) -> usize {
        let u = self.params.element_spacing * az_deg.to_radians().sin();
        let b = (u * self.fft_size as f64).round() as i32;
        let lo = self.fft_bins[0];
        (b - lo).clamp(0, self.fft_bins.len() as i32 - 1) as usize
    }
}

/// Spatial FFT size used for the azimuth axis.
pub const AZIMUTH_FFT_SIZE: usize = 64;

pub fn range_azimuth_map(cube: &RadarCube) -> Result<RaMap> {
    let profiles = range_profiles(cube)?;
    Ok(range_azimuth_from_profiles(&profiles, AZIMUTH_FFT_SIZE))
}

/// Signed spatial-FFT bins whose azimuth falls inside half the beamwidth.
pub fn beam_bins(params: &RadarParams, fft_size: usize) -> Vec<i32> {
    let half = fft_size as i32 / 2;
    let max_sin = (params.beamwidth_deg / 2.0).to_radians().sin();
    (-half..half)
        .filter(|&b| {
            let s = b as f64 / fft_size as f64 / params.element_spacing;
            s.abs() <= max_sin + 1e-12
        })
        .collect()
}

pub fn bin_to_azimuth_deg(bin: f64, fft_size: usize, spacing: f64) -> f64 {
    (bin / fft_size as f64 / spacing).clamp(-1.0, 1.0).asin().to_degrees()
}

pub fn range_azimuth_from_profiles(profiles: &RangeProfiles, fft_size: usize) -> RaMap {
    let params = profiles.params;
    let (nr, nc, nch) = profiles.data.dim();
    let w = WindowKind::Hann.coefficients(nch);
    let bins = beam_bins(&params, fft_size);
    let mut power = Array2::<f64>::zeros((nr, bins.len()));
    let mut buf = vec![Complex64::default(); fft_size];
    for r in 0..nr {
        for c in 0..nc {
            buf.iter_mut().for_each(|v| *v = Complex64::default());
            for ch in 0..nch {
                buf[ch] = profiles.data[[r, c, ch]] * w[ch];
            }
            fft_unitary(&mut buf);
            for (col, &b) in bins.iter().enumerate() {
                let idx = ((b + fft_size as i32) % fft_size as i32) as usize;
                power[[r, col]] += buf[idx].norm_sqr();
            }
        }
    }
    RaMap {
        power_db: power.mapv(power_to_db),
        azimuth_deg: bins.iter().map(|&b| bin_to_azimuth_deg(b as f64, fft_size, params.element_spacing)).collect(),
        fft_bins: bins,
        fft_size,
        frame_index: profiles.frame_index,
        params,
    }
}
