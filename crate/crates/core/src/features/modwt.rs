//! Maximal overlap discrete wavelet transform with circular filtering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Wavelet {
    Haar,
    /// Four-tap Daubechies filter.
    #[default]
    D4,
}

impl Wavelet {
    /// Orthonormal scaling filter `g` (sums to √2).
    pub fn scaling(self) -> Vec<f64> {
        match self {
            Wavelet::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Wavelet::D4 => {
                let s3 = 3f64.sqrt();
                let k = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / k, (3.0 + s3) / k, (3.0 - s3) / k, (1.0 - s3) / k]
            }
        }
    }

    /// Quadrature mirror wavelet filter, `h_l = (-1)^l g_{L-1-l}`.
    pub fn wavelet(self) -> Vec<f64> {
        let g = self.scaling();
        let n = g.len();
        (0..n).map(|l| if l % 2 == 0 { g[n - 1 - l] } else { -g[n - 1 - l] }).collect()
    }

    pub fn len(self) -> usize {
        self.scaling().len()
    }

    /// Width of the level-`j` equivalent filter.
    pub fn support(self, j: usize) -> usize {
        ((1usize << j) - 1) * (self.len() - 1) + 1
    }
}

/// Detail series `W̃_1..W̃_J` and the approximation `Ṽ_J`, all as long as the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ModwtDecomposition {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
}

impl ModwtDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Details in level order followed by the approximation.
    pub fn bands(&self) -> impl Iterator<Item = &[f64]> {
        self.details.iter().map(Vec::as_slice).chain(std::iter::once(self.approx.as_slice()))
    }

    pub fn energies(&self) -> Vec<f64> {
        self.bands().map(|b| b.iter().map(|v| v * v).sum()).collect()
    }
}

/// Nominal band edges in Hz of each detail level and the approximation,
/// from dyadic halving of the Nyquist band.
pub fn nominal_bands(fs: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(levels + 1);
    let mut hi = fs / 2.0;
    for _ in 0..levels {
        out.push((hi / 2.0, hi));
        hi /= 2.0;
    }
    out.push((0.0, hi));
    out
}

/// Pyramid algorithm: level `j` filters the previous approximation with the
/// rescaled filters upsampled by `2^(j-1)`, indices taken modulo the length.
pub fn modwt(series: &[f64], levels: usize, wavelet: Wavelet) -> Result<ModwtDecomposition> {
    if levels == 0 {
        return Err(Error::InvalidParams("MODWT needs at least one level".into()));
    }
    let needed = wavelet.support(levels);
    if series.len() < needed {
        return Err(Error::SeriesTooShort { len: series.len(), needed });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("MODWT input".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g: Vec<f64> = wavelet.scaling().iter().map(|v| v * s).collect();
    let h: Vec<f64> = wavelet.wavelet().iter().map(|v| v * s).collect();
    let n = series.len();
    let mut v = series.to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let step = 1usize << (j - 1);
        let mut w = vec![0.0; n];
        let mut next = vec![0.0; n];
        for t in 0..n {
            let (mut acc_w, mut acc_v) = (0.0, 0.0);
            for (l, (hl, gl)) in h.iter().zip(&g).enumerate() {
                let idx = (t + n * l - (step * l) % n) % n;
                let x = v[idx];
                acc_w += hl * x;
                acc_v += gl * x;
            }
            w[t] = acc_w;
            next[t] = acc_v;
        }
        details.push(w);
        v = next;
    }
    Ok(ModwtDecomposition { details, approx: v })
}

#[cfg(test)]
pub(crate) mod oracle {
    use super::Wavelet;

    fn upsample(f: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; (f.len() - 1) * k + 1];
        for (i, v) in f.iter().enumerate() {
            out[i * k] = *v;
        }
        out
    }

    fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Equivalent level-`j` wavelet and scaling filters `h̃_j`, `g̃_j`.
    pub fn equivalent_filters(w: Wavelet, j: usize) -> (Vec<f64>, Vec<f64>) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g: Vec<f64> = w.scaling().iter().map(|v| v * s).collect();
        let h: Vec<f64> = w.wavelet().iter().map(|v| v * s).collect();
        let mut gj = vec![1.0];
        for k in 1..j {
            gj = conv(&gj, &upsample(&g, 1 << (k - 1)));
        }
        let hj = conv(&gj, &upsample(&h, 1 << (j - 1)));
        let gj = conv(&gj, &upsample(&g, 1 << (j - 1)));
        (hj, gj)
    }

    /// Direct circular convolution, `Σ_l f_l X_{t-l mod T}`.
    pub fn circular(f: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|t| f.iter().enumerate().map(|(l, fl)| fl * x[(t + n * (l / n + 1) - l) % n]).sum())
            .collect()
    }
}
