use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub mean: Vec<f64>,
    /// One orthonormal component per row, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Variance explained by each kept component.
    pub explained: Vec<f64>,
    pub retained: f64,
}

impl PcaTransform {
    /// Keeps the fewest components whose cumulative explained variance
    /// reaches `retained`.
    pub fn fit(rows: &[Vec<f64>], retained: f64) -> Result<Self> {
        if !(retained > 0.0 && retained <= 1.0) {
            return Err(Error::Config(format!("retained fraction {retained} outside (0, 1]")));
        }
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::Dataset("empty dataset".into()));
        }
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
        let cov = centered.transpose() * &centered / n as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        let scale: f64 = mean.iter().map(|m| m * m).sum::<f64>() + 1e-300;
        if total <= 1e-24 * scale {
            return Err(Error::Dataset("zero-variance dataset".into()));
        }
        let mut kept = 0;
        let mut acc = 0.0;
        while kept < d {
            acc += vals[kept];
            kept += 1;
            if acc / total >= retained * (1.0 - 1e-12) {
                break;
            }
        }
        // Retaining everything keeps the full basis so reconstruction is exact.
        if retained >= 1.0 {
            kept = d;
        }
        let components = order[..kept].iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
        Ok(Self {
            mean,
            components,
            explained: vals[..kept].to_vec(),
            retained: acc / total,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row.iter().zip(&self.mean)).map(|(w, (v, m))| w * (v - m)).sum())
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (c, zk) in self.components.iter().zip(z) {
            for (xi, w) in x.iter_mut().zip(c) {
                *xi += zk * w;
            }
        }
        x
    }
}
