use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes with variance smoothing proportional to the
/// largest feature variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
}

const VAR_SMOOTHING: f64 = 1e-9;

impl GaussianNb {
    pub fn fit(rows: &[Vec<f64>], targets: &[usize], n_classes: usize) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let mut count = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (r, &t) in rows.iter().zip(targets) {
            count[t] += 1;
            for (m, v) in means[t].iter_mut().zip(r) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= c.max(1) as f64);
        }
        let mut vars = vec![vec![0.0; d]; n_classes];
        for (r, &t) in rows.iter().zip(targets) {
            for ((s, v), m) in vars[t].iter_mut().zip(r).zip(&means[t]) {
                *s += (v - m).powi(2);
            }
        }
        // Global variance sets the smoothing floor.
        let n = rows.len().max(1) as f64;
        let max_var = (0..d)
            .map(|j| {
                let mu = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                rows.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let eps = VAR_SMOOTHING * max_var.max(1e-300);
        for (v, &c) in vars.iter_mut().zip(&count) {
            v.iter_mut().for_each(|s| *s = *s / c.max(1) as f64 + eps);
        }
        let log_prior = count.iter().map(|&c| (c as f64 / n).ln()).collect();
        Self { log_prior, means, vars }
    }

    pub fn log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        self.log_prior
            .iter()
            .zip(self.means.iter().zip(&self.vars))
            .map(|(lp, (m, v))| {
                lp + x
                    .iter()
                    .zip(m.iter().zip(v))
                    .map(|(xi, (mi, vi))| -0.5 * ((2.0 * std::f64::consts::PI * vi).ln() + (xi - mi).powi(2) / vi))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Posterior class probabilities.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let ll = self.log_likelihood(x);
        let top = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = ll.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|v| v / s).collect()
    }
}
