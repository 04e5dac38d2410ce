use serde::{Deserialize, Serialize};

/// Distance-weighted k-nearest neighbours on standardized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    /// Class index of each row.
    pub targets: Vec<usize>,
    pub n_classes: usize,
}

impl Knn {
    pub fn fit(rows: Vec<Vec<f64>>, targets: Vec<usize>, n_classes: usize, k: usize) -> Self {
        Self {
            k: k.max(1),
            rows,
            targets,
            n_classes,
        }
    }

    /// Normalized vote shares. An exact match takes the whole vote.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
        let near = &mut d[..k];
        near.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut votes = vec![0.0; self.n_classes];
        if near[0].0 == 0.0 {
            for &(_, i) in near.iter().take_while(|(dist, _)| *dist == 0.0) {
                votes[self.targets[i]] += 1.0;
            }
        } else {
            for &(dist, i) in near.iter() {
                votes[self.targets[i]] += 1.0 / dist.sqrt();
            }
        }
        let total: f64 = votes.iter().sum();
        votes.iter().map(|v| v / total).collect()
    }
}
