use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means ⌊√d⌋.
    pub max_features: Option<usize>,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_features: None,
            max_depth: 32,
            min_leaf: 1,
            seed: 0x666f_7265,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART tree on the Gini criterion; nodes live in one arena, root first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    targets: &'a [usize],
    n_classes: usize,
    max_features: usize,
    p: ForestParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let mut c = vec![0.0; self.n_classes];
        for &i in idx {
            c[self.targets[i]] += 1.0;
        }
        let n = idx.len() as f64;
        Node::Leaf(c.into_iter().map(|v| v / n).collect())
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(Vec::new()));
        let pure = idx.iter().all(|&i| self.targets[i] == self.targets[idx[0]]);
        let split = if pure || depth >= self.p.max_depth || idx.len() < 2 * self.p.min_leaf {
            None
        } else {
            self.best_split(idx, rng)
        };
        match split {
            None => self.nodes[at] = self.leaf(idx),
            Some((feature, threshold)) => {
                let mut k = 0;
                for m in 0..idx.len() {
                    if self.rows[idx[m]][feature] <= threshold {
                        idx.swap(k, m);
                        k += 1;
                    }
                }
                let (l, r) = idx.split_at_mut(k);
                let left = self.grow(l, depth + 1, rng);
                let right = self.grow(r, depth + 1, rng);
                self.nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        at
    }

    /// Best Gini decrease over a random feature subset. Constant features
    /// in this node do not count toward the subset, as in common CART
    /// implementations.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let d = self.rows[0].len();
        let n = idx.len() as f64;
        let mut total = vec![0.0; self.n_classes];
        for &i in idx {
            total[self.targets[i]] += 1.0;
        }
        let parent = gini(&total, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut tried = 0;
        let mut vals: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for f in sample(rng, d, d).into_iter() {
            if tried >= self.max_features {
                break;
            }
            vals.clear();
            vals.extend(idx.iter().map(|&i| (self.rows[i][f], self.targets[i])));
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            if vals[0].0 == vals[vals.len() - 1].0 {
                continue;
            }
            tried += 1;
            let mut left = vec![0.0; self.n_classes];
            for k in 0..vals.len() - 1 {
                left[vals[k].1] += 1.0;
                if vals[k].0 == vals[k + 1].0 {
                    continue;
                }
                let nl = (k + 1) as f64;
                if k + 1 < self.p.min_leaf || vals.len() - k - 1 < self.p.min_leaf {
                    continue;
                }
                let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let imp = (nl * gini(&left, nl) + (n - nl) * gini(&right, n - nl)) / n;
                let gain = parent - imp;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, 0.5 * (vals[k].0 + vals[k + 1].0)));
                }
            }
        }
        best.filter(|(g, _, _)| *g > 0.0).map(|(_, f, t)| (f, t))
    }
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

/// Bagged CART trees with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(rows: &[Vec<f64>], targets: &[usize], n_classes: usize, p: &ForestParams) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let max_features = p.max_features.unwrap_or(((d as f64).sqrt() as usize).max(1)).clamp(1, d.max(1));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let trees = (0..p.trees)
            .map(|_| {
                let mut idx: Vec<usize> = (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect();
                let mut b = Builder {
                    rows,
                    targets,
                    n_classes,
                    max_features,
                    p: *p,
                    nodes: Vec::new(),
                };
                b.grow(&mut idx, 0, &mut rng);
                Tree { nodes: b.nodes }
            })
            .collect();
        Self { n_classes, trees }
    }

    /// Mean of the leaf class distributions.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, b) in s.iter_mut().zip(t.predict(x)) {
                *a += b;
            }
        }
        let n = self.trees.len().max(1) as f64;
        s.iter().map(|v| v / n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tree_memorizes_distinct_rows() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect();
        let targets: Vec<usize> = (0..40).map(|i| (i * 3 % 5) % 3).collect();
        let idx: Vec<usize> = (0..40).collect();
        let mut b = Builder {
            rows: &rows,
            targets: &targets,
            n_classes: 3,
            max_features: 2,
            p: ForestParams::default(),
            nodes: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.grow(&mut idx.clone(), 0, &mut rng);
        let t = Tree { nodes: b.nodes };
        for (r, &c) in rows.iter().zip(&targets) {
            assert_eq!(t.predict(r)[c], 1.0);
        }
    }

    #[test]
    fn forest_is_seeded_and_normalized() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 3) as f64 + 0.01 * i as f64, (i % 7) as f64]).collect();
        let targets: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let p = ForestParams {
            trees: 20,
            ..ForestParams::default()
        };
        let a = RandomForest::fit(&rows, &targets, 3, &p);
        let b = RandomForest::fit(&rows, &targets, 3, &p);
        assert_eq!(a, b);
        let s = a.scores(&rows[4]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.iter().cloned().fold(0.0, f64::max), s[1]);
    }
}
