use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

/// Soft-margin SVM settings. The hinge-loss objective with weight penalty
/// λ‖w‖² over n rows is the box-constrained dual with C = 1 / (2nλ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Gaussian kernel exp(-‖x - y‖² / s²) with s the kernel scale.
    pub kernel_scale: f64,
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violating pair.
    pub tol: f64,
    pub max_iter: usize,
    pub cache_rows: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel_scale: 4.5,
            c: 1.0,
            tol: 1e-3,
            max_iter: 200_000,
            cache_rows: 4096,
        }
    }
}

impl SvmParams {
    pub fn gamma(&self) -> f64 {
        1.0 / (self.kernel_scale * self.kernel_scale)
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

struct KernelRows<'a> {
    rows: &'a [&'a [f64]],
    gamma: f64,
    cache: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn get(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.cache.get(&i) {
            return Rc::clone(r);
        }
        let xi = self.rows[i];
        let row = Rc::new(self.rows.iter().map(|xj| rbf(xi, xj, self.gamma)).collect::<Vec<_>>());
        if self.order.len() >= self.capacity.max(2) {
            if let Some(old) = self.order.pop_front() {
                self.cache.remove(&old);
            }
        }
        self.order.push_back(i);
        self.cache.insert(i, Rc::clone(&row));
        row
    }
}

/// Solver trace: dual objective after every update and the final maximal
/// violation m(α) - M(α).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SmoTrace {
    pub dual: Vec<f64>,
    pub kkt_gap: f64,
    pub converged: bool,
}

const TAU: f64 = 1e-12;

/// Sequential minimal optimization with second-order working set
/// selection. Returns α, the offset ρ and the trace; the decision function
/// is Σ α_i y_i K(x_i, x) - ρ.
pub fn smo(rows: &[&[f64]], y: &[f64], p: &SvmParams) -> (Vec<f64>, f64, SmoTrace) {
    let n = rows.len();
    let c = p.c;
    let mut kr = KernelRows {
        rows,
        gamma: p.gamma(),
        cache: HashMap::new(),
        order: VecDeque::new(),
        capacity: p.cache_rows,
    };
    let mut alpha = vec![0.0; n];
    // Gradient of f(α) = ½αᵀQα - eᵀα with Q_ij = y_i y_j K_ij.
    let mut g = vec![-1.0; n];
    let mut trace = SmoTrace::default();
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    for _ in 0..p.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * g[t] >= gmax {
                gmax = -y[t] * g[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            let ki = kr.get(i);
            for t in 0..n {
                if !low(alpha[t], y[t]) {
                    continue;
                }
                gmax2 = gmax2.max(y[t] * g[t]);
                let b = gmax + y[t] * g[t];
                if b > 0.0 {
                    let a = (2.0 - 2.0 * ki[t]).max(TAU);
                    let obj = -b * b / a;
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        trace.kkt_gap = gmax + gmax2;
        if i == usize::MAX || j == usize::MAX || trace.kkt_gap < p.tol {
            trace.converged = true;
            break;
        }

        let ki = kr.get(i);
        let kj = kr.get(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            g[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
        trace.dual.push(dual_objective(&alpha, &g));
    }
    (alpha.clone(), offset(&alpha, &g, y, c), trace)
}

/// -f(α) = -½ Σ α_t (G_t - 1).
fn dual_objective(alpha: &[f64], g: &[f64]) -> f64 {
    -0.5 * alpha.iter().zip(g).map(|(a, gt)| a * (gt - 1.0)).sum::<f64>()
}

fn offset(alpha: &[f64], g: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * g[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    /// Class indices voted for by positive and negative decisions.
    pub positive: usize,
    pub negative: usize,
    pub support: Vec<Vec<f64>>,
    /// α_i y_i per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    #[serde(skip)]
    pub trace: SmoTrace,
}

impl BinarySvm {
    pub fn fit(rows: &[&[f64]], positive_mask: &[bool], positive: usize, negative: usize, p: &SvmParams) -> Self {
        let y: Vec<f64> = positive_mask.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let (alpha, rho, trace) = smo(rows, &y, p);
        let (mut support, mut coef) = (Vec::new(), Vec::new());
        for (t, a) in alpha.iter().enumerate() {
            if *a > 0.0 {
                support.push(rows[t].to_vec());
                coef.push(a * y[t]);
            }
        }
        Self {
            positive,
            negative,
            support,
            coef,
            rho,
            gamma: p.gamma(),
            trace,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, c)| c * rbf(s, x, self.gamma)).sum::<f64>() - self.rho
    }
}

/// One-vs-one RBF SVM on standardized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub n_classes: usize,
    pub machines: Vec<BinarySvm>,
}

impl Svm {
    pub fn fit(rows: &[Vec<f64>], targets: &[usize], n_classes: usize, p: &SvmParams) -> Self {
        let mut machines = Vec::new();
        for a in 0..n_classes {
            for b in a + 1..n_classes {
                let idx: Vec<usize> = (0..rows.len()).filter(|&i| targets[i] == a || targets[i] == b).collect();
                if idx.is_empty() {
                    continue;
                }
                let sub: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
                let mask: Vec<bool> = idx.iter().map(|&i| targets[i] == a).collect();
                machines.push(BinarySvm::fit(&sub, &mask, a, b, p));
            }
        }
        Self { n_classes, machines }
    }

    /// Vote shares; ties go to the class with the larger summed margin.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        let mut margin = vec![0.0; self.n_classes];
        for m in &self.machines {
            let d = m.decision(x);
            if d > 0.0 {
                votes[m.positive] += 1.0;
            } else {
                votes[m.negative] += 1.0;
            }
            margin[m.positive] += d;
            margin[m.negative] -= d;
        }
        // Break exact vote ties without moving any share across a whole vote.
        let total: f64 = votes.iter().sum::<f64>().max(1.0);
        let top = votes.iter().cloned().fold(0.0, f64::max);
        let tied: Vec<usize> = (0..self.n_classes).filter(|&c| votes[c] == top).collect();
        if tied.len() > 1 {
            let win = *tied.iter().max_by(|&&a, &&b| margin[a].total_cmp(&margin[b]).then(b.cmp(&a))).unwrap();
            votes[win] += 0.5;
            return votes.iter().map(|v| v / (total + 0.5)).collect();
        }
        votes.iter().map(|v| v / total).collect()
    }
}
