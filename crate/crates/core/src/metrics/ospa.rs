use serde::{Deserialize, Serialize};

use crate::assign;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OspaVariant {
    /// Counting-aware form: the cardinality term compares the estimated
    /// head count n + q with the true count m.
    #[default]
    Counting,
    /// Plain OSPA between track and person positions; q is ignored.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OspaConfig {
    pub p: f64,
    /// Cutoff distance in metres.
    pub c: f64,
    pub variant: OspaVariant,
}

impl Default for OspaConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            c: 1.0,
            variant: OspaVariant::Counting,
        }
    }
}

impl OspaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("OSPA order p = {} must be >= 1", self.p)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("OSPA cutoff c = {} must be positive", self.c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaFrame {
    pub d_loc: f64,
    pub d_card: f64,
    pub ospa: f64,
    /// Number of tracks.
    pub n: usize,
    /// Number of true persons.
    pub m: usize,
    /// Head count claimed by the classifier beyond one per track.
    pub q: i64,
}

/// Cost matrix of cut-off distances raised to p, tracks as rows.
pub fn cutoff_costs(truth: &[(f64, f64)], tracks: &[(f64, f64)], cfg: &OspaConfig) -> Vec<f64> {
    tracks
        .iter()
        .flat_map(|t| truth.iter().map(move |x| (t.0 - x.0).hypot(t.1 - x.1).min(cfg.c).powf(cfg.p)))
        .collect()
}

/// OSPA of one frame.
///
/// Tracks are matched one-to-one with persons by minimal total cut-off
/// cost. The localization term sums the matched costs over max(n, m). The
/// cardinality term is c · (|n + q - m| / max(n + q, m))^(1/p), which equals
/// ((n + q - m) / (n + q) · c^p)^(1/p) whenever n + q ≥ m; an empty estimate
/// facing people saturates at c. The total is capped at c.
pub fn ospa_frame(truth: &[(f64, f64)], tracks: &[(f64, f64)], q: i64, cfg: &OspaConfig) -> OspaFrame {
    let (n, m) = (tracks.len(), truth.len());
    let sol = assign::solve(&cutoff_costs(truth, tracks, cfg), n, m);
    let big = n.max(m);
    let loc_p = if big == 0 { 0.0 } else { sol.total_cost / big as f64 };
    let card_p = match cfg.variant {
        OspaVariant::Standard => {
            if big == 0 {
                0.0
            } else {
                cfg.c.powf(cfg.p) * n.abs_diff(m) as f64 / big as f64
            }
        }
        OspaVariant::Counting => {
            let est = (n as i64 + q).max(0) as f64;
            let denom = est.max(m as f64);
            if denom == 0.0 {
                0.0
            } else {
                cfg.c.powf(cfg.p) * (est - m as f64).abs() / denom
            }
        }
    };
    let ospa = (loc_p + card_p).powf(1.0 / cfg.p).min(cfg.c);
    OspaFrame {
        d_loc: loc_p.powf(1.0 / cfg.p),
        d_card: card_p.powf(1.0 / cfg.p),
        ospa,
        n,
        m,
        q,
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Smallest sum of cut-off costs over all injections of the smaller side
    /// into the larger, by enumeration.
    pub fn min_matching(costs: &[f64], rows: usize, cols: usize) -> f64 {
        fn rec(costs: &[f64], cols: usize, r: usize, rows: usize, used: &mut Vec<bool>) -> f64 {
            if r == rows {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    best = best.min(costs[r * cols + c] + rec(costs, cols, r + 1, rows, used));
                    used[c] = false;
                }
            }
            best
        }
        if rows == 0 || cols == 0 {
            return 0.0;
        }
        if rows <= cols {
            rec(costs, cols, 0, rows, &mut vec![false; cols])
        } else {
            let t: Vec<f64> = (0..cols * rows).map(|k| costs[(k % rows) * cols + k / rows]).collect();
            rec(&t, rows, 0, cols, &mut vec![false; rows])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CFG: OspaConfig = OspaConfig {
        p: 2.0,
        c: 1.0,
        variant: OspaVariant::Counting,
    };

    #[test]
    fn identical_sets_score_zero() {
        let a = [(1.0, 2.0), (-0.5, 3.0)];
        let f = ospa_frame(&a, &a, 0, &CFG);
        assert_eq!((f.d_loc, f.d_card, f.ospa), (0.0, 0.0, 0.0));
    }

    #[test]
    fn extra_track_costs_cardinality() {
        let f = ospa_frame(&[(0.0, 3.0)], &[(0.0, 3.0), (2.0, 4.0)], 0, &CFG);
        assert_eq!(f.d_loc, 0.0);
        assert!((f.d_card - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((f.ospa - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn offset_track_costs_localization() {
        let f = ospa_frame(&[(0.0, 3.0)], &[(0.3, 3.4)], 0, &CFG);
        assert!((f.d_loc - 0.5).abs() < 1e-12);
        assert_eq!(f.d_card, 0.0);
        assert!((f.ospa - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_tracks_saturates() {
        let f = ospa_frame(&[(0.0, 3.0), (1.0, 3.0)], &[], 0, &CFG);
        assert_eq!(f.ospa, 1.0);
        assert_eq!(ospa_frame(&[], &[], 0, &CFG).ospa, 0.0);
    }

    #[test]
    fn group_count_closes_cardinality_gap() {
        let truth = [(0.0, 3.0), (0.8, 3.0), (0.4, 3.7)];
        let track = [(0.4, 3.25)];
        let plain = ospa_frame(&truth, &track, 0, &CFG);
        let counted = ospa_frame(&truth, &track, 2, &CFG);
        assert!((plain.d_card - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(counted.d_card, 0.0);
        assert!(counted.ospa < plain.ospa);
    }

    fn pts(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-3.0f64..3.0, 0.0f64..6.0), 0..=max)
    }

    proptest! {
        #[test]
        fn bounded_by_cutoff(a in pts(6), b in pts(6), q in -4i64..6, c in 0.1f64..3.0, p in 1.0f64..4.0) {
            let cfg = OspaConfig { p, c, variant: OspaVariant::Counting };
            let f = ospa_frame(&a, &b, q, &cfg);
            prop_assert!(f.ospa >= 0.0 && f.ospa <= c);
            let s = ospa_frame(&a, &b, q, &OspaConfig { variant: OspaVariant::Standard, ..cfg });
            prop_assert!(s.ospa <= c + 1e-12);
        }

        #[test]
        fn localization_matches_enumeration(a in pts(5), b in pts(5)) {
            let f = ospa_frame(&a, &b, 0, &CFG);
            let best = oracle::min_matching(&cutoff_costs(&a, &b, &CFG), b.len(), a.len());
            let big = a.len().max(b.len()).max(1) as f64;
            prop_assert!((f.d_loc.powi(2) - best / big).abs() < 1e-9);
        }

        #[test]
        fn localization_symmetric(a in pts(5), shift in proptest::collection::vec((-0.7f64..0.7, -0.7f64..0.7), 5)) {
            let b: Vec<(f64, f64)> = a.iter().zip(&shift).map(|(p, s)| (p.0 + s.0, p.1 + s.1)).collect();
            let f = ospa_frame(&a, &b, 0, &CFG);
            let g = ospa_frame(&b, &a, 0, &CFG);
            prop_assert!((f.d_loc - g.d_loc).abs() < 1e-12);
        }

        #[test]
        fn counting_equals_standard_without_q(a in pts(5), b in pts(5)) {
            let f = ospa_frame(&a, &b, 0, &CFG);
            let s = ospa_frame(&a, &b, 0, &OspaConfig { variant: OspaVariant::Standard, ..CFG });
            prop_assert!((f.ospa - s.ospa).abs() < 1e-12);
        }

        #[test]
        fn card_grows_with_count_mismatch(n in 0usize..5, m in 0usize..6, q1 in -4i64..6, q2 in -4i64..6) {
            let tracks: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, 2.0)).collect();
            let truth: Vec<(f64, f64)> = (0..m).map(|i| (i as f64, 2.0)).collect();
            let gap = |q: i64| ((n as i64 + q).max(0) - m as i64).abs();
            let (a, b) = (ospa_frame(&truth, &tracks, q1, &CFG), ospa_frame(&truth, &tracks, q2, &CFG));
            // Over-counting regime: larger q never lowers the cardinality term.
            if n >= m && q2 >= q1 && q1 >= 0 {
                prop_assert!(b.d_card >= a.d_card - 1e-12);
            }
            // On each side of the true count the term follows the mismatch.
            let side = |q: i64| (n as i64 + q).max(0) >= m as i64;
            if side(q1) == side(q2) && gap(q2) >= gap(q1) {
                prop_assert!(b.d_card >= a.d_card - 1e-12);
            }
        }
    }
}
