//! Rectangular optimal assignment with forbidden pairs.
//!
//! Shared by the GNN data association and the OSPA localization term. Pairs
//! whose cost is not finite are forbidden. The solver first maximizes the
//! number of assigned pairs and then minimizes the total cost among all
//! assignments of that size.

/// Result of solving a rectangular assignment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs, sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_rows: Vec<usize>,
    pub unassigned_cols: Vec<usize>,
    pub total_cost: f64,
}

impl Assignment {
    fn empty(rows: usize, cols: usize) -> Self {
        Self {
            pairs: Vec::new(),
            unassigned_rows: (0..rows).collect(),
            unassigned_cols: (0..cols).collect(),
            total_cost: 0.0,
        }
    }
}

/// Solves the assignment for a row-major `rows x cols` cost matrix.
///
/// Non-finite entries (use `f64::INFINITY`) mark forbidden pairs.
pub fn solve(costs: &[f64], rows: usize, cols: usize) -> Assignment {
    assert_eq!(costs.len(), rows * cols, "cost matrix has wrong length");
    if rows == 0 || cols == 0 {
        return Assignment::empty(rows, cols);
    }

    // Forbidden pairs get a penalty larger than any feasible total, so the
    // optimum of the padded square problem maximizes cardinality first.
    let finite_sum: f64 = costs.iter().filter(|c| c.is_finite()).map(|c| c.abs()).sum();
    let big = (finite_sum + 1.0) * (rows.max(cols) as f64 + 1.0);

    let n = rows.max(cols);
    let mut square = vec![big; n * n];
    for r in 0..rows {
        for c in 0..cols {
            let v = costs[r * cols + c];
            if v.is_finite() {
                square[r * n + c] = v;
            }
        }
    }
    // Padding rows/cols cost nothing beyond the forbidden penalty: a dummy
    // match stands for "unassigned", which must cost the same as a forbidden
    // real pair for the cardinality ordering to hold.
    let row_of_col = hungarian(&square, n);

    let mut pairs = Vec::new();
    let mut total = 0.0;
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    for (c, &r) in row_of_col.iter().enumerate() {
        if r < rows && c < cols {
            let v = costs[r * cols + c];
            if v.is_finite() {
                pairs.push((r, c));
                total += v;
                row_used[r] = true;
                col_used[c] = true;
            }
        }
    }
    pairs.sort_unstable();
    Assignment {
        pairs,
        unassigned_rows: (0..rows).filter(|&r| !row_used[r]).collect(),
        unassigned_cols: (0..cols).filter(|&c| !col_used[c]).collect(),
        total_cost: total,
    }
}

/// Shortest augmenting path Hungarian method on a dense `n x n` matrix.
/// Returns, for each column, the row assigned to it.
fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based potentials formulation; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_of_col = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_of_col[j - 1] = p[j] - 1;
        }
    }
    row_of_col
}
