//! An independently coded reference LP solver for cross-checking: classic
//! Big-M simplex on standard form (`min c'x, Ax = b, x >= 0`), full Dantzig
//! pricing, no bounded-variable logic shared with the library solver.

use hedgebounds::lp::{LinearProgram, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct RefSolution {
    pub status: RefStatus,
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Solve a general LP by converting to standard form:
/// free variables split into differences, shifted/reflected bounds, slack
/// variables per inequality, one artificial per row, Big-M objective.
pub fn solve_reference(lp: &LinearProgram) -> RefSolution {
    let n = lp.num_vars();

    // Variable mapping: col indices of the standard-form parts.
    enum Map {
        Shifted { col: usize, lo: f64 },          // x = lo + x'
        Reflected { col: usize, hi: f64 },        // x = hi - x'
        Split { pos: usize, neg: usize },         // x = x+ - x-
    }
    let mut map = Vec::with_capacity(n);
    let mut cols = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // (col, ub) for boxed vars
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            map.push(Map::Shifted { col: cols, lo });
            if hi.is_finite() {
                extra_rows.push((cols, hi - lo));
            }
            cols += 1;
        } else if hi.is_finite() {
            map.push(Map::Reflected { col: cols, hi });
            cols += 1;
        } else {
            map.push(Map::Split { pos: cols, neg: cols + 1 });
            cols += 2;
        }
    }

    // Assemble rows in terms of standard-form columns.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for row in &lp.rows {
        let mut coeffs = vec![0.0; cols];
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            match map[j] {
                Map::Shifted { col, lo } => {
                    coeffs[col] += a;
                    rhs -= a * lo;
                }
                Map::Reflected { col, hi } => {
                    coeffs[col] -= a;
                    rhs -= a * hi;
                }
                Map::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, row.relation, rhs));
    }
    for &(col, ub) in &extra_rows {
        let mut coeffs = vec![0.0; cols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, ub));
    }

    let mut cost = vec![0.0; cols];
    let mut obj_const = 0.0;
    for (j, &cj) in lp.objective.iter().enumerate() {
        match map[j] {
            Map::Shifted { col, lo } => {
                cost[col] += cj;
                obj_const += cj * lo;
            }
            Map::Reflected { col, hi } => {
                cost[col] -= cj;
                obj_const += cj * hi;
            }
            Map::Split { pos, neg } => {
                cost[pos] += cj;
                cost[neg] -= cj;
            }
        }
    }

    // Slacks, sign-normalized rhs, artificial basis.
    let m = rows.len();
    let mut a_std: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut b_std = Vec::with_capacity(m);
    let mut total = cols;
    let slack_of: Vec<Option<usize>> = rows
        .iter()
        .map(|(_, rel, _)| match rel {
            Relation::Eq => None,
            _ => {
                total += 1;
                Some(total - 1)
            }
        })
        .collect();
    let art0 = total;
    total += m;
    for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let mut full = vec![0.0; total];
        full[..cols].copy_from_slice(coeffs);
        if let Some(s) = slack_of[r] {
            full[s] = match rel {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => unreachable!(),
            };
        }
        let mut rhs = *rhs;
        if rhs < 0.0 {
            for v in full.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
        }
        full[art0 + r] = 1.0;
        a_std.push(full);
        b_std.push(rhs);
    }

    let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let big_m = 1e7 * scale;
    let mut c_std = vec![0.0; total];
    c_std[..cols].copy_from_slice(&cost);
    for r in 0..m {
        c_std[art0 + r] = big_m;
    }

    // Dantzig simplex on the dense tableau.
    let mut basis: Vec<usize> = (art0..art0 + m).collect();
    let mut xb = b_std.clone();
    let max_iter = 200 * (m + total) + 5_000;
    for iter in 0..max_iter {
        let bland = iter > 20 * (m + total);
        // Reduced costs.
        let mut entering = None;
        let mut best = -1e-9;
        for j in 0..total {
            if basis.contains(&j) {
                continue;
            }
            let mut d = c_std[j];
            for r in 0..m {
                d -= c_std[basis[r]] * a_std[r][j];
            }
            if d < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(j) = entering else {
            // Optimal; check artificials.
            if basis.iter().zip(&xb).any(|(&b, &v)| b >= art0 && v > 1e-7) {
                return RefSolution { status: RefStatus::Infeasible, objective: f64::NAN, x: vec![] };
            }
            let mut x_std = vec![0.0; total];
            for (r, &b) in basis.iter().enumerate() {
                x_std[b] = xb[r];
            }
            let mut x = vec![0.0; n];
            for (orig, mp) in map.iter().enumerate() {
                x[orig] = match *mp {
                    Map::Shifted { col, lo } => lo + x_std[col],
                    Map::Reflected { col, hi } => hi - x_std[col],
                    Map::Split { pos, neg } => x_std[pos] - x_std[neg],
                };
            }
            let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            let _ = obj_const;
            return RefSolution { status: RefStatus::Optimal, objective, x };
        };
        // Ratio test.
        let mut leave = None;
        let mut best_t = f64::INFINITY;
        for r in 0..m {
            if a_std[r][j] > 1e-10 {
                let t = xb[r] / a_std[r][j];
                if t < best_t - 1e-12 || (t < best_t + 1e-12 && leave.map_or(true, |lr: usize| basis[r] < basis[lr])) {
                    best_t = t;
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else {
            return RefSolution { status: RefStatus::Unbounded, objective: f64::NEG_INFINITY, x: vec![] };
        };
        // Pivot.
        let piv = a_std[r][j];
        for v in a_std[r].iter_mut() {
            *v /= piv;
        }
        xb[r] /= piv;
        let pivot_row = a_std[r].clone();
        let pivot_val = xb[r];
        for rr in 0..m {
            if rr != r {
                let f = a_std[rr][j];
                if f != 0.0 {
                    for cidx in 0..total {
                        a_std[rr][cidx] -= f * pivot_row[cidx];
                    }
                    xb[rr] -= f * pivot_val;
                }
            }
        }
        basis[r] = j;
    }
    RefSolution { status: RefStatus::Infeasible, objective: f64::NAN, x: vec![] }
}
