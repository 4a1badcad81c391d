//! Shared test oracles, all independent of the library's solver internals:
//! a textbook Big-M standard-form simplex, a direct full-grid hedging LP
//! builder, and the martingale-measure dual LP builder.

#![allow(dead_code)]

pub mod reference_lp;

use hedgebounds::curve::YieldCurveParams;
use hedgebounds::grid::Grid;
use hedgebounds::lp::{LinearProgram, Relation};
use hedgebounds::market::MarketSnapshot;
use hedgebounds::payoff::Payoff;

/// The full-grid super-replication LP assembled in one shot (no cutting
/// plane): variables `[d, long/short per quote (slice 1 then 2), H0, H1_l]`,
/// one domination row per grid point.
pub fn full_primal_lp(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    grid: &Grid,
) -> LinearProgram {
    let f02 = curve.compounding_factor(snapshot.t0, snapshot.t2).unwrap();
    let f12 = curve.compounding_factor(snapshot.t1, snapshot.t2).unwrap();
    let f01 = curve.compounding_factor(snapshot.t0, snapshot.t1).unwrap();
    let m1 = snapshot.slice_1.len();
    let m2 = snapshot.slice_2.len();
    let h0 = 1 + 2 * (m1 + m2);
    let n_vars = h0 + 1 + grid.axis1.len();

    let mut objective = vec![0.0; n_vars];
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n_vars];
    objective[0] = 1.0;
    for (j, q) in snapshot.slice_1.iter().chain(&snapshot.slice_2).enumerate() {
        objective[1 + 2 * j] = q.ask;
        objective[1 + 2 * j + 1] = -q.bid;
        bounds[1 + 2 * j] = (0.0, f64::INFINITY);
        bounds[1 + 2 * j + 1] = (0.0, f64::INFINITY);
    }
    let mut lp = LinearProgram::new(objective, bounds);
    for (i, &s1) in grid.axis1.iter().enumerate() {
        for &s2 in grid.axis2.iter() {
            let mut coeffs = vec![0.0; n_vars];
            coeffs[0] = f02;
            for (j, q) in snapshot.slice_1.iter().enumerate() {
                let p = f12 * (s1 - q.strike).max(0.0);
                coeffs[1 + 2 * j] = p;
                coeffs[1 + 2 * j + 1] = -p;
            }
            for (j, q) in snapshot.slice_2.iter().enumerate() {
                let p = (s2 - q.strike).max(0.0);
                coeffs[1 + 2 * (m1 + j)] = p;
                coeffs[1 + 2 * (m1 + j) + 1] = -p;
            }
            coeffs[h0] = s1 - snapshot.spot * f01;
            coeffs[h0 + 1 + i] = s2 - s1 * f12;
            lp.add_row(coeffs, Relation::Ge, payoff.value(s1, s2).unwrap());
        }
    }
    lp
}

/// The martingale-measure dual LP: maximize the weighted payoff over
/// nonnegative grid weights that (i) carry total discounted mass one,
/// (ii) reprice every quote inside its bid/ask band, (iii) price the stock
/// forward exactly, and (iv) are conditionally driftless per S1 knot.
///
/// Returned as a minimization of the negated objective; the super-hedging
/// price is minus its optimal value.
pub fn martingale_dual_lp(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    grid: &Grid,
) -> LinearProgram {
    let f02 = curve.compounding_factor(snapshot.t0, snapshot.t2).unwrap();
    let f12 = curve.compounding_factor(snapshot.t1, snapshot.t2).unwrap();
    let f01 = curve.compounding_factor(snapshot.t0, snapshot.t1).unwrap();
    let n1 = grid.axis1.len();
    let n2 = grid.axis2.len();
    let n_pts = n1 * n2;

    let mut objective = vec![0.0; n_pts];
    for (i, &s1) in grid.axis1.iter().enumerate() {
        for (j, &s2) in grid.axis2.iter().enumerate() {
            objective[i * n2 + j] = -payoff.value(s1, s2).unwrap();
        }
    }
    let mut lp = LinearProgram::new(objective, vec![(0.0, f64::INFINITY); n_pts]);

    // Discounted total mass.
    lp.add_row(vec![f02; n_pts], Relation::Eq, 1.0);

    // Quote repricing bands.
    for (slice_idx, factor) in [(1usize, f12), (2usize, 1.0)] {
        for q in snapshot.slice(slice_idx) {
            let mut coeffs = vec![0.0; n_pts];
            for (i, &s1) in grid.axis1.iter().enumerate() {
                for (j, &s2) in grid.axis2.iter().enumerate() {
                    let s = if slice_idx == 1 { s1 } else { s2 };
                    coeffs[i * n2 + j] = factor * (s - q.strike).max(0.0);
                }
            }
            lp.add_row(coeffs.clone(), Relation::Le, q.ask);
            lp.add_row(coeffs, Relation::Ge, q.bid);
        }
    }

    // Stock forward priced exactly.
    let mut fwd = vec![0.0; n_pts];
    for (i, &s1) in grid.axis1.iter().enumerate() {
        for j in 0..n2 {
            fwd[i * n2 + j] = s1 - snapshot.spot * f01;
        }
    }
    lp.add_row(fwd, Relation::Eq, 0.0);

    // Conditional driftlessness at each S1 knot.
    for (i, &s1) in grid.axis1.iter().enumerate() {
        let mut coeffs = vec![0.0; n_pts];
        for (j, &s2) in grid.axis2.iter().enumerate() {
            coeffs[i * n2 + j] = s2 - s1 * f12;
        }
        lp.add_row(coeffs, Relation::Eq, 0.0);
    }
    lp
}
