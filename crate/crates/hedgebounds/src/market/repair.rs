//! Static-arbitrage repair of call mid prices by L1-minimal perturbation.
//!
//! Per maturity slice the repaired mids must satisfy price bounds
//! `0 <= C(K) <= S0` and `C(K) >= S0 - K * DF`, vertical-spread slopes in
//! `[-DF, 0]`, and butterfly convexity; across maturities `C_t2(K) >= C_t1(K)`
//! at strikes quoted in both slices. Bid and ask are rebuilt around the
//! repaired mid keeping the original spread.

use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation};
use crate::market::{MarketSnapshot, OptionQuote};

/// Residual slack below which a constraint is reported as binding.
const BINDING_TOL: f64 = 1e-7;

/// One repaired quote: original mid, new mid, and the signed perturbation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairedQuote {
    pub maturity_index: usize,
    pub strike: f64,
    pub original_mid: f64,
    pub repaired_mid: f64,
    pub perturbation: f64,
}

/// Outcome of an arbitrage repair run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairReport {
    pub quotes: Vec<RepairedQuote>,
    /// Sum of absolute mid perturbations (the LP objective).
    pub total_perturbation: f64,
    /// Tags of constraints tight at the repaired surface.
    pub binding: Vec<String>,
}

/// Repair a snapshot's mid surface and rebuild bid/ask around it.
///
/// The perturbation is L1-minimal over the no-arbitrage polytope; the
/// program is always feasible because the perturbations are free to move
/// any mid into the (nonempty) arbitrage-free region.
pub fn repair_arbitrage(
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
) -> Result<(MarketSnapshot, RepairReport)> {
    for slice in [&snapshot.slice_1, &snapshot.slice_2] {
        for w in slice.windows(2) {
            if !(w[0].strike < w[1].strike) {
                return Err(Error::InvalidInput("slices must be sorted by strictly increasing strike".into()));
            }
        }
    }

    let s0 = snapshot.spot;
    let df1 = curve.discount_factor(snapshot.t0, snapshot.t1)?;
    let df2 = curve.discount_factor(snapshot.t0, snapshot.t2)?;

    // Variable layout: e_plus[q], e_minus[q] for q over slice_1 then slice_2.
    let n1 = snapshot.slice_1.len();
    let n2 = snapshot.slice_2.len();
    let nq = n1 + n2;
    let mids: Vec<f64> = snapshot.slice_1.iter().chain(&snapshot.slice_2).map(|q| q.mid()).collect();

    let mut lp = LinearProgram::new(vec![1.0; 2 * nq], vec![(0.0, f64::INFINITY); 2 * nq]);
    let mut tags: Vec<String> = Vec::new();

    // One row: sum over listed quotes of coeff * C*_q REL rhs.
    let mut add = |lp: &mut LinearProgram, terms: &[(usize, f64)], rel: Relation, rhs: f64, tag: String| {
        let mut coeffs = vec![0.0; 2 * nq];
        let mut shift = rhs;
        for &(q, a) in terms {
            coeffs[2 * q] = a; // e_plus
            coeffs[2 * q + 1] = -a; // e_minus
            shift -= a * mids[q];
        }
        lp.add_row(coeffs, rel, shift);
        tags.push(tag);
    };

    for (slice_idx, (slice, df, offset)) in
        [(&snapshot.slice_1, df1, 0usize), (&snapshot.slice_2, df2, n1)].into_iter().enumerate()
    {
        let si = slice_idx + 1;
        for (j, q) in slice.iter().enumerate() {
            let g = offset + j;
            add(&mut lp, &[(g, 1.0)], Relation::Ge, 0.0, format!("floor[{si}][{j}]"));
            add(&mut lp, &[(g, 1.0)], Relation::Le, s0, format!("cap[{si}][{j}]"));
            add(&mut lp, &[(g, 1.0)], Relation::Ge, s0 - q.strike * df, format!("intrinsic[{si}][{j}]"));
        }
        for j in 0..slice.len().saturating_sub(1) {
            let dk = slice[j + 1].strike - slice[j].strike;
            let (a, b) = (offset + j, offset + j + 1);
            // -DF <= (C_{j+1} - C_j)/dk <= 0
            add(&mut lp, &[(b, 1.0), (a, -1.0)], Relation::Le, 0.0, format!("slope_dec[{si}][{j}]"));
            add(&mut lp, &[(b, 1.0), (a, -1.0)], Relation::Ge, -df * dk, format!("slope_floor[{si}][{j}]"));
        }
        for j in 1..slice.len().saturating_sub(1) {
            let (k0, k1, k2) = (slice[j - 1].strike, slice[j].strike, slice[j + 1].strike);
            let w1 = (k2 - k0) / (k2 - k1);
            let w2 = (k1 - k0) / (k2 - k1);
            add(
                &mut lp,
                &[(offset + j - 1, 1.0), (offset + j, -w1), (offset + j + 1, w2)],
                Relation::Ge,
                0.0,
                format!("butterfly[{si}][{j}]"),
            );
        }
    }

    // Calendar ordering at strikes present in both slices (exact match).
    for (j1, q1) in snapshot.slice_1.iter().enumerate() {
        if let Some(j2) = snapshot.slice_2.iter().position(|q2| q2.strike == q1.strike) {
            add(
                &mut lp,
                &[(n1 + j2, 1.0), (j1, -1.0)],
                Relation::Ge,
                0.0,
                format!("calendar[K={}]", q1.strike),
            );
        }
    }

    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!(
            "repair LP ended {:?}; it should always be feasible and bounded",
            sol.status
        )));
    }

    let mut repaired_quotes = Vec::with_capacity(nq);
    let mut new_slices: [Vec<OptionQuote>; 2] = [Vec::with_capacity(n1), Vec::with_capacity(n2)];
    for (g, quote) in snapshot.slice_1.iter().chain(&snapshot.slice_2).enumerate() {
        let pert = sol.x[2 * g] - sol.x[2 * g + 1];
        let cstar = mids[g] + pert;
        let (bid, ask) = reconstruct_bid_ask(cstar, quote.spread());
        let si = if g < n1 { 0 } else { 1 };
        new_slices[si].push(OptionQuote { bid, ask, ..quote.clone() });
        repaired_quotes.push(RepairedQuote {
            maturity_index: si + 1,
            strike: quote.strike,
            original_mid: mids[g],
            repaired_mid: cstar,
            perturbation: pert,
        });
    }

    let binding: Vec<String> = lp
        .rows
        .iter()
        .zip(&tags)
        .filter(|(row, _)| {
            let lhs: f64 = row.coeffs.iter().zip(&sol.x).map(|(a, v)| a * v).sum();
            (lhs - row.rhs).abs() <= BINDING_TOL * (1.0 + row.rhs.abs())
        })
        .map(|(_, tag)| tag.clone())
        .collect();

    let [s1, s2] = new_slices;
    let repaired = MarketSnapshot::new(
        snapshot.underlying.clone(),
        snapshot.spot,
        snapshot.t0,
        snapshot.t1,
        snapshot.t2,
        s1,
        s2,
    )?;
    let report = RepairReport {
        quotes: repaired_quotes,
        total_perturbation: sol.objective,
        binding,
    };
    Ok((repaired, report))
}

/// Rebuild `(bid, ask)` as `C* -/+ spread/2` such that the floating-point
/// difference `ask - bid` reproduces `spread` bit-exactly. The paired values
/// may each drift from the symmetric midpoint formula by one rounding step.
fn reconstruct_bid_ask(cstar: f64, spread: f64) -> (f64, f64) {
    let half = 0.5 * spread;
    let mut bid = cstar - half;
    let mut ask = cstar + half;
    for _ in 0..64 {
        if ask - bid == spread {
            return (bid, ask);
        }
        ask = bid + spread;
        if ask - bid == spread {
            return (bid, ask);
        }
        bid = ask - spread;
    }
    (bid, ask)
}

/// Largest violation of the no-arbitrage constraints by a snapshot's mids
/// (a nonnegative number; 0 means arbitrage-free within tolerance).
pub fn max_arbitrage_violation(snapshot: &MarketSnapshot, curve: &YieldCurveParams) -> Result<f64> {
    let s0 = snapshot.spot;
    let df1 = curve.discount_factor(snapshot.t0, snapshot.t1)?;
    let df2 = curve.discount_factor(snapshot.t0, snapshot.t2)?;
    let mut worst: f64 = 0.0;
    for (slice, df) in [(&snapshot.slice_1, df1), (&snapshot.slice_2, df2)] {
        for q in slice.iter() {
            let c = q.mid();
            worst = worst.max(-c).max(c - s0).max(s0 - q.strike * df - c);
        }
        for w in slice.windows(2) {
            let slope = (w[1].mid() - w[0].mid()) / (w[1].strike - w[0].strike);
            worst = worst.max(slope * (w[1].strike - w[0].strike));
            worst = worst.max((-df - slope) * (w[1].strike - w[0].strike));
        }
        for w in slice.windows(3) {
            let (k0, k1, k2) = (w[0].strike, w[1].strike, w[2].strike);
            let fly = w[0].mid() - w[1].mid() * (k2 - k0) / (k2 - k1) + w[2].mid() * (k1 - k0) / (k2 - k1);
            worst = worst.max(-fly);
        }
    }
    for q1 in &snapshot.slice_1 {
        if let Some(q2) = snapshot.slice_2.iter().find(|q| q.strike == q1.strike) {
            worst = worst.max(q1.mid() - q2.mid());
        }
    }
    Ok(worst)
}
