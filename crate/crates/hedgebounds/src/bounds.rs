//! Super- and sub-hedging price bounds by cutting-plane linear programming.
//!
//! The grid-restricted super-replication program minimizes the strategy setup
//! cost subject to one domination constraint per active grid point. The
//! cutting-plane loop solves the program on a growing sub-grid, scans the full
//! grid for the worst violation delta, stops once `delta > -TOL`, and
//! otherwise activates every point violating by more than `delta + 1/(k+1)`
//! (capped at `5 N` new points per round, worst first).
//!
//! Sub-hedging bounds come from the sign relation: the sub price is the
//! negated super price of the negated payoff, and the sub strategy is the
//! negated super strategy.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid};
use crate::lp::{LinearProgram, LpStatus, Relation, Row};
use crate::market::MarketSnapshot;
use crate::payoff::{NegatedPayoff, Payoff};
use crate::strategy::{OptionLeg, SemiStaticStrategy};

/// Cutting-plane controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuttingPlaneConfig {
    /// Stopping tolerance in currency units (violations beyond -TOL stop the loop).
    pub tol: f64,
    /// Initial sub-grid points per axis.
    pub initial_points: usize,
    /// Full grid points per axis.
    pub grid_points: usize,
    pub max_iterations: usize,
}

impl CuttingPlaneConfig {
    /// Defaults scaled to the spot: TOL = 1e-4 * S0, 10 initial points per
    /// axis on a 50-point grid, 50 rounds.
    pub fn for_spot(s0: f64) -> Self {
        Self { tol: 1e-4 * s0, initial_points: 10, grid_points: 50, max_iterations: 50 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("TOL must be positive, got {}", self.tol)));
        }
        if self.initial_points < 2 || self.initial_points > self.grid_points {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= initial_points <= grid_points, got {} and {}",
                self.initial_points, self.grid_points
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Per-round progress of the cutting-plane loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStat {
    pub constraints: usize,
    pub objective: f64,
    pub violation: f64,
}

/// A computed bound with its attaining strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    pub price: f64,
    pub strategy: SemiStaticStrategy,
    pub iterations: usize,
    /// Final worst signed slack over the full grid. For a super-hedge this is
    /// `min(u - phi)`; for a sub-hedge, `min(phi - u)`. Above `-TOL` at
    /// convergence either way.
    pub final_violation: f64,
    pub trace: Vec<IterationStat>,
}

/// Compute the minimal super-hedging price of `payoff` over the grid.
pub fn superhedge(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    grid: &Grid,
    config: &CuttingPlaneConfig,
) -> Result<BoundResult> {
    config.validate()?;
    let problem = Problem::build(payoff, snapshot, curve, grid)?;
    problem.run(config)
}

/// Compute the maximal sub-hedging price: `-superhedge(-payoff)` with the
/// negated strategy, whose payoff stays below `phi + TOL` on the grid.
pub fn subhedge(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    grid: &Grid,
    config: &CuttingPlaneConfig,
) -> Result<BoundResult> {
    let negated = NegatedPayoff(payoff);
    match superhedge(&negated, snapshot, curve, grid, config) {
        Ok(res) => Ok(negate_result(res)),
        Err(Error::NonConverged(best)) => Err(Error::NonConverged(Box::new(negate_result(*best)))),
        Err(e) => Err(e),
    }
}

fn negate_result(res: BoundResult) -> BoundResult {
    BoundResult {
        price: -res.price,
        strategy: res.strategy.negated(),
        iterations: res.iterations,
        final_violation: res.final_violation,
        trace: res
            .trace
            .into_iter()
            .map(|s| IterationStat { objective: -s.objective, ..s })
            .collect(),
    }
}

/// Convenience pair of bounds sharing one grid.
pub fn bound_pair(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    config: &CuttingPlaneConfig,
) -> Result<(BoundResult, BoundResult, Grid)> {
    let grid = build_grid(snapshot.spot, snapshot, config.grid_points)?;
    let upper = superhedge(payoff, snapshot, curve, &grid, config)?;
    let lower = subhedge(payoff, snapshot, curve, &grid, config)?;
    Ok((upper, lower, grid))
}

// ---------------------------------------------------------------------------

/// Variable layout of the restricted LP:
/// `[d, (long, short) per slice-1 quote, (long, short) per slice-2 quote, H0, H1 per axis-1 knot]`.
struct Problem<'a> {
    snapshot: &'a MarketSnapshot,
    grid: &'a Grid,
    f02: f64,
    f12: f64,
    f01: f64,
    /// phi[i][j] over the full grid.
    phi: Vec<Vec<f64>>,
    /// (s - K)^+ tables per axis point and quote.
    pay1: Vec<Vec<f64>>,
    pay2: Vec<Vec<f64>>,
    n_vars: usize,
    h0_idx: usize,
    h1_off: usize,
}

impl<'a> Problem<'a> {
    fn build(
        payoff: &dyn Payoff,
        snapshot: &'a MarketSnapshot,
        curve: &YieldCurveParams,
        grid: &'a Grid,
    ) -> Result<Self> {
        if grid.len1() < 2 || grid.len2() < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2 points per axis".into()));
        }
        let f02 = curve.compounding_factor(snapshot.t0, snapshot.t2)?;
        let f12 = curve.compounding_factor(snapshot.t1, snapshot.t2)?;
        let f01 = curve.compounding_factor(snapshot.t0, snapshot.t1)?;
        let phi: Vec<Vec<f64>> = grid
            .axis1
            .iter()
            .map(|&s1| grid.axis2.iter().map(|&s2| payoff.value(s1, s2)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let pay1: Vec<Vec<f64>> = grid
            .axis1
            .iter()
            .map(|&s| snapshot.slice_1.iter().map(|q| (s - q.strike).max(0.0)).collect())
            .collect();
        let pay2: Vec<Vec<f64>> = grid
            .axis2
            .iter()
            .map(|&s| snapshot.slice_2.iter().map(|q| (s - q.strike).max(0.0)).collect())
            .collect();
        let m1 = snapshot.slice_1.len();
        let m2 = snapshot.slice_2.len();
        let h0_idx = 1 + 2 * (m1 + m2);
        let h1_off = h0_idx + 1;
        let n_vars = h1_off + grid.len1();
        Ok(Self { snapshot, grid, f02, f12, f01, phi, pay1, pay2, n_vars, h0_idx, h1_off })
    }

    fn empty_lp(&self) -> LinearProgram {
        let m1 = self.snapshot.slice_1.len();
        let mut objective = vec![0.0; self.n_vars];
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); self.n_vars];
        objective[0] = 1.0;
        for (j, q) in self.snapshot.slice_1.iter().enumerate() {
            objective[1 + 2 * j] = q.ask;
            objective[1 + 2 * j + 1] = -q.bid;
            bounds[1 + 2 * j] = (0.0, f64::INFINITY);
            bounds[1 + 2 * j + 1] = (0.0, f64::INFINITY);
        }
        for (j, q) in self.snapshot.slice_2.iter().enumerate() {
            objective[1 + 2 * (m1 + j)] = q.ask;
            objective[1 + 2 * (m1 + j) + 1] = -q.bid;
            bounds[1 + 2 * (m1 + j)] = (0.0, f64::INFINITY);
            bounds[1 + 2 * (m1 + j) + 1] = (0.0, f64::INFINITY);
        }
        LinearProgram::new(objective, bounds)
    }

    /// Domination row at grid point (i, j): u(S) >= phi(S).
    fn domination_row(&self, i: usize, j: usize) -> Row {
        let m1 = self.snapshot.slice_1.len();
        let s1 = self.grid.axis1[i];
        let s2 = self.grid.axis2[j];
        let mut coeffs = vec![0.0; self.n_vars];
        coeffs[0] = self.f02;
        for (q, &p) in self.pay1[i].iter().enumerate() {
            coeffs[1 + 2 * q] = self.f12 * p;
            coeffs[1 + 2 * q + 1] = -self.f12 * p;
        }
        for (q, &p) in self.pay2[j].iter().enumerate() {
            coeffs[1 + 2 * (m1 + q)] = p;
            coeffs[1 + 2 * (m1 + q) + 1] = -p;
        }
        coeffs[self.h0_idx] = s1 - self.snapshot.spot * self.f01;
        coeffs[self.h1_off + i] = s2 - s1 * self.f12;
        Row::new(coeffs, Relation::Ge, self.phi[i][j])
    }

    /// Initial sub-grid: an evenly spaced index subsample per axis including
    /// both ends, plus the spot knot on each axis (so the four grid corners
    /// and the (S0, S0) point are always active).
    fn initial_points(&self, per_axis: usize) -> Vec<(usize, usize)> {
        let pick = |axis: &[f64]| -> Vec<usize> {
            let n = axis.len();
            let mut idx: Vec<usize> = (0..per_axis)
                .map(|k| (k as f64 * (n - 1) as f64 / (per_axis - 1) as f64).round() as usize)
                .collect();
            if let Some(spot_pos) = axis.iter().position(|&x| x == self.snapshot.spot) {
                idx.push(spot_pos);
            }
            idx.sort_unstable();
            idx.dedup();
            idx
        };
        let i1 = pick(&self.grid.axis1);
        let i2 = pick(&self.grid.axis2);
        i1.iter().flat_map(|&i| i2.iter().map(move |&j| (i, j))).collect()
    }

    /// Payoff of the recession direction over the full grid (no phi term).
    /// A genuinely unbounded program has this nonnegative everywhere; any
    /// negative point yields a row cutting the ray off.
    fn scan_ray(&self, ray: &[f64]) -> Vec<f64> {
        let zero_phi = vec![vec![0.0; self.grid.len2()]; self.grid.len1()];
        self.scan_against(ray, &zero_phi).1
    }

    /// Strategy payoff minus phi over the full grid, returning the minimum
    /// slack and the per-point slacks (row-major over axis1 x axis2).
    fn scan_violations(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.scan_against(x, &self.phi)
    }

    fn scan_against(&self, x: &[f64], phi: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let m1 = self.snapshot.slice_1.len();
        let n1 = self.grid.len1();
        let n2 = self.grid.len2();
        let d = x[0];
        let h0 = x[self.h0_idx];

        let mut a1 = vec![0.0; n1];
        for (i, row) in self.pay1.iter().enumerate() {
            let mut acc = 0.0;
            for (q, &p) in row.iter().enumerate() {
                acc += (x[1 + 2 * q] - x[1 + 2 * q + 1]) * p;
            }
            a1[i] = self.f12 * acc + h0 * (self.grid.axis1[i] - self.snapshot.spot * self.f01) + self.f02 * d;
        }
        let mut a2 = vec![0.0; n2];
        for (j, row) in self.pay2.iter().enumerate() {
            let mut acc = 0.0;
            for (q, &p) in row.iter().enumerate() {
                acc += (x[1 + 2 * (m1 + q)] - x[1 + 2 * (m1 + q) + 1]) * p;
            }
            a2[j] = acc;
        }

        let mut slack = vec![0.0; n1 * n2];
        let mut min_slack = f64::INFINITY;
        for i in 0..n1 {
            let h1 = x[self.h1_off + i];
            let s1f = self.grid.axis1[i] * self.f12;
            let base = a1[i];
            let phi_row = &phi[i];
            for j in 0..n2 {
                let u = base + a2[j] + h1 * (self.grid.axis2[j] - s1f);
                let v = u - phi_row[j];
                slack[i * n2 + j] = v;
                if v < min_slack {
                    min_slack = v;
                }
            }
        }
        (min_slack, slack)
    }

    fn make_strategy(&self, x: &[f64]) -> Result<SemiStaticStrategy> {
        let m1 = self.snapshot.slice_1.len();
        let mut legs = Vec::new();
        for (j, q) in self.snapshot.slice_1.iter().enumerate() {
            let (long, short) = (x[1 + 2 * j], x[1 + 2 * j + 1]);
            if long != 0.0 || short != 0.0 {
                legs.push(OptionLeg { maturity_index: 1, strike: q.strike, long, short });
            }
        }
        for (j, q) in self.snapshot.slice_2.iter().enumerate() {
            let (long, short) = (x[1 + 2 * (m1 + j)], x[1 + 2 * (m1 + j) + 1]);
            if long != 0.0 || short != 0.0 {
                legs.push(OptionLeg { maturity_index: 2, strike: q.strike, long, short });
            }
        }
        let knots: Vec<(f64, f64)> =
            self.grid.axis1.iter().enumerate().map(|(i, &k)| (k, x[self.h1_off + i])).collect();
        Ok(SemiStaticStrategy {
            spot: self.snapshot.spot,
            cash: x[0],
            legs,
            h0: x[self.h0_idx],
            h1: crate::spline::CubicSpline::fit(&knots)?,
        })
    }

    fn run(&self, config: &CuttingPlaneConfig) -> Result<BoundResult> {
        let n2 = self.grid.len2();
        let mut active = vec![false; self.grid.len1() * n2];
        let mut lp = self.empty_lp();
        for (i, j) in self.initial_points(config.initial_points) {
            if !active[i * n2 + j] {
                active[i * n2 + j] = true;
                lp.rows.push(self.domination_row(i, j));
            }
        }

        let batch_cap = 5 * self.grid.len1().max(n2);
        let mut trace = Vec::new();
        let mut best: Option<(f64, Vec<f64>, f64)> = None; // (objective, x, violation)

        for k in 0..config.max_iterations {
            // Solve the restriction. A sparse active set can leave the
            // program unbounded even though the full-grid program is not:
            // each recession ray is cut off by activating grid points where
            // its payoff turns negative. Only a ray surviving the entire grid
            // certifies a model-free arbitrage in the quotes.
            let sol = loop {
                let sol = lp.solve()?;
                match sol.status {
                    LpStatus::Optimal => break sol,
                    LpStatus::Unbounded => {
                        let ray = sol.ray.as_deref().ok_or_else(|| {
                            Error::NumericalFailure("unbounded restriction without a ray certificate".into())
                        })?;
                        let ray_vals = self.scan_ray(ray);
                        let ray_tol = -1e-9 * (1.0 + self.snapshot.spot);
                        let mut cuts: Vec<(f64, usize)> = ray_vals
                            .iter()
                            .enumerate()
                            .filter(|&(p, &v)| v < ray_tol && !active[p])
                            .map(|(p, &v)| (v, p))
                            .collect();
                        if cuts.is_empty() {
                            return Err(Error::ArbitrageDetected);
                        }
                        cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                        cuts.truncate(batch_cap);
                        for &(_, p) in &cuts {
                            active[p] = true;
                            lp.rows.push(self.domination_row(p / n2, p % n2));
                        }
                    }
                    LpStatus::Infeasible => {
                        return Err(Error::NumericalFailure(
                            "restricted hedging program infeasible; it admits arbitrarily large cash".into(),
                        ))
                    }
                }
            };
            let (delta, slack) = self.scan_violations(&sol.x);
            trace.push(IterationStat { constraints: lp.rows.len(), objective: sol.objective, violation: delta });
            if best.as_ref().map_or(true, |(_, _, v)| delta > *v) {
                best = Some((sol.objective, sol.x.clone(), delta));
            }

            if delta > -config.tol {
                let strategy = self.make_strategy(&sol.x)?;
                return Ok(BoundResult {
                    price: sol.objective,
                    strategy,
                    iterations: k + 1,
                    final_violation: delta,
                    trace,
                });
            }

            // Activate everything within 1/(k+1) of the worst violation.
            let threshold = delta + 1.0 / (k as f64 + 1.0);
            let mut cuts: Vec<(f64, usize)> = slack
                .iter()
                .enumerate()
                .filter(|&(p, &v)| v < threshold && !active[p])
                .map(|(p, &v)| (v, p))
                .collect();
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cuts.truncate(batch_cap);
            if cuts.is_empty() {
                return Err(Error::NumericalFailure(format!(
                    "cut selection stalled at violation {delta}; every candidate is already active"
                )));
            }
            let mut new_rows = Vec::with_capacity(cuts.len());
            for &(_, p) in &cuts {
                active[p] = true;
                new_rows.push(self.domination_row(p / n2, p % n2));
            }
            lp.rows.extend(new_rows);
        }

        let (objective, x, violation) = best.expect("at least one iteration ran");
        let strategy = self.make_strategy(&x)?;
        Err(Error::NonConverged(Box::new(BoundResult {
            price: objective,
            strategy,
            iterations: config.max_iterations,
            final_violation: violation,
            trace,
        })))
    }
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep
// ---------------------------------------------------------------------------

/// One sweep result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub tol: f64,
    pub n0: usize,
    pub n: usize,
    pub runtime_ms: u128,
    pub iterations: usize,
    pub bound: f64,
    pub converged: bool,
}

/// Run the super-hedge across a grid of (TOL, n0, N) combinations.
///
/// Non-converged runs are recorded with their best iterate and flagged
/// rather than failing the sweep.
pub fn sweep_hyperparameters(
    payoff: &dyn Payoff,
    snapshot: &MarketSnapshot,
    curve: &YieldCurveParams,
    tols: &[f64],
    initial_points: &[usize],
    grid_sizes: &[usize],
    max_iterations: usize,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in grid_sizes {
        let grid = build_grid(snapshot.spot, snapshot, n)?;
        for &n0 in initial_points {
            for &tol in tols {
                let config = CuttingPlaneConfig {
                    tol,
                    initial_points: n0.min(n),
                    grid_points: n,
                    max_iterations,
                };
                let start = Instant::now();
                let outcome = superhedge(payoff, snapshot, curve, &grid, &config);
                let runtime_ms = start.elapsed().as_millis();
                let (iterations, bound, converged) = match outcome {
                    Ok(res) => (res.iterations, res.price, true),
                    Err(Error::NonConverged(best)) => (best.iterations, best.price, false),
                    Err(e) => return Err(e),
                };
                rows.push(SweepRow { tol, n0, n, runtime_ms, iterations, bound, converged });
            }
        }
    }
    Ok(rows)
}

/// Emit the sweep CSV (`tol,n0,N,runtime_ms,iterations,bound`).
pub fn write_sweep_csv<W: std::io::Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "tol,n0,N,runtime_ms,iterations,bound")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            crate::market::format_f64(row.tol),
            row.n0,
            row.n,
            row.runtime_ms,
            row.iterations,
            crate::market::format_f64(row.bound)
        )?;
    }
    Ok(())
}
