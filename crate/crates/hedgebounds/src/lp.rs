//! Dense linear programming with incremental row addition.
//!
//! A bounded-variable primal simplex (full tableau, two-phase) with a Bland
//! anti-cycling fallback. Programs whose row count dwarfs the variable count
//! are transparently solved through their dual so the working basis stays
//! small; the reported solution is always expressed in terms of the original
//! program, including one dual multiplier per row.
//!
//! Dual sign convention for a minimization problem: `>=` rows carry
//! nonnegative duals, `<=` rows nonpositive duals, `=` rows unrestricted.
//!
//! The plain-text dump format (see [`LinearProgram::dump`]) has one line per
//! constraint, `a_0 a_1 ... <rel> rhs`, preceded by the objective and bounds
//! lines, for cross-checking with external solvers.

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// A single constraint row `coeffs . x <rel> rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

/// Dense LP: minimize `objective . x` subject to rows and per-variable bounds.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Per-variable `(lower, upper)`; use `f64::NEG_INFINITY` / `f64::INFINITY`.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output; `x` and `duals` are meaningful only when `status == Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    /// On `Unbounded`: a recession direction of the structural variables with
    /// negative cost, normalized to unit max component.
    pub ray: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        Self { objective, rows: Vec::new(), bounds }
    }

    /// All variables free, no rows.
    pub fn with_free_vars(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![(f64::NEG_INFINITY, f64::INFINITY); n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row::new(coeffs, relation, rhs));
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::InvalidProgram(format!(
                "bounds length {} != objective length {n}",
                self.bounds.len()
            )));
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l > u {
                return Err(Error::InvalidProgram(format!("variable {j}: lower {l} > upper {u}")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::InvalidProgram(format!(
                    "row {r} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidProgram(format!("row {r} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Solve the program.
    ///
    /// Tall programs (many more rows than variables, no two-sided bounds) are
    /// solved through their dual; the mapping back is exact at an optimal
    /// basis. A dual-infeasible outcome is reclassified by a direct solve.
    pub fn solve(&self) -> Result<LpSolution> {
        self.validate()?;
        if self.rows.len() > 2 * self.num_vars().max(8) && self.is_one_sided() {
            match solve_via_dual(self)? {
                DualOutcome::Solved(sol) => return Ok(sol),
                DualOutcome::NeedPrimal => {}
            }
        }
        Simplex::new(self).run()
    }

    /// Append rows and re-solve from scratch; equivalent to [`solve`](Self::solve)
    /// on the enlarged program.
    pub fn extend_and_resolve(&mut self, new_rows: Vec<Row>) -> Result<LpSolution> {
        self.rows.extend(new_rows);
        self.solve()
    }

    /// True when no variable has both bounds finite (dualization stays simple).
    fn is_one_sided(&self) -> bool {
        self.bounds.iter().all(|&(l, u)| l.is_infinite() || u.is_infinite())
    }

    /// Plain-text dump, one line per constraint.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let fmt_vec = |v: &[f64]| v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
        writeln!(s, "minimize: {}", fmt_vec(&self.objective)).unwrap();
        let bounds = self
            .bounds
            .iter()
            .map(|(l, u)| format!("[{l},{u}]"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(s, "bounds: {bounds}").unwrap();
        for row in &self.rows {
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            writeln!(s, "{} {rel} {}", fmt_vec(&row.coeffs), row.rhs).unwrap();
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex on the full tableau.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize), // row index
    AtLower,
    AtUpper,
    FreeAtZero,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    n_struct: usize,
    n_total: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Tableau B^{-1} [A | I], row-major m x n_total.
    tab: Vec<f64>,
    /// Basic variable values, one per row.
    xb: Vec<f64>,
    /// Which variable is basic in each row.
    basis: Vec<usize>,
    state: Vec<VarState>,
    iterations: usize,
    ray: Option<Vec<f64>>,
    bland: bool,
    bland_after: usize,
    max_iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let n_struct = lp.num_vars();
        let m = lp.rows.len();
        let n_total = n_struct + m;
        let mut lower = Vec::with_capacity(n_total);
        let mut upper = Vec::with_capacity(n_total);
        for &(l, u) in &lp.bounds {
            lower.push(l);
            upper.push(u);
        }
        for row in &lp.rows {
            match row.relation {
                Relation::Le => {
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                }
                Relation::Ge => {
                    lower.push(f64::NEG_INFINITY);
                    upper.push(0.0);
                }
                Relation::Eq => {
                    lower.push(0.0);
                    upper.push(0.0);
                }
            }
        }

        let mut tab = vec![0.0; m * n_total];
        for (r, row) in lp.rows.iter().enumerate() {
            tab[r * n_total..r * n_total + n_struct].copy_from_slice(&row.coeffs);
            tab[r * n_total + n_struct + r] = 1.0;
        }

        // Nonbasic start: finite bound nearest zero, or zero for free variables.
        let mut state = Vec::with_capacity(n_total);
        for j in 0..n_struct {
            state.push(initial_state(lower[j], upper[j]));
        }
        for r in 0..m {
            state.push(VarState::Basic(r));
        }
        let mut slf = Self {
            lp,
            n_struct,
            n_total,
            m,
            lower,
            upper,
            tab,
            xb: vec![0.0; m],
            basis: (n_struct..n_total).collect(),
            state,
            iterations: 0,
            ray: None,
            bland: false,
            bland_after: 10 * (m + n_total),
            max_iterations: 50 * (m + n_total) + 10_000,
        };
        for r in 0..m {
            let mut v = slf.lp.rows[r].rhs;
            for j in 0..n_struct {
                v -= slf.lp.rows[r].coeffs[j] * slf.nonbasic_value(j);
            }
            slf.xb[r] = v;
        }
        slf
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeAtZero => 0.0,
            VarState::Basic(r) => self.xb[r],
        }
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n_struct {
            self.lp.objective[j]
        } else {
            0.0
        }
    }

    fn feas_tol(&self, bound: f64) -> f64 {
        FEAS_TOL * (1.0 + bound.abs())
    }

    fn run(mut self) -> Result<LpSolution> {
        if !self.phase1()? {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; self.n_struct],
                objective: f64::NAN,
                duals: vec![0.0; self.m],
                ray: None,
            });
        }
        match self.phase2()? {
            LpStatus::Unbounded => Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: vec![0.0; self.n_struct],
                objective: f64::NEG_INFINITY,
                duals: vec![0.0; self.m],
                ray: self.ray.take(),
            }),
            _ => self.extract(),
        }
    }

    fn violation(&self, r: usize) -> f64 {
        let j = self.basis[r];
        let v = self.xb[r];
        if v < self.lower[j] - self.feas_tol(self.lower[j]) {
            self.lower[j] - v
        } else if v > self.upper[j] + self.feas_tol(self.upper[j]) {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    /// Drive all basic variables inside their bounds. Returns false if the
    /// residual infeasibility cannot be removed.
    fn phase1(&mut self) -> Result<bool> {
        loop {
            // Classify current violations.
            let mut below = Vec::new();
            let mut above = Vec::new();
            for r in 0..self.m {
                let j = self.basis[r];
                let v = self.xb[r];
                if v < self.lower[j] - self.feas_tol(self.lower[j]) {
                    below.push(r);
                } else if v > self.upper[j] + self.feas_tol(self.upper[j]) {
                    above.push(r);
                }
            }
            if below.is_empty() && above.is_empty() {
                return Ok(true);
            }
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::NumericalFailure(format!(
                    "phase-1 iteration cap {} exceeded ({} rows, {} vars)",
                    self.max_iterations, self.m, self.n_struct
                )));
            }
            if self.iterations > self.bland_after {
                self.bland = true;
            }

            // Phase-1 gradient of total infeasibility for each nonbasic column.
            let mut entering: Option<(usize, i8, f64)> = None; // (col, direction, score)
            for j in 0..self.n_total {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut g = 0.0;
                for &r in &below {
                    g += self.tab[r * self.n_total + j];
                }
                for &r in &above {
                    g -= self.tab[r * self.n_total + j];
                }
                let cand: Option<i8> = match self.state[j] {
                    VarState::AtLower => (g < -COST_TOL).then_some(1),
                    VarState::AtUpper => (g > COST_TOL).then_some(-1),
                    VarState::FreeAtZero => {
                        if g < -COST_TOL {
                            Some(1)
                        } else if g > COST_TOL {
                            Some(-1)
                        } else {
                            None
                        }
                    }
                    VarState::Basic(_) => None,
                };
                if let Some(dir) = cand {
                    let score = g.abs();
                    if self.bland {
                        entering = Some((j, dir, score));
                        break;
                    }
                    if entering.map_or(true, |(_, _, s)| score > s) {
                        entering = Some((j, dir, score));
                    }
                }
            }
            let Some((j, dir, _)) = entering else {
                return Ok(false); // locally (hence globally) infeasible
            };
            if !self.step(j, dir, true)? {
                return Err(Error::NumericalFailure(
                    "phase-1 step found no blocking event; infeasibility should always block".into(),
                ));
            }
        }
    }

    /// Minimize the true objective from a feasible basis.
    fn phase2(&mut self) -> Result<LpStatus> {
        // Reduced costs d_j = c_j - c_B' T_j, maintained by full recomputation;
        // columns are scanned each iteration anyway so this stays O(m * n).
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::NumericalFailure(format!(
                    "phase-2 iteration cap {} exceeded ({} rows, {} vars)",
                    self.max_iterations, self.m, self.n_struct
                )));
            }
            if self.iterations > self.bland_after {
                self.bland = true;
            }

            let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(j)).collect();
            let mut entering: Option<(usize, i8, f64)> = None;
            for j in 0..self.n_total {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut d = self.cost(j);
                for r in 0..self.m {
                    let t = self.tab[r * self.n_total + j];
                    if t != 0.0 {
                        d -= cb[r] * t;
                    }
                }
                let cand: Option<i8> = match self.state[j] {
                    VarState::AtLower => (d < -COST_TOL).then_some(1),
                    VarState::AtUpper => (d > COST_TOL).then_some(-1),
                    VarState::FreeAtZero => {
                        if d < -COST_TOL {
                            Some(1)
                        } else if d > COST_TOL {
                            Some(-1)
                        } else {
                            None
                        }
                    }
                    VarState::Basic(_) => None,
                };
                if let Some(dir) = cand {
                    let score = d.abs();
                    if self.bland {
                        entering = Some((j, dir, score));
                        break;
                    }
                    if entering.map_or(true, |(_, _, s)| score > s) {
                        entering = Some((j, dir, score));
                    }
                }
            }
            let Some((j, dir, _)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            if !self.step(j, dir, false)? {
                return Ok(LpStatus::Unbounded);
            }
        }
    }

    /// Move nonbasic `j` in direction `dir`, pivoting or bound-flipping at the
    /// first blocking event. Returns false when the step is unbounded.
    fn step(&mut self, j: usize, dir: i8, phase1: bool) -> Result<bool> {
        let dirf = dir as f64;
        let col = |r: usize| self.tab[r * self.n_total + j];

        // Entering variable's own opposite bound.
        let own_span = match self.state[j] {
            VarState::AtLower => self.upper[j] - self.lower[j],
            VarState::AtUpper => self.upper[j] - self.lower[j],
            VarState::FreeAtZero => f64::INFINITY,
            VarState::Basic(_) => unreachable!(),
        };

        let mut best_t = own_span;
        let mut leave: Option<(usize, VarState)> = None; // (row, exit state)

        for r in 0..self.m {
            let t_rj = col(r);
            if t_rj.abs() <= PIVOT_TOL {
                continue;
            }
            let jb = self.basis[r];
            let v = self.xb[r];
            let delta = -dirf * t_rj; // d(x_B[r]) / d(step)
            let (limit, exit_state) = if phase1 && v < self.lower[jb] - self.feas_tol(self.lower[jb]) {
                // Infeasible below: blocks only when climbing back to its lower bound.
                if delta > 0.0 {
                    ((self.lower[jb] - v) / delta, VarState::AtLower)
                } else {
                    continue;
                }
            } else if phase1 && v > self.upper[jb] + self.feas_tol(self.upper[jb]) {
                if delta < 0.0 {
                    ((self.upper[jb] - v) / delta, VarState::AtUpper)
                } else {
                    continue;
                }
            } else if delta > 0.0 {
                if self.upper[jb].is_finite() {
                    ((self.upper[jb] - v) / delta, VarState::AtUpper)
                } else {
                    continue;
                }
            } else {
                if self.lower[jb].is_finite() {
                    ((self.lower[jb] - v) / delta, VarState::AtLower)
                } else {
                    continue;
                }
            };
            let limit = limit.max(0.0);
            let better = if self.bland {
                limit < best_t - PIVOT_TOL
                    || (limit <= best_t + PIVOT_TOL
                        && leave.map_or(best_t.is_infinite(), |(lr, _)| self.basis[r] < self.basis[lr]))
            } else {
                limit < best_t
            };
            if better {
                best_t = limit;
                leave = Some((r, exit_state));
            }
        }

        if best_t.is_infinite() {
            let mut ray = vec![0.0; self.n_struct];
            if j < self.n_struct {
                ray[j] = dirf;
            }
            for r in 0..self.m {
                let b = self.basis[r];
                if b < self.n_struct {
                    let t_rj = self.tab[r * self.n_total + j];
                    if t_rj != 0.0 {
                        ray[b] = -dirf * t_rj;
                    }
                }
            }
            let mx = ray.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if mx > 0.0 {
                for v in ray.iter_mut() {
                    *v /= mx;
                }
            }
            self.ray = Some(ray);
            return Ok(false);
        }

        // Apply the step to all basic values.
        if best_t > 0.0 {
            for r in 0..self.m {
                let t_rj = col(r);
                if t_rj != 0.0 {
                    self.xb[r] -= dirf * best_t * t_rj;
                }
            }
        }
        let new_val = self.nonbasic_value(j) + dirf * best_t;

        match leave {
            None => {
                // Bound flip: the entering variable ran into its other bound.
                self.state[j] = if dir > 0 { VarState::AtUpper } else { VarState::AtLower };
            }
            Some((r, exit_state)) => {
                let old = self.basis[r];
                self.state[old] = exit_state;
                // Clamp the leaving value onto its bound to stop drift.
                self.xb[r] = new_val;
                self.basis[r] = j;
                self.state[j] = VarState::Basic(r);
                self.pivot(r, j);
            }
        }
        Ok(true)
    }

    /// Gauss-Jordan elimination turning column `j` into the `r`-th unit vector.
    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.n_total;
        let piv = self.tab[r * n + j];
        let inv = 1.0 / piv;
        for c in 0..n {
            self.tab[r * n + c] *= inv;
        }
        self.tab[r * n + j] = 1.0;
        let pivot_row: Vec<f64> = self.tab[r * n..(r + 1) * n].to_vec();
        for rr in 0..self.m {
            if rr == r {
                continue;
            }
            let f = self.tab[rr * n + j];
            if f != 0.0 {
                let row = &mut self.tab[rr * n..(rr + 1) * n];
                for c in 0..n {
                    row[c] -= f * pivot_row[c];
                }
                row[j] = 0.0;
            }
        }
    }

    /// Rebuild the solution at the final basis from the original data via a
    /// dense LU solve, wiping out drift accumulated across pivots.
    fn extract(&self) -> Result<LpSolution> {
        let m = self.m;
        let n = self.n_struct;
        // Basis matrix columns from original data.
        let mut bmat = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < n {
                for r in 0..m {
                    bmat[r * m + k] = self.lp.rows[r].coeffs[j];
                }
            } else {
                bmat[(j - n) * m + k] = 1.0;
            }
        }
        let lu = Lu::factor(bmat, m)
            .ok_or_else(|| Error::NumericalFailure("singular basis at extraction".into()))?;

        // rhs = b - A_N x_N  (structural nonbasics at their bounds; nonbasic
        // slacks contribute through the identity columns).
        let mut rhs: Vec<f64> = self.lp.rows.iter().map(|row| row.rhs).collect();
        let mut x = vec![0.0; n];
        for j in 0..n {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(j);
            x[j] = v;
            if v != 0.0 {
                for r in 0..m {
                    rhs[r] -= self.lp.rows[r].coeffs[j] * v;
                }
            }
        }
        for (slack_idx, r) in (n..self.n_total).zip(0..m) {
            if !matches!(self.state[slack_idx], VarState::Basic(_)) {
                let v = self.nonbasic_value(slack_idx);
                if v != 0.0 {
                    rhs[r] -= v;
                }
            }
        }
        let xb = lu.solve(&rhs);
        for (k, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = xb[k];
            }
        }

        // Duals: y solves B' y = c_B; the slack-column structure gives y
        // directly as the multiplier vector of the original rows.
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(j)).collect();
        let duals = lu.solve_transposed(&cb);

        let objective = self
            .lp
            .objective
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum::<f64>();
        Ok(LpSolution { status: LpStatus::Optimal, x, objective, duals, ray: None })
    }
}

fn initial_state(l: f64, u: f64) -> VarState {
    if l.is_finite() && u.is_finite() {
        if l.abs() <= u.abs() {
            VarState::AtLower
        } else {
            VarState::AtUpper
        }
    } else if l.is_finite() {
        VarState::AtLower
    } else if u.is_finite() {
        VarState::AtUpper
    } else {
        VarState::FreeAtZero
    }
}

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting, used for the final basis refresh.
// ---------------------------------------------------------------------------

struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[perm[k] * n + k].abs();
            for r in k + 1..n {
                let v = a[perm[r] * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-13 {
                return None;
            }
            perm.swap(k, p);
            let pk = perm[k];
            let akk = a[pk * n + k];
            for r in k + 1..n {
                let pr = perm[r];
                let f = a[pr * n + k] / akk;
                a[pr * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        a[pr * n + c] -= f * a[pk * n + c];
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for k in 0..i {
                v -= self.lu[self.perm[i] * n + k] * y[k];
            }
            y[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= self.lu[self.perm[i] * n + k] * y[k];
            }
            y[i] = v / self.lu[self.perm[i] * n + i];
        }
        y
    }

    /// Solve `A' y = c` by explicit forward/back substitution on the factors
    /// of `A` (PA = LU implies A' = U' L' P).
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        // U' z = c (forward, U upper): z_0 first.
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut v = c[i];
            for k in 0..i {
                v -= self.lu[self.perm[k] * n + i] * z[k];
            }
            z[i] = v / self.lu[self.perm[i] * n + i];
        }
        // L' w = z (backward, L unit-lower).
        let mut w = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in i + 1..n {
                v -= self.lu[self.perm[k] * n + i] * w[k];
            }
            w[i] = v;
        }
        // y = P' w: y[perm[i]] = w[i].
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.perm[i]] = w[i];
        }
        y
    }
}

// ---------------------------------------------------------------------------
// Dual transform for tall programs.
// ---------------------------------------------------------------------------

enum DualOutcome {
    Solved(LpSolution),
    NeedPrimal,
}

/// Solve a tall one-sided-bounds program through its dual.
///
/// Variables are first shifted so every finite bound sits at zero; the dual
/// then has one variable per primal row and one row per primal variable, so
/// the simplex basis has the size of the (small) variable count.
fn solve_via_dual(lp: &LinearProgram) -> Result<DualOutcome> {
    let n = lp.num_vars();
    let m = lp.rows.len();

    // Shift data: x_j = shift_j + sign_j * z_j with z_j >= 0 or free.
    let mut shift = vec![0.0; n];
    let mut sign = vec![1.0; n];
    let mut z_nonneg = vec![false; n];
    for (j, &(l, u)) in lp.bounds.iter().enumerate() {
        if l.is_finite() {
            shift[j] = l;
            z_nonneg[j] = true;
        } else if u.is_finite() {
            shift[j] = u;
            sign[j] = -1.0;
            z_nonneg[j] = true;
        }
    }
    let obj_const: f64 = (0..n).map(|j| lp.objective[j] * shift[j]).sum();

    let mut dual = LinearProgram::new(
        lp.rows.iter().map(|row| -row.rhs_shifted(&shift)).collect(),
        lp.rows
            .iter()
            .map(|row| match row.relation {
                Relation::Ge => (0.0, f64::INFINITY),
                Relation::Le => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (f64::NEG_INFINITY, f64::INFINITY),
            })
            .collect(),
    );
    for j in 0..n {
        let coeffs: Vec<f64> = lp.rows.iter().map(|row| sign[j] * row.coeffs[j]).collect();
        let rel = if z_nonneg[j] { Relation::Le } else { Relation::Eq };
        dual.add_row(coeffs, rel, sign[j] * lp.objective[j]);
    }

    let dsol = Simplex::new(&dual).run()?;
    match dsol.status {
        LpStatus::Optimal => {
            // Primal variables are the negated duals of the dual's rows;
            // primal duals are the dual's variables.
            let mut x = vec![0.0; n];
            for j in 0..n {
                let z = -dsol.duals[j];
                x[j] = shift[j] + sign[j] * z;
            }
            let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            debug_assert!(
                (objective - (-dsol.objective + obj_const)).abs()
                    <= 1e-6 * (1.0 + objective.abs()),
                "dual mapping objective mismatch: {objective} vs {}",
                -dsol.objective + obj_const
            );
            Ok(DualOutcome::Solved(LpSolution {
                status: LpStatus::Optimal,
                x,
                objective,
                duals: dsol.x,
                ray: None,
            }))
        }
        // Dual unbounded => primal infeasible.
        LpStatus::Unbounded => Ok(DualOutcome::Solved(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; m],
            ray: None,
        })),
        // Dual infeasible: primal is unbounded or infeasible; let the direct
        // path decide.
        LpStatus::Infeasible => Ok(DualOutcome::NeedPrimal),
    }
}

impl Row {
    fn rhs_shifted(&self, shift: &[f64]) -> f64 {
        let mut b = self.rhs;
        for (a, s) in self.coeffs.iter().zip(shift) {
            if *s != 0.0 {
                b -= a * s;
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn free() -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn nonneg() -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    #[test]
    fn min_x_subject_to_x_ge_3() {
        let mut lp = LinearProgram::new(vec![1.0], vec![free()]);
        lp.add_row(vec![1.0], Relation::Ge, 3.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, 3.0, epsilon = 1e-10);
        assert_relative_eq!(sol.x[0], 3.0, epsilon = 1e-10);
        assert_relative_eq!(sol.duals[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn simplex_vertex_on_segment() {
        let mut lp = LinearProgram::new(vec![-1.0, -1.0], vec![nonneg(), nonneg()]);
        lp.add_row(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, -1.0, epsilon = 1e-10);
        // Any point of the segment {(1,0),(0,1)} is optimal; a vertex is returned.
        assert_relative_eq!(sol.x[0] + sol.x[1], 1.0, epsilon = 1e-10);
        assert!(sol.x[0].min(sol.x[1]) > -1e-10);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(vec![0.0], vec![free()]);
        lp.add_row(vec![1.0], Relation::Ge, 1.0);
        lp.add_row(vec![1.0], Relation::Le, 0.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(vec![-1.0], vec![nonneg()]);
        lp.add_row(vec![-1.0], Relation::Le, 5.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_boxed_vars() {
        // min -x - 2y s.t. x + y = 4, x in [0,3], y in [0,3]
        let mut lp = LinearProgram::new(vec![-1.0, -2.0], vec![(0.0, 3.0), (0.0, 3.0)]);
        lp.add_row(vec![1.0, 1.0], Relation::Eq, 4.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.x[1], 3.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.objective, -7.0, epsilon = 1e-9);
    }

    #[test]
    fn extend_with_implied_row_keeps_objective() {
        let mut lp = LinearProgram::new(vec![1.0], vec![free()]);
        lp.add_row(vec![1.0], Relation::Ge, 3.0);
        let before = lp.solve().unwrap().objective;
        let after = lp
            .extend_and_resolve(vec![Row::new(vec![1.0], Relation::Ge, 2.0)])
            .unwrap()
            .objective;
        assert_eq!(before, after);
    }

    #[test]
    fn extend_with_cut_is_monotone_and_matches_scratch() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![free(), free()]);
        lp.add_row(vec![1.0, 0.0], Relation::Ge, 1.0);
        lp.add_row(vec![0.0, 1.0], Relation::Ge, 1.0);
        let first = lp.solve().unwrap().objective;
        let cut = Row::new(vec![1.0, 1.0], Relation::Ge, 5.0);

        let mut scratch = lp.clone();
        scratch.rows.push(cut.clone());
        let scratch_sol = scratch.solve().unwrap();

        let ext_sol = lp.extend_and_resolve(vec![cut]).unwrap();
        assert!(ext_sol.objective >= first - 1e-12);
        assert_eq!(ext_sol.status, scratch_sol.status);
        assert!((ext_sol.objective - scratch_sol.objective).abs() <= 1e-9);
        assert_relative_eq!(ext_sol.objective, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn dual_path_agrees_with_direct_path() {
        // Tall program: min x + y with many >= rows; force both paths and compare.
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![free(), nonneg()]);
        for k in 0..40 {
            let a = 1.0 + (k as f64) * 0.1;
            lp.add_row(vec![a, 1.0], Relation::Ge, a * 2.0 - 1.0 + (k % 3) as f64);
        }
        let direct = Simplex::new(&lp).run().unwrap();
        let via_dual = match solve_via_dual(&lp).unwrap() {
            DualOutcome::Solved(s) => s,
            DualOutcome::NeedPrimal => panic!("dual path should solve this"),
        };
        assert_eq!(direct.status, LpStatus::Optimal);
        assert_eq!(via_dual.status, LpStatus::Optimal);
        assert_relative_eq!(direct.objective, via_dual.objective, max_relative = 1e-8);
        for r in 0..lp.rows.len() {
            assert!(
                (direct.duals[r] - via_dual.duals[r]).abs() < 1e-7,
                "dual {r}: {} vs {}",
                direct.duals[r],
                via_dual.duals[r]
            );
        }
    }

    #[test]
    fn duals_satisfy_strong_duality_on_mixed_program() {
        // min 2x + 3y - z s.t. x+y+z >= 4, x - y <= 2, x+2z = 3, x,y >= 0, z free
        let mut lp = LinearProgram::new(vec![2.0, 3.0, -1.0], vec![nonneg(), nonneg(), free()]);
        lp.add_row(vec![1.0, 1.0, 1.0], Relation::Ge, 4.0);
        lp.add_row(vec![1.0, -1.0, 0.0], Relation::Le, 2.0);
        lp.add_row(vec![1.0, 0.0, 2.0], Relation::Eq, 3.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // Strong duality: c'x = y'b (bounds all at zero or infinite).
        let yb: f64 = sol.duals.iter().zip(&lp.rows).map(|(y, r)| y * r.rhs).sum();
        assert_relative_eq!(sol.objective, yb, epsilon = 1e-8);
        // Sign convention.
        assert!(sol.duals[0] >= -1e-10);
        assert!(sol.duals[1] <= 1e-10);
        // Primal feasibility.
        for row in &lp.rows {
            let lhs: f64 = row.coeffs.iter().zip(&sol.x).map(|(a, v)| a * v).sum();
            match row.relation {
                Relation::Ge => assert!(lhs >= row.rhs - 1e-8),
                Relation::Le => assert!(lhs <= row.rhs + 1e-8),
                Relation::Eq => assert_relative_eq!(lhs, row.rhs, epsilon = 1e-8),
            }
        }
    }

    #[test]
    fn dump_has_one_line_per_constraint() {
        let mut lp = LinearProgram::new(vec![1.0, -1.0], vec![nonneg(), free()]);
        lp.add_row(vec![1.0, 2.0], Relation::Le, 3.0);
        lp.add_row(vec![-1.0, 0.5], Relation::Ge, -1.0);
        let dump = lp.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].ends_with("<= 3"));
        assert!(lines[3].ends_with(">= -1"));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![free(), free()]);
        lp.add_row(vec![1.0], Relation::Ge, 0.0);
        assert!(matches!(lp.solve(), Err(Error::InvalidProgram(_))));
    }
}
