//! Heston stochastic volatility: semi-analytic calls via the characteristic
//! function, seeded Monte Carlo for forward-starts, and least-squares
//! calibration to quote surfaces.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Heston model parameters under the pricing measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    /// Initial variance.
    pub v0: f64,
    /// Mean-reversion speed of the variance.
    pub kappa: f64,
    /// Long-run variance level.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Spot/variance correlation.
    pub rho: f64,
    /// Continuously compounded rate.
    pub r: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v0 >= 0.0)
            || !(self.kappa > 0.0)
            || !(self.theta > 0.0)
            || !(self.sigma > 0.0)
            || !(self.rho >= -1.0 && self.rho <= 1.0)
            || !self.r.is_finite()
        {
            return Err(Error::InvalidModel(format!("{self:?}")));
        }
        Ok(())
    }

    /// 2*kappa*theta / sigma^2; below 1 the variance can touch zero.
    pub fn feller_ratio(&self) -> f64 {
        2.0 * self.kappa * self.theta / (self.sigma * self.sigma)
    }

    /// E[v_t] along the variance mean-reversion, used as the variance state
    /// proxy when re-pricing mid-life without a filtered variance.
    pub fn expected_variance(&self, t: f64) -> f64 {
        self.theta + (self.v0 - self.theta) * (-self.kappa * t).exp()
    }
}

/// European call via the Heston characteristic function.
///
/// Two-probability representation with the branch-cut-safe ("little trap")
/// parameterization; adaptive Gauss–Legendre panels target an absolute
/// integration error of 1e-6.
pub fn heston_call_price(params: &HestonParams, s: f64, k: f64, tau: f64) -> Result<f64> {
    params.validate()?;
    if !(s > 0.0 && k > 0.0 && tau > 0.0) {
        return Err(Error::InvalidInput(format!("need s, k, tau > 0; got {s}, {k}, {tau}")));
    }
    heston_call_price_with_v0(params, params.v0, s, k, tau)
}

/// Same as [`heston_call_price`] with an overridden initial variance, for
/// pricing mid-life at a variance state other than `v0`.
pub fn heston_call_price_with_v0(params: &HestonParams, v_t: f64, s: f64, k: f64, tau: f64) -> Result<f64> {
    let log_k = k.ln();
    let forward = s * (params.r * tau).exp();
    let df = (-params.r * tau).exp();

    let integrand = |u: f64| -> (f64, f64) {
        let iu = Complex64::new(0.0, u);
        let phi2 = heston_cf(params, v_t, s, tau, Complex64::new(u, 0.0));
        let phi1 = heston_cf(params, v_t, s, tau, Complex64::new(u, -1.0));
        let twiddle = (-iu * log_k).exp() / iu;
        let f2 = (twiddle * phi2).re;
        let f1 = (twiddle * phi1).re / forward;
        (f1, f2)
    };

    // Adaptive upper limit and panel count: double until the result is stable.
    let mut u_max = 200.0 / (1.0 + (v_t.max(params.theta) * tau).sqrt() * 10.0).min(20.0);
    u_max = u_max.max(50.0);
    let mut panels = 8usize;
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..8 {
        let (mut i1, mut i2) = (0.0, 0.0);
        let width = u_max / panels as f64;
        for p in 0..panels {
            let a = p as f64 * width;
            for (node, weight) in GL16 {
                let u = a + width * 0.5 * (node + 1.0);
                let (f1, f2) = integrand(u);
                i1 += weight * width * 0.5 * f1;
                i2 += weight * width * 0.5 * f2;
            }
        }
        let p1 = 0.5 + i1 / std::f64::consts::PI;
        let p2 = 0.5 + i2 / std::f64::consts::PI;
        if let Some((q1, q2)) = prev {
            if (p1 - q1).abs() + (p2 - q2).abs() < 5e-8 {
                let price = df * (forward * p1.clamp(0.0, 1.0) - k * p2.clamp(0.0, 1.0));
                return Ok(price.max(0.0));
            }
        }
        prev = Some((p1, p2));
        panels *= 2;
        u_max *= 1.5;
    }
    let (p1, p2) = prev.expect("at least one integration pass");
    if !(p1.is_finite() && p2.is_finite()) {
        return Err(Error::NumericalFailure("Heston characteristic-function integral diverged".into()));
    }
    Ok((df * (forward * p1.clamp(0.0, 1.0) - k * p2.clamp(0.0, 1.0))).max(0.0))
}

/// Characteristic function E[exp(i u ln S_tau)].
fn heston_cf(params: &HestonParams, v0: f64, s: f64, tau: f64, u: Complex64) -> Complex64 {
    let (kappa, theta, sigma, rho, r) = (params.kappa, params.theta, params.sigma, params.rho, params.r);
    let i = Complex64::new(0.0, 1.0);
    let iu = i * u;
    let sigma2 = sigma * sigma;

    let beta = Complex64::new(kappa, 0.0) - rho * sigma * iu;
    let d = (beta * beta + sigma2 * (iu + u * u)).sqrt();
    // "Little trap": keep |g| <= 1 by pairing beta with -d.
    let g = (beta - d) / (beta + d);

    let exp_dt = (-d * tau).exp();
    let one = Complex64::new(1.0, 0.0);
    let log_term = ((one - g * exp_dt) / (one - g)).ln();
    let big_c = iu * (s.ln() + r * tau) + kappa * theta / sigma2 * ((beta - d) * tau - 2.0 * log_term);
    let big_d = (beta - d) / sigma2 * (one - exp_dt) / (one - g * exp_dt);

    (big_c + big_d * v0).exp()
}

/// 16-point Gauss–Legendre nodes and weights on [-1, 1].
const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.027152459411754095),
    (-0.9445750230732326, 0.062253523938647894),
    (-0.8656312023878318, 0.09515851168249278),
    (-0.755404408355003, 0.12462897125553387),
    (-0.6178762444026438, 0.14959598881657673),
    (-0.45801677765722737, 0.16915651939500254),
    (-0.2816035507792589, 0.18260341504492358),
    (-0.09501250983763744, 0.1894506104550685),
    (0.09501250983763744, 0.1894506104550685),
    (0.2816035507792589, 0.18260341504492358),
    (0.45801677765722737, 0.16915651939500254),
    (0.6178762444026438, 0.14959598881657673),
    (0.755404408355003, 0.12462897125553387),
    (0.8656312023878318, 0.09515851168249278),
    (0.9445750230732326, 0.062253523938647894),
    (0.9894009349916499, 0.027152459411754095),
];

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// Seeded Monte Carlo settings: full-truncation Euler with antithetic pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_paths: 100_000, steps_per_year: 250, seed: 0 }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// Price of the forward-start call `(S_{t2} - S_{t1})^+` at a time `tau1`
/// years before the strike fix and `tau2` years before expiry.
///
/// `tau1 = 0` means the strike fixes now at `s_t`. The variance state is
/// `v_t`. Fully deterministic given the seed in `cfg`.
pub fn heston_forward_start_price(
    params: &HestonParams,
    s_t: f64,
    v_t: f64,
    tau1: f64,
    tau2: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    params.validate()?;
    if !(tau1 >= 0.0 && tau2 > tau1) {
        return Err(Error::InvalidInterval(format!("need 0 <= tau1 < tau2, got {tau1}, {tau2}")));
    }
    let df = (-params.r * tau2).exp();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let steps1 = ((tau1 * cfg.steps_per_year as f64).ceil() as usize).max(if tau1 > 0.0 { 1 } else { 0 });
    let steps2 = (((tau2 - tau1) * cfg.steps_per_year as f64).ceil() as usize).max(1);
    let n_pairs = cfg.n_paths.div_ceil(2);
    let (mut sum, mut sumsq) = (0.0, 0.0);
    let mut normals = vec![0.0f64; 2 * (steps1 + steps2)];
    for _ in 0..n_pairs {
        for z in normals.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
        for sign in [1.0, -1.0] {
            let mut s = s_t;
            let mut v = v_t;
            let mut idx = 0;
            let dt1 = if steps1 > 0 { tau1 / steps1 as f64 } else { 0.0 };
            for _ in 0..steps1 {
                step_full_truncation(params, &mut s, &mut v, dt1, sign * normals[idx], sign * normals[idx + 1]);
                idx += 2;
            }
            let s1 = s;
            let dt2 = (tau2 - tau1) / steps2 as f64;
            for _ in 0..steps2 {
                step_full_truncation(params, &mut s, &mut v, dt2, sign * normals[idx], sign * normals[idx + 1]);
                idx += 2;
            }
            let pay = df * (s - s1).max(0.0);
            sum += pay;
            sumsq += pay * pay;
        }
    }
    let n = (2 * n_pairs) as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok(McEstimate { value: mean, std_err: (var / n).sqrt() })
}

/// One full-truncation Euler step with log-Euler for the spot.
#[inline]
fn step_full_truncation(params: &HestonParams, s: &mut f64, v: &mut f64, dt: f64, z1: f64, z2: f64) {
    let vp = v.max(0.0);
    let zs = z1;
    let zv = params.rho * z1 + (1.0 - params.rho * params.rho).sqrt() * z2;
    *s *= ((params.r - 0.5 * vp) * dt + (vp * dt).sqrt() * zs).exp();
    *v += params.kappa * (params.theta - vp) * dt + params.sigma * (vp * dt).sqrt() * zv;
}

/// Simulate a daily price path over `n_days` calendar days (one Euler step
/// per day), returning `n_days + 1` prices starting at `s0`.
pub fn simulate_daily_path(params: &HestonParams, s0: f64, n_days: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dt = 1.0 / 365.0;
    let mut path = Vec::with_capacity(n_days + 1);
    let (mut s, mut v) = (s0, params.v0);
    path.push(s);
    for _ in 0..n_days {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        step_full_truncation(params, &mut s, &mut v, dt, z1, z2);
        path.push(s);
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// A quote the calibration fits: tenor in years, strike, and target mid.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationQuote {
    pub tau: f64,
    pub strike: f64,
    pub mid: f64,
}

/// Calibration outcome; `poor_fit` flags an RMSE above the caller's threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub params: HestonParams,
    pub rmse: f64,
    pub residuals: Vec<f64>,
    pub poor_fit: bool,
    /// v0 and theta are weakly separated with a single maturity slice.
    pub single_maturity: bool,
}

const BOX_LO: [f64; 5] = [1e-4, 0.05, 1e-4, 0.05, -0.99];
const BOX_HI: [f64; 5] = [2.0, 15.0, 2.0, 3.0, 0.99];

/// Least-squares fit of [`heston_call_price`] to quote mids.
///
/// Multi-start (fixed starts plus seeded jitter) Levenberg–Marquardt over a
/// bounded parameter box; deterministic given the seed. Parameters are
/// returned even when the fit is poor, with `poor_fit` set.
pub fn calibrate_heston(
    quotes: &[CalibrationQuote],
    spot: f64,
    r: f64,
    rmse_threshold: f64,
    seed: u64,
) -> Result<CalibrationReport> {
    if quotes.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "calibration needs at least 5 quotes, got {}",
            quotes.len()
        )));
    }
    let mut taus: Vec<f64> = quotes.iter().map(|q| q.tau).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let single_maturity = taus.len() < 2;

    // Seed an ATM-vol-scaled start from the quotes themselves.
    let atm = quotes
        .iter()
        .min_by(|a, b| (a.strike - spot).abs().total_cmp(&(b.strike - spot).abs()))
        .expect("nonempty");
    let atm_var = crate::models::black_scholes::implied_vol(atm.mid, spot, atm.strike, atm.tau, r)
        .map(|v| v * v)
        .unwrap_or(0.04);

    let mut starts: Vec<[f64; 5]> = vec![
        [atm_var, 1.5, atm_var, 0.5, -0.5],
        [atm_var * 1.5, 3.0, atm_var * 0.7, 1.0, -0.7],
        [0.04, 1.0, 0.04, 0.3, -0.3],
        [0.09, 5.0, 0.06, 1.5, 0.0],
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let u = |rng: &mut ChaCha20Rng| rand::Rng::gen_range(rng, 0.0..1.0);
        starts.push([
            (atm_var * (0.5 + u(&mut rng))).clamp(BOX_LO[0], BOX_HI[0]),
            0.3 + 6.0 * u(&mut rng),
            (atm_var * (0.5 + u(&mut rng))).clamp(BOX_LO[2], BOX_HI[2]),
            0.1 + 1.4 * u(&mut rng),
            -0.9 + 1.4 * u(&mut rng),
        ]);
    }

    let residuals = |p: &[f64; 5]| -> Result<Vec<f64>> {
        let params = HestonParams { v0: p[0], kappa: p[1], theta: p[2], sigma: p[3], rho: p[4], r };
        quotes
            .iter()
            .map(|q| Ok(heston_call_price(&params, spot, q.strike, q.tau)? - q.mid))
            .collect()
    };

    let mut best: Option<([f64; 5], f64)> = None;
    for start in &starts {
        if let Ok((p, sse)) = levenberg_marquardt(*start, &residuals) {
            if best.as_ref().map_or(true, |(_, b)| sse < *b) {
                best = Some((p, sse));
            }
        }
    }
    let (p, sse) = best.ok_or_else(|| Error::NumericalFailure("all calibration starts failed".into()))?;
    let params = HestonParams { v0: p[0], kappa: p[1], theta: p[2], sigma: p[3], rho: p[4], r };
    let res = residuals(&p)?;
    let rmse = (sse / quotes.len() as f64).sqrt();
    Ok(CalibrationReport {
        params,
        rmse,
        residuals: res,
        poor_fit: rmse > rmse_threshold,
        single_maturity,
    })
}

/// Box-projected Levenberg–Marquardt with forward-difference Jacobian.
fn levenberg_marquardt(
    mut p: [f64; 5],
    residuals: &dyn Fn(&[f64; 5]) -> Result<Vec<f64>>,
) -> Result<([f64; 5], f64)> {
    let clamp = |p: &mut [f64; 5]| {
        for i in 0..5 {
            p[i] = p[i].clamp(BOX_LO[i], BOX_HI[i]);
        }
    };
    clamp(&mut p);
    let mut r = residuals(&p)?;
    let mut sse: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for _ in 0..60 {
        // Forward-difference Jacobian.
        let m = r.len();
        let mut jac = vec![[0.0f64; 5]; m];
        for j in 0..5 {
            let h = (1e-6 * (1.0 + p[j].abs())).max(1e-8);
            let mut pj = p;
            pj[j] = (pj[j] + h).min(BOX_HI[j]);
            let hj = pj[j] - p[j];
            if hj == 0.0 {
                continue;
            }
            let rj = residuals(&pj)?;
            for i in 0..m {
                jac[i][j] = (rj[i] - r[i]) / hj;
            }
        }
        // Normal equations (J'J + lambda diag) d = -J'r.
        let mut jtj = [[0.0f64; 5]; 5];
        let mut jtr = [0.0f64; 5];
        for i in 0..m {
            for a in 0..5 {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..5 {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut aug = jtj;
            for a in 0..5 {
                aug[a][a] += lambda * (1.0 + jtj[a][a]);
            }
            let Some(d) = solve5(&aug, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = p;
            for a in 0..5 {
                cand[a] -= d[a];
            }
            clamp(&mut cand);
            let rc = residuals(&cand)?;
            let sc: f64 = rc.iter().map(|v| v * v).sum();
            if sc < sse {
                p = cand;
                r = rc;
                sse = sc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || sse < 1e-18 {
            break;
        }
    }
    Ok((p, sse))
}

/// Solve a 5x5 system by Gaussian elimination; None when singular.
fn solve5(a: &[[f64; 5]; 5], b: &[f64; 5]) -> Option<[f64; 5]> {
    let mut m = *a;
    let mut rhs = *b;
    let mut perm = [0usize, 1, 2, 3, 4];
    for k in 0..5 {
        let piv = (k..5).max_by(|&i, &j| m[perm[i]][k].abs().total_cmp(&m[perm[j]][k].abs()))?;
        perm.swap(k, piv);
        if m[perm[k]][k].abs() < 1e-14 {
            return None;
        }
        for i in k + 1..5 {
            let f = m[perm[i]][k] / m[perm[k]][k];
            for j in k..5 {
                m[perm[i]][j] -= f * m[perm[k]][j];
            }
            rhs[perm[i]] -= f * rhs[perm[k]];
        }
    }
    let mut x = [0.0f64; 5];
    for k in (0..5).rev() {
        let mut v = rhs[perm[k]];
        for j in k + 1..5 {
            v -= m[perm[k]][j] * x[j];
        }
        x[k] = v / m[perm[k]][k];
    }
    Some(x)
}
