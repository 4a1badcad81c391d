//! Daily delta-hedge simulation of the forward-start call under a benchmark
//! model, with self-financing bookkeeping and the normalized terminal gap.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};
use crate::models::black_scholes::bs_forward_start_price;
use crate::models::heston::{heston_call_price_with_v0, heston_forward_start_price, HestonParams, McConfig};
use crate::models::local_vol::LocalVolSurface;
use crate::models::{bump_delta, DELTA_BUMP};

/// The benchmark model driving prices and deltas.
#[derive(Debug, Clone)]
pub enum HedgeModel {
    BlackScholes { sigma: f64, r: f64 },
    Heston { params: HestonParams },
    LocalVol { surface: LocalVolSurface, r: f64 },
}

/// Simulation settings; Monte Carlo models derive one seed per day so the
/// bumped and unbumped pricings share random numbers.
#[derive(Debug, Clone)]
pub struct HedgeSimConfig {
    pub mc: McConfig,
    pub alpha: f64,
    /// Record finite-difference gamma and theta alongside each day.
    pub diagnostics: bool,
}

impl Default for HedgeSimConfig {
    fn default() -> Self {
        Self { mc: McConfig { n_paths: 5_000, steps_per_year: 250, seed: 0 }, alpha: DELTA_BUMP, diagnostics: true }
    }
}

/// One day of the hedge ledger.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HedgeDay {
    pub date: NaiveDate,
    pub spot: f64,
    pub delta: f64,
    pub cash: f64,
    pub value: f64,
    /// Diagnostics only; the rebalancing rule is pure delta.
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
}

/// Outcome of a hedge simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HedgeSimResult {
    pub days: Vec<HedgeDay>,
    pub initial_price: f64,
    pub terminal_value: f64,
    pub payoff: f64,
    /// (terminal value − payoff) / S0.
    pub gap: f64,
}

/// Run a self-financing daily delta hedge of `(S_{t2} - S_{t1})^+` along a
/// realized daily path.
///
/// `path[k]` is the spot on `t0 + k` days; the path must reach exactly `t2`.
/// The initial cash endowment is the model price at `t0`; each day the
/// position is re-deltaed and cash accrues on the supplied curve.
pub fn simulate_delta_hedge(
    model: &HedgeModel,
    path: &[f64],
    t0: NaiveDate,
    t1: NaiveDate,
    t2: NaiveDate,
    curve: &YieldCurveParams,
    cfg: &HedgeSimConfig,
) -> Result<HedgeSimResult> {
    let i1 = (t1 - t0).num_days();
    let i2 = (t2 - t0).num_days();
    if !(i1 > 0 && i2 > i1) {
        return Err(Error::InvalidInterval(format!("need t0 < t1 < t2, got {t0}, {t1}, {t2}")));
    }
    let (i1, i2) = (i1 as usize, i2 as usize);
    if path.len() != i2 + 1 {
        return Err(Error::InvalidInput(format!(
            "path has {} points but t0..t2 spans {} days",
            path.len(),
            i2 + 1
        )));
    }

    let t1y = i1 as f64 / 365.0;
    let t2y = i2 as f64 / 365.0;
    let s1_realized = path[i1];

    let price_at = |day: usize, spot: f64, seed: u64, t_years: f64| -> Result<f64> {
        let strike = (day >= i1).then_some(s1_realized);
        model_price(model, spot, t_years, t1y, t2y, strike, &cfg.mc, seed)
    };

    let initial_price = price_at(0, path[0], day_seed(cfg.mc.seed, 0), 0.0)?;
    let mut cash = initial_price;
    let mut delta_prev = 0.0;
    let mut days = Vec::with_capacity(i2 + 1);
    let mut prev_date = t0;

    for k in 0..=i2 {
        let date = t0 + chrono::Duration::days(k as i64);
        let spot = path[k];
        let t_years = k as f64 / 365.0;
        if k > 0 {
            cash *= curve.compounding_factor(prev_date, date)?;
        }
        let (delta, gamma, theta) = if k < i2 {
            let seed = day_seed(cfg.mc.seed, k);
            let delta = bump_delta(spot, cfg.alpha, |s| price_at(k, s, seed, t_years))?;
            let (gamma, theta) = if cfg.diagnostics {
                let p0 = price_at(k, spot, seed, t_years)?;
                let pu = price_at(k, spot * (1.0 + cfg.alpha), seed, t_years)?;
                let pd = price_at(k, spot * (1.0 - cfg.alpha), seed, t_years)?;
                let g = (pu - 2.0 * p0 + pd) / (cfg.alpha * spot).powi(2);
                let pt = price_at(k + 1, spot, seed, t_years + 1.0 / 365.0)?;
                (Some(g), Some(pt - p0))
            } else {
                (None, None)
            };
            cash -= (delta - delta_prev) * spot;
            (delta, gamma, theta)
        } else {
            // Expiry: unwind the stock position.
            cash += delta_prev * spot;
            (0.0, None, None)
        };
        let value = cash + delta * spot;
        days.push(HedgeDay { date, spot, delta, cash, value, gamma, theta });
        delta_prev = delta;
        prev_date = date;
    }

    let terminal_value = days.last().expect("nonempty").value;
    let payoff = (path[i2] - s1_realized).max(0.0);
    Ok(HedgeSimResult {
        days,
        initial_price,
        terminal_value,
        payoff,
        gap: (terminal_value - payoff) / path[0],
    })
}

fn day_seed(base: u64, day: usize) -> u64 {
    base ^ (day as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Model price of the forward-start call at `t_years` from inception.
///
/// `known_strike` is the realized `S_{t1}` once the fixing has passed; the
/// Heston variance state is proxied by its conditional expectation.
fn model_price(
    model: &HedgeModel,
    spot: f64,
    t_years: f64,
    t1y: f64,
    t2y: f64,
    known_strike: Option<f64>,
    mc: &McConfig,
    seed: u64,
) -> Result<f64> {
    match model {
        HedgeModel::BlackScholes { sigma, r } => {
            bs_forward_start_price(spot, t_years, t1y, t2y, *sigma, *r, known_strike)
        }
        HedgeModel::Heston { params } => {
            let v_t = params.expected_variance(t_years);
            match known_strike {
                Some(k) if t_years >= t1y => {
                    let tau = t2y - t_years;
                    if tau <= 1e-12 {
                        return Ok((spot - k).max(0.0));
                    }
                    heston_call_price_with_v0(params, v_t, spot, k, tau)
                }
                _ => {
                    let est = heston_forward_start_price(
                        params,
                        spot,
                        v_t,
                        t1y - t_years,
                        t2y - t_years,
                        &McConfig { seed, ..*mc },
                    )?;
                    Ok(est.value)
                }
            }
        }
        HedgeModel::LocalVol { surface, r } => {
            local_vol_forward_start_mc(surface, *r, spot, t_years, t1y, t2y, known_strike, mc, seed)
        }
    }
}

/// Monte Carlo forward-start price under a local-volatility diffusion
/// (log-Euler, one daily step granularity scaled by `steps_per_year`).
#[allow(clippy::too_many_arguments)]
fn local_vol_forward_start_mc(
    surface: &LocalVolSurface,
    r: f64,
    spot: f64,
    t_years: f64,
    t1y: f64,
    t2y: f64,
    known_strike: Option<f64>,
    mc: &McConfig,
    seed: u64,
) -> Result<f64> {
    let tau2 = t2y - t_years;
    if tau2 <= 1e-12 {
        let k = known_strike.unwrap_or(spot);
        return Ok((spot - k).max(0.0));
    }
    let steps = ((tau2 * mc.steps_per_year as f64).ceil() as usize).max(1);
    let dt = tau2 / steps as f64;
    let fix_step = if t_years >= t1y {
        0
    } else {
        (((t1y - t_years) / tau2 * steps as f64).round() as usize).clamp(1, steps)
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n_pairs = mc.n_paths.div_ceil(2);
    let mut sum = 0.0;
    let mut normals = vec![0.0f64; steps];
    for _ in 0..n_pairs {
        for z in normals.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
        for sign in [1.0f64, -1.0] {
            let mut s = spot;
            let mut strike = known_strike.unwrap_or(if fix_step == 0 { spot } else { f64::NAN });
            for (step, z) in normals.iter().enumerate() {
                let t_abs = t_years + step as f64 * dt;
                let sig = surface.vol(t_abs, s).max(1e-8);
                s *= ((r - 0.5 * sig * sig) * dt + sig * dt.sqrt() * sign * z).exp();
                if step + 1 == fix_step && known_strike.is_none() {
                    strike = s;
                }
            }
            sum += (s - strike).max(0.0);
        }
    }
    Ok((-r * tau2).exp() * sum / (2 * n_pairs) as f64)
}
