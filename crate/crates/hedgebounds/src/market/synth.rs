//! Synthetic two-maturity markets priced under a Heston model, standing in
//! for proprietary quote feeds in tests and demos.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Keys:
//! `underlying, s0, quote_date, t1_days, gap_days, n_snapshots, step_days,
//! strikes_per_slice, strike_lo, strike_hi, half_spread, volume_scale,
//! v0, kappa, theta, sigma, rho, r, seed`.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketSnapshot, OptionQuote};
use crate::models::heston::{heston_call_price, simulate_daily_path, HestonParams};

/// Synthetic world settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub underlying: String,
    pub s0: f64,
    pub quote_date: NaiveDate,
    /// Days from quote date to the first maturity.
    pub t1_days: i64,
    /// Days between the two maturities.
    pub gap_days: i64,
    pub n_snapshots: usize,
    /// Days between consecutive snapshot quote dates.
    pub step_days: i64,
    pub strikes_per_slice: usize,
    /// Lowest strike as a fraction of spot.
    pub strike_lo: f64,
    /// Highest strike as a fraction of spot.
    pub strike_hi: f64,
    pub half_spread: f64,
    pub volume_scale: f64,
    pub heston: HestonParams,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            underlying: "SYN".into(),
            s0: 100.0,
            quote_date: NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(),
            t1_days: 21,
            gap_days: 28,
            n_snapshots: 5,
            step_days: 7,
            strikes_per_slice: 8,
            strike_lo: 0.75,
            strike_hi: 1.25,
            half_spread: 0.10,
            volume_scale: 1000.0,
            heston: HestonParams { v0: 0.04, kappa: 1.5, theta: 0.04, sigma: 0.3, rho: -0.6, r: 0.02 },
            seed: 42,
        }
    }
}

impl SynthConfig {
    /// Parse the flat key-value format. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("synth config line {}: expected `key = value`", lineno + 1))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let f = |v: &str, k: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::InvalidInput(format!("synth config `{k}`: bad number `{v}`")))
        };
        for (k, v) in kv {
            match k.as_str() {
                "underlying" => cfg.underlying = v,
                "s0" => cfg.s0 = f(&v, &k)?,
                "quote_date" => {
                    cfg.quote_date = v
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("synth config `quote_date`: bad date `{v}`")))?
                }
                "t1_days" => cfg.t1_days = f(&v, &k)? as i64,
                "gap_days" => cfg.gap_days = f(&v, &k)? as i64,
                "n_snapshots" => cfg.n_snapshots = f(&v, &k)? as usize,
                "step_days" => cfg.step_days = f(&v, &k)? as i64,
                "strikes_per_slice" => cfg.strikes_per_slice = f(&v, &k)? as usize,
                "strike_lo" => cfg.strike_lo = f(&v, &k)?,
                "strike_hi" => cfg.strike_hi = f(&v, &k)?,
                "half_spread" => cfg.half_spread = f(&v, &k)?,
                "volume_scale" => cfg.volume_scale = f(&v, &k)?,
                "v0" => cfg.heston.v0 = f(&v, &k)?,
                "kappa" => cfg.heston.kappa = f(&v, &k)?,
                "theta" => cfg.heston.theta = f(&v, &k)?,
                "sigma" => cfg.heston.sigma = f(&v, &k)?,
                "rho" => cfg.heston.rho = f(&v, &k)?,
                "r" => cfg.heston.r = f(&v, &k)?,
                "seed" => cfg.seed = f(&v, &k)? as u64,
                other => return Err(Error::InvalidInput(format!("synth config: unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        if !(self.s0 > 0.0) || !(self.half_spread >= 0.0) {
            return Err(Error::InvalidInput("need s0 > 0 and half_spread >= 0".into()));
        }
        if self.t1_days <= 0 || self.gap_days <= 0 || self.strikes_per_slice < 2 {
            return Err(Error::InvalidInput(
                "need t1_days > 0, gap_days > 0, strikes_per_slice >= 2".into(),
            ));
        }
        if !(self.strike_lo > 0.0 && self.strike_hi > self.strike_lo) {
            return Err(Error::InvalidInput("need 0 < strike_lo < strike_hi".into()));
        }
        Ok(())
    }
}

/// One generated market: quotes, the realized path, and its endpoints.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub snapshot: MarketSnapshot,
    /// Realized daily spots from t0 to t2 inclusive.
    pub daily_path: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
}

/// Generate one synthetic snapshot plus a realized path under the same model.
///
/// Call mids come from the semi-analytic Heston pricer; bid/ask sit a
/// half-spread below/above (bids floored at zero). The path is full-truncation
/// Euler with one step per calendar day; everything is a pure function of the
/// seed.
pub fn generate_synthetic_market(
    heston: &HestonParams,
    underlying: &str,
    s0: f64,
    t0: NaiveDate,
    t1: NaiveDate,
    t2: NaiveDate,
    strikes: &[f64],
    half_spread: f64,
    volume_scale: f64,
    seed: u64,
) -> Result<SynthOutput> {
    heston.validate()?;
    if !(s0 > 0.0) {
        return Err(Error::InvalidModel(format!("spot must be positive, got {s0}")));
    }
    if half_spread < 0.0 {
        return Err(Error::InvalidModel(format!("half_spread must be >= 0, got {half_spread}")));
    }
    let tau1 = (t1 - t0).num_days() as f64 / 365.0;
    let tau2 = (t2 - t0).num_days() as f64 / 365.0;
    if !(tau1 > 0.0 && tau2 > tau1) {
        return Err(Error::InvalidInterval(format!("need t0 < t1 < t2, got {t0}, {t1}, {t2}")));
    }

    let make_slice = |maturity: NaiveDate, tau: f64| -> Result<Vec<OptionQuote>> {
        strikes
            .iter()
            .map(|&k| {
                let mid = heston_call_price(heston, s0, k, tau)?;
                let bid = (mid - half_spread).max(0.0);
                let ask = mid + half_spread;
                let volume = (volume_scale * (-5.0 * (k / s0 - 1.0).abs()).exp()).round() as u64;
                Ok(OptionQuote {
                    underlying: underlying.to_string(),
                    quote_date: t0,
                    maturity,
                    strike: k,
                    bid,
                    ask,
                    volume: volume.max(1),
                })
            })
            .collect()
    };
    let slice_1 = make_slice(t1, tau1)?;
    let slice_2 = make_slice(t2, tau2)?;
    let snapshot = MarketSnapshot::new(underlying, s0, t0, t1, t2, slice_1, slice_2)?;

    let n_days = (t2 - t0).num_days() as usize;
    let daily_path = simulate_daily_path(heston, s0, n_days, seed)?;
    let i1 = (t1 - t0).num_days() as usize;
    let s1 = daily_path[i1];
    let s2 = daily_path[n_days];
    Ok(SynthOutput { snapshot, daily_path, s1, s2 })
}

/// Uniform strike ladder over `[lo, hi] * s0`, rounded to cents.
pub fn strike_ladder(s0: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let m = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            (s0 * m * 100.0).round() / 100.0
        })
        .collect()
}
