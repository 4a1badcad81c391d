//! Svensson-extended Nelson–Siegel zero curve and continuously compounded factors.
//!
//! The Fed publishes Svensson (two-hump) parameters; setting `beta3 = 0`
//! recovers the plain Nelson–Siegel curve. Day count is ACT/365 with
//! continuous compounding throughout.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a Svensson yield curve, rates as decimals per annum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldCurveParams {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// First decay scale in years, > 0.
    pub tau1: f64,
    /// Second decay scale in years, > 0.
    pub tau2: f64,
}

impl YieldCurveParams {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, beta3: f64, tau1: f64, tau2: f64) -> Result<Self> {
        if !(tau1 > 0.0) || !(tau2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "curve decay scales must be positive, got tau1={tau1}, tau2={tau2}"
            )));
        }
        let p = Self { beta0, beta1, beta2, beta3, tau1, tau2 };
        if !p.yield_at(1.0).is_finite() {
            return Err(Error::InvalidInput("curve yields non-finite values".into()));
        }
        Ok(p)
    }

    /// A flat curve at rate `r`, handy for tests and synthetic markets.
    pub fn flat(r: f64) -> Self {
        Self { beta0: r, beta1: 0.0, beta2: 0.0, beta3: 0.0, tau1: 1.0, tau2: 1.0 }
    }

    /// Continuously compounded zero yield at tenor `tau` (years).
    ///
    /// y(τ) = β0 + β1·(1−e^{−τ/τ1})/(τ/τ1)
    ///           + β2·[(1−e^{−τ/τ1})/(τ/τ1) − e^{−τ/τ1}]
    ///           + β3·[(1−e^{−τ/τ2})/(τ/τ2) − e^{−τ/τ2}]
    pub fn yield_at(&self, tau: f64) -> f64 {
        let x1 = tau / self.tau1;
        let x2 = tau / self.tau2;
        let e1 = (-x1).exp();
        let e2 = (-x2).exp();
        let load1 = (1.0 - e1) / x1;
        let load2 = (1.0 - e2) / x2;
        self.beta0 + self.beta1 * load1 + self.beta2 * (load1 - e1) + self.beta3 * (load2 - e2)
    }

    /// Like [`yield_at`](Self::yield_at) but rejects nonpositive tenors.
    pub fn try_yield_at(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::InvalidTenor(tau));
        }
        Ok(self.yield_at(tau))
    }

    /// Growth factor e^{y(τ)·τ} over `[from, to]`, τ in ACT/365 years.
    ///
    /// Returns exactly 1 when `from == to`.
    pub fn compounding_factor(&self, from: NaiveDate, to: NaiveDate) -> Result<f64> {
        if to < from {
            return Err(Error::InvalidInterval(format!("{from} > {to}")));
        }
        if to == from {
            return Ok(1.0);
        }
        let tau = year_fraction(from, to);
        Ok((self.yield_at(tau) * tau).exp())
    }

    /// Discount factor, the reciprocal of [`compounding_factor`](Self::compounding_factor).
    pub fn discount_factor(&self, from: NaiveDate, to: NaiveDate) -> Result<f64> {
        Ok(1.0 / self.compounding_factor(from, to)?)
    }
}

/// ACT/365 year fraction between two dates.
pub fn year_fraction(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64 / 365.0
}
