//! Black–Scholes pricing, implied volatility, and the forward-start formula.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// European call price.
pub fn bs_call_price(s: f64, k: f64, tau: f64, sigma: f64, r: f64) -> f64 {
    if tau <= 0.0 || sigma <= 0.0 {
        return (s - k * (-r * tau.max(0.0)).exp()).max(0.0);
    }
    let sq = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * tau) / sq;
    let d2 = d1 - sq;
    s * norm_cdf(d1) - k * (-r * tau).exp() * norm_cdf(d2)
}

/// Analytic call delta.
pub fn bs_delta(s: f64, k: f64, tau: f64, sigma: f64, r: f64) -> f64 {
    let sq = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * tau) / sq;
    norm_cdf(d1)
}

/// Analytic vega.
pub fn bs_vega(s: f64, k: f64, tau: f64, sigma: f64, r: f64) -> f64 {
    let sq = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * tau) / sq;
    s * tau.sqrt() * norm_pdf(d1)
}

/// Invert the call price to an implied volatility.
///
/// Safeguarded Newton within a bisection bracket; the returned volatility
/// reprices to within 1e-10 of `price`.
pub fn implied_vol(price: f64, s: f64, k: f64, tau: f64, r: f64) -> Result<f64> {
    let lo_price = (s - k * (-r * tau).exp()).max(0.0);
    let hi_price = s;
    if !(price >= lo_price - 1e-12 && price <= hi_price + 1e-12) {
        return Err(Error::NoImpliedVol { price, lo: lo_price, hi: hi_price });
    }
    let price = price.clamp(lo_price, hi_price);

    let (mut lo, mut hi) = (1e-9, 10.0);
    // Brenner–Subrahmanyam starting point.
    let mut sigma = ((2.0 * std::f64::consts::PI / tau).sqrt() * price / s).clamp(1e-4, 3.0);
    for _ in 0..200 {
        let err = bs_call_price(s, k, tau, sigma, r) - price;
        if err.abs() <= 1e-10 {
            return Ok(sigma);
        }
        if err > 0.0 {
            hi = sigma;
        } else {
            lo = sigma;
        }
        let vega = bs_vega(s, k, tau, sigma, r);
        let newton = sigma - err / vega;
        sigma = if vega > 1e-12 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let err = bs_call_price(s, k, tau, sigma, r) - price;
    if err.abs() <= 1e-8 {
        Ok(sigma)
    } else {
        Err(Error::NumericalFailure(format!(
            "implied vol iteration stalled at sigma={sigma}, residual {err}"
        )))
    }
}

/// Price at time `t` of the forward-start at-the-money call `(S_{t2} - S_{t1})^+`.
///
/// Before the strike-fix date (`t <= t1`) homogeneity gives
/// `S_t * C_BS(1, 1, t2 - t1, sigma, r)`. After `t1` the strike is the
/// realized `S_{t1}`, which must be supplied via `known_strike`, and the plain
/// vanilla formula applies with tenor `t2 - t`.
///
/// Times are year fractions measured from a common origin.
pub fn bs_forward_start_price(
    s_t: f64,
    t: f64,
    t1: f64,
    t2: f64,
    sigma: f64,
    r: f64,
    known_strike: Option<f64>,
) -> Result<f64> {
    if !(t1 < t2) || t > t2 {
        return Err(Error::InvalidInterval(format!("need t <= t2 and t1 < t2, got t={t}, t1={t1}, t2={t2}")));
    }
    if t <= t1 {
        Ok(s_t * bs_call_price(1.0, 1.0, t2 - t1, sigma, r))
    } else {
        let strike = known_strike.ok_or_else(|| {
            Error::InvalidInterval("strike already fixed at t1; pass the realized S_{t1}".into())
        })?;
        Ok(bs_call_price(s_t, strike, t2 - t, sigma, r))
    }
}
