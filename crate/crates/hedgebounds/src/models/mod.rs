//! Benchmark pricing models: Black–Scholes, Heston, and Dupire local
//! volatility, plus bump-and-reprice deltas and a daily delta-hedge
//! simulator used to put the model-free hedging gaps in context.

pub mod black_scholes;
pub mod hedge_sim;
pub mod heston;
pub mod local_vol;

pub use black_scholes::{bs_call_price, bs_delta, bs_forward_start_price, bs_vega, implied_vol, norm_cdf};
pub use hedge_sim::{simulate_delta_hedge, HedgeModel, HedgeSimConfig, HedgeSimResult};
pub use heston::{calibrate_heston, heston_call_price, CalibrationReport, HestonParams, McConfig, McEstimate};
pub use local_vol::{dupire_local_vol, LocalVolSurface};

/// Relative spot bump for finite-difference deltas.
pub const DELTA_BUMP: f64 = 0.001;

/// Forward bump-and-reprice delta: `[P(S(1+a)) - P(S)] / (aS)`.
///
/// Monte Carlo pricers must reuse common random numbers across the bump; the
/// closure receives the (possibly bumped) spot and returns the price.
pub fn bump_delta(spot: f64, alpha: f64, mut price: impl FnMut(f64) -> crate::Result<f64>) -> crate::Result<f64> {
    let p0 = price(spot)?;
    let p1 = price(spot * (1.0 + alpha))?;
    Ok((p1 - p0) / (alpha * spot))
}
