//! Crate-wide error type.

use crate::bounds::BoundResult;

/// Errors produced by any part of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// No quotes available where at least one was required.
    #[error("no quotes available: {0}")]
    NoQuotes(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Yield-curve tenor must be strictly positive.
    #[error("invalid tenor: {0}")]
    InvalidTenor(f64),

    /// Time interval with `to` before `from`, or otherwise out of order.
    #[error("invalid time interval: {0}")]
    InvalidInterval(String),

    /// Model parameters outside their admissible ranges.
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    /// Linear program is structurally malformed (dimension mismatch, bad bounds).
    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    /// A numerical routine failed to converge or hit its iteration cap.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Spline knots are not strictly increasing or fewer than two.
    #[error("invalid spline knots: {0}")]
    InvalidKnots(String),

    /// Payoff evaluated outside its domain (nonpositive price where positivity required).
    #[error("payoff domain error: {0}")]
    DomainError(String),

    /// A strategy leg references a (maturity, strike) absent from the snapshot.
    #[error("missing quote for maturity {maturity} strike {strike}")]
    MissingQuote { maturity: usize, strike: f64 },

    /// Configuration values out of range (grid size, tolerance, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The hedging LP is unbounded: the quotes admit a model-free arbitrage.
    #[error("arbitrage detected: the restricted hedging program is unbounded")]
    ArbitrageDetected,

    /// Cutting-plane loop exceeded its iteration cap; carries the best iterate.
    #[error("cutting plane did not converge within the iteration cap")]
    NonConverged(Box<BoundResult>),

    /// Target price lies outside the no-arbitrage band for implied volatility.
    #[error("no implied volatility: price {price} outside [{lo}, {hi}]")]
    NoImpliedVol { price: f64, lo: f64, hi: f64 },

    /// Call surface too small for the local-volatility stencil.
    #[error("insufficient surface: {0}")]
    InsufficientSurface(String),

    /// Statistics requested over an empty sample set.
    #[error("no samples")]
    NoSamples,

    /// Quantile target outside (0, 1].
    #[error("invalid quantile target: {0}")]
    InvalidTarget(f64),

    /// Lower bound exceeds upper bound beyond tolerance.
    #[error("inconsistent bounds: lower {lower} > upper {upper} + 2*tol")]
    InconsistentBounds { lower: f64, upper: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
