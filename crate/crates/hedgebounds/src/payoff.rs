//! Two-period exotic payoffs Φ(S_{t1}, S_{t2}).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The built-in payoff family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PayoffKind {
    /// (S_{t2} − S_{t1})⁺ — call struck at the money at t1.
    ForwardStartCall,
    /// (S_{t1} + S_{t2})/2 − √(S_{t1}·S_{t2}) — arithmetic-minus-geometric spread.
    ArithGeoSpread,
    /// log(S_{t2}/S_{t1}).
    LogReturn,
    /// √(S_{t1}·S_{t2}).
    GeoMean,
}

impl PayoffKind {
    /// Evaluate the payoff.
    ///
    /// `ForwardStartCall` accepts any nonnegative prices; the other kinds
    /// require strictly positive prices.
    pub fn eval(self, s1: f64, s2: f64) -> Result<f64> {
        match self {
            PayoffKind::ForwardStartCall => Ok((s2 - s1).max(0.0)),
            PayoffKind::ArithGeoSpread => {
                require_positive(self, s1, s2)?;
                Ok((s1 + s2) / 2.0 - (s1 * s2).sqrt())
            }
            PayoffKind::LogReturn => {
                require_positive(self, s1, s2)?;
                Ok((s2 / s1).ln())
            }
            PayoffKind::GeoMean => {
                require_positive(self, s1, s2)?;
                Ok((s1 * s2).sqrt())
            }
        }
    }

    /// Whether Φ(λs1, λs2) = λ·Φ(s1, s2) for λ > 0.
    pub fn is_positively_homogeneous(self) -> bool {
        !matches!(self, PayoffKind::LogReturn)
    }

    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::ForwardStartCall => "forward_start_call",
            PayoffKind::ArithGeoSpread => "arith_geo_spread",
            PayoffKind::LogReturn => "log_return",
            PayoffKind::GeoMean => "geo_mean",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "forward_start_call" => Ok(PayoffKind::ForwardStartCall),
            "arith_geo_spread" => Ok(PayoffKind::ArithGeoSpread),
            "log_return" => Ok(PayoffKind::LogReturn),
            "geo_mean" => Ok(PayoffKind::GeoMean),
            other => Err(Error::InvalidInput(format!("unknown payoff kind `{other}`"))),
        }
    }
}

fn require_positive(kind: PayoffKind, s1: f64, s2: f64) -> Result<()> {
    if s1 > 0.0 && s2 > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "{:?} requires strictly positive prices, got ({s1}, {s2})",
            kind
        )))
    }
}

/// A payoff of two future prices. The extension point for payoffs beyond the
/// built-in [`PayoffKind`] family: any pure function of (S_{t1}, S_{t2}).
pub trait Payoff: Send + Sync {
    fn value(&self, s1: f64, s2: f64) -> Result<f64>;
    /// Short token used in file names and CSV columns.
    fn label(&self) -> String;
}

impl Payoff for PayoffKind {
    fn value(&self, s1: f64, s2: f64) -> Result<f64> {
        self.eval(s1, s2)
    }

    fn label(&self) -> String {
        self.name().to_string()
    }
}

/// Wraps an arbitrary pure closure as a payoff.
#[derive(Clone)]
pub struct CustomPayoff {
    label: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl CustomPayoff {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for CustomPayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPayoff").field("label", &self.label).finish()
    }
}

impl Payoff for CustomPayoff {
    fn value(&self, s1: f64, s2: f64) -> Result<f64> {
        Ok((self.f)(s1, s2))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// The negation −Φ of a payoff; the sub-hedging problem super-hedges this.
pub struct NegatedPayoff<'a>(pub &'a dyn Payoff);

impl Payoff for NegatedPayoff<'_> {
    fn value(&self, s1: f64, s2: f64) -> Result<f64> {
        Ok(-self.0.value(s1, s2)?)
    }

    fn label(&self) -> String {
        format!("neg_{}", self.0.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn forward_start_call_example() {
        assert_eq!(PayoffKind::ForwardStartCall.eval(810.0, 870.0).unwrap(), 60.0);
        assert_eq!(PayoffKind::ForwardStartCall.eval(870.0, 810.0).unwrap(), 0.0);
    }

    #[test]
    fn arith_geo_spread_zero_at_equality() {
        assert_eq!(PayoffKind::ArithGeoSpread.eval(100.0, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn arith_geo_spread_nonnegative() {
        // AM-GM: strict positivity away from the diagonal.
        for (a, b) in [(1.0, 2.0), (50.0, 430.0), (0.2, 0.1), (7.0, 7.5)] {
            let v = PayoffKind::ArithGeoSpread.eval(a, b).unwrap();
            assert!(v > 0.0, "({a},{b}) gave {v}");
        }
    }

    #[test]
    fn log_return_identity() {
        let e = std::f64::consts::E;
        assert_relative_eq!(
            PayoffKind::LogReturn.eval(100.0, 100.0 * e).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn domain_errors_on_nonpositive_prices() {
        for kind in [PayoffKind::ArithGeoSpread, PayoffKind::LogReturn, PayoffKind::GeoMean] {
            assert!(matches!(kind.eval(0.0, 100.0), Err(Error::DomainError(_))));
            assert!(matches!(kind.eval(100.0, -1.0), Err(Error::DomainError(_))));
        }
        // The forward-start call tolerates zero prices.
        assert_eq!(PayoffKind::ForwardStartCall.eval(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn negation_wrapper() {
        let p = NegatedPayoff(&PayoffKind::ForwardStartCall);
        assert_eq!(p.value(810.0, 870.0).unwrap(), -60.0);
    }

    #[test]
    fn custom_payoff_roundtrip() {
        let p = CustomPayoff::new("spread_sq", |s1, s2| (s2 - s1) * (s2 - s1));
        assert_eq!(p.value(3.0, 5.0).unwrap(), 4.0);
        assert_eq!(p.label(), "spread_sq");
    }

    #[test]
    fn kind_name_parse_roundtrip() {
        for kind in [
            PayoffKind::ForwardStartCall,
            PayoffKind::ArithGeoSpread,
            PayoffKind::LogReturn,
            PayoffKind::GeoMean,
        ] {
            assert_eq!(PayoffKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(PayoffKind::parse("nope").is_err());
    }
}
