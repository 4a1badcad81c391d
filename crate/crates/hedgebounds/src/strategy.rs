//! Semi-static strategies: cash, static call legs at two maturities, and a
//! dynamic stock position (a constant at t0, a spline-interpolated function
//! of S_{t1} at t1).
//!
//! The time-t2 payoff with compounding factors F(a,b) = e^{y(b-a)*(b-a)}:
//!
//! ```text
//! u(S1, S2) = F(t0,t2) d
//!           + sum_legs F(t_i,t2) (long - short) (S_i - K)^+
//!           + H0 (S1 - S0 F(t0,t1))
//!           + H1(S1) (S2 - S1 F(t1,t2))
//! ```
//!
//! Strategies serialize to JSON with exactly these fields for audit.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};
use crate::market::MarketSnapshot;
use crate::spline::CubicSpline;

/// A static call position: `long` and `short` are the nonnegative holdings
/// theta+ and theta- at one (maturity, strike).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionLeg {
    /// 1 for the t1 slice, 2 for the t2 slice.
    pub maturity_index: usize,
    pub strike: f64,
    pub long: f64,
    pub short: f64,
}

/// A complete semi-static strategy for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiStaticStrategy {
    /// Spot at inception, anchoring the t0 stock financing term.
    pub spot: f64,
    /// Cash position d.
    pub cash: f64,
    pub legs: Vec<OptionLeg>,
    /// Shares held over [t0, t1].
    pub h0: f64,
    /// Shares held over [t1, t2] as a function of S_{t1}, spline over the grid.
    pub h1: CubicSpline,
}

impl SemiStaticStrategy {
    /// The all-zero strategy on the given H1 knot abscissae.
    pub fn zero(spot: f64, knots: &[f64]) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = knots.iter().map(|&x| (x, 0.0)).collect();
        Ok(Self { spot, cash: 0.0, legs: Vec::new(), h0: 0.0, h1: CubicSpline::fit(&pairs)? })
    }

    /// Time-t2 payoff on a realized path; off-knot S1 goes through the spline.
    pub fn payoff(
        &self,
        curve: &YieldCurveParams,
        t0: NaiveDate,
        t1: NaiveDate,
        t2: NaiveDate,
        s1: f64,
        s2: f64,
    ) -> Result<f64> {
        if !(t0 < t1 && t1 < t2) {
            return Err(Error::InvalidInterval(format!("need t0 < t1 < t2, got {t0}, {t1}, {t2}")));
        }
        let f02 = curve.compounding_factor(t0, t2)?;
        let f12 = curve.compounding_factor(t1, t2)?;
        let f01 = curve.compounding_factor(t0, t1)?;
        let mut u = f02 * self.cash;
        for leg in &self.legs {
            let (s_i, factor) = match leg.maturity_index {
                1 => (s1, f12),
                2 => (s2, 1.0),
                other => {
                    return Err(Error::InvalidInput(format!("leg maturity index {other} out of range")));
                }
            };
            u += factor * (leg.long - leg.short) * (s_i - leg.strike).max(0.0);
        }
        u += self.h0 * (s1 - self.spot * f01);
        u += self.h1.eval(s1) * (s2 - s1 * f12);
        Ok(u)
    }

    /// Setup cost: `d + sum(long * ask - short * bid)` against the snapshot.
    pub fn cost(&self, snapshot: &MarketSnapshot) -> Result<f64> {
        let mut c = self.cash;
        for leg in &self.legs {
            let q = snapshot.quote(leg.maturity_index, leg.strike).ok_or(Error::MissingQuote {
                maturity: leg.maturity_index,
                strike: leg.strike,
            })?;
            c += leg.long * q.ask - leg.short * q.bid;
        }
        Ok(c)
    }

    /// Mark at liquidation prices: longs hit the bid, shorts pay the ask.
    ///
    /// For a strategy produced by negating a super-hedge this equals minus the
    /// original setup cost, which is exactly the sub-hedging price.
    pub fn liquidation_value(&self, snapshot: &MarketSnapshot) -> Result<f64> {
        let mut c = self.cash;
        for leg in &self.legs {
            let q = snapshot.quote(leg.maturity_index, leg.strike).ok_or(Error::MissingQuote {
                maturity: leg.maturity_index,
                strike: leg.strike,
            })?;
            c += leg.long * q.bid - leg.short * q.ask;
        }
        Ok(c)
    }

    /// The mirrored strategy with payoff `-u`: cash and stock positions flip
    /// sign, long and short call holdings swap.
    pub fn negated(&self) -> Self {
        Self {
            spot: self.spot,
            cash: -self.cash,
            legs: self
                .legs
                .iter()
                .map(|leg| OptionLeg {
                    maturity_index: leg.maturity_index,
                    strike: leg.strike,
                    long: leg.short,
                    short: leg.long,
                })
                .collect(),
            h0: -self.h0,
            h1: self.h1.map_values(|v| -v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::OptionQuote;
    use approx::assert_relative_eq;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn times() -> (NaiveDate, NaiveDate, NaiveDate) {
        (d("2021-01-04"), d("2021-02-01"), d("2021-03-01"))
    }

    fn snapshot_with(legs: &[(usize, f64, f64, f64)]) -> MarketSnapshot {
        // (maturity_index, strike, bid, ask)
        let (t0, t1, t2) = times();
        let mk = |mat: NaiveDate, strike: f64, bid: f64, ask: f64| OptionQuote {
            underlying: "TST".into(),
            quote_date: t0,
            maturity: mat,
            strike,
            bid,
            ask,
            volume: 1,
        };
        let s1: Vec<OptionQuote> =
            legs.iter().filter(|l| l.0 == 1).map(|&(_, k, b, a)| mk(t1, k, b, a)).collect();
        let s2: Vec<OptionQuote> =
            legs.iter().filter(|l| l.0 == 2).map(|&(_, k, b, a)| mk(t2, k, b, a)).collect();
        MarketSnapshot::new("TST", 100.0, t0, t1, t2, s1, s2).unwrap()
    }

    fn knots() -> Vec<f64> {
        vec![50.0, 100.0, 150.0, 200.0]
    }

    #[test]
    fn zero_strategy_pays_and_costs_nothing() {
        let (t0, t1, t2) = times();
        let s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        let curve = YieldCurveParams::flat(0.03);
        for (a, b) in [(80.0, 120.0), (100.0, 100.0), (333.0, 12.0)] {
            assert_eq!(s.payoff(&curve, t0, t1, t2, a, b).unwrap(), 0.0);
        }
        let snap = snapshot_with(&[(2, 100.0, 1.9, 2.1)]);
        assert_eq!(s.cost(&snap).unwrap(), 0.0);
    }

    #[test]
    fn cash_compounds_at_zero_rate_to_itself() {
        let (t0, t1, t2) = times();
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.cash = 1.0;
        let curve = YieldCurveParams::flat(0.0);
        assert_eq!(s.payoff(&curve, t0, t1, t2, 97.0, 103.0).unwrap(), 1.0);
    }

    #[test]
    fn single_leg_payoff_matches_hand_evaluation() {
        let (t0, t1, t2) = times();
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.legs.push(OptionLeg { maturity_index: 2, strike: 100.0, long: 1.0, short: 0.0 });
        let curve = YieldCurveParams::flat(0.0);
        assert_eq!(s.payoff(&curve, t0, t1, t2, 100.0, 120.0).unwrap(), 20.0);
        assert_eq!(s.payoff(&curve, t0, t1, t2, 100.0, 90.0).unwrap(), 0.0);
    }

    #[test]
    fn cost_arithmetic() {
        let snap = snapshot_with(&[(1, 100.0, 1.0, 1.5), (2, 100.0, 2.0, 2.5)]);
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.cash = 2.0;
        s.legs.push(OptionLeg { maturity_index: 1, strike: 100.0, long: 3.0, short: 0.0 });
        // 2 + 3 * 1.5 = 6.5
        assert_relative_eq!(s.cost(&snap).unwrap(), 6.5, epsilon = 1e-12);

        let mut s2 = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s2.legs.push(OptionLeg { maturity_index: 2, strike: 100.0, long: 0.0, short: 1.0 });
        // -1 * bid = -2.0
        assert_relative_eq!(s2.cost(&snap).unwrap(), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn missing_quote_is_an_error() {
        let snap = snapshot_with(&[(2, 100.0, 1.9, 2.1)]);
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.legs.push(OptionLeg { maturity_index: 2, strike: 101.0, long: 1.0, short: 0.0 });
        assert!(matches!(s.cost(&snap), Err(Error::MissingQuote { .. })));
    }

    #[test]
    fn cost_monotone_in_holdings() {
        let snap = snapshot_with(&[(1, 100.0, 1.0, 1.5)]);
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.legs.push(OptionLeg { maturity_index: 1, strike: 100.0, long: 1.0, short: 0.0 });
        let c1 = s.cost(&snap).unwrap();
        s.legs[0].long = 2.0;
        let c2 = s.cost(&snap).unwrap();
        assert!(c2 > c1);
        s.legs[0].short = 3.0;
        let c3 = s.cost(&snap).unwrap();
        assert!(c3 < c2);
    }

    #[test]
    fn payoff_is_linear_in_parameters() {
        let (t0, t1, t2) = times();
        let curve = YieldCurveParams::flat(0.02);
        let ks = knots();
        let mk = |cash: f64, long: f64, short: f64, h0: f64, h1v: f64| {
            let mut s = SemiStaticStrategy::zero(100.0, &ks).unwrap();
            s.cash = cash;
            s.legs.push(OptionLeg { maturity_index: 1, strike: 100.0, long, short: 0.0 });
            s.legs.push(OptionLeg { maturity_index: 2, strike: 110.0, long: 0.0, short });
            s.h0 = h0;
            s.h1 = s.h1.map_values(|_| h1v);
            s
        };
        let x = mk(1.0, 2.0, 0.5, -1.0, 0.7);
        let y = mk(-0.3, 0.1, 1.5, 2.0, -0.2);
        let (a, b) = (1.7, -2.3);
        let combined = mk(
            a * 1.0 + b * -0.3,
            a * 2.0 + b * 0.1,
            a * 0.5 + b * 1.5,
            a * -1.0 + b * 2.0,
            a * 0.7 + b * -0.2,
        );
        for (s1v, s2v) in [(80.0, 95.0), (123.0, 77.0), (100.0, 100.0), (61.0, 310.0)] {
            let lhs = combined.payoff(&curve, t0, t1, t2, s1v, s2v).unwrap();
            let rhs = a * x.payoff(&curve, t0, t1, t2, s1v, s2v).unwrap()
                + b * y.payoff(&curve, t0, t1, t2, s1v, s2v).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn negation_mirrors_payoff_and_liquidation_value() {
        let (t0, t1, t2) = times();
        let curve = YieldCurveParams::flat(0.01);
        let snap = snapshot_with(&[(1, 100.0, 1.0, 1.5), (2, 100.0, 2.0, 2.5)]);
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.cash = 3.0;
        s.h0 = 0.4;
        s.legs.push(OptionLeg { maturity_index: 1, strike: 100.0, long: 1.0, short: 0.2 });
        s.legs.push(OptionLeg { maturity_index: 2, strike: 100.0, long: 0.0, short: 0.7 });
        s.h1 = s.h1.map_values(|_| 0.3);
        let n = s.negated();
        for (s1v, s2v) in [(90.0, 110.0), (130.0, 70.0)] {
            assert_relative_eq!(
                n.payoff(&curve, t0, t1, t2, s1v, s2v).unwrap(),
                -s.payoff(&curve, t0, t1, t2, s1v, s2v).unwrap(),
                epsilon = 1e-10
            );
        }
        assert_relative_eq!(n.liquidation_value(&snap).unwrap(), -s.cost(&snap).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn json_schema_roundtrip() {
        let mut s = SemiStaticStrategy::zero(100.0, &knots()).unwrap();
        s.cash = 1.25;
        s.legs.push(OptionLeg { maturity_index: 2, strike: 110.0, long: 0.5, short: 0.0 });
        let json = serde_json::to_string(&s).unwrap();
        for field in ["spot", "cash", "legs", "h0", "h1", "maturity_index", "strike", "long", "short"] {
            assert!(json.contains(field), "schema missing `{field}`: {json}");
        }
        let back: SemiStaticStrategy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
