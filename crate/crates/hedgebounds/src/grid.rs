//! Price grids discretizing the joint support of (S_{t1}, S_{t2}).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketSnapshot;

/// One-dimensional grids for each period, strictly increasing, containing the
/// spot and spanning well past every quoted strike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
}

impl Grid {
    pub fn len1(&self) -> usize {
        self.axis1.len()
    }

    pub fn len2(&self) -> usize {
        self.axis2.len()
    }
}

/// Build the N-point-per-axis grid for a snapshot.
///
/// The base span is `[0.25 * S0, 4 * S0]`, widened when quoted strikes sit
/// near or outside it (low end down to half the smallest strike, high end up
/// to 1.5 times the largest) and floored at `0.01 * S0`; both axes share the
/// span and the spot is inserted as a knot if the uniform lattice misses it.
pub fn build_grid(s0: f64, snapshot: &MarketSnapshot, n: usize) -> Result<Grid> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("grid needs at least 2 points per axis, got {n}")));
    }
    if !(s0 > 0.0) {
        return Err(Error::InvalidConfig(format!("spot must be positive, got {s0}")));
    }
    let strikes = snapshot.all_strikes();
    let k_min = strikes.first().copied().unwrap_or(s0);
    let k_max = strikes.last().copied().unwrap_or(s0);
    let lo = (0.25 * s0).min(0.5 * k_min).max(0.01 * s0);
    let hi = (4.0 * s0).max(1.5 * k_max);
    let axis = uniform_with(lo, hi, n, s0);
    Ok(Grid { axis1: axis.clone(), axis2: axis })
}

fn uniform_with(lo: f64, hi: f64, n: usize, extra: f64) -> Vec<f64> {
    let mut axis: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    if extra > lo && extra < hi && !axis.contains(&extra) {
        axis.push(extra);
        axis.sort_by(f64::total_cmp);
    }
    axis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::OptionQuote;
    use chrono::NaiveDate;

    fn snapshot(strikes: &[f64]) -> MarketSnapshot {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        let mk = |mat: &str, k: f64| OptionQuote {
            underlying: "TST".into(),
            quote_date: d("2021-01-04"),
            maturity: d(mat),
            strike: k,
            bid: 1.0,
            ask: 1.1,
            volume: 1,
        };
        MarketSnapshot::new(
            "TST",
            100.0,
            d("2021-01-04"),
            d("2021-02-01"),
            d("2021-03-01"),
            strikes.iter().map(|&k| mk("2021-02-01", k)).collect(),
            strikes.iter().map(|&k| mk("2021-03-01", k)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_span_with_moderate_strikes() {
        // strikes within [80, 120]: span stays [25, 400], spot inserted.
        let g = build_grid(100.0, &snapshot(&[80.0, 100.0, 120.0]), 5).unwrap();
        assert_eq!(g.axis1.len(), 6); // 5 uniform + inserted spot
        assert_eq!(g.axis1[0], 25.0);
        assert_eq!(*g.axis1.last().unwrap(), 400.0);
        assert!(g.axis1.contains(&100.0));
        assert_eq!(g.axis1, g.axis2);
        // uniform part intact
        for v in [25.0, 118.75, 212.5, 306.25, 400.0] {
            assert!(g.axis1.contains(&v), "missing {v}");
        }
    }

    #[test]
    fn span_covers_extreme_strikes_with_margin() {
        let g = build_grid(100.0, &snapshot(&[20.0, 500.0]), 8).unwrap();
        assert!(g.axis1[0] <= 0.5 * 20.0);
        assert!(*g.axis1.last().unwrap() >= 1.5 * 500.0);
        assert!(g.axis1[0] >= 0.01 * 100.0);
    }

    #[test]
    fn degenerate_two_point_grid() {
        let g = build_grid(100.0, &snapshot(&[100.0]), 2).unwrap();
        // endpoints plus the inserted spot
        assert_eq!(g.axis1.len(), 3);
        assert!(g.axis1.windows(2).all(|w| w[0] < w[1]));
        assert!(g.axis1.contains(&100.0));
    }

    #[test]
    fn strictly_increasing_and_bracketing() {
        let snap = snapshot(&[80.0, 90.0, 100.0, 110.0, 120.0]);
        let g = build_grid(100.0, &snap, 41).unwrap();
        assert!(g.axis1.windows(2).all(|w| w[0] < w[1]));
        for k in snap.all_strikes() {
            assert!(g.axis1[0] < k && k < *g.axis1.last().unwrap());
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(matches!(
            build_grid(100.0, &snapshot(&[100.0]), 1),
            Err(Error::InvalidConfig(_))
        ));
    }
}
