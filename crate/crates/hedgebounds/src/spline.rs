//! Natural cubic spline interpolation with linear tails.
//!
//! The dynamic stock position of a semi-static strategy is solved for on a
//! finite grid and evaluated off-grid through this spline. Natural boundary
//! conditions (zero second derivative at the end knots) plus linear
//! extrapolation keep the strategy's exposure from blowing up cubically far
//! outside the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends (natural boundary).
    m: Vec<f64>,
}

impl CubicSpline {
    /// Fit a natural cubic spline through `(x, y)` pairs.
    ///
    /// Requires at least two knots with strictly increasing, finite abscissae.
    pub fn fit(knots: &[(f64, f64)]) -> Result<Self> {
        let n = knots.len();
        if n < 2 {
            return Err(Error::InvalidKnots(format!("need at least 2 knots, got {n}")));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidKnots(format!(
                    "abscissae must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }

        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut sub = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                sub[i] = h0;
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
            }
        }

        Ok(Self { xs, ys, m })
    }

    /// Knot abscissae.
    pub fn knot_xs(&self) -> &[f64] {
        &self.xs
    }

    /// Knot values.
    pub fn knot_ys(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluate the spline; linear extension outside the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.end_slope_left() * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.end_slope_right() * (x - self.xs[n - 1]);
        }
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Spline slope at the left end knot, used for the linear tail.
    fn end_slope_left(&self) -> f64 {
        let h = self.xs[1] - self.xs[0];
        (self.ys[1] - self.ys[0]) / h - h / 6.0 * (2.0 * self.m[0] + self.m[1])
    }

    /// Spline slope at the right end knot.
    fn end_slope_right(&self) -> f64 {
        let n = self.xs.len();
        let h = self.xs[n - 1] - self.xs[n - 2];
        (self.ys[n - 1] - self.ys[n - 2]) / h + h / 6.0 * (self.m[n - 2] + 2.0 * self.m[n - 1])
    }

    /// Map each knot value through `f`, keeping the abscissae. Refits the spline.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let knots: Vec<(f64, f64)> = self.xs.iter().zip(&self.ys).map(|(&x, &y)| (x, f(y))).collect();
        Self::fit(&knots).expect("abscissae unchanged")
    }
}
