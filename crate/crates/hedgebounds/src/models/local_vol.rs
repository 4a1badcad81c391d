//! Dupire local volatility from a call-price surface by finite differences.
//!
//! sigma^2(T,K) = 2 [ d_T c + K r d_K c ] / [ K^2 d_KK c ]
//!
//! with central differences in strike and forward differences in maturity.
//! Nodes with a near-zero denominator or negative numerator are flagged and
//! infilled from the nearest valid neighbor in index space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local volatility on a (maturity, strike) node grid, bilinear in between
/// and flat outside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalVolSurface {
    /// Node maturities in years, ascending.
    pub maturities: Vec<f64>,
    /// Node strikes, ascending.
    pub strikes: Vec<f64>,
    /// sigma at [maturity][strike] nodes.
    pub sigma: Vec<Vec<f64>>,
    /// Indices of nodes that were infilled rather than computed.
    pub flagged: Vec<(usize, usize)>,
}

impl LocalVolSurface {
    /// Bilinear interpolation with flat extrapolation.
    pub fn vol(&self, t: f64, k: f64) -> f64 {
        let (i0, i1, wt) = bracket(&self.maturities, t);
        let (j0, j1, wk) = bracket(&self.strikes, k);
        let v00 = self.sigma[i0][j0];
        let v01 = self.sigma[i0][j1];
        let v10 = self.sigma[i1][j0];
        let v11 = self.sigma[i1][j1];
        (1.0 - wt) * ((1.0 - wk) * v00 + wk * v01) + wt * ((1.0 - wk) * v10 + wk * v11)
    }
}

fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
    if xs.len() == 1 || x <= xs[0] {
        return (0, 0, 0.0);
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let hi = xs.partition_point(|&v| v <= x);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    (lo, hi, w)
}

/// Extract a local-volatility surface from call prices `c[maturity][strike]`.
///
/// Requires at least 3 strikes and 2 maturities; the resulting nodes sit at
/// interior strikes and all but the last maturity. `spot` scales the
/// degenerate-denominator guard `1e-10 * spot`.
pub fn dupire_local_vol(
    maturities: &[f64],
    strikes: &[f64],
    prices: &[Vec<f64>],
    r: f64,
    spot: f64,
) -> Result<LocalVolSurface> {
    let nt = maturities.len();
    let nk = strikes.len();
    if nt < 2 || nk < 3 {
        return Err(Error::InsufficientSurface(format!(
            "need >= 2 maturities and >= 3 strikes, got {nt} x {nk}"
        )));
    }
    if prices.len() != nt || prices.iter().any(|row| row.len() != nk) {
        return Err(Error::InsufficientSurface("price grid does not match axes".into()));
    }
    let eps = 1e-10 * spot;

    let node_ts: Vec<f64> = maturities[..nt - 1].to_vec();
    let node_ks: Vec<f64> = strikes[1..nk - 1].to_vec();
    let mut sigma = vec![vec![f64::NAN; node_ks.len()]; node_ts.len()];
    let mut flagged = Vec::new();

    for ti in 0..nt - 1 {
        let dt = maturities[ti + 1] - maturities[ti];
        for kj in 1..nk - 1 {
            let k = strikes[kj];
            let (k_lo, k_hi) = (strikes[kj - 1], strikes[kj + 1]);
            let c = &prices[ti];
            let d_t = (prices[ti + 1][kj] - c[kj]) / dt;
            // Central differences on a possibly non-uniform strike grid.
            let (h0, h1) = (k - k_lo, k_hi - k);
            let d_k = (c[kj + 1] - c[kj - 1]) / (h0 + h1);
            let d_kk = 2.0 * (h0 * c[kj + 1] - (h0 + h1) * c[kj] + h1 * c[kj - 1])
                / (h0 * h1 * (h0 + h1));
            let num = 2.0 * (d_t + k * r * d_k);
            let den = k * k * d_kk;
            if den <= eps || num < 0.0 {
                flagged.push((ti, kj - 1));
            } else {
                sigma[ti][kj - 1] = (num / den).sqrt();
            }
        }
    }

    // Infill flagged nodes from the nearest valid node (L1 index distance,
    // ties toward the smaller strike then smaller maturity index).
    let valid: Vec<(usize, usize)> = (0..node_ts.len())
        .flat_map(|i| (0..node_ks.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| sigma[i][j].is_finite())
        .collect();
    if valid.is_empty() {
        return Err(Error::InsufficientSurface("every Dupire node was degenerate".into()));
    }
    for &(i, j) in &flagged {
        let ((si, sj), _) = valid
            .iter()
            .map(|&(vi, vj)| {
                let d = vi.abs_diff(i) + vj.abs_diff(j);
                ((vi, vj), (d, vj, vi))
            })
            .min_by_key(|&(_, key)| key)
            .expect("nonempty valid set");
        sigma[i][j] = sigma[si][sj];
    }

    Ok(LocalVolSurface { maturities: node_ts, strikes: node_ks, sigma, flagged })
}
