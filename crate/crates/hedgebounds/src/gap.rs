//! Normalized hedging gaps on realized paths and their aggregation into
//! quantile curves, summary tables, and histograms.
//!
//! The gap of a strategy against a payoff on a realized path is
//! `(u(S1, S2) - phi(S1, S2)) / S0`; for sub-hedges the same formula applies
//! to the sub-strategy, so those gaps sit mostly below zero.
//!
//! CSV outputs are plot-ready: `quantiles.csv`
//! (`bucket,n,q05,q25,q50,q75,q95`), `summary.csv`, and `hist.csv`
//! (`bin_left,bin_right,count`).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};
use crate::market::format_f64;
use crate::payoff::Payoff;
use crate::strategy::SemiStaticStrategy;

/// Which hedge produced a gap sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Super,
    Sub,
    ModelBs,
    ModelHeston,
    ModelLocalVol,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Super => "super",
            Side::Sub => "sub",
            Side::ModelBs => "model_bs",
            Side::ModelHeston => "model_heston",
            Side::ModelLocalVol => "model_local_vol",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "super" => Ok(Side::Super),
            "sub" => Ok(Side::Sub),
            "model_bs" => Ok(Side::ModelBs),
            "model_heston" => Ok(Side::ModelHeston),
            "model_local_vol" => Ok(Side::ModelLocalVol),
            other => Err(Error::InvalidInput(format!("unknown side `{other}`"))),
        }
    }
}

/// One normalized hedging-gap observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub underlying: String,
    pub t0: NaiveDate,
    pub t1: NaiveDate,
    pub t2: NaiveDate,
    pub payoff: String,
    pub side: Side,
    pub gap: f64,
    pub ttm_days: i64,
    /// Realized S1 fell outside the strategy's spline knots, where the linear
    /// tail applies and domination is not guaranteed.
    pub off_grid: bool,
}

/// Normalized gap of a strategy on a realized path.
#[allow(clippy::too_many_arguments)]
pub fn compute_gap(
    strategy: &SemiStaticStrategy,
    payoff: &dyn Payoff,
    curve: &YieldCurveParams,
    underlying: &str,
    t0: NaiveDate,
    t1: NaiveDate,
    t2: NaiveDate,
    s1: f64,
    s2: f64,
    s0: f64,
    side: Side,
) -> Result<GapSample> {
    if !(s0 > 0.0) {
        return Err(Error::InvalidInput(format!("s0 must be positive, got {s0}")));
    }
    let u = strategy.payoff(curve, t0, t1, t2, s1, s2)?;
    let phi = payoff.value(s1, s2)?;
    let knots = strategy.h1.knot_xs();
    let off_grid = s1 < knots[0] || s1 > *knots.last().expect("spline has knots");
    Ok(GapSample {
        underlying: underlying.to_string(),
        t0,
        t1,
        t2,
        payoff: payoff.label(),
        side,
        gap: (u - phi) / s0,
        ttm_days: (t1 - t0).num_days(),
        off_grid,
    })
}

/// Type-7 quantile (linear interpolation of order statistics) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Quantile band of one time-to-maturity bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub bucket_days: i64,
    pub n: usize,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    /// Fewer than 5 samples in the bucket.
    pub thin: bool,
}

/// Per time-to-maturity bucket order statistics, buckets ordered by key.
pub fn quantile_curves(samples: &[GapSample]) -> Result<Vec<QuantileSummary>> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut by_bucket: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for s in samples {
        by_bucket.entry(s.ttm_days).or_default().push(s.gap);
    }
    Ok(by_bucket
        .into_iter()
        .map(|(bucket_days, mut gaps)| {
            gaps.sort_by(f64::total_cmp);
            QuantileSummary {
                bucket_days,
                n: gaps.len(),
                q05: quantile_sorted(&gaps, 0.05),
                q25: quantile_sorted(&gaps, 0.25),
                q50: quantile_sorted(&gaps, 0.50),
                q75: quantile_sorted(&gaps, 0.75),
                q95: quantile_sorted(&gaps, 0.95),
                thin: gaps.len() < 5,
            }
        })
        .collect())
}

/// Population summary statistics of the gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Population convention (divide by N).
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub q25: f64,
    pub q75: f64,
}

pub fn summary_stats(gaps: &[f64]) -> Result<SummaryStats> {
    if gaps.is_empty() {
        return Err(Error::NoSamples);
    }
    let n = gaps.len();
    let mean = gaps.iter().sum::<f64>() / n as f64;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n as f64;
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        n,
        mean,
        std_dev: var.sqrt(),
        min: sorted[0],
        max: sorted[n - 1],
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
    })
}

/// One histogram bin; bins are right-closed, the lowest bin also left-closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; counts sum to the sample size.
pub fn histogram(gaps: &[f64], bins: usize) -> Result<Vec<HistBin>> {
    if gaps.is_empty() {
        return Err(Error::NoSamples);
    }
    if bins == 0 {
        return Err(Error::InvalidInput("need at least one histogram bin".into()));
    }
    let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &g in gaps {
        let idx = if width == 0.0 {
            0
        } else {
            // Right-closed bins: values on an interior edge fall left.
            let raw = ((g - min) / width).ceil() as isize - 1;
            raw.clamp(0, bins as isize - 1) as usize
        };
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistBin {
            left: min + i as f64 * width,
            right: if i + 1 == bins { max } else { min + (i + 1) as f64 * width },
            count,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

pub fn write_gaps_csv<W: std::io::Write>(mut w: W, samples: &[GapSample]) -> Result<()> {
    writeln!(w, "underlying,t0,t1,t2,payoff,side,ttm_days,gap,off_grid")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.underlying,
            s.t0,
            s.t1,
            s.t2,
            s.payoff,
            s.side.name(),
            s.ttm_days,
            format_f64(s.gap),
            s.off_grid
        )?;
    }
    Ok(())
}

pub fn write_quantiles_csv<W: std::io::Write>(mut w: W, rows: &[QuantileSummary]) -> Result<()> {
    writeln!(w, "bucket,n,q05,q25,q50,q75,q95")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.bucket_days,
            r.n,
            format_f64(r.q05),
            format_f64(r.q25),
            format_f64(r.q50),
            format_f64(r.q75),
            format_f64(r.q95)
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: std::io::Write>(mut w: W, label: &str, s: &SummaryStats) -> Result<()> {
    writeln!(w, "label,n,mean,std,min,max,q25,q75")?;
    writeln!(
        w,
        "{label},{},{},{},{},{},{},{}",
        s.n,
        format_f64(s.mean),
        format_f64(s.std_dev),
        format_f64(s.min),
        format_f64(s.max),
        format_f64(s.q25),
        format_f64(s.q75)
    )?;
    Ok(())
}

pub fn write_hist_csv<W: std::io::Write>(mut w: W, bins: &[HistBin]) -> Result<()> {
    writeln!(w, "bin_left,bin_right,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", format_f64(b.left), format_f64(b.right), b.count)?;
    }
    Ok(())
}
