//! Bound-proximity trading: empirical gap-probability curves, the trade
//! trigger, trade execution against a surrogate market price, and the
//! performance report.
//!
//! A trade fires when the market price sits within `c * S0` of either
//! model-free bound; the position held is the corresponding hedge against the
//! payoff, so the loss can never exceed the entry cost (up to the
//! cutting-plane tolerance).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{GapSample, Side};
use crate::market::format_f64;

/// Empirical tail law of normalized hedging gaps:
/// `q(c) = #{gap >= c} / N` on a training sample.
///
/// For the lower/sub side the ingested quantity is `(phi - u) / S0`, i.e. the
/// negated stored gap, matching the probability the sub-hedge's shortfall
/// exceeds `c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalGapLaw {
    sorted: Vec<f64>,
}

impl EmpiricalGapLaw {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    /// Exceedance probability, ties counted inclusively; 1 below the sample
    /// minimum, 0 above the maximum.
    pub fn q(&self, c: f64) -> f64 {
        let below = self.sorted.partition_point(|&x| x < c);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// Right-continuous inverse: the largest c with `q(c) >= q_target`.
    pub fn invert_q(&self, q_target: f64) -> Result<f64> {
        if !(q_target > 0.0 && q_target <= 1.0) {
            return Err(Error::InvalidTarget(q_target));
        }
        let n = self.sorted.len();
        // q(x_(i)) = (n - first_index_of(x_(i))) / n, nonincreasing along the
        // sorted samples; take the largest sample value still meeting q_target.
        let mut best = self.sorted[0];
        for i in 0..n {
            let first = self.sorted.partition_point(|&x| x < self.sorted[i]);
            let q = (n - first) as f64 / n as f64;
            if q >= q_target {
                best = self.sorted[i];
            }
        }
        Ok(best)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// Fit the law for one side from tagged gap samples.
///
/// `Side::Super` keeps gaps as stored; `Side::Sub` negates them so the law
/// describes `(phi - u)/S0 >= c`. Model sides are accepted as stored.
pub fn fit_gap_law(samples: &[GapSample], side: Side) -> Result<EmpiricalGapLaw> {
    let values: Vec<f64> = samples
        .iter()
        .filter(|s| s.side == side)
        .map(|s| if side == Side::Sub { -s.gap } else { s.gap })
        .collect();
    EmpiricalGapLaw::from_values(values)
}

/// Which bound the market price approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerSide {
    Upper,
    Lower,
}

impl TriggerSide {
    pub fn name(self) -> &'static str {
        match self {
            TriggerSide::Upper => "upper",
            TriggerSide::Lower => "lower",
        }
    }
}

/// Evaluate the proximity trigger.
///
/// Fires on the side attaining `min(market - lower, upper - market)` whenever
/// that minimum is at most `c * s0`; exact ties break toward `Upper`. Bounds
/// crossed by more than `2 * tol` are rejected.
pub fn evaluate_trigger(
    market: f64,
    upper: f64,
    lower: f64,
    c: f64,
    s0: f64,
    tol: f64,
) -> Result<Option<TriggerSide>> {
    if lower > upper + 2.0 * tol {
        return Err(Error::InconsistentBounds { lower, upper });
    }
    if !(s0 > 0.0) {
        return Err(Error::InvalidInput(format!("s0 must be positive, got {s0}")));
    }
    let to_lower = market - lower;
    let to_upper = upper - market;
    let side = if to_upper <= to_lower { TriggerSide::Upper } else { TriggerSide::Lower };
    if to_lower.min(to_upper) <= c * s0 {
        Ok(Some(side))
    } else {
        Ok(None)
    }
}

/// Everything a backtest needs about one tradable instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestInstance {
    pub underlying: String,
    pub t0: NaiveDate,
    pub t1: NaiveDate,
    pub t2: NaiveDate,
    pub s0: f64,
    /// Super-hedging price.
    pub upper: f64,
    /// Sub-hedging price.
    pub lower: f64,
    /// Realized payoff of the derivative on this instance's path.
    pub phi: f64,
    /// Realized payoff of the super-hedging strategy.
    pub upper_hedge_payoff: f64,
    /// Realized payoff of the sub-hedging strategy.
    pub lower_hedge_payoff: f64,
}

/// One executed trade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeRecord {
    pub underlying: String,
    pub entry_date: NaiveDate,
    pub side: TriggerSide,
    /// Entry cost: upper side pays `upper - market`, lower side `market - lower`.
    pub cost: f64,
    pub holding_days: i64,
    /// Realized payoff of the held position (hedge minus phi, or phi minus hedge).
    pub position_payoff: f64,
    pub phi: f64,
    pub net_profit: f64,
    pub s0: f64,
}

/// Aggregate performance in the shape of the train/test result tables.
/// Ratio fields are blank (`None`) when undefined, e.g. zero trades or no
/// losing trade for the Sortino denominator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub trades: usize,
    /// q(c) of each law at the backtest's threshold.
    pub q_upper: Option<f64>,
    pub q_lower: Option<f64>,
    /// Metrics over annualized per-trade simple returns on cost (x365/days).
    pub avg_return_pa: Option<f64>,
    pub std_dev_pa: Option<f64>,
    pub downside_dev_pa: Option<f64>,
    pub sharpe: Option<f64>,
    pub sortino: Option<f64>,
    /// Currency: -min(net profit) and max(net profit).
    pub max_loss: Option<f64>,
    pub max_profit: Option<f64>,
    /// Currency: mean annualized net profit per trade.
    pub avg_profit_pa: Option<f64>,
    /// Trades entered at nonpositive cost (market beyond a bound); excluded
    /// from the return-on-cost statistics.
    pub free_entry_trades: usize,
}

/// Run the trigger over instances and aggregate the executed trades.
///
/// `pricer` supplies the surrogate market price per instance (a calibrated
/// model price in production, a fixture in tests).
pub fn run_backtest(
    instances: &[BacktestInstance],
    upper_law: Option<&EmpiricalGapLaw>,
    lower_law: Option<&EmpiricalGapLaw>,
    pricer: &dyn Fn(&BacktestInstance) -> Result<f64>,
    c: f64,
    tol: f64,
) -> Result<(Vec<TradeRecord>, PerformanceReport)> {
    let mut trades = Vec::new();
    for inst in instances {
        let market = pricer(inst)?;
        let Some(side) = evaluate_trigger(market, inst.upper, inst.lower, c, inst.s0, tol)? else {
            continue;
        };
        let (cost, position_payoff) = match side {
            TriggerSide::Upper => (inst.upper - market, inst.upper_hedge_payoff - inst.phi),
            TriggerSide::Lower => (market - inst.lower, inst.phi - inst.lower_hedge_payoff),
        };
        trades.push(TradeRecord {
            underlying: inst.underlying.clone(),
            entry_date: inst.t0,
            side,
            cost,
            holding_days: (inst.t2 - inst.t0).num_days(),
            position_payoff,
            phi: inst.phi,
            net_profit: position_payoff - cost,
            s0: inst.s0,
        });
    }
    let mut report = performance_metrics(&trades);
    report.q_upper = upper_law.map(|l| l.q(c));
    report.q_lower = lower_law.map(|l| l.q(c));
    Ok((trades, report))
}

/// Aggregate trades into the report.
///
/// Per-trade return is net profit over cost, annualized by `365 / holding
/// days`; mean, standard deviation and downside deviation (root mean square
/// of the negative returns over all trades) are against a zero benchmark.
pub fn performance_metrics(trades: &[TradeRecord]) -> PerformanceReport {
    let mut report = PerformanceReport {
        trades: trades.len(),
        q_upper: None,
        q_lower: None,
        avg_return_pa: None,
        std_dev_pa: None,
        downside_dev_pa: None,
        sharpe: None,
        sortino: None,
        max_loss: None,
        max_profit: None,
        avg_profit_pa: None,
        free_entry_trades: trades.iter().filter(|t| t.cost <= 0.0).count(),
    };
    if trades.is_empty() {
        return report;
    }
    report.max_loss = trades.iter().map(|t| -t.net_profit).fold(f64::NEG_INFINITY, f64::max).into();
    report.max_profit = trades.iter().map(|t| t.net_profit).fold(f64::NEG_INFINITY, f64::max).into();
    report.avg_profit_pa = Some(
        trades.iter().map(|t| t.net_profit * 365.0 / t.holding_days as f64).sum::<f64>() / trades.len() as f64,
    );

    let returns: Vec<f64> = trades
        .iter()
        .filter(|t| t.cost > 0.0)
        .map(|t| t.net_profit / t.cost * 365.0 / t.holding_days as f64)
        .collect();
    if returns.is_empty() {
        return report;
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let down = (returns.iter().map(|r| r.min(0.0).powi(2)).sum::<f64>() / n).sqrt();
    report.avg_return_pa = Some(mean);
    report.std_dev_pa = Some(std);
    report.downside_dev_pa = Some(down);
    report.sharpe = (std > 0.0).then(|| mean / std);
    report.sortino = (down > 0.0).then(|| mean / down);
    report
}

// ---------------------------------------------------------------------------
// CSV / JSON interfaces
// ---------------------------------------------------------------------------

pub fn write_trades_csv<W: std::io::Write>(mut w: W, trades: &[TradeRecord]) -> Result<()> {
    writeln!(w, "entry_date,underlying,side,cost,payoff,net_profit,holding_days")?;
    for t in trades {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t.entry_date,
            t.underlying,
            t.side.name(),
            format_f64(t.cost),
            format_f64(t.position_payoff),
            format_f64(t.net_profit),
            t.holding_days
        )?;
    }
    Ok(())
}

/// `qcurve.csv`: the two exceedance curves on a grid of thresholds.
pub fn write_qcurve_csv<W: std::io::Write>(
    mut w: W,
    cs: &[f64],
    upper_law: &EmpiricalGapLaw,
    lower_law: &EmpiricalGapLaw,
) -> Result<()> {
    writeln!(w, "c,q_upper,q_lower")?;
    for &c in cs {
        writeln!(w, "{},{},{}", format_f64(c), format_f64(upper_law.q(c)), format_f64(lower_law.q(c)))?;
    }
    Ok(())
}
