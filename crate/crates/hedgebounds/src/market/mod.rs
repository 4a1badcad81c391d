//! Call-option quote surfaces: ingestion, liquidity filtering, arbitrage
//! repair, and synthetic market generation.
//!
//! Quote CSV format (header exactly):
//! `underlying,quote_date,maturity,strike,bid,ask,volume`
//! with ISO-8601 dates and `.` decimals. Yield-parameter CSV header:
//! `date,beta0,beta1,beta2,beta3,tau1,tau2`.

mod repair;
mod synth;

pub use repair::{repair_arbitrage, RepairReport, RepairedQuote};
pub use synth::{generate_synthetic_market, SynthConfig, SynthOutput};

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curve::YieldCurveParams;
use crate::error::{Error, Result};

/// A single call-option quote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub underlying: String,
    pub quote_date: NaiveDate,
    pub maturity: NaiveDate,
    pub strike: f64,
    pub bid: f64,
    pub ask: f64,
    pub volume: u64,
}

impl OptionQuote {
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }

    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }

    fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0) {
            return Err(Error::InvalidInput(format!("strike must be positive, got {}", self.strike)));
        }
        if self.bid < 0.0 || self.ask < self.bid {
            return Err(Error::InvalidInput(format!(
                "need ask >= bid >= 0, got bid={} ask={}",
                self.bid, self.ask
            )));
        }
        if self.maturity <= self.quote_date {
            return Err(Error::InvalidInput(format!(
                "maturity {} not after quote date {}",
                self.maturity, self.quote_date
            )));
        }
        Ok(())
    }
}

/// Two maturity slices of call quotes over one underlying at one quote date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSnapshot {
    pub underlying: String,
    pub spot: f64,
    pub t0: NaiveDate,
    pub t1: NaiveDate,
    pub t2: NaiveDate,
    /// Quotes maturing at `t1`, sorted by strictly increasing strike.
    pub slice_1: Vec<OptionQuote>,
    /// Quotes maturing at `t2`, sorted by strictly increasing strike.
    pub slice_2: Vec<OptionQuote>,
}

impl MarketSnapshot {
    pub fn new(
        underlying: impl Into<String>,
        spot: f64,
        t0: NaiveDate,
        t1: NaiveDate,
        t2: NaiveDate,
        mut slice_1: Vec<OptionQuote>,
        mut slice_2: Vec<OptionQuote>,
    ) -> Result<Self> {
        if !(spot > 0.0) {
            return Err(Error::InvalidInput(format!("spot must be positive, got {spot}")));
        }
        if !(t0 < t1 && t1 < t2) {
            return Err(Error::InvalidInput(format!("need t0 < t1 < t2, got {t0}, {t1}, {t2}")));
        }
        slice_1.sort_by(|a, b| a.strike.total_cmp(&b.strike));
        slice_2.sort_by(|a, b| a.strike.total_cmp(&b.strike));
        for (slice, t) in [(&slice_1, t1), (&slice_2, t2)] {
            for q in slice.iter() {
                q.validate()?;
                if q.maturity != t {
                    return Err(Error::InvalidInput(format!(
                        "quote maturity {} does not match slice maturity {t}",
                        q.maturity
                    )));
                }
            }
            for w in slice.windows(2) {
                if w[0].strike >= w[1].strike {
                    return Err(Error::InvalidInput(format!(
                        "duplicate strike {} in one slice",
                        w[1].strike
                    )));
                }
            }
        }
        Ok(Self { underlying: underlying.into(), spot, t0, t1, t2, slice_1, slice_2 })
    }

    /// Quotes of slice `i` (1-based maturity index).
    pub fn slice(&self, i: usize) -> &[OptionQuote] {
        match i {
            1 => &self.slice_1,
            2 => &self.slice_2,
            _ => panic!("maturity index must be 1 or 2, got {i}"),
        }
    }

    /// All strikes quoted in either slice, ascending and deduplicated.
    pub fn all_strikes(&self) -> Vec<f64> {
        let mut ks: Vec<f64> = self.slice_1.iter().chain(&self.slice_2).map(|q| q.strike).collect();
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        ks
    }

    /// Look up the quote of slice `i` at `strike` (exact match).
    pub fn quote(&self, i: usize, strike: f64) -> Option<&OptionQuote> {
        self.slice(i).iter().find(|q| q.strike == strike)
    }
}

/// Keep the `count` highest-volume quotes of one maturity, sorted by strike.
///
/// Ties by volume are broken toward the strike nearest the spot, then toward
/// the lower strike. Fewer quotes than requested are returned as-is; quotes
/// are never duplicated to pad the selection.
pub fn select_liquid(
    quotes: &[OptionQuote],
    maturity: NaiveDate,
    spot: f64,
    count: usize,
) -> Result<Vec<OptionQuote>> {
    let mut pool: Vec<&OptionQuote> = quotes.iter().filter(|q| q.maturity == maturity).collect();
    if pool.is_empty() {
        return Err(Error::NoQuotes(format!("no quotes maturing {maturity}")));
    }
    pool.sort_by(|a, b| {
        b.volume
            .cmp(&a.volume)
            .then_with(|| (a.strike - spot).abs().total_cmp(&(b.strike - spot).abs()))
            .then_with(|| a.strike.total_cmp(&b.strike))
    });
    pool.truncate(count);
    let mut out: Vec<OptionQuote> = pool.into_iter().cloned().collect();
    out.sort_by(|a, b| a.strike.total_cmp(&b.strike));
    Ok(out)
}

/// Default liquidity cutoff: the 20 most traded quotes per maturity.
pub const DEFAULT_LIQUID_COUNT: usize = 20;

// ---------------------------------------------------------------------------
// CSV interfaces
// ---------------------------------------------------------------------------

const QUOTE_HEADER: [&str; 7] = ["underlying", "quote_date", "maturity", "strike", "bid", "ask", "volume"];
const YIELD_HEADER: [&str; 7] = ["date", "beta0", "beta1", "beta2", "beta3", "tau1", "tau2"];

#[derive(Debug, Deserialize, Serialize)]
struct QuoteRow {
    underlying: String,
    quote_date: NaiveDate,
    maturity: NaiveDate,
    strike: f64,
    bid: f64,
    ask: f64,
    volume: u64,
}

/// Read quotes from CSV, validating the exact header.
pub fn read_quotes_csv<R: Read>(reader: R) -> Result<Vec<OptionQuote>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &QUOTE_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let row: QuoteRow = rec?;
        let q = OptionQuote {
            underlying: row.underlying,
            quote_date: row.quote_date,
            maturity: row.maturity,
            strike: row.strike,
            bid: row.bid,
            ask: row.ask,
            volume: row.volume,
        };
        q.validate()?;
        out.push(q);
    }
    Ok(out)
}

pub fn read_quotes_csv_path(path: &Path) -> Result<Vec<OptionQuote>> {
    read_quotes_csv(std::fs::File::open(path)?)
}

/// Write quotes in the documented CSV format.
pub fn write_quotes_csv<W: std::io::Write>(writer: W, quotes: &[OptionQuote]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(QUOTE_HEADER)?;
    for q in quotes {
        wtr.write_record([
            q.underlying.as_str(),
            &q.quote_date.to_string(),
            &q.maturity.to_string(),
            &format_f64(q.strike),
            &format_f64(q.bid),
            &format_f64(q.ask),
            &q.volume.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Yield-parameter rows keyed by date; the latest row at or before a quote
/// date is the curve in force.
pub fn read_yield_csv<R: Read>(reader: R) -> Result<BTreeMap<NaiveDate, YieldCurveParams>> {
    #[derive(Deserialize)]
    struct YieldRow {
        date: NaiveDate,
        beta0: f64,
        beta1: f64,
        beta2: f64,
        beta3: f64,
        tau1: f64,
        tau2: f64,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &YIELD_HEADER)?;
    let mut out = BTreeMap::new();
    for rec in rdr.deserialize() {
        let row: YieldRow = rec?;
        let params = YieldCurveParams::new(row.beta0, row.beta1, row.beta2, row.beta3, row.tau1, row.tau2)?;
        out.insert(row.date, params);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("yield CSV contains no rows".into()));
    }
    Ok(out)
}

pub fn read_yield_csv_path(path: &Path) -> Result<BTreeMap<NaiveDate, YieldCurveParams>> {
    read_yield_csv(std::fs::File::open(path)?)
}

/// Curve in force at `date`: the latest parameter row at or before it.
pub fn curve_for_date(curves: &BTreeMap<NaiveDate, YieldCurveParams>, date: NaiveDate) -> Result<YieldCurveParams> {
    curves
        .range(..=date)
        .next_back()
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::InvalidInput(format!("no yield parameters on or before {date}")))
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        for col in expected {
            if !got.contains(col) {
                return Err(Error::InvalidInput(format!("missing CSV column `{col}`")));
            }
        }
        return Err(Error::InvalidInput(format!(
            "CSV header mismatch: expected {expected:?}, got {got:?}"
        )));
    }
    Ok(())
}

/// Shortest round-trip decimal formatting, used by every CSV writer so that
/// identical runs emit identical bytes.
pub(crate) fn format_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Group quotes into two-maturity snapshots per (underlying, quote_date).
///
/// For each group the two maturities are chosen as: the earliest maturity
/// `t1`, and the maturity closest to `t1 + gap_days` among later ones.
/// Spots are supplied per (underlying, quote_date).
pub fn group_snapshots(
    quotes: &[OptionQuote],
    spots: &BTreeMap<(String, NaiveDate), f64>,
    gap_days: i64,
    liquid_count: usize,
) -> Result<Vec<MarketSnapshot>> {
    let mut by_key: BTreeMap<(String, NaiveDate), Vec<&OptionQuote>> = BTreeMap::new();
    for q in quotes {
        by_key.entry((q.underlying.clone(), q.quote_date)).or_default().push(q);
    }
    let mut out = Vec::new();
    for ((underlying, t0), group) in by_key {
        let spot = *spots.get(&(underlying.clone(), t0)).ok_or_else(|| {
            Error::InvalidInput(format!("no spot for {underlying} on {t0}"))
        })?;
        let mut mats: Vec<NaiveDate> = group.iter().map(|q| q.maturity).collect();
        mats.sort();
        mats.dedup();
        if mats.len() < 2 {
            continue;
        }
        let t1 = mats[0];
        let target = t1 + chrono::Duration::days(gap_days);
        let t2 = *mats[1..]
            .iter()
            .min_by_key(|&&m| ((m - target).num_days().abs(), m))
            .expect("at least one later maturity");
        let all: Vec<OptionQuote> = group.iter().map(|&q| q.clone()).collect();
        let slice_1 = select_liquid(&all, t1, spot, liquid_count)?;
        let slice_2 = select_liquid(&all, t2, spot, liquid_count)?;
        out.push(MarketSnapshot::new(underlying, spot, t0, t1, t2, slice_1, slice_2)?);
    }
    Ok(out)
}
