//! Log-linear growth estimation, correlation, projection and average/marginal growth.
//!
//! Growth rates are estimated by ordinary least squares of `ln(value)` on
//! `t = 0, 1, …, n`. The slope `b` is a continuous per-period rate; tables
//! report `exp(b) − 1`. Projections compound a continuous rate:
//! `v · exp(rate · t)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::series::{AnnualSeries, SeriesError};

/// Fits with `|r|` below this are flagged not meaningful.
pub const MEANINGFUL_MIN_ABS_R: f64 = 0.5;

/// Fits whose two-sided p-value exceeds this are flagged not meaningful.
pub const MEANINGFUL_MAX_P: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("`{series}` needs at least 2 observations, has {n}")]
    TooFewPoints { series: String, n: usize },
    #[error("`{series}`: log undefined for non-positive value {value} in {year}")]
    NonPositive { series: String, year: i32, value: f64 },
    #[error("series lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("projection base must be positive, got {0}")]
    NonPositiveBase(f64),
    #[error("year {year} not covered by `{series}`")]
    YearNotInSeries { series: String, year: i32 },
    #[error("base year {0} coincides with the final year")]
    DegenerateHorizon(i32),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Outcome of a Pearson product-moment correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Defined(f64),
    /// One of the inputs has zero variance.
    NotMeaningful,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(r) => Some(r),
            Correlation::NotMeaningful => None,
        }
    }
}

/// Pearson correlation of two equally long samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, GrowthError> {
    if x.len() != y.len() {
        return Err(GrowthError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 2 {
        return Err(GrowthError::TooFewPoints { series: "pearson input".into(), n: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(GrowthError::NonFinite);
    }
    if is_constant(x) || is_constant(y) {
        return Ok(Correlation::NotMeaningful);
    }
    let m = Moments::new(x, y);
    if m.sxx <= 0.0 || m.syy <= 0.0 {
        return Ok(Correlation::NotMeaningful);
    }
    let r = m.sxy / (m.sxx.sqrt() * m.syy.sqrt());
    Ok(Correlation::Defined(r.clamp(-1.0, 1.0)))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

struct Moments {
    sxx: f64,
    sxy: f64,
    syy: f64,
    mean_x: f64,
    mean_y: f64,
}

impl Moments {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean_x = x.iter().sum::<f64>() / n;
        let mean_y = y.iter().sum::<f64>() / n;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for (&a, &b) in x.iter().zip(y) {
            let (dx, dy) = (a - mean_x, b - mean_y);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        Moments { sxx, sxy, syy, mean_x, mean_y }
    }
}

/// Two-sided p-value of `r` under the t-distribution with `n − 2` degrees of freedom.
///
/// `None` when `n < 3`, where two points always fit exactly.
pub fn correlation_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 || !r.is_finite() {
        return None;
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return Some(0.0);
    }
    let t = r.abs() * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * (1.0 - dist.cdf(t))).clamp(0.0, 1.0))
}

/// Which values the reported correlation is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationBasis {
    /// `(t, ln value)`, consistent with the log regression.
    #[default]
    LogValues,
    /// `(t, value)`.
    RawValues,
}

/// A fitted exponential trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub series_name: String,
    pub base_year: i32,
    /// Observations minus one.
    pub n_periods: usize,
    /// Continuous per-period rate (OLS slope on logs).
    pub slope: f64,
    /// `exp(slope) − 1`, the rate printed in growth tables.
    pub reported_rate: f64,
    /// `None` when either regressor has zero variance.
    pub pearson_r: Option<f64>,
    pub p_value: Option<f64>,
    pub meaningful: bool,
    /// Observed value at `t = 0`.
    pub base_value: f64,
}

pub fn fit_log_growth(series: &AnnualSeries) -> Result<GrowthFit, GrowthError> {
    fit_log_growth_with(series, CorrelationBasis::LogValues)
}

pub fn fit_log_growth_with(series: &AnnualSeries, basis: CorrelationBasis) -> Result<GrowthFit, GrowthError> {
    if series.len() < 2 {
        return Err(GrowthError::TooFewPoints { series: series.name().to_owned(), n: series.len() });
    }
    if let Some((year, value)) = series.iter().find(|(_, v)| *v <= 0.0) {
        return Err(GrowthError::NonPositive { series: series.name().to_owned(), year, value });
    }
    let t: Vec<f64> = (0..series.len()).map(|i| i as f64).collect();
    let logs: Vec<f64> = series.values().iter().map(|v| v.ln()).collect();

    let slope = if is_constant(&logs) {
        0.0
    } else {
        let m = Moments::new(&t, &logs);
        debug_assert!(m.mean_x.is_finite() && m.mean_y.is_finite());
        m.sxy / m.sxx
    };
    let corr = match basis {
        CorrelationBasis::LogValues => pearson(&t, &logs)?,
        CorrelationBasis::RawValues => pearson(&t, series.values())?,
    };
    let pearson_r = corr.value();
    let p_value = pearson_r.and_then(|r| correlation_p_value(r, series.len()));
    Ok(GrowthFit {
        series_name: series.name().to_owned(),
        base_year: series.first_year(),
        n_periods: series.len() - 1,
        slope,
        reported_rate: slope.exp_m1(),
        pearson_r,
        p_value,
        meaningful: is_meaningful(pearson_r, p_value),
        base_value: series.values()[0],
    })
}

/// `|r| ≥ 0.5` and, where a p-value exists, `p ≤ 0.05`.
pub fn is_meaningful(r: Option<f64>, p_value: Option<f64>) -> bool {
    match r {
        None => false,
        Some(r) => r.abs() >= MEANINGFUL_MIN_ABS_R && p_value.map_or(true, |p| p <= MEANINGFUL_MAX_P),
    }
}

/// `base · exp(rate · periods)`, with `rate` a continuous per-period rate.
pub fn project(base: f64, rate: f64, periods: u32) -> Result<f64, GrowthError> {
    if !base.is_finite() || !rate.is_finite() {
        return Err(GrowthError::NonFinite);
    }
    if base <= 0.0 {
        return Err(GrowthError::NonPositiveBase(base));
    }
    Ok(base * (rate * f64::from(periods)).exp())
}

/// `(value(final) − value(base)) / (final − base)`, in series units per year.
pub fn average_growth(series: &AnnualSeries, base_year: i32) -> Result<f64, GrowthError> {
    let base = series.get(base_year).ok_or_else(|| GrowthError::YearNotInSeries {
        series: series.name().to_owned(),
        year: base_year,
    })?;
    let final_year = series.last_year();
    if final_year == base_year {
        return Err(GrowthError::DegenerateHorizon(base_year));
    }
    Ok((series.values()[series.len() - 1] - base) / f64::from(final_year - base_year))
}

/// Average growth `AG(t)` for every horizon after `base_year`, indexed by the horizon's end year.
pub fn average_growth_path(series: &AnnualSeries, base_year: i32) -> Result<AnnualSeries, GrowthError> {
    let base = series.get(base_year).ok_or_else(|| GrowthError::YearNotInSeries {
        series: series.name().to_owned(),
        year: base_year,
    })?;
    if series.last_year() == base_year {
        return Err(GrowthError::DegenerateHorizon(base_year));
    }
    let points = series
        .iter()
        .filter(|(year, _)| *year > base_year)
        .map(|(year, v)| (year, (v - base) / f64::from(year - base_year)));
    Ok(AnnualSeries::new(
        format!("{}_average_growth", series.name()),
        series.unit().per_year(),
        points,
    )?)
}

/// First differences `value(t) − value(t − 1)`, indexed by the later year.
pub fn marginal_growth(series: &AnnualSeries) -> Result<AnnualSeries, GrowthError> {
    if series.len() < 2 {
        return Err(GrowthError::TooFewPoints { series: series.name().to_owned(), n: series.len() });
    }
    let diffs = series.values().windows(2).map(|w| w[1] - w[0]);
    Ok(AnnualSeries::from_values(
        format!("{}_marginal_growth", series.name()),
        series.unit().per_year(),
        series.first_year() + 1,
        diffs,
    )?)
}
