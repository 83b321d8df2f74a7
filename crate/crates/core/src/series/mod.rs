//! Annual series, share triples and the validated [`Dataset`] container.

mod derive;
mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use derive::{derive, DerivedKind};
pub use io::{
    format_full_precision, load_csv, load_csv_str, write_canonical_csv, ColumnMapping, Schema,
    SeriesColumn, ShareColumns,
};

/// Share triples whose sum deviates from one by more than this are rejected.
pub const SHARE_REJECT_TOLERANCE: f64 = 0.02;

/// Normalized triples sum to one within this tolerance.
pub const SHARE_SUM_TOLERANCE: f64 = 1e-6;

/// Sums this close to one are left untouched so normalization is idempotent.
const SHARE_EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series `{series}`: years must be consecutive, found {prev} followed by {next}")]
    NonConsecutiveYears { series: String, prev: i32, next: i32 },
    #[error("series `{series}`: year {year} has non-finite value")]
    NonFinite { series: String, year: i32 },
    #[error("series `{series}`: year {year} has non-positive currency value {value}")]
    NonPositiveCurrency { series: String, year: i32, value: f64 },
    #[error("series `{series}`: year {year} has fraction {value} outside [0, 1]")]
    FractionOutOfRange { series: String, year: i32, value: f64 },
    #[error("series `{0}` has no observations")]
    Empty(String),
    #[error("share triple for {year} sums to {sum:.4}, deviating from 1 by more than {tolerance}")]
    ShareSum { year: i32, sum: f64, tolerance: f64 },
    #[error("share triple for {year} has component {value} outside [0, 1]")]
    ShareOutOfRange { year: i32, value: f64 },
    #[error("share triples must be listed in strictly increasing year order ({prev} then {next})")]
    ShareYearOrder { prev: i32, next: i32 },
    #[error("duplicate series `{0}`")]
    DuplicateSeries(String),
    #[error("missing series: {0}")]
    MissingSeries(String),
    #[error("no common years between {0}")]
    NoCommonYears(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse `{cell}` in column `{column}` as a number")]
    BadNumber { row: usize, column: String, cell: String },
    #[error("row {row}: years must be strictly increasing ({prev} then {next})")]
    NonMonotoneYears { row: usize, prev: i32, next: i32 },
    #[error("row {row}: share columns must be all present or all empty")]
    PartialShares { row: usize },
    #[error("schema: {0}")]
    Schema(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

/// Units carried by a series. Stored, never converted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    /// Millions of euro (nominal).
    CurrencyMillions,
    /// A dimensionless ratio in `[0, 1]`.
    Fraction,
    /// Signed change of a currency series per year.
    CurrencyMillionsPerYear,
    /// Signed change of a fraction per year.
    FractionPerYear,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::CurrencyMillions => "currency-millions",
            Unit::Fraction => "fraction",
            Unit::CurrencyMillionsPerYear => "currency-millions-per-year",
            Unit::FractionPerYear => "fraction-per-year",
        }
    }

    pub fn parse(s: &str) -> Option<Unit> {
        match s.trim() {
            "currency-millions" | "currency" => Some(Unit::CurrencyMillions),
            "fraction" => Some(Unit::Fraction),
            "currency-millions-per-year" => Some(Unit::CurrencyMillionsPerYear),
            "fraction-per-year" => Some(Unit::FractionPerYear),
            _ => None,
        }
    }

    /// Unit of the per-year change of a series in this unit.
    pub fn per_year(self) -> Unit {
        match self {
            Unit::CurrencyMillions | Unit::CurrencyMillionsPerYear => Unit::CurrencyMillionsPerYear,
            Unit::Fraction | Unit::FractionPerYear => Unit::FractionPerYear,
        }
    }

    fn check(self, series: &str, year: i32, value: f64) -> Result<(), SeriesError> {
        if !value.is_finite() {
            return Err(SeriesError::NonFinite { series: series.to_owned(), year });
        }
        match self {
            Unit::CurrencyMillions if value <= 0.0 => Err(SeriesError::NonPositiveCurrency {
                series: series.to_owned(),
                year,
                value,
            }),
            Unit::Fraction if !(0.0..=1.0).contains(&value) => Err(SeriesError::FractionOutOfRange {
                series: series.to_owned(),
                year,
                value,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The analytical role a series plays, independent of its name in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesRole {
    /// Nominal GDP, `Y`.
    Gdp,
    /// Total health financing, `H`.
    TotalHealth,
    /// Publicly financed health spending, `PH`.
    PublicHealth,
    /// Out-of-pocket health financing, `OH`.
    OopHealth,
    /// Privately insured health financing, `IH`.
    InsuredHealth,
    /// Total public revenue, `T·Y`.
    Revenue,
    /// Interest paid on sovereign debt, `S·Y`.
    Interest,
}

impl SeriesRole {
    pub const ALL: [SeriesRole; 7] = [
        SeriesRole::Gdp,
        SeriesRole::TotalHealth,
        SeriesRole::PublicHealth,
        SeriesRole::OopHealth,
        SeriesRole::InsuredHealth,
        SeriesRole::Revenue,
        SeriesRole::Interest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesRole::Gdp => "gdp",
            SeriesRole::TotalHealth => "total_health",
            SeriesRole::PublicHealth => "public_health",
            SeriesRole::OopHealth => "oop_health",
            SeriesRole::InsuredHealth => "insured_health",
            SeriesRole::Revenue => "revenue",
            SeriesRole::Interest => "interest",
        }
    }

    pub fn parse(s: &str) -> Option<SeriesRole> {
        SeriesRole::ALL.into_iter().find(|r| r.as_str() == s.trim())
    }
}

impl fmt::Display for SeriesRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One named annual series over a contiguous run of years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    name: String,
    unit: Unit,
    first_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    /// Builds a series from `(year, value)` pairs, which must cover consecutive years.
    pub fn new(
        name: impl Into<String>,
        unit: Unit,
        observations: impl IntoIterator<Item = (i32, f64)>,
    ) -> Result<Self, SeriesError> {
        let name = name.into();
        let mut first_year = None;
        let mut prev: Option<i32> = None;
        let mut values = Vec::new();
        for (year, value) in observations {
            if let Some(p) = prev {
                if year != p + 1 {
                    return Err(SeriesError::NonConsecutiveYears { series: name, prev: p, next: year });
                }
            } else {
                first_year = Some(year);
            }
            unit.check(&name, year, value)?;
            values.push(value);
            prev = Some(year);
        }
        let first_year = first_year.ok_or_else(|| SeriesError::Empty(name.clone()))?;
        Ok(AnnualSeries { name, unit, first_year, values })
    }

    /// Builds a series whose first value belongs to `first_year`.
    pub fn from_values(
        name: impl Into<String>,
        unit: Unit,
        first_year: i32,
        values: impl IntoIterator<Item = f64>,
    ) -> Result<Self, SeriesError> {
        Self::new(name, unit, (first_year..).zip(values))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.values.len() as i32 - 1
    }

    pub fn years(&self) -> RangeInclusive<i32> {
        self.first_year..=self.last_year()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let idx = usize::try_from(year.checked_sub(self.first_year)?).ok()?;
        self.values.get(idx).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        (self.first_year..).zip(self.values.iter().copied())
    }

    /// The sub-series over `years`, or `None` when the ranges do not overlap.
    pub fn restrict(&self, years: RangeInclusive<i32>) -> Option<AnnualSeries> {
        let start = (*years.start()).max(self.first_year);
        let end = (*years.end()).min(self.last_year());
        if start > end {
            return None;
        }
        let lo = (start - self.first_year) as usize;
        let hi = (end - self.first_year) as usize;
        Some(AnnualSeries {
            name: self.name.clone(),
            unit: self.unit,
            first_year: start,
            values: self.values[lo..=hi].to_vec(),
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Public, out-of-pocket and privately insured fractions of total health financing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharesTriple {
    pub year: i32,
    pub public: f64,
    pub oop: f64,
    pub insured: f64,
}

impl SharesTriple {
    /// Validates a raw triple and rescales it to sum exactly one.
    ///
    /// Sums within [`SHARE_REJECT_TOLERANCE`] of one are treated as rounding
    /// and rescaled proportionally; anything further off is rejected.
    pub fn normalized(year: i32, public: f64, oop: f64, insured: f64) -> Result<Self, SeriesError> {
        for value in [public, oop, insured] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(SeriesError::ShareOutOfRange { year, value });
            }
        }
        let sum = public + oop + insured;
        if (sum - 1.0).abs() > SHARE_REJECT_TOLERANCE {
            return Err(SeriesError::ShareSum { year, sum, tolerance: SHARE_REJECT_TOLERANCE });
        }
        if (sum - 1.0).abs() <= SHARE_EXACT_TOLERANCE {
            return Ok(SharesTriple { year, public, oop, insured });
        }
        Ok(SharesTriple { year, public: public / sum, oop: oop / sum, insured: insured / sum })
    }

    pub fn sum(&self) -> f64 {
        self.public + self.oop + self.insured
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Seconds since the Unix epoch; `None` for pinned fixtures.
    pub retrieved_unix: Option<u64>,
}

impl Provenance {
    pub fn new(source: impl Into<String>) -> Self {
        Provenance { source: source.into(), retrieved_unix: None }
    }

    pub fn retrieved_now(source: impl Into<String>) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .ok();
        Provenance { source: source.into(), retrieved_unix: secs }
    }
}

/// A validated collection of annual series plus share triples.
///
/// Immutable once built; derived ratios such as `H/Y` are computed on demand
/// through [`derive`] rather than stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    series: BTreeMap<String, AnnualSeries>,
    roles: BTreeMap<SeriesRole, String>,
    shares: Vec<SharesTriple>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(provenance: Provenance) -> Self {
        Dataset { provenance, ..Default::default() }
    }

    pub fn with_series(mut self, series: AnnualSeries, role: Option<SeriesRole>) -> Result<Self, SeriesError> {
        self.insert_series(series, role)?;
        Ok(self)
    }

    pub fn insert_series(&mut self, series: AnnualSeries, role: Option<SeriesRole>) -> Result<(), SeriesError> {
        let name = series.name().to_owned();
        if self.series.contains_key(&name) {
            return Err(SeriesError::DuplicateSeries(name));
        }
        if let Some(role) = role {
            if let Some(existing) = self.roles.get(&role) {
                return Err(SeriesError::Schema(format!(
                    "role `{role}` bound to both `{existing}` and `{name}`"
                )));
            }
            self.roles.insert(role, name.clone());
        }
        self.series.insert(name, series);
        Ok(())
    }

    /// Replaces the share triples; years must be strictly increasing.
    pub fn with_shares(mut self, shares: Vec<SharesTriple>) -> Result<Self, SeriesError> {
        for pair in shares.windows(2) {
            if pair[1].year <= pair[0].year {
                return Err(SeriesError::ShareYearOrder { prev: pair[0].year, next: pair[1].year });
            }
        }
        self.shares = shares;
        Ok(self)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn series(&self, name: &str) -> Option<&AnnualSeries> {
        self.series.get(name)
    }

    pub fn series_iter(&self) -> impl Iterator<Item = &AnnualSeries> {
        self.series.values()
    }

    pub fn roles(&self) -> &BTreeMap<SeriesRole, String> {
        &self.roles
    }

    pub fn role_of(&self, name: &str) -> Option<SeriesRole> {
        self.roles.iter().find(|(_, n)| n.as_str() == name).map(|(r, _)| *r)
    }

    pub fn by_role(&self, role: SeriesRole) -> Option<&AnnualSeries> {
        self.roles.get(&role).and_then(|name| self.series.get(name))
    }

    pub fn require(&self, role: SeriesRole) -> Result<&AnnualSeries, SeriesError> {
        self.by_role(role).ok_or_else(|| SeriesError::MissingSeries(role.to_string()))
    }

    pub fn shares(&self) -> &[SharesTriple] {
        &self.shares
    }

    pub fn share(&self, year: i32) -> Option<&SharesTriple> {
        self.shares
            .binary_search_by_key(&year, |s| s.year)
            .ok()
            .map(|i| &self.shares[i])
    }

    /// The public share `P` as a fraction series, when the share triples are contiguous.
    pub fn public_share_series(&self) -> Option<AnnualSeries> {
        AnnualSeries::new("public_share", Unit::Fraction, self.shares.iter().map(|s| (s.year, s.public))).ok()
    }

    /// Intersection of the year ranges of `series`; errors when empty.
    pub fn common_years(series: &[&AnnualSeries]) -> Result<RangeInclusive<i32>, SeriesError> {
        let start = series.iter().map(|s| s.first_year()).max();
        let end = series.iter().map(|s| s.last_year()).min();
        match (start, end) {
            (Some(start), Some(end)) if start <= end => Ok(start..=end),
            _ => Err(SeriesError::NoCommonYears(
                series.iter().map(|s| format!("`{}`", s.name())).collect::<Vec<_>>().join(", "),
            )),
        }
    }

    /// Whether two datasets carry identical values, units and roles.
    pub fn same_values(&self, other: &Dataset) -> bool {
        self.series == other.series && self.roles == other.roles && self.shares == other.shares
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_year_gaps() {
        let err = AnnualSeries::new("y", Unit::CurrencyMillions, [(1997, 1.0), (2010, 2.0)]).unwrap_err();
        assert!(matches!(err, SeriesError::NonConsecutiveYears { prev: 1997, next: 2010, .. }));
    }

    #[test]
    fn rejects_unit_violations() {
        assert!(matches!(
            AnnualSeries::from_values("y", Unit::CurrencyMillions, 2010, [1.0, -2.0]),
            Err(SeriesError::NonPositiveCurrency { year: 2011, .. })
        ));
        assert!(matches!(
            AnnualSeries::from_values("p", Unit::Fraction, 2010, [1.2]),
            Err(SeriesError::FractionOutOfRange { .. })
        ));
        assert!(matches!(
            AnnualSeries::from_values("p", Unit::Fraction, 2010, [f64::NAN]),
            Err(SeriesError::NonFinite { .. })
        ));
        assert!(AnnualSeries::from_values("d", Unit::CurrencyMillionsPerYear, 2010, [-5.0]).is_ok());
    }

    #[test]
    fn get_and_restrict() {
        let s = AnnualSeries::from_values("y", Unit::CurrencyMillions, 2010, [1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.get(2011), Some(2.0));
        assert_eq!(s.get(2009), None);
        assert_eq!(s.get(2013), None);
        let r = s.restrict(2011..=2020).unwrap();
        assert_eq!(r.years(), 2011..=2012);
        assert_eq!(r.values(), &[2.0, 3.0]);
        assert!(s.restrict(2020..=2021).is_none());
    }

    #[test]
    fn shares_accept_exhibit_rows() {
        let t = SharesTriple::normalized(1997, 0.708, 0.264, 0.028).unwrap();
        assert!((t.sum() - 1.0).abs() <= SHARE_SUM_TOLERANCE);
    }

    #[test]
    fn shares_rescale_rounding_and_reject_corruption() {
        let t = SharesTriple::normalized(2000, 0.71, 0.27, 0.03).unwrap();
        assert!((t.sum() - 1.0).abs() <= 1e-15);
        assert!((t.public - 0.71 / 1.01).abs() < 1e-15);
        let err = SharesTriple::normalized(2000, 0.70, 0.20, 0.05).unwrap_err();
        assert!(matches!(err, SeriesError::ShareSum { .. }));
    }

    #[test]
    fn normalization_is_idempotent() {
        let once = SharesTriple::normalized(2000, 0.71, 0.27, 0.03).unwrap();
        let twice = SharesTriple::normalized(2000, once.public, once.oop, once.insured).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn common_years_errors_when_disjoint() {
        let a = AnnualSeries::from_values("a", Unit::CurrencyMillions, 2000, [1.0, 1.0]).unwrap();
        let b = AnnualSeries::from_values("b", Unit::CurrencyMillions, 2005, [1.0]).unwrap();
        assert!(matches!(Dataset::common_years(&[&a, &b]), Err(SeriesError::NoCommonYears(_))));
        let c = AnnualSeries::from_values("c", Unit::CurrencyMillions, 2001, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(Dataset::common_years(&[&a, &c]).unwrap(), 2001..=2001);
    }

    #[test]
    fn roles_are_unique() {
        let a = AnnualSeries::from_values("a", Unit::CurrencyMillions, 2000, [1.0]).unwrap();
        let b = AnnualSeries::from_values("b", Unit::CurrencyMillions, 2000, [1.0]).unwrap();
        let ds = Dataset::default().with_series(a, Some(SeriesRole::Gdp)).unwrap();
        assert!(ds.with_series(b, Some(SeriesRole::Gdp)).is_err());
    }
}
