//! CSV ingestion and the canonical full-precision CSV layout.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnualSeries, Dataset, Provenance, SeriesError, SeriesRole, SharesTriple, Unit};

const SHARE_PUBLIC: &str = "share_public";
const SHARE_OOP: &str = "share_oop";
const SHARE_INSURED: &str = "share_insured";

fn default_year_column() -> String {
    "year".to_owned()
}

fn default_unit() -> Unit {
    Unit::CurrencyMillions
}

/// Binds one CSV column to a named series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesColumn {
    pub column: String,
    /// Series name; defaults to the column header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_unit")]
    pub unit: Unit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<SeriesRole>,
}

impl SeriesColumn {
    pub fn new(column: &str, name: &str, unit: Unit, role: Option<SeriesRole>) -> Self {
        SeriesColumn { column: column.to_owned(), name: Some(name.to_owned()), unit, role }
    }

    fn series_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.column)
    }
}

/// Columns holding the public, out-of-pocket and insured shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareColumns {
    pub public: String,
    pub oop: String,
    pub insured: String,
}

/// How CSV columns map onto a [`Dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    #[serde(default = "default_year_column")]
    pub year_column: String,
    #[serde(default)]
    pub series: Vec<SeriesColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<ShareColumns>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping { year_column: default_year_column(), series: Vec::new(), shares: None }
    }
}

impl ColumnMapping {
    /// Parses the compact form `COLUMN=NAME[:UNIT[:ROLE]],...`.
    ///
    /// `COLUMN=year` names the year column; `COLUMN=share.public`,
    /// `share.oop` and `share.insured` bind the share triple.
    pub fn parse_inline(spec: &str) -> Result<Self, SeriesError> {
        let mut mapping = ColumnMapping::default();
        let mut shares: [Option<String>; 3] = Default::default();
        for entry in spec.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (column, target) = entry
                .split_once('=')
                .ok_or_else(|| SeriesError::Schema(format!("entry `{entry}` lacks `=`")))?;
            let column = column.trim().to_owned();
            let mut parts = target.split(':').map(str::trim);
            let name = parts.next().unwrap_or_default();
            match name {
                "year" => mapping.year_column = column,
                "share.public" => shares[0] = Some(column),
                "share.oop" => shares[1] = Some(column),
                "share.insured" => shares[2] = Some(column),
                _ => {
                    let unit = match parts.next() {
                        Some(u) => Unit::parse(u).ok_or_else(|| SeriesError::Schema(format!("unknown unit `{u}`")))?,
                        None => Unit::CurrencyMillions,
                    };
                    let role = match parts.next() {
                        Some(r) => Some(SeriesRole::parse(r).ok_or_else(|| SeriesError::Schema(format!("unknown role `{r}`")))?),
                        None => None,
                    };
                    if name.is_empty() {
                        return Err(SeriesError::Schema(format!("entry `{entry}` has an empty series name")));
                    }
                    mapping.series.push(SeriesColumn::new(&column, name, unit, role));
                }
            }
        }
        mapping.shares = match shares {
            [Some(public), Some(oop), Some(insured)] => Some(ShareColumns { public, oop, insured }),
            [None, None, None] => None,
            _ => return Err(SeriesError::Schema("share columns need public, oop and insured".into())),
        };
        if mapping.series.is_empty() && mapping.shares.is_none() {
            return Err(SeriesError::Schema("no value columns mapped".into()));
        }
        Ok(mapping)
    }
}

/// Column interpretation for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    Mapping(ColumnMapping),
    /// The layout written by [`write_canonical_csv`]; units and roles come from its header comments.
    Canonical,
}

impl From<ColumnMapping> for Schema {
    fn from(m: ColumnMapping) -> Self {
        Schema::Mapping(m)
    }
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset, SeriesError> {
    let text = std::fs::read_to_string(path).map_err(|e| SeriesError::Io(format!("{}: {e}", path.display())))?;
    load_csv_str(&text, schema, Provenance::retrieved_now(format!("file:{}", path.display())))
}

pub fn load_csv_str(text: &str, schema: &Schema, provenance: Provenance) -> Result<Dataset, SeriesError> {
    let comments = Comments::scan(text);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| SeriesError::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mapping = match schema {
        Schema::Mapping(m) => m.clone(),
        Schema::Canonical => comments.canonical_mapping(&headers)?,
    };
    let provenance = match (schema, &comments.source) {
        (Schema::Canonical, Some(source)) => Provenance { source: source.clone(), retrieved_unix: comments.retrieved },
        _ => provenance,
    };

    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    let col = |name: &str| index.get(name).copied().ok_or_else(|| SeriesError::MissingColumn(name.to_owned()));
    let year_idx = col(&mapping.year_column)?;
    let series_idx = mapping
        .series
        .iter()
        .map(|c| col(&c.column))
        .collect::<Result<Vec<_>, _>>()?;
    let share_idx = match &mapping.shares {
        Some(s) => Some([col(&s.public)?, col(&s.oop)?, col(&s.insured)?]),
        None => None,
    };

    let mut observations: Vec<Vec<(i32, f64)>> = vec![Vec::new(); mapping.series.len()];
    let mut shares = Vec::new();
    let mut prev_year: Option<i32> = None;
    for (row_no, record) in reader.records().enumerate() {
        let row = row_no + 1;
        let record = record.map_err(|e| SeriesError::Csv(e.to_string()))?;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let year_cell = cell(year_idx);
        let year: i32 = year_cell.parse().map_err(|_| SeriesError::BadNumber {
            row,
            column: mapping.year_column.clone(),
            cell: year_cell.to_owned(),
        })?;
        if let Some(prev) = prev_year {
            if year <= prev {
                return Err(SeriesError::NonMonotoneYears { row, prev, next: year });
            }
        }
        prev_year = Some(year);

        for ((spec, &i), obs) in mapping.series.iter().zip(&series_idx).zip(observations.iter_mut()) {
            if let Some(value) = parse_number(cell(i), row, &spec.column)? {
                obs.push((year, value));
            }
        }
        if let (Some(idx), Some(cols)) = (share_idx, &mapping.shares) {
            let parsed = [
                parse_number(cell(idx[0]), row, &cols.public)?,
                parse_number(cell(idx[1]), row, &cols.oop)?,
                parse_number(cell(idx[2]), row, &cols.insured)?,
            ];
            match parsed {
                [Some(p), Some(o), Some(i)] => shares.push(SharesTriple::normalized(year, p, o, i)?),
                [None, None, None] => {}
                _ => return Err(SeriesError::PartialShares { row }),
            }
        }
    }

    let mut dataset = Dataset::new(provenance);
    for (spec, obs) in mapping.series.iter().zip(observations) {
        let series = AnnualSeries::new(spec.series_name(), spec.unit, obs)?;
        dataset.insert_series(series, spec.role)?;
    }
    dataset.with_shares(shares)
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<Option<f64>, SeriesError> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    let cleaned: String = trimmed.chars().filter(|&c| c != ',').collect();
    cleaned
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| SeriesError::BadNumber { row, column: column.to_owned(), cell: trimmed.to_owned() })
}

#[derive(Debug, Default)]
struct Comments {
    units: BTreeMap<String, Unit>,
    roles: BTreeMap<String, SeriesRole>,
    source: Option<String>,
    retrieved: Option<u64>,
}

impl Comments {
    fn scan(text: &str) -> Comments {
        let mut out = Comments::default();
        for line in text.lines().filter_map(|l| l.trim().strip_prefix('#')) {
            let Some((key, value)) = line.trim().split_once(':') else { continue };
            let pairs = || {
                value
                    .split(',')
                    .filter_map(|p| p.split_once('='))
                    .map(|(a, b)| (a.trim().to_owned(), b.trim().to_owned()))
            };
            match key.trim() {
                "units" => {
                    out.units = pairs().filter_map(|(name, u)| Some((name, Unit::parse(&u)?))).collect();
                }
                "roles" => {
                    out.roles = pairs().filter_map(|(r, name)| Some((name, SeriesRole::parse(&r)?))).collect();
                }
                "source" => out.source = Some(value.trim().to_owned()),
                "retrieved" => out.retrieved = value.trim().parse().ok(),
                _ => {}
            }
        }
        out
    }

    fn canonical_mapping(&self, headers: &[String]) -> Result<ColumnMapping, SeriesError> {
        let mut mapping = ColumnMapping::default();
        let share_cols = [SHARE_PUBLIC, SHARE_OOP, SHARE_INSURED];
        let present = share_cols.iter().filter(|c| headers.iter().any(|h| h == *c)).count();
        match present {
            0 => {}
            3 => {
                mapping.shares = Some(ShareColumns {
                    public: SHARE_PUBLIC.into(),
                    oop: SHARE_OOP.into(),
                    insured: SHARE_INSURED.into(),
                })
            }
            _ => return Err(SeriesError::Schema("canonical csv has an incomplete share triple".into())),
        }
        for h in headers {
            if h == &mapping.year_column || share_cols.contains(&h.as_str()) {
                continue;
            }
            let unit = self.units.get(h).copied().unwrap_or(Unit::CurrencyMillions);
            mapping.series.push(SeriesColumn::new(h, h, unit, self.roles.get(h).copied()));
        }
        Ok(mapping)
    }
}

/// Formats `x` with 17 significant digits, dropping trailing zeros.
///
/// Seventeen significant digits always identify an f64 uniquely, so parsing
/// the output yields `x` bit for bit.
pub fn format_full_precision(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_owned() } else { x.to_string() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if !(-6..=20).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let point = exp + 1;
    let mut out = String::from(sign);
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-point) as usize));
        out.push_str(digits);
    } else {
        let point = point as usize;
        if digits.len() <= point {
            out.push_str(digits);
            out.extend(std::iter::repeat('0').take(point - digits.len()));
        } else {
            out.push_str(&digits[..point]);
            out.push('.');
            out.push_str(&digits[point..]);
        }
    }
    out
}

/// Writes `dataset` in the canonical layout: structural header comments,
/// a `year` column, one column per series in name order, then the shares.
///
/// With `with_provenance` a trailing `# source:` / `# retrieved:` footer is appended.
pub fn write_canonical_csv(dataset: &Dataset, with_provenance: bool) -> String {
    let series: Vec<&AnnualSeries> = dataset.series_iter().collect();
    let mut out = String::new();
    let units: Vec<String> = series.iter().map(|s| format!("{}={}", s.name(), s.unit())).collect();
    let _ = writeln!(out, "# units: {}", units.join(","));
    let roles: Vec<String> = dataset.roles().iter().map(|(r, n)| format!("{r}={n}")).collect();
    let _ = writeln!(out, "# roles: {}", roles.join(","));

    let mut header = vec!["year".to_owned()];
    header.extend(series.iter().map(|s| s.name().to_owned()));
    let has_shares = !dataset.shares().is_empty();
    if has_shares {
        header.extend([SHARE_PUBLIC, SHARE_OOP, SHARE_INSURED].map(str::to_owned));
    }
    let years: BTreeSet<i32> = series
        .iter()
        .flat_map(|s| s.years())
        .chain(dataset.shares().iter().map(|s| s.year))
        .collect();

    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(&header).expect("in-memory write");
    for year in years {
        let mut row = vec![year.to_string()];
        row.extend(series.iter().map(|s| s.get(year).map(format_full_precision).unwrap_or_default()));
        if has_shares {
            match dataset.share(year) {
                Some(t) => row.extend([t.public, t.oop, t.insured].map(format_full_precision)),
                None => row.extend(std::iter::repeat(String::new()).take(3)),
            }
        }
        writer.write_record(&row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8"));
    if with_provenance {
        let prov = dataset.provenance();
        let _ = writeln!(out, "# source: {}", prov.source);
        if let Some(ts) = prov.retrieved_unix {
            let _ = writeln!(out, "# retrieved: {ts}");
        }
    }
    out
}
