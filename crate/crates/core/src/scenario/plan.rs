use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::gateway;
use crate::series::{load_csv, AnnualSeries, ColumnMapping, Dataset, Schema, SeriesColumn, Unit};
use crate::sustainability::{Epsilon, PublicShare};

/// Which dataset supplies the bridge-year propensity and GDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpliceRule {
    /// Bridge year from the baseline (actuals) dataset.
    #[default]
    Baseline,
    /// Bridge year from the plan dataset itself.
    Plan,
}

/// A plan to assess against a baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSpec {
    pub baseline: Dataset,
    pub baseline_year: i32,
    pub plan: Dataset,
    /// Earlier actuals for an endpoint σ up to the baseline year.
    pub history: Option<Dataset>,
    pub public_share: PublicShare,
    pub splice: SpliceRule,
    pub omega: f64,
    pub epsilon: Epsilon,
    pub stress_rates: Vec<f64>,
}

impl PlanSpec {
    pub fn new(baseline: Dataset, baseline_year: i32, plan: Dataset, public_share: impl Into<PublicShare>) -> Self {
        PlanSpec {
            baseline,
            baseline_year,
            plan,
            history: None,
            public_share: public_share.into(),
            splice: SpliceRule::Baseline,
            omega: 0.0,
            epsilon: Epsilon::DEFAULT,
            stress_rates: Vec::new(),
        }
    }

    pub fn with_history(mut self, history: Dataset) -> Self {
        self.history = Some(history);
        self
    }

    pub fn with_splice(mut self, splice: SpliceRule) -> Self {
        self.splice = splice;
        self
    }

    pub fn with_stress_rates(mut self, rates: Vec<f64>) -> Self {
        self.stress_rates = rates;
        self
    }
}

/// Flat JSON form of a [`PlanSpec`].
///
/// Dataset references are either `fixture:<name>` or a CSV path relative to
/// the config file. A `*_schema` entry is a mapping JSON file (`.json`) or an
/// inline `COLUMN=NAME:UNIT:ROLE,...` mapping; without one the CSV is read in
/// the canonical layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub baseline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_schema: Option<String>,
    pub baseline_year: i32,
    pub plan: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_schema: Option<String>,
    /// Constant public share `P`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_share: Option<f64>,
    /// CSV with `year,public_share` columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_share_csv: Option<String>,
    #[serde(default)]
    pub splice: SpliceRule,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub epsilon: Epsilon,
    #[serde(default)]
    pub stress_rates: Vec<f64>,
}

impl PlanConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, std::path::PathBuf), ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, dir))
    }

    /// Loads every referenced dataset; paths resolve against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<PlanSpec, ScenarioError> {
        let baseline = resolve_dataset(&self.baseline, self.baseline_schema.as_deref(), base_dir)?;
        let plan = resolve_dataset(&self.plan, self.plan_schema.as_deref(), base_dir)?;
        let history = self
            .history
            .as_deref()
            .map(|h| resolve_dataset(h, self.history_schema.as_deref(), base_dir))
            .transpose()?;
        let public_share = match (self.public_share, &self.public_share_csv) {
            (Some(p), None) => PublicShare::Constant(p),
            (None, Some(csv)) => load_share_path(&base_dir.join(csv))?,
            (Some(_), Some(_)) => {
                return Err(ScenarioError::Config("give either public_share or public_share_csv, not both".into()))
            }
            (None, None) => return Err(ScenarioError::Config("public_share or public_share_csv is required".into())),
        };
        Ok(PlanSpec {
            baseline,
            baseline_year: self.baseline_year,
            plan,
            history,
            public_share,
            splice: self.splice,
            omega: self.omega,
            epsilon: self.epsilon,
            stress_rates: self.stress_rates.clone(),
        })
    }
}

/// Resolves `fixture:<name>` or a CSV path with an optional schema.
pub fn resolve_dataset(reference: &str, schema: Option<&str>, base_dir: &Path) -> Result<Dataset, ScenarioError> {
    if let Some(name) = reference.strip_prefix("fixture:") {
        return Ok(gateway::load_fixture(name)?);
    }
    let schema = match schema {
        None => Schema::Canonical,
        Some(s) => parse_schema_arg(s, base_dir)?,
    };
    Ok(load_csv(&base_dir.join(reference), &schema)?)
}

/// A `.json` mapping file, `canonical`, or an inline mapping.
pub fn parse_schema_arg(arg: &str, base_dir: &Path) -> Result<Schema, ScenarioError> {
    if arg == "canonical" {
        return Ok(Schema::Canonical);
    }
    if arg.ends_with(".json") {
        let path = base_dir.join(arg);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        let mapping: ColumnMapping =
            serde_json::from_str(&text).map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        return Ok(Schema::Mapping(mapping));
    }
    Ok(Schema::Mapping(ColumnMapping::parse_inline(arg)?))
}

fn load_share_path(path: &Path) -> Result<PublicShare, ScenarioError> {
    let mapping = ColumnMapping {
        year_column: "year".into(),
        series: vec![SeriesColumn::new("public_share", "public_share", Unit::Fraction, None)],
        shares: None,
    };
    let ds = load_csv(path, &Schema::Mapping(mapping))?;
    let series: &AnnualSeries = ds
        .series("public_share")
        .ok_or_else(|| ScenarioError::Config("public share csv is empty".into()))?;
    Ok(PublicShare::PerYear(series.iter().collect::<BTreeMap<_, _>>()))
}
