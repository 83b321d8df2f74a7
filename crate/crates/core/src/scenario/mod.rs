//! Plan assessment: bind a baseline and a plan, compute per-year σ with
//! bands, sweep GDP growth, and render the result.

mod assess;
mod plan;
mod report;

use thiserror::Error;

use crate::gateway::GatewayError;
use crate::growth::GrowthError;
use crate::series::SeriesError;
use crate::sustainability::SustainabilityError;

pub use assess::{
    assess, stress_gdp, AssessmentReport, SpendingGrowth, SpendingGrowthPoint, StressResult, STRESS_DEGENERATE_ZONE,
};
pub use plan::{parse_schema_arg, resolve_dataset, PlanConfig, PlanSpec, SpliceRule};
pub use report::{parse_structured, render_report, render_report_with, RenderOptions, ReportFormat};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("plan years: {0}")]
    PlanYears(String),
    #[error("bridge year {year}: {what} missing from the {dataset} dataset")]
    MissingBridge { year: i32, dataset: &'static str, what: &'static str },
    #[error("public share path has no value for {0}")]
    PublicShareGap(i32),
    #[error("stress grid is empty")]
    EmptyGrid,
    #[error("stress rate must be finite and above -1, got {0}")]
    InvalidRate(f64),
    #[error("structured report: {0}")]
    Structured(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Sustainability(#[from] SustainabilityError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}
