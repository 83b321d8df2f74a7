//! Sustainability analysis of public health financing.
//!
//! - [`series`]: annual series, datasets, CSV ingestion and canonical output.
//! - [`growth`]: log-linear growth fits, projection, average and marginal growth.
//! - [`sustainability`]: coefficient table, budget identity and the σ index.
//! - [`scenario`]: plan assessment, GDP stress sweeps and reports.
//! - [`gateway`]: pinned fixtures, checksum-verified cache and HTTP retrieval.

pub mod gateway;
pub mod growth;
pub mod scenario;
pub mod series;
pub mod sustainability;

pub use growth::{fit_log_growth, project, GrowthFit};
pub use scenario::{assess, stress_gdp, AssessmentReport, PlanSpec};
pub use series::{AnnualSeries, Dataset, SeriesRole, Unit};
pub use sustainability::{classify, Band, Epsilon, SigmaAssessment, SigmaValue};
