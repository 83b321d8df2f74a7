//! Budget-identity decomposition, the coefficient table, and the
//! sustainability index σ with its band classification.

mod band;
mod coefficients;
mod sigma;

use thiserror::Error;

use crate::series::SeriesError;

pub use band::{classify, Band, Epsilon};
pub use coefficients::{
    budget_decompose, coefficient_table, BudgetDecomposition, CoefficientRow, CoefficientTable, PublicShare,
};
pub use sigma::{
    sigma_dp_zero, sigma_dy_zero, sigma_full, sigma_stabilized, FullInputs, InputSource, SigmaAssessment,
    SigmaInputs, SigmaValue, SigmaVariant, DEGENERATE_RELATIVE_CHANGE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SustainabilityError {
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid {what}: {value}")]
    InvalidInput { what: &'static str, value: f64 },
    #[error("no public share given for {0}")]
    MissingPublicShare(i32),
    #[error("public share for {year} must lie in (0, 1], got {value}")]
    InvalidPublicShare { year: i32, value: f64 },
    #[error("waste {omega} must lie in [0, Pphi = {public_phi}]")]
    OmegaOutOfRange { omega: f64, public_phi: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}
