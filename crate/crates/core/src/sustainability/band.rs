use std::fmt;

use serde::{Deserialize, Serialize};

use super::SustainabilityError;

/// Half-width of the point categories `σ = −1` and `σ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub const DEFAULT: Epsilon = Epsilon(0.05);

    /// Accepts values in the open interval `(0, 0.5)`.
    pub fn new(value: f64) -> Result<Self, SustainabilityError> {
        if value.is_finite() && value > 0.0 && value < 0.5 {
            Ok(Epsilon(value))
        } else {
            Err(SustainabilityError::InvalidEpsilon(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::DEFAULT
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = SustainabilityError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Epsilon::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

/// Sustainability band of a σ value, ordered along the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    /// `σ < −1 − ε`: public health financing is being reduced.
    ReductionRisk,
    /// `|σ + 1| ≤ ε`: nominal public health spending is stabilized.
    SpendingStabilized,
    /// `−1 + ε < σ < −ε`.
    FinanciallySustainable,
    /// `|σ| ≤ ε`: growth of the public propensity is stabilized.
    PropensityGrowthStabilized,
    /// `ε < σ ≤ 1`: lower limit of financial unsustainability.
    UnsustainableLower,
    /// `σ > 1`: financial and fiscal sustainability at risk.
    FinancialFiscalRisk,
}

impl Band {
    pub const ALL: [Band; 6] = [
        Band::ReductionRisk,
        Band::SpendingStabilized,
        Band::FinanciallySustainable,
        Band::PropensityGrowthStabilized,
        Band::UnsustainableLower,
        Band::FinancialFiscalRisk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::ReductionRisk => "ReductionRisk",
            Band::SpendingStabilized => "SpendingStabilized",
            Band::FinanciallySustainable => "FinanciallySustainable",
            Band::PropensityGrowthStabilized => "PropensityGrowthStabilized",
            Band::UnsustainableLower => "UnsustainableLower",
            Band::FinancialFiscalRisk => "FinancialFiscalRisk",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Band::ReductionRisk => "reduction of public health financing; social and epidemiological sustainability at risk",
            Band::SpendingStabilized => "stabilization of public health spending",
            Band::FinanciallySustainable => "financially sustainable intervention",
            Band::PropensityGrowthStabilized => "stabilization of public health spending propensity growth",
            Band::UnsustainableLower => "lower limit of financial unsustainability",
            Band::FinancialFiscalRisk => "financial and fiscal sustainability at risk",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a finite σ onto its band. Every finite real lands in exactly one band.
pub fn classify(sigma: f64, epsilon: Epsilon) -> Band {
    debug_assert!(sigma.is_finite(), "classify expects a finite sigma");
    let eps = epsilon.value();
    if sigma < -1.0 - eps {
        Band::ReductionRisk
    } else if sigma <= -1.0 + eps {
        Band::SpendingStabilized
    } else if sigma < -eps {
        Band::FinanciallySustainable
    } else if sigma <= eps {
        Band::PropensityGrowthStabilized
    } else if sigma <= 1.0 {
        Band::UnsustainableLower
    } else {
        Band::FinancialFiscalRisk
    }
}
