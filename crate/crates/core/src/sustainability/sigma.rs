//! The sustainability index σ: the elasticity of the public health
//! propensity `Pφ` with respect to `P·Y` over one period.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{classify, Band, Epsilon, SustainabilityError};

/// Relative changes of `P·Y` (or `Y`) at or below this are degenerate.
pub const DEGENERATE_RELATIVE_CHANGE: f64 = 1e-9;

/// A σ value, or the first-class indeterminate outcome of a degenerate denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaValue {
    Finite(f64),
    Indeterminate,
}

impl SigmaValue {
    pub fn value(self) -> Option<f64> {
        match self {
            SigmaValue::Finite(v) => Some(v),
            SigmaValue::Indeterminate => None,
        }
    }
}

impl fmt::Display for SigmaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaValue::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            SigmaValue::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

impl Serialize for SigmaValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SigmaValue::Finite(v) => s.serialize_f64(*v),
            SigmaValue::Indeterminate => s.serialize_str("indeterminate"),
        }
    }
}

impl<'de> Deserialize<'de> for SigmaValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = SigmaValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"indeterminate\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<SigmaValue, E> {
                Ok(SigmaValue::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SigmaValue, E> {
                Ok(SigmaValue::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SigmaValue, E> {
                Ok(SigmaValue::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<SigmaValue, E> {
                match v {
                    "indeterminate" => Ok(SigmaValue::Indeterminate),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Which form of σ produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaVariant {
    /// Full absolute-differential form with `ΔP`, `Δφ` and `ΔY`.
    Full,
    /// `ΔP = 0`.
    DpZero,
    /// `ΔP = 0` and `Δφ = 0`, so σ is zero.
    Stabilized,
    /// `ΔY → 0` with `φ` held, so σ is one.
    DyZero,
}

impl SigmaVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SigmaVariant::Full => "full",
            SigmaVariant::DpZero => "dp_zero",
            SigmaVariant::Stabilized => "stabilized",
            SigmaVariant::DyZero => "dy_zero",
        }
    }
}

/// Whether propensities were recomputed from currency series or passed in directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    CurrencyRatios,
    /// Caller-supplied ratios, possibly rounded.
    DirectRatios,
}

/// Echo of the inputs behind an assessment. Fields unused by a variant are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SigmaInputs {
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub phi0: Option<f64>,
    pub phi1: Option<f64>,
    pub public_phi0: Option<f64>,
    pub public_phi1: Option<f64>,
    pub y0: Option<f64>,
    pub y1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaAssessment {
    pub period_label: String,
    pub sigma: SigmaValue,
    pub variant: SigmaVariant,
    /// `None` exactly when σ is indeterminate.
    pub band: Option<Band>,
    pub inputs: SigmaInputs,
    pub input_source: InputSource,
}

impl SigmaAssessment {
    fn new(sigma: SigmaValue, variant: SigmaVariant, inputs: SigmaInputs, epsilon: Epsilon) -> Self {
        SigmaAssessment {
            period_label: String::new(),
            sigma,
            variant,
            band: sigma.value().map(|v| classify(v, epsilon)),
            inputs,
            input_source: InputSource::DirectRatios,
        }
    }

    /// An assessment flagged indeterminate by the caller, e.g. inside a
    /// wider degenerate zone than [`DEGENERATE_RELATIVE_CHANGE`].
    pub fn indeterminate(variant: SigmaVariant, inputs: SigmaInputs) -> Self {
        SigmaAssessment {
            period_label: String::new(),
            sigma: SigmaValue::Indeterminate,
            variant,
            band: None,
            inputs,
            input_source: InputSource::DirectRatios,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.sigma.value()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.period_label = label.into();
        self
    }

    pub fn with_source(mut self, source: InputSource) -> Self {
        self.input_source = source;
        self
    }

    /// Records the (unchanged) public share on a `dp_zero` assessment.
    pub fn with_public_share(mut self, p: f64) -> Self {
        self.inputs.p0 = Some(p);
        self.inputs.p1 = Some(p);
        self
    }

    /// Whether the stored band is the one `classify` gives today.
    pub fn band_is_consistent(&self, epsilon: Epsilon) -> bool {
        self.band == self.value().map(|v| classify(v, epsilon))
    }
}

/// Inputs to the full form: public share `P`, total propensity `φ = H/Y` and GDP `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullInputs {
    pub p0: f64,
    pub p1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub y0: f64,
    pub y1: f64,
}

fn require_positive(what: &'static str, value: f64) -> Result<(), SustainabilityError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SustainabilityError::InvalidInput { what, value })
    }
}

fn require_finite(what: &'static str, value: f64) -> Result<(), SustainabilityError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SustainabilityError::InvalidInput { what, value })
    }
}

/// Full σ, evaluated through the expanded product differences
///
/// `[ΔP·φ + Δφ·P + ΔP·Δφ] / [ΔP·Y + ΔY·P + ΔP·ΔY] · Y/φ`.
pub fn sigma_full(inputs: &FullInputs, epsilon: Epsilon) -> Result<SigmaAssessment, SustainabilityError> {
    let FullInputs { p0, p1, phi0, phi1, y0, y1 } = *inputs;
    require_positive("P0", p0)?;
    require_positive("phi0", phi0)?;
    require_positive("Y0", y0)?;
    require_finite("P1", p1)?;
    require_finite("phi1", phi1)?;
    require_finite("Y1", y1)?;

    let (dp, dphi, dy) = (p1 - p0, phi1 - phi0, y1 - y0);
    let numerator = dp * phi0 + dphi * p0 + dp * dphi;
    let denominator = dp * y0 + dy * p0 + dp * dy;
    let rel_numerator = numerator / (p0 * phi0);
    let rel_denominator = denominator / (p0 * y0);
    let sigma = if rel_denominator.abs() > DEGENERATE_RELATIVE_CHANGE {
        SigmaValue::Finite(rel_numerator / rel_denominator)
    } else {
        SigmaValue::Indeterminate
    };
    let echo = SigmaInputs {
        p0: Some(p0),
        p1: Some(p1),
        phi0: Some(phi0),
        phi1: Some(phi1),
        public_phi0: Some(p0 * phi0),
        public_phi1: Some(p1 * phi1),
        y0: Some(y0),
        y1: Some(y1),
    };
    Ok(SigmaAssessment::new(sigma, SigmaVariant::Full, echo, epsilon))
}

/// σ with the public share held fixed: `[ΔPφ / Pφ₀] / [ΔY / Y₀]`.
pub fn sigma_dp_zero(
    public_phi0: f64,
    public_phi1: f64,
    y0: f64,
    y1: f64,
    epsilon: Epsilon,
) -> Result<SigmaAssessment, SustainabilityError> {
    require_positive("Pphi0", public_phi0)?;
    require_positive("Y0", y0)?;
    require_finite("Pphi1", public_phi1)?;
    require_finite("Y1", y1)?;
    let rel_y = (y1 - y0) / y0;
    let sigma = if rel_y.abs() > DEGENERATE_RELATIVE_CHANGE {
        SigmaValue::Finite(((public_phi1 - public_phi0) / public_phi0) / rel_y)
    } else {
        SigmaValue::Indeterminate
    };
    let echo = SigmaInputs {
        public_phi0: Some(public_phi0),
        public_phi1: Some(public_phi1),
        y0: Some(y0),
        y1: Some(y1),
        ..Default::default()
    };
    Ok(SigmaAssessment::new(sigma, SigmaVariant::DpZero, echo, epsilon))
}

/// Limit of σ as GDP change vanishes with `Pφ` held fixed and `P` moving: exactly one.
///
/// The `ΔP` terms cancel, leaving `ΔP·(H/Y) / (ΔP·Y) · Y/(H/Y) = 1`.
/// Without any change in `P` there is no driver and σ is indeterminate.
pub fn sigma_dy_zero(
    p0: f64,
    p1: f64,
    public_phi: f64,
    epsilon: Epsilon,
) -> Result<SigmaAssessment, SustainabilityError> {
    require_positive("P0", p0)?;
    require_finite("P1", p1)?;
    require_positive("Pphi", public_phi)?;
    let sigma = if p1 != p0 { SigmaValue::Finite(1.0) } else { SigmaValue::Indeterminate };
    let echo = SigmaInputs {
        p0: Some(p0),
        p1: Some(p1),
        public_phi0: Some(public_phi),
        public_phi1: Some(public_phi),
        ..Default::default()
    };
    Ok(SigmaAssessment::new(sigma, SigmaVariant::DyZero, echo, epsilon))
}

/// Limit with both `P` and `Pφ` frozen while GDP moves: σ is zero.
pub fn sigma_stabilized(
    public_phi: f64,
    y0: f64,
    y1: f64,
    epsilon: Epsilon,
) -> Result<SigmaAssessment, SustainabilityError> {
    require_positive("Pphi", public_phi)?;
    require_positive("Y0", y0)?;
    require_finite("Y1", y1)?;
    let sigma = if ((y1 - y0) / y0).abs() > DEGENERATE_RELATIVE_CHANGE {
        SigmaValue::Finite(0.0)
    } else {
        SigmaValue::Indeterminate
    };
    let echo = SigmaInputs {
        public_phi0: Some(public_phi),
        public_phi1: Some(public_phi),
        y0: Some(y0),
        y1: Some(y1),
        ..Default::default()
    };
    Ok(SigmaAssessment::new(sigma, SigmaVariant::Stabilized, echo, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: Epsilon = Epsilon::DEFAULT;

    #[test]
    fn endpoint_1997_2010() {
        let a = sigma_full(
            &FullInputs { p0: 0.708, p1: 0.776, phi0: 0.0770, phi1: 0.0960, y0: 1_048_766.0, y1: 1_548_816.0 },
            E,
        )
        .unwrap();
        let v = a.value().unwrap();
        assert!((v - 0.592).abs() < 5e-4, "{v}");
        assert_eq!(a.band, Some(Band::UnsustainableLower));
    }

    #[test]
    fn frozen_propensity_gives_zero() {
        let a = sigma_full(&FullInputs { p0: 0.7, p1: 0.7, phi0: 0.09, phi1: 0.09, y0: 100.0, y1: 110.0 }, E).unwrap();
        assert_eq!(a.value(), Some(0.0));
    }

    #[test]
    fn constant_public_spending_near_minus_one() {
        // P·φ·Y held constant with 3% GDP growth
        let (y0, y1) = (100.0, 103.0);
        let phi1 = 0.09 * y0 / y1;
        let a = sigma_full(&FullInputs { p0: 0.7, p1: 0.7, phi0: 0.09, phi1, y0, y1 }, E).unwrap();
        assert!((a.value().unwrap() + 1.0 / 1.03).abs() < 1e-12);
        assert!((a.value().unwrap() + 0.9709).abs() < 1e-4);
    }

    #[test]
    fn degenerate_denominator_is_indeterminate() {
        let a = sigma_full(&FullInputs { p0: 0.7, p1: 0.7, phi0: 0.09, phi1: 0.1, y0: 100.0, y1: 100.0 }, E).unwrap();
        assert_eq!(a.sigma, SigmaValue::Indeterminate);
        assert_eq!(a.band, None);
        // P·Y unchanged although both move
        let a = sigma_full(&FullInputs { p0: 0.5, p1: 0.625, phi0: 0.09, phi1: 0.1, y0: 100.0, y1: 80.0 }, E).unwrap();
        assert_eq!(a.sigma, SigmaValue::Indeterminate);
    }

    #[test]
    fn def_2011_dp_zero() {
        let a = sigma_dp_zero(0.074496, 0.0720737, 1_548_816.0, 1_593_314.0, E).unwrap();
        assert!((a.value().unwrap() + 1.13).abs() < 0.005);
        assert_eq!(a.band, Some(Band::ReductionRisk));
        let a = sigma_dp_zero(0.0720737, 0.0714740, 1_593_314.0, 1_642_432.0, E).unwrap();
        assert!((a.value().unwrap() + 0.27).abs() < 0.005);
        assert_eq!(sigma_dp_zero(0.07, 0.07, 1.0, 1.5, E).unwrap().value(), Some(0.0));
        assert_eq!(sigma_dp_zero(0.07, 0.08, 1.0, 1.0, E).unwrap().sigma, SigmaValue::Indeterminate);
    }

    #[test]
    fn dy_zero_limit() {
        let a = sigma_dy_zero(0.7, 0.72, 0.07, E).unwrap();
        assert_eq!(a.value(), Some(1.0));
        assert_eq!(a.variant, SigmaVariant::DyZero);
        assert_eq!(a.band, Some(Band::UnsustainableLower));
        assert_eq!(sigma_dy_zero(0.7, 0.7, 0.07, E).unwrap().sigma, SigmaValue::Indeterminate);
    }

    #[test]
    fn stabilized_limit() {
        assert_eq!(sigma_stabilized(0.07, 1.0, 1.1, E).unwrap().value(), Some(0.0));
        assert_eq!(sigma_stabilized(0.07, 1.0, 1.0, E).unwrap().sigma, SigmaValue::Indeterminate);
    }

    #[test]
    fn rejects_non_positive_bases() {
        assert!(sigma_full(&FullInputs { p0: 0.0, p1: 0.7, phi0: 0.09, phi1: 0.1, y0: 1.0, y1: 2.0 }, E).is_err());
        assert!(sigma_dp_zero(0.07, 0.08, -1.0, 2.0, E).is_err());
        assert!(sigma_dp_zero(0.07, f64::NAN, 1.0, 2.0, E).is_err());
    }

    #[test]
    fn sigma_value_serde() {
        assert_eq!(serde_json::to_string(&SigmaValue::Indeterminate).unwrap(), "\"indeterminate\"");
        assert_eq!(serde_json::from_str::<SigmaValue>("-1.25").unwrap(), SigmaValue::Finite(-1.25));
        assert_eq!(serde_json::from_str::<SigmaValue>("1").unwrap(), SigmaValue::Finite(1.0));
        assert!(serde_json::from_str::<SigmaValue>("\"nan\"").is_err());
    }
}
