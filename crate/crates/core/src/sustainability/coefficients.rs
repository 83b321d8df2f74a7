use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SustainabilityError;
use crate::series::{derive, Dataset, DerivedKind, SeriesRole};

/// Public share of total health financing over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublicShare {
    Constant(f64),
    PerYear(BTreeMap<i32, f64>),
}

impl PublicShare {
    pub fn at(&self, year: i32) -> Option<f64> {
        match self {
            PublicShare::Constant(p) => Some(*p),
            PublicShare::PerYear(map) => map.get(&year).copied(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            PublicShare::Constant(_) => true,
            PublicShare::PerYear(map) => {
                let mut values = map.values();
                let first = values.next();
                values.all(|v| Some(v) == first)
            }
        }
    }
}

impl From<f64> for PublicShare {
    fn from(p: f64) -> Self {
        PublicShare::Constant(p)
    }
}

/// One year of budget coefficients, all as fractions of GDP except `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub year: i32,
    /// `T`: total public revenue over GDP.
    #[serde(rename = "T")]
    pub revenue_ratio: f64,
    /// `P`: public share of total health financing.
    #[serde(rename = "P")]
    pub public_share: f64,
    /// `φ`: total health propensity.
    pub phi: f64,
    /// `Pφ`: public health propensity.
    #[serde(rename = "Pphi")]
    pub public_phi: f64,
    /// `S`: sovereign-debt interest over GDP.
    #[serde(rename = "S")]
    pub interest_ratio: f64,
    /// `(T − S) − Pφ`: what remains for non-health applications.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub rows: Vec<CoefficientRow>,
}

impl CoefficientTable {
    pub fn row(&self, year: i32) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.year == year)
    }
}

/// Builds the per-year coefficient table from revenue, GDP, public health
/// spending and interest series; `φ` is backed out as `Pφ / P`.
pub fn coefficient_table(dataset: &Dataset, public_share: &PublicShare) -> Result<CoefficientTable, SustainabilityError> {
    let revenue = dataset.require(SeriesRole::Revenue)?;
    let interest = dataset.require(SeriesRole::Interest)?;
    let gdp = dataset.require(SeriesRole::Gdp)?;
    let public_phi = derive(dataset, DerivedKind::PublicPhi)?;
    let years = Dataset::common_years(&[revenue, interest, gdp, &public_phi])?;

    let rows = years
        .map(|year| {
            let p = public_share.at(year).ok_or(SustainabilityError::MissingPublicShare(year))?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(SustainabilityError::InvalidPublicShare { year, value: p });
            }
            let y = gdp.get(year).unwrap();
            let t = revenue.get(year).unwrap() / y;
            let s = interest.get(year).unwrap() / y;
            let pphi = public_phi.get(year).unwrap();
            Ok(CoefficientRow {
                year,
                revenue_ratio: t,
                public_share: p,
                phi: pphi / p,
                public_phi: pphi,
                interest_ratio: s,
                residual: t - s - pphi,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoefficientTable { rows })
}

/// The budget identity `T·Y − (Pφ − Ω)·Y − S·Y − Γ = 0` for one year, in currency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetDecomposition {
    pub year: i32,
    pub gdp: f64,
    /// `T·Y`.
    pub revenue: f64,
    /// `(Pφ − Ω)·Y`.
    pub health: f64,
    /// `S·Y`.
    pub interest: f64,
    /// `Γ`, the non-health applications closing the identity.
    pub non_health: f64,
    /// `Ω`, wasted health resources over GDP.
    pub omega: f64,
    pub residual_check: f64,
}

/// Splits one coefficient row into the currency terms of the budget identity,
/// with `Γ = (T − Pφ + Ω − S)·Y`.
pub fn budget_decompose(row: &CoefficientRow, gdp: f64, omega: f64) -> Result<BudgetDecomposition, SustainabilityError> {
    if !(gdp.is_finite() && gdp > 0.0) {
        return Err(SustainabilityError::InvalidInput { what: "Y", value: gdp });
    }
    if !(omega >= 0.0 && omega <= row.public_phi) {
        return Err(SustainabilityError::OmegaOutOfRange { omega, public_phi: row.public_phi });
    }
    let revenue = row.revenue_ratio * gdp;
    let health = (row.public_phi - omega) * gdp;
    let interest = row.interest_ratio * gdp;
    let non_health = (row.revenue_ratio - row.public_phi + omega - row.interest_ratio) * gdp;
    Ok(BudgetDecomposition {
        year: row.year,
        gdp,
        revenue,
        health,
        interest,
        non_health,
        omega,
        residual_check: revenue - health - interest - non_health,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{AnnualSeries, Unit};

    fn def_2010() -> Dataset {
        let c = |name: &str, v: f64| AnnualSeries::from_values(name, Unit::CurrencyMillions, 2010, [v]).unwrap();
        Dataset::default()
            .with_series(c("pil", 1_548_816.0), Some(SeriesRole::Gdp))
            .unwrap()
            .with_series(c("spesa", 113_457.0), Some(SeriesRole::PublicHealth))
            .unwrap()
            .with_series(c("interessi", 70_152.0), Some(SeriesRole::Interest))
            .unwrap()
            .with_series(c("entrate", 722_302.0), Some(SeriesRole::Revenue))
            .unwrap()
    }

    #[test]
    fn exhibit_2010_column() {
        let table = coefficient_table(&def_2010(), &0.776.into()).unwrap();
        let row = table.row(2010).unwrap();
        assert!((row.revenue_ratio * 100.0 - 46.64).abs() < 0.01);
        assert!((row.interest_ratio * 100.0 - 4.53).abs() < 0.01);
        assert!((row.public_phi * 100.0 - 7.33).abs() < 0.01);
        assert!((row.phi * 100.0 - 9.44).abs() < 0.01);
        assert!((row.residual * 100.0 - 34.78).abs() < 0.01);
        assert!((row.public_share * row.phi - row.public_phi).abs() < 1e-12);
    }

    #[test]
    fn fully_public_system_has_phi_equal_public_phi() {
        let table = coefficient_table(&def_2010(), &1.0.into()).unwrap();
        let row = table.row(2010).unwrap();
        assert_eq!(row.phi, row.public_phi);
    }

    #[test]
    fn zero_share_rejected() {
        assert!(matches!(
            coefficient_table(&def_2010(), &0.0.into()),
            Err(SustainabilityError::InvalidPublicShare { year: 2010, .. })
        ));
        assert!(matches!(
            coefficient_table(&def_2010(), &PublicShare::PerYear(BTreeMap::new())),
            Err(SustainabilityError::MissingPublicShare(2010))
        ));
    }

    #[test]
    fn missing_series_rejected() {
        let ds = Dataset::default();
        assert!(matches!(coefficient_table(&ds, &0.7.into()), Err(SustainabilityError::Series(_))));
    }

    #[test]
    fn decomposition_closes_identity() {
        let table = coefficient_table(&def_2010(), &0.776.into()).unwrap();
        let row = table.row(2010).unwrap();
        let d = budget_decompose(row, 1_548_816.0, 0.0).unwrap();
        // Γ from unrounded ratios; the printed 34.78% residual gives 538,678
        assert!((d.non_health - 538_693.0).abs() < 1e-6);
        assert!((d.non_health - 0.3478 * 1_548_816.0).abs() < 0.00005 * 1_548_816.0);
        assert!(d.residual_check.abs() <= 1e-6 * d.revenue);

        let d = budget_decompose(row, 1_548_816.0, row.public_phi).unwrap();
        assert_eq!(d.health, 0.0);
        assert!((d.non_health - (row.revenue_ratio - row.interest_ratio) * 1_548_816.0).abs() < 1e-6);
        assert!(matches!(
            budget_decompose(row, 1_548_816.0, row.public_phi * 1.01),
            Err(SustainabilityError::OmegaOutOfRange { .. })
        ));
        assert!(budget_decompose(row, 1_548_816.0, -0.001).is_err());
    }

    #[test]
    fn per_year_share_constancy() {
        assert!(PublicShare::Constant(0.7).is_constant());
        let map: BTreeMap<i32, f64> = [(2011, 0.7), (2012, 0.7)].into();
        assert!(PublicShare::PerYear(map).is_constant());
        let map: BTreeMap<i32, f64> = [(2011, 0.7), (2012, 0.71)].into();
        assert!(!PublicShare::PerYear(map).is_constant());
    }
}
