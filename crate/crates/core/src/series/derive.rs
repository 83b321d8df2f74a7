use serde::{Deserialize, Serialize};

use super::{AnnualSeries, Dataset, SeriesError, SeriesRole, Unit};

/// Ratios and products computed from a dataset's parent series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedKind {
    /// Total health propensity `φ = H / Y`.
    Phi,
    /// Public health propensity `Pφ = PH / Y`, or `P · H / Y` without `PH`.
    PublicPhi,
    /// Public health spending `P · H`, or `PH` when no share triples exist.
    PublicSpend,
}

impl DerivedKind {
    pub fn name(self) -> &'static str {
        match self {
            DerivedKind::Phi => "phi",
            DerivedKind::PublicPhi => "public_phi",
            DerivedKind::PublicSpend => "public_spend",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [DerivedKind::Phi, DerivedKind::PublicPhi, DerivedKind::PublicSpend]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Computes a derived series at full precision over the parents' common years.
pub fn derive(dataset: &Dataset, kind: DerivedKind) -> Result<AnnualSeries, SeriesError> {
    match kind {
        DerivedKind::Phi => {
            let h = dataset.require(SeriesRole::TotalHealth)?;
            let y = dataset.require(SeriesRole::Gdp)?;
            ratio(kind.name(), h, y)
        }
        DerivedKind::PublicPhi => {
            let y = dataset.require(SeriesRole::Gdp)?;
            if let Some(ph) = dataset.by_role(SeriesRole::PublicHealth) {
                return ratio(kind.name(), ph, y);
            }
            let h = dataset
                .by_role(SeriesRole::TotalHealth)
                .ok_or_else(|| SeriesError::MissingSeries("public_health or total_health".into()))?;
            let p = public_share(dataset)?;
            let years = Dataset::common_years(&[h, y, &p])?;
            AnnualSeries::new(
                kind.name(),
                Unit::Fraction,
                years.map(|t| (t, p.get(t).unwrap() * (h.get(t).unwrap() / y.get(t).unwrap()))),
            )
        }
        DerivedKind::PublicSpend => {
            if let (Some(h), false) = (dataset.by_role(SeriesRole::TotalHealth), dataset.shares().is_empty()) {
                let p = public_share(dataset)?;
                let years = Dataset::common_years(&[h, &p])?;
                return AnnualSeries::new(
                    kind.name(),
                    Unit::CurrencyMillions,
                    years.map(|t| (t, p.get(t).unwrap() * h.get(t).unwrap())),
                );
            }
            let ph = dataset
                .by_role(SeriesRole::PublicHealth)
                .ok_or_else(|| SeriesError::MissingSeries("public_health, or total_health with shares".into()))?;
            Ok(ph.clone().renamed(kind.name()))
        }
    }
}

fn public_share(dataset: &Dataset) -> Result<AnnualSeries, SeriesError> {
    dataset
        .public_share_series()
        .ok_or_else(|| SeriesError::MissingSeries("contiguous public share triples".into()))
}

fn ratio(name: &str, num: &AnnualSeries, den: &AnnualSeries) -> Result<AnnualSeries, SeriesError> {
    let years = Dataset::common_years(&[num, den])?;
    AnnualSeries::new(
        name,
        Unit::Fraction,
        years.map(|t| (t, num.get(t).unwrap() / den.get(t).unwrap())),
    )
}
