use serde::{Deserialize, Serialize};

use super::{PlanSpec, ScenarioError, SpliceRule};
use crate::growth::{average_growth, average_growth_path, fit_log_growth, marginal_growth, GrowthFit};
use crate::series::{derive, AnnualSeries, Dataset, DerivedKind, SeriesRole, Unit};
use crate::sustainability::{
    budget_decompose, coefficient_table, sigma_dp_zero, sigma_full, BudgetDecomposition, CoefficientTable, Epsilon,
    FullInputs, InputSource, SigmaAssessment, SigmaValue,
};

/// Stress rates whose per-year GDP change `|e^rate − 1|` falls below this
/// are reported indeterminate.
pub const STRESS_DEGENERATE_ZONE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    /// Continuous GDP growth rate replacing the plan path.
    pub rate: f64,
    pub sigma_series: Vec<SigmaAssessment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpendingGrowthPoint {
    pub year: i32,
    pub public_spend: f64,
    pub marginal_growth: Option<f64>,
    pub average_growth: Option<f64>,
}

/// Public health spending with its marginal and average growth paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpendingGrowth {
    /// Base year of the average growth path (first plan year).
    pub base_year: i32,
    /// Average growth from `base_year` to the last plan year.
    pub average_growth: Option<f64>,
    pub points: Vec<SpendingGrowthPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub baseline_year: i32,
    pub epsilon: Epsilon,
    pub omega: f64,
    pub growth_fits: Vec<GrowthFit>,
    /// Fits over the bridge year followed by the plan years.
    pub horizon_fits: Vec<GrowthFit>,
    pub coefficient_table: CoefficientTable,
    pub budget: Vec<BudgetDecomposition>,
    /// One entry per plan year, each against the previous year.
    pub sigma_series: Vec<SigmaAssessment>,
    /// Baseline year against the last plan year.
    pub horizon_sigma: Option<SigmaAssessment>,
    /// Endpoint σ from the history dataset up to the baseline year.
    pub history_sigma: Option<SigmaAssessment>,
    pub spending_growth: Option<SpendingGrowth>,
    /// Sorted by rate.
    pub stress_results: Vec<StressResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    year: i32,
    p: f64,
    public_phi: f64,
    y: f64,
}

/// The resolved bridge and plan path shared by `assess` and `stress_gdp`.
struct Path {
    bridge: Point,
    plan: Vec<Point>,
    constant_share: bool,
}

fn plan_path(spec: &PlanSpec) -> Result<Path, ScenarioError> {
    let by = spec.baseline_year;
    let plan_gdp = spec.plan.require(SeriesRole::Gdp)?;
    let plan_phi = derive(&spec.plan, DerivedKind::PublicPhi)?;
    let years = Dataset::common_years(&[plan_gdp, &plan_phi])?;
    if *years.start() > by + 1 || *years.end() < by + 1 {
        return Err(ScenarioError::PlanYears(format!(
            "plan covers {}-{}, must include {} (baseline year + 1)",
            years.start(),
            years.end(),
            by + 1
        )));
    }
    let plan = ((by + 1)..=*years.end())
        .map(|year| {
            Ok(Point {
                year,
                p: spec.public_share.at(year).ok_or(ScenarioError::PublicShareGap(year))?,
                public_phi: plan_phi.get(year).unwrap(),
                y: plan_gdp.get(year).unwrap(),
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let (source, label) = match spec.splice {
        SpliceRule::Baseline => (&spec.baseline, "baseline"),
        SpliceRule::Plan => (&spec.plan, "plan"),
    };
    let missing = |what| ScenarioError::MissingBridge { year: by, dataset: label, what };
    let bridge_phi = derive(source, DerivedKind::PublicPhi)?.get(by).ok_or_else(|| missing("Pphi"))?;
    let bridge_y = source.require(SeriesRole::Gdp)?.get(by).ok_or_else(|| missing("GDP"))?;
    let bridge_p = spec
        .public_share
        .at(by)
        .or_else(|| source.share(by).map(|s| s.public))
        .ok_or_else(|| missing("public share"))?;
    let constant_share = spec.public_share.is_constant() && plan.iter().all(|pt| pt.p == bridge_p);
    Ok(Path { bridge: Point { year: by, p: bridge_p, public_phi: bridge_phi, y: bridge_y }, plan, constant_share })
}

fn step(prev: Point, next: Point, constant_share: bool, eps: Epsilon) -> Result<SigmaAssessment, ScenarioError> {
    let a = if constant_share {
        sigma_dp_zero(prev.public_phi, next.public_phi, prev.y, next.y, eps)?.with_public_share(next.p)
    } else {
        sigma_full(
            &FullInputs {
                p0: prev.p,
                p1: next.p,
                phi0: prev.public_phi / prev.p,
                phi1: next.public_phi / next.p,
                y0: prev.y,
                y1: next.y,
            },
            eps,
        )?
    };
    Ok(a.with_source(InputSource::CurrencyRatios))
}

fn sigma_path(path: &Path, eps: Epsilon) -> Result<Vec<SigmaAssessment>, ScenarioError> {
    let mut prev = path.bridge;
    path.plan
        .iter()
        .map(|&next| {
            let a = step(prev, next, path.constant_share, eps)?.with_label(next.year.to_string());
            prev = next;
            Ok(a)
        })
        .collect()
}

/// Endpoint σ between the latest history year before the baseline year and the baseline year.
fn history_sigma(spec: &PlanSpec, history: &Dataset) -> Result<SigmaAssessment, ScenarioError> {
    let by = spec.baseline_year;
    let hy = history
        .require(SeriesRole::Gdp)?
        .iter()
        .map(|(year, _)| year)
        .filter(|&year| year < by)
        .max()
        .ok_or_else(|| ScenarioError::PlanYears(format!("history has no year before {by}")))?;
    let endpoint = |ds: &Dataset, year: i32, label: &'static str| -> Result<(f64, f64, f64), ScenarioError> {
        let missing = |what| ScenarioError::MissingBridge { year, dataset: label, what };
        let y = ds.require(SeriesRole::Gdp)?.get(year).ok_or_else(|| missing("GDP"))?;
        let p = ds
            .share(year)
            .map(|s| s.public)
            .or_else(|| spec.public_share.at(year))
            .ok_or_else(|| missing("public share"))?;
        let phi = match derive(ds, DerivedKind::Phi).ok().and_then(|s| s.get(year)) {
            Some(phi) => phi,
            None => derive(ds, DerivedKind::PublicPhi)?.get(year).ok_or_else(|| missing("Pphi"))? / p,
        };
        Ok((p, phi, y))
    };
    let (p0, phi0, y0) = endpoint(history, hy, "history")?;
    let (p1, phi1, y1) = endpoint(&spec.baseline, by, "baseline")?;
    Ok(sigma_full(&FullInputs { p0, p1, phi0, phi1, y0, y1 }, spec.epsilon)?
        .with_source(InputSource::CurrencyRatios)
        .with_label(format!("{hy}-{by}")))
}

fn growth_fits(plan: &Dataset, notes: &mut Vec<String>) -> Vec<GrowthFit> {
    let derived = derive(plan, DerivedKind::PublicPhi).ok();
    plan.series_iter()
        .chain(derived.as_ref())
        .filter_map(|s| match fit_log_growth(s) {
            Ok(fit) => Some(fit),
            Err(e) => {
                notes.push(format!("growth fit skipped for `{}`: {e}", s.name()));
                None
            }
        })
        .collect()
}

fn horizon_fits(path: &Path, notes: &mut Vec<String>) -> Result<Vec<GrowthFit>, ScenarioError> {
    let points: Vec<Point> = std::iter::once(path.bridge).chain(path.plan.iter().copied()).collect();
    let first = path.bridge.year;
    let build = |name: &str, unit: Unit, f: fn(&Point) -> f64| AnnualSeries::from_values(name, unit, first, points.iter().map(f));
    let series = [
        build("public_spend", Unit::CurrencyMillions, |p| p.public_phi * p.y)?,
        build("public_phi", Unit::Fraction, |p| p.public_phi)?,
        build("gdp", Unit::CurrencyMillions, |p| p.y)?,
    ];
    Ok(series
        .iter()
        .filter_map(|s| match fit_log_growth(s) {
            Ok(fit) => Some(fit),
            Err(e) => {
                notes.push(format!("horizon fit skipped for `{}`: {e}", s.name()));
                None
            }
        })
        .collect())
}

fn spending_growth(plan: &Dataset, base_year: i32) -> Result<Option<SpendingGrowth>, ScenarioError> {
    let spend = match derive(plan, DerivedKind::PublicSpend) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let mg = if spend.len() >= 2 { Some(marginal_growth(&spend)?) } else { None };
    let ag: Option<AnnualSeries> = (spend.get(base_year).is_some() && spend.last_year() > base_year)
        .then(|| average_growth_path(&spend, base_year))
        .transpose()?;
    let points = spend
        .iter()
        .map(|(year, v)| SpendingGrowthPoint {
            year,
            public_spend: v,
            marginal_growth: mg.as_ref().and_then(|s| s.get(year)),
            average_growth: ag.as_ref().and_then(|s| s.get(year)),
        })
        .collect();
    let average = ag.as_ref().map(|_| average_growth(&spend, base_year)).transpose()?;
    Ok(Some(SpendingGrowth { base_year, average_growth: average, points }))
}

fn indeterminate_notes(entries: &[SigmaAssessment], notes: &mut Vec<String>) {
    for a in entries.iter().filter(|a| a.sigma == SigmaValue::Indeterminate) {
        notes.push(format!("{}: sigma indeterminate (no relative change in the denominator)", a.period_label));
    }
}

/// Runs the full plan assessment, including stress sweeps over `spec.stress_rates`.
pub fn assess(spec: &PlanSpec) -> Result<AssessmentReport, ScenarioError> {
    let eps = spec.epsilon;
    let mut notes = Vec::new();
    notes.push(format!("baseline: {}", spec.baseline.provenance().source));
    notes.push(format!("plan: {}", spec.plan.provenance().source));
    if let Some(h) = &spec.history {
        notes.push(format!("history: {}", h.provenance().source));
    }

    let path = plan_path(spec)?;
    let splice = match spec.splice {
        SpliceRule::Baseline => "baseline",
        SpliceRule::Plan => "plan",
    };
    notes.push(format!(
        "bridge {}: Pphi = {} and GDP = {} from the {splice} dataset; plan years use plan currency ratios",
        path.bridge.year, path.bridge.public_phi, path.bridge.y
    ));
    notes.push(if path.constant_share {
        format!("sigma variant dp_zero: public share constant at {}", path.bridge.p)
    } else {
        "sigma variant full: public share varies over the plan".to_owned()
    });

    let growth_fits = growth_fits(&spec.plan, &mut notes);
    let horizon_fits = horizon_fits(&path, &mut notes)?;
    let budget_series = [SeriesRole::Revenue, SeriesRole::Interest];
    let coefficient_table = if budget_series.iter().all(|r| spec.plan.by_role(*r).is_some()) {
        coefficient_table(&spec.plan, &spec.public_share)?
    } else {
        notes.push("coefficient table skipped: plan has no revenue or no interest series".to_owned());
        CoefficientTable::default()
    };
    let gdp = spec.plan.require(SeriesRole::Gdp)?;
    let budget = coefficient_table
        .rows
        .iter()
        .map(|row| Ok(budget_decompose(row, gdp.get(row.year).unwrap(), spec.omega)?))
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let sigma_series = sigma_path(&path, eps)?;
    indeterminate_notes(&sigma_series, &mut notes);
    let last = *path.plan.last().unwrap();
    let horizon_sigma = Some(
        step(path.bridge, last, path.constant_share, eps)?.with_label(format!("{}-{}", path.bridge.year, last.year)),
    );

    let history_sigma = spec.history.as_ref().map(|h| history_sigma(spec, h)).transpose()?;
    if let Some(h) = &history_sigma {
        notes.push(format!("{}: endpoint sigma over the whole period, not an average of yearly values", h.period_label));
        if let Some(v) = h.value().filter(|v| *v > 0.0 && *v < 1.0) {
            notes.push(format!(
                "{}: sigma {v:.4} lies in (0, 1), classified {} by band thresholds; this range is also described as sustainable in some readings",
                h.period_label,
                h.band.map_or("indeterminate", |b| b.as_str())
            ));
        }
    }

    let spending_growth = spending_growth(&spec.plan, spec.baseline_year + 1)?;
    if spending_growth.is_some() {
        notes.push("average and marginal growth are reported side by side without ranking them".to_owned());
    }

    let stress_results =
        if spec.stress_rates.is_empty() { Vec::new() } else { stress_path(&path, &spec.stress_rates, eps)? };

    Ok(AssessmentReport {
        baseline_year: spec.baseline_year,
        epsilon: eps,
        omega: spec.omega,
        growth_fits,
        horizon_fits,
        coefficient_table,
        budget,
        sigma_series,
        horizon_sigma,
        history_sigma,
        spending_growth,
        stress_results,
        notes,
    })
}

/// Replaces the plan GDP path with `Y₀·e^{rate·t}` from the bridge year,
/// holding nominal public health spending at plan values, and recomputes σ.
pub fn stress_gdp(spec: &PlanSpec, rates: &[f64]) -> Result<Vec<StressResult>, ScenarioError> {
    let path = plan_path(spec)?;
    stress_path(&path, rates, spec.epsilon)
}

fn stress_path(path: &Path, rates: &[f64], eps: Epsilon) -> Result<Vec<StressResult>, ScenarioError> {
    if rates.is_empty() {
        return Err(ScenarioError::EmptyGrid);
    }
    if let Some(&bad) = rates.iter().find(|r| !r.is_finite() || **r <= -1.0) {
        return Err(ScenarioError::InvalidRate(bad));
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);

    std::thread::scope(|scope| {
        let handles: Vec<_> = sorted.iter().map(|&rate| scope.spawn(move || stress_one(path, rate, eps))).collect();
        handles.into_iter().map(|h| h.join().expect("stress worker panicked")).collect()
    })
}

fn stress_one(path: &Path, rate: f64, eps: Epsilon) -> Result<StressResult, ScenarioError> {
    let by = path.bridge.year;
    let stressed: Vec<Point> = path
        .plan
        .iter()
        .map(|pt| {
            let y = path.bridge.y * (rate * f64::from(pt.year - by)).exp();
            Point { public_phi: pt.public_phi * pt.y / y, y, ..*pt }
        })
        .collect();
    let degenerate = rate.exp_m1().abs() < STRESS_DEGENERATE_ZONE;
    let mut prev = path.bridge;
    let sigma_series = stressed
        .iter()
        .map(|&next| {
            let computed = step(prev, next, path.constant_share, eps)?;
            let a = if degenerate {
                SigmaAssessment::indeterminate(computed.variant, computed.inputs).with_source(computed.input_source)
            } else {
                computed
            };
            prev = next;
            Ok(a.with_label(next.year.to_string()))
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    Ok(StressResult { rate, sigma_series })
}

impl AssessmentReport {
    /// Every stored band agrees with a fresh classification.
    pub fn bands_consistent(&self) -> bool {
        let eps = self.epsilon;
        self.sigma_series
            .iter()
            .chain(self.horizon_sigma.as_ref())
            .chain(self.history_sigma.as_ref())
            .chain(self.stress_results.iter().flat_map(|s| &s.sigma_series))
            .all(|a| a.band_is_consistent(eps))
    }
}
