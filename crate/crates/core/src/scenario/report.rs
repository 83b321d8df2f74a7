use std::fmt::Write as _;

use super::{AssessmentReport, ScenarioError};
use crate::series::format_full_precision;
use crate::sustainability::SigmaAssessment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TableText,
    Csv,
    /// Pretty-printed JSON of the whole report.
    Structured,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "table-text" | "text" => Some(ReportFormat::TableText),
            "csv" => Some(ReportFormat::Csv),
            "structured" | "json" => Some(ReportFormat::Structured),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Decimals for percentages and σ in table text.
    pub precision: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { precision: 2 }
    }
}

pub fn render_report(report: &AssessmentReport, format: ReportFormat) -> String {
    render_report_with(report, format, RenderOptions::default())
}

pub fn render_report_with(report: &AssessmentReport, format: ReportFormat, options: RenderOptions) -> String {
    match format {
        ReportFormat::TableText => text(report, options.precision),
        ReportFormat::Csv => csv(report),
        ReportFormat::Structured => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

/// Parses a report rendered with [`ReportFormat::Structured`].
pub fn parse_structured(text: &str) -> Result<AssessmentReport, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Structured(e.to_string()))
}

fn pct(x: f64, p: usize) -> String {
    format!("{:.p$}%", x * 100.0)
}

fn opt_num(x: Option<f64>, p: usize) -> String {
    x.map_or_else(|| "-".to_owned(), |v| format!("{v:.p$}"))
}

fn sigma_line(out: &mut String, a: &SigmaAssessment, p: usize) {
    let band = a.band.map_or("-", |b| b.as_str());
    let _ = writeln!(out, "{:<12} {:>10} {:<11} {}", a.period_label, format!("{:.p$}", a.sigma), a.variant.as_str(), band);
}

/// `slope` is the continuous rate, `rate` is `exp(slope) - 1`.
fn fits_table(out: &mut String, fits: &[crate::growth::GrowthFit], p: usize) {
    let _ = writeln!(out, "{:<24} {:>6} {:>8} {:>10} {:>10} {:>6}  meaningful", "series", "base", "periods", "slope", "rate", "r");
    for f in fits {
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>8} {:>10} {:>10} {:>6}  {}",
            f.series_name,
            f.base_year,
            f.n_periods,
            pct(f.slope, p),
            pct(f.reported_rate, p),
            opt_num(f.pearson_r, 2),
            if f.meaningful { "yes" } else { "no" }
        );
    }
}

fn text(r: &AssessmentReport, p: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "GROWTH RATES (log-linear fit on plan series)");
    fits_table(&mut out, &r.growth_fits, p);
    if let (Some(first), false) = (r.horizon_fits.first(), r.horizon_fits.is_empty()) {
        let _ = writeln!(out, "\nSPLICED HORIZON GROWTH ({}-{})", first.base_year, first.base_year + first.n_periods as i32);
        fits_table(&mut out, &r.horizon_fits, p);
    }

    let _ = writeln!(out, "\nCOEFFICIENTS (share of GDP)");
    let rows = &r.coefficient_table.rows;
    let _ = write!(out, "{:<12}", "");
    for row in rows {
        let _ = write!(out, " {:>10}", row.year);
    }
    out.push('\n');
    let lines: [(&str, fn(&crate::sustainability::CoefficientRow) -> f64); 6] = [
        ("T", |c| c.revenue_ratio),
        ("P", |c| c.public_share),
        ("phi", |c| c.phi),
        ("Pphi", |c| c.public_phi),
        ("S", |c| c.interest_ratio),
        ("(T-S)-Pphi", |c| c.residual),
    ];
    for (label, get) in lines {
        let _ = write!(out, "{label:<12}");
        for row in rows {
            let _ = write!(out, " {:>10}", pct(get(row), p));
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\nBUDGET IDENTITY (omega = {})", r.omega);
    let _ = writeln!(out, "{:<6} {:>14} {:>14} {:>14} {:>14} {:>14}", "year", "GDP", "revenue", "health", "interest", "non-health");
    for b in &r.budget {
        let _ = writeln!(
            out,
            "{:<6} {:>14.0} {:>14.0} {:>14.0} {:>14.0} {:>14.0}",
            b.year, b.gdp, b.revenue, b.health, b.interest, b.non_health
        );
    }

    let _ = writeln!(out, "\nSUSTAINABILITY INDEX (epsilon = {})", r.epsilon.value());
    let _ = writeln!(out, "{:<12} {:>10} {:<11} band", "period", "sigma", "variant");
    for a in r.sigma_series.iter().chain(&r.horizon_sigma).chain(&r.history_sigma) {
        sigma_line(&mut out, a, p);
    }

    if let Some(sg) = &r.spending_growth {
        let _ = writeln!(out, "\nPUBLIC HEALTH SPENDING GROWTH (average from {})", sg.base_year);
        let _ = writeln!(out, "{:<6} {:>14} {:>14} {:>14}", "year", "spending", "marginal", "average");
        for pt in &sg.points {
            let _ = writeln!(
                out,
                "{:<6} {:>14.0} {:>14} {:>14}",
                pt.year,
                pt.public_spend,
                opt_num(pt.marginal_growth, 0),
                opt_num(pt.average_growth, 0)
            );
        }
    }

    if !r.stress_results.is_empty() {
        let _ = writeln!(out, "\nGDP STRESS (continuous rate, spending held at plan)");
        for s in &r.stress_results {
            let _ = writeln!(out, "rate {}", s.rate);
            for a in &s.sigma_series {
                sigma_line(&mut out, a, p);
            }
        }
    }

    if !r.notes.is_empty() {
        let _ = writeln!(out, "\nNOTES");
        for n in &r.notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    out
}

fn num(x: f64) -> String {
    format_full_precision(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn sigma_cells(a: &SigmaAssessment) -> String {
    format!(
        "{},{},{}",
        a.value().map_or_else(|| "indeterminate".to_owned(), num),
        a.variant.as_str(),
        a.band.map_or("", |b| b.as_str())
    )
}

/// Sections separated by blank lines; the first is the coefficient table.
fn csv(r: &AssessmentReport) -> String {
    let mut out = String::from("year,T,P,phi,Pphi,S,residual\n");
    for c in &r.coefficient_table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.year,
            num(c.revenue_ratio),
            num(c.public_share),
            num(c.phi),
            num(c.public_phi),
            num(c.interest_ratio),
            num(c.residual)
        );
    }

    out.push_str("\nperiod,sigma,variant,band\n");
    for a in r.sigma_series.iter().chain(&r.horizon_sigma).chain(&r.history_sigma) {
        let _ = writeln!(out, "{},{}", a.period_label, sigma_cells(a));
    }

    out.push_str("\nseries,base_year,n_periods,slope,reported_rate,pearson_r,p_value,meaningful\n");
    for f in r.growth_fits.iter().chain(&r.horizon_fits) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.series_name,
            f.base_year,
            f.n_periods,
            num(f.slope),
            num(f.reported_rate),
            opt(f.pearson_r),
            opt(f.p_value),
            f.meaningful
        );
    }

    if let Some(sg) = &r.spending_growth {
        out.push_str("\nyear,public_spend,marginal_growth,average_growth\n");
        for pt in &sg.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                pt.year,
                num(pt.public_spend),
                opt(pt.marginal_growth),
                opt(pt.average_growth)
            );
        }
    }

    if !r.stress_results.is_empty() {
        out.push_str("\nrate,period,sigma,variant,band\n");
        for s in &r.stress_results {
            for a in &s.sigma_series {
                let _ = writeln!(out, "{},{},{}", num(s.rate), a.period_label, sigma_cells(a));
            }
        }
    }
    out
}
