//! Self-contained SVG charts written next to the CSV data they draw.
//! CSV headers use the structured report's field names.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sustain_core::scenario::AssessmentReport;
use sustain_core::series::format_full_precision;
use sustain_core::SigmaAssessment;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub fn write_all(report: &AssessmentReport, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> anyhow::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| path.display().to_string())?;
        written.push(path);
        Ok(())
    };

    let rows = &report.coefficient_table.rows;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["year", "T", "P", "phi", "Pphi", "S", "residual"])?;
    for r in rows {
        w.write_record([
            r.year.to_string(),
            num(r.revenue_ratio),
            num(r.public_share),
            num(r.phi),
            num(r.public_phi),
            num(r.interest_ratio),
            num(r.residual),
        ])?;
    }
    emit("propensity.csv", finish(w)?)?;
    let years: Vec<String> = rows.iter().map(|r| r.year.to_string()).collect();
    emit(
        "propensity.svg",
        line_chart(
            "Health propensities (% of GDP)",
            &years,
            &[
                ("phi", rows.iter().map(|r| Some(r.phi * 100.0)).collect()),
                ("Pphi", rows.iter().map(|r| Some(r.public_phi * 100.0)).collect()),
                ("S", rows.iter().map(|r| Some(r.interest_ratio * 100.0)).collect()),
            ],
        ),
    )?;

    emit("sigma.csv", sigma_csv(&report.sigma_series, None)?)?;
    emit("sigma.svg", sigma_chart(&report.sigma_series, report.epsilon.value()))?;

    if let Some(sg) = &report.spending_growth {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["year", "public_spend", "marginal_growth", "average_growth"])?;
        for p in &sg.points {
            w.write_record([p.year.to_string(), num(p.public_spend), opt(p.marginal_growth), opt(p.average_growth)])?;
        }
        emit("spending_growth.csv", finish(w)?)?;
        let years: Vec<String> = sg.points.iter().map(|p| p.year.to_string()).collect();
        emit(
            "spending_growth.svg",
            line_chart(
                "Public health spending growth (million per year)",
                &years,
                &[
                    ("marginal_growth", sg.points.iter().map(|p| p.marginal_growth).collect()),
                    ("average_growth", sg.points.iter().map(|p| p.average_growth).collect()),
                ],
            ),
        )?;
    }

    if !report.stress_results.is_empty() {
        let mut body = String::new();
        for (i, s) in report.stress_results.iter().enumerate() {
            let part = sigma_csv(&s.sigma_series, Some(s.rate))?;
            body.push_str(if i == 0 { &part } else { part.split_once('\n').map_or("", |x| x.1) });
        }
        emit("stress.csv", body)?;
        let labels: Vec<String> =
            report.stress_results[0].sigma_series.iter().map(|a| a.period_label.clone()).collect();
        let names: Vec<String> = report.stress_results.iter().map(|s| format!("rate {}", s.rate)).collect();
        let series: Vec<(&str, Vec<Option<f64>>)> = report
            .stress_results
            .iter()
            .zip(&names)
            .map(|(s, n)| (n.as_str(), s.sigma_series.iter().map(|a| a.value()).collect()))
            .collect();
        emit("stress.svg", line_chart("Sigma under GDP stress", &labels, &series))?;
    }
    Ok(written)
}

fn num(x: f64) -> String {
    format_full_precision(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

fn sigma_csv(entries: &[SigmaAssessment], rate: Option<f64>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["period_label", "sigma", "variant", "band"];
    if rate.is_some() {
        header.insert(0, "rate");
    }
    w.write_record(&header)?;
    for a in entries {
        let mut rec = vec![
            a.period_label.clone(),
            a.value().map_or_else(|| "indeterminate".to_owned(), num),
            a.variant.as_str().to_owned(),
            a.band.map_or_else(String::new, |b| b.as_str().to_owned()),
        ];
        if let Some(r) = rate {
            rec.insert(0, num(r));
        }
        w.write_record(&rec)?;
    }
    finish(w)
}

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Round tick step near `span / 5`.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = raw / mag;
    let m = if unit < 1.5 {
        1.0
    } else if unit < 3.5 {
        2.0
    } else if unit < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

struct Frame {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Frame {
    fn new(values: impl Iterator<Item = f64>, n: usize, extra: &[f64]) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.chain(extra.iter().copied()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            (lo, hi) = (lo - 1.0, hi + 1.0);
        }
        let step = tick_step(hi - lo);
        Frame { lo: (lo / step).floor() * step, hi: (hi / step).ceil() * step, n }
    }

    fn x(&self, i: usize) -> f64 {
        let plot = W - LEFT - RIGHT;
        if self.n <= 1 {
            LEFT + plot / 2.0
        } else {
            LEFT + plot * i as f64 / (self.n - 1) as f64
        }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (H - TOP - BOTTOM) * (self.hi - v) / (self.hi - self.lo)
    }

    fn axes(&self, out: &mut String, title: &str, labels: &[String]) {
        let _ = writeln!(out, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, fmt(W / 2.0), escape(title));
        let step = tick_step(self.hi - self.lo);
        let mut v = self.lo;
        while v <= self.hi + step * 1e-9 {
            let y = self.y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"##,
                fmt(LEFT),
                fmt(W - RIGHT),
                fmt(LEFT - 6.0),
                fmt(y + 4.0),
                trim(v),
                y = fmt(y)
            );
            v += step;
        }
        for (i, label) in labels.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                fmt(self.x(i)),
                fmt(H - BOTTOM + 18.0),
                escape(label)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            fmt(LEFT),
            fmt(TOP),
            fmt(W - LEFT - RIGHT),
            fmt(H - TOP - BOTTOM)
        );
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        w = W,
        h = H
    )
}

fn line_chart(title: &str, labels: &[String], series: &[(&str, Vec<Option<f64>>)]) -> String {
    let frame = Frame::new(series.iter().flat_map(|(_, v)| v.iter().flatten().copied()), labels.len(), &[]);
    let mut out = open();
    frame.axes(&mut out, title, labels);
    for (k, (name, values)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{},{}", fmt(frame.x(i)), fmt(frame.y(v)))))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, points.join(" "));
        for p in &points {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 16.0 * k as f64 + 8.0;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
            fmt(W - RIGHT + 12.0),
            fmt(ly - 2.0),
            fmt(W - RIGHT + 30.0),
            fmt(ly + 3.0),
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bars per period with dashed guides at the band thresholds.
fn sigma_chart(entries: &[SigmaAssessment], eps: f64) -> String {
    let labels: Vec<String> = entries.iter().map(|a| a.period_label.clone()).collect();
    let frame = Frame::new(entries.iter().filter_map(|a| a.value()), labels.len(), &[0.0]);
    let mut out = open();
    frame.axes(&mut out, "Sustainability index by year", &labels);
    for g in [-1.0 - eps, -1.0 + eps, -eps, eps, 1.0] {
        if g >= frame.lo && g <= frame.hi {
            let y = fmt(frame.y(g));
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#888" stroke-dasharray="4 3"/>"##,
                fmt(LEFT),
                fmt(W - RIGHT)
            );
        }
    }
    let plot = W - LEFT - RIGHT;
    let bar = (plot / entries.len().max(1) as f64 * 0.5).min(60.0);
    let zero = frame.y(0.0);
    for (i, a) in entries.iter().enumerate() {
        let x = frame.x(i) - bar / 2.0;
        match a.value() {
            Some(v) => {
                let y = frame.y(v);
                let color = if v > 0.0 { "#d62728" } else { "#2ca02c" };
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"><title>{}</title></rect>"#,
                    fmt(x),
                    fmt(y.min(zero)),
                    fmt(bar),
                    fmt((y - zero).abs()),
                    escape(&format!("{} {:.4} {}", a.period_label, v, a.band.map_or("", |b| b.as_str())))
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">indeterminate</text>"#,
                    fmt(frame.x(i)),
                    fmt(zero - 6.0)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
