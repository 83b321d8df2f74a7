mod plot;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use sustain_core::gateway::{self, Gateway, SourceDescriptor};
use sustain_core::growth::{fit_log_growth_with, project, CorrelationBasis};
use sustain_core::scenario::{
    assess, parse_schema_arg, parse_structured, render_report_with, resolve_dataset, stress_gdp, PlanConfig,
    PlanSpec, RenderOptions, ReportFormat,
};
use sustain_core::series::{derive, format_full_precision, write_canonical_csv, Dataset, DerivedKind, SeriesRole};
use sustain_core::sustainability::{
    sigma_dp_zero, sigma_dy_zero, sigma_full, Epsilon, FullInputs, SigmaAssessment, SigmaValue,
};

#[derive(Parser)]
#[command(name = "sustain", version, about = "Public health financing sustainability analysis")]
struct Cli {
    /// Never touch the network; fixtures and the cache only.
    #[arg(long, global = true)]
    offline: bool,
    /// Omit provenance footers from CSV output.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Decimals for rates and sigma, or `full`.
    #[arg(long, global = true, default_value = "2")]
    precision: Precision,
    /// Band half-width around the thresholds.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug)]
enum Precision {
    Digits(usize),
    Full,
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "full" {
            return Ok(Precision::Full);
        }
        s.parse().map(Precision::Digits).map_err(|_| format!("expected a digit count or `full`, got `{s}`"))
    }
}

impl Precision {
    fn num(self, x: f64) -> String {
        match self {
            Precision::Digits(p) => format!("{x:.p$}"),
            Precision::Full => format_full_precision(x),
        }
    }

    fn pct(self, x: f64) -> String {
        format!("{}%", self.num(x * 100.0))
    }

    fn digits(self) -> usize {
        match self {
            Precision::Digits(p) => p,
            Precision::Full => 17,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Read a CSV through a column mapping and print it in canonical form.
    Ingest {
        csv: PathBuf,
        /// Inline mapping `COL=name:unit:role,...`, a mapping `.json`, or `canonical`.
        #[arg(long)]
        schema: String,
    },
    /// Fit a log-linear trend to one series.
    Fit {
        /// Fixture name, `fixture:NAME`, or a CSV path.
        dataset: String,
        /// Series name, role, or `phi` / `public_phi` / `public_spend`.
        series: String,
        #[arg(long)]
        schema: Option<String>,
        /// Correlate raw values instead of logs.
        #[arg(long)]
        raw_r: bool,
    },
    /// Compound `base · e^(rate · periods)`.
    #[command(allow_negative_numbers = true)]
    Project { base: f64, rate: f64, periods: u32 },
    /// Evaluate sigma from direct inputs.
    #[command(allow_negative_numbers = true)]
    Sigma {
        #[arg(long, value_enum)]
        mode: SigmaMode,
        /// full: P0 P1 PHI0 PHI1 Y0 Y1; dp0: PPHI0 PPHI1 Y0 Y1; dy0: P0 P1 PPHI.
        inputs: Vec<f64>,
    },
    /// Assess a plan described by a JSON config.
    Assess {
        planspec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sweep constant GDP growth rates against the plan's spending.
    #[command(allow_negative_numbers = true)]
    Stress {
        planspec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write SVG charts and their CSV data from a structured report.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve a source through the cache.
    Fetch {
        /// Fixture name, or a cache name when `--url` is given.
        name: String,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        sha256: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaMode {
    Full,
    Dp0,
    Dy0,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::TableText,
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Structured,
        }
    }
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f @ Failure::Usage(_)) => {
            eprintln!("error: {f}");
            ExitCode::from(2)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(1)
        }
    }
}

fn epsilon(cli: &Cli) -> Result<Option<Epsilon>, Failure> {
    cli.epsilon.map(|e| Epsilon::new(e).map_err(|e| Failure::Usage(e.to_string()))).transpose()
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let prec = cli.precision;
    match &cli.command {
        Command::Ingest { csv, schema } => {
            let schema = parse_schema_arg(schema, Path::new(".")).map_err(anyhow::Error::from)?;
            let ds = sustain_core::series::load_csv(csv, &schema).with_context(|| csv.display().to_string())?;
            Ok(write_canonical_csv(&ds, !cli.no_meta))
        }
        Command::Fit { dataset, series, schema, raw_r } => {
            let ds = load_dataset(dataset, schema.as_deref())?;
            let s = pick_series(&ds, series)?;
            let basis = if *raw_r { CorrelationBasis::RawValues } else { CorrelationBasis::LogValues };
            let fit = fit_log_growth_with(&s, basis).map_err(anyhow::Error::from)?;
            let r = fit.pearson_r.map_or_else(|| "n/a".to_owned(), |r| format!("{r:.2}"));
            let flag = if fit.meaningful { "" } else { " (not meaningful)" };
            Ok(format!("rate={} r={r}{flag}\n", prec.pct(fit.reported_rate)))
        }
        Command::Project { base, rate, periods } => {
            let v = project(*base, *rate, *periods).map_err(anyhow::Error::from)?;
            Ok(format!("{}\n", prec.num(v)))
        }
        Command::Sigma { mode, inputs } => {
            let eps = epsilon(cli)?.unwrap_or_default();
            let need = match mode {
                SigmaMode::Full => 6,
                SigmaMode::Dp0 => 4,
                SigmaMode::Dy0 => 3,
            };
            if inputs.len() != need {
                return Err(Failure::Usage(format!("this mode takes {need} inputs, got {}", inputs.len())));
            }
            let v = inputs.as_slice();
            let a = match mode {
                SigmaMode::Full => sigma_full(
                    &FullInputs { p0: v[0], p1: v[1], phi0: v[2], phi1: v[3], y0: v[4], y1: v[5] },
                    eps,
                ),
                SigmaMode::Dp0 => sigma_dp_zero(v[0], v[1], v[2], v[3], eps),
                SigmaMode::Dy0 => sigma_dy_zero(v[0], v[1], v[2], eps),
            }
            .map_err(anyhow::Error::from)?;
            Ok(format!("{}\n", sigma_text(&a, prec)))
        }
        Command::Assess { planspec, format } => {
            let spec = load_spec(planspec, epsilon(cli)?)?;
            let report = assess(&spec).map_err(anyhow::Error::from)?;
            Ok(render_report_with(&report, (*format).into(), RenderOptions { precision: prec.digits() }))
        }
        Command::Stress { planspec, rates, format } => {
            let spec = load_spec(planspec, epsilon(cli)?)?;
            let results = stress_gdp(&spec, rates).map_err(anyhow::Error::from)?;
            Ok(match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&results).map_err(anyhow::Error::from)?;
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("rate,period_label,sigma,variant,band\n");
                    for r in &results {
                        for a in &r.sigma_series {
                            s.push_str(&format!(
                                "{},{},{},{},{}\n",
                                format_full_precision(r.rate),
                                a.period_label,
                                a.value().map_or_else(|| "indeterminate".to_owned(), format_full_precision),
                                a.variant.as_str(),
                                a.band.map_or("", |b| b.as_str())
                            ));
                        }
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for r in &results {
                        s.push_str(&format!("rate {}\n", r.rate));
                        for a in &r.sigma_series {
                            s.push_str(&format!("  {} {}\n", a.period_label, sigma_text(a, prec)));
                        }
                    }
                    s
                }
            })
        }
        Command::Plot { report, out } => {
            let text = std::fs::read_to_string(report).with_context(|| report.display().to_string())?;
            let report = parse_structured(&text).map_err(anyhow::Error::from)?;
            let files = plot::write_all(&report, out)?;
            Ok(files.iter().map(|f| format!("{}\n", f.display())).collect())
        }
        Command::Fetch { name, url, schema, sha256 } => {
            let source = match url {
                None => SourceDescriptor::fixture(name)
                    .ok_or_else(|| Failure::Usage(format!("`{name}` is not a fixture; pass --url")))?,
                Some(url) => {
                    let schema = match schema {
                        Some(s) => parse_schema_arg(s, Path::new(".")).map_err(anyhow::Error::from)?,
                        None => sustain_core::series::Schema::Canonical,
                    };
                    let mut d = SourceDescriptor::new(name.clone(), url.clone(), schema);
                    if let Some(h) = sha256 {
                        d = d.pinned(h.clone());
                    }
                    d
                }
            };
            let ds = Gateway::from_env().fetch(&source, cli.offline).map_err(anyhow::Error::from)?;
            Ok(write_canonical_csv(&ds, !cli.no_meta))
        }
    }
}

fn sigma_text(a: &SigmaAssessment, prec: Precision) -> String {
    match a.sigma {
        SigmaValue::Finite(v) => format!("{} {}", prec.num(v), a.band.map_or("", |b| b.as_str())),
        SigmaValue::Indeterminate => "indeterminate".to_owned(),
    }
}

fn load_spec(path: &Path, eps: Option<Epsilon>) -> Result<PlanSpec, Failure> {
    let (config, dir) = PlanConfig::load(path).map_err(anyhow::Error::from)?;
    let mut spec = config.resolve(&dir).map_err(anyhow::Error::from)?;
    if let Some(e) = eps {
        spec.epsilon = e;
    }
    Ok(spec)
}

fn load_dataset(reference: &str, schema: Option<&str>) -> Result<Dataset, Failure> {
    let name = reference.strip_prefix("fixture:").unwrap_or(reference);
    if gateway::fixtures::lookup(name).is_some() {
        return Ok(gateway::load_fixture(name).map_err(anyhow::Error::from)?);
    }
    Ok(resolve_dataset(reference, schema, Path::new(".")).map_err(anyhow::Error::from)?)
}

fn pick_series(ds: &Dataset, name: &str) -> Result<sustain_core::AnnualSeries, Failure> {
    if let Some(s) = ds.series(name) {
        return Ok(s.clone());
    }
    if let Some(kind) = DerivedKind::parse(name) {
        return Ok(derive(ds, kind).map_err(anyhow::Error::from)?);
    }
    if let Some(s) = SeriesRole::parse(name).and_then(|r| ds.by_role(r)) {
        return Ok(s.clone());
    }
    let known: Vec<&str> = ds.series_iter().map(|s| s.name()).collect();
    Err(Failure::Data(anyhow!("no series `{name}`; available: {}", known.join(", "))))
}
