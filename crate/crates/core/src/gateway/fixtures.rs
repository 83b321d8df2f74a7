//! Pinned snapshots compiled into the crate so every analysis runs offline.

use crate::series::{ColumnMapping, SeriesColumn, SeriesRole, ShareColumns, Unit};

pub struct Fixture {
    pub name: &'static str,
    pub label: &'static str,
    pub url: &'static str,
    pub body: &'static str,
    pub sha256: &'static str,
    schema: fn() -> ColumnMapping,
}

impl Fixture {
    pub fn schema(&self) -> ColumnMapping {
        (self.schema)()
    }
}

pub static FIXTURES: &[Fixture] = &[
    Fixture {
        name: "def2011",
        label: "DEF 2011, Tabella II.2-1 (Ministero dell'Economia e delle Finanze)",
        url: "http://www.mef.gov.it",
        body: include_str!("../../fixtures/def2011.csv"),
        sha256: "cc72af6d4dd4bc3b7ef6239f7af5ab5c560041b63abc51a2aaee4e3ac10d310d",
        schema: def2011_schema,
    },
    Fixture {
        name: "oecd1997",
        label: "OECD Health Data 2011, Italy 1997",
        url: "http://stats.oecd.org/Index.aspx?DataSetCode=SHA",
        body: include_str!("../../fixtures/oecd1997.csv"),
        sha256: "cc2f9da89f874a1b5159aadce5ed0c88c1aca7353c6edeb2c130b5f00f026c57",
        schema: oecd_schema,
    },
    Fixture {
        name: "oecd2010",
        label: "OECD Health Data 2011, Italy 2010",
        url: "http://stats.oecd.org/Index.aspx?DataSetCode=SHA",
        body: include_str!("../../fixtures/oecd2010.csv"),
        sha256: "e3a98141179b3fc461d971dfe101cec6d3f1075b86dab0ca128acdd1f7af105c",
        schema: oecd_schema,
    },
];

pub fn lookup(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

fn def2011_schema() -> ColumnMapping {
    let c = Unit::CurrencyMillions;
    ColumnMapping {
        year_column: "year".into(),
        series: vec![
            SeriesColumn::new("PIL", "pil_nominale", c, Some(SeriesRole::Gdp)),
            SeriesColumn::new("spesa_sanitaria", "spesa_sanitaria", c, Some(SeriesRole::PublicHealth)),
            SeriesColumn::new("interessi_passivi", "interessi_passivi", c, Some(SeriesRole::Interest)),
            SeriesColumn::new("totale_entrate_finali", "totale_entrate_finali", c, Some(SeriesRole::Revenue)),
            SeriesColumn::new("totale_spese_finali", "totale_spese_finali", c, None),
            SeriesColumn::new("totale_spese_correnti", "totale_spese_correnti", c, None),
        ],
        shares: None,
    }
}

fn oecd_schema() -> ColumnMapping {
    let c = Unit::CurrencyMillions;
    ColumnMapping {
        year_column: "year".into(),
        series: vec![
            SeriesColumn::new("Y", "gdp", c, Some(SeriesRole::Gdp)),
            SeriesColumn::new("H", "total_health", c, Some(SeriesRole::TotalHealth)),
            SeriesColumn::new("PH", "public_health", c, Some(SeriesRole::PublicHealth)),
            SeriesColumn::new("OH", "oop_health", c, Some(SeriesRole::OopHealth)),
            SeriesColumn::new("IH", "insured_health", c, Some(SeriesRole::InsuredHealth)),
        ],
        shares: Some(ShareColumns { public: "P".into(), oop: "O".into(), insured: "I".into() }),
    }
}
