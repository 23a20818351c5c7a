use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{hash_echo, Format, ScenarioConfig};
use crate::multilevel::Strictness;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = concat!("frechet-frames ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// One level `k` of a frame plan.
    Level,
    /// A strictness or summary verdict.
    Verdict,
    /// One `‖c‖_q, ‖c‖_2, ‖c‖_p` sample.
    Chain,
    /// One prefix of the non-closedness witness.
    Growth,
}

/// One line of a scenario report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub config_hash: String,
    pub kind: RowKind,
    pub label: String,
    pub k: Option<usize>,
    pub s_lower: Option<usize>,
    pub s_upper: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub a_witness: Option<String>,
    pub b_witness: Option<String>,
    pub c: Option<f64>,
    pub projection_norm: Option<f64>,
    pub pre_frame: Option<bool>,
    pub strictness: Option<Strictness>,
    pub round_trip: Option<bool>,
    pub expansion: Option<bool>,
    pub probe: Vec<f64>,
    pub profile: Vec<f64>,
    pub passed: bool,
    pub detail: String,
}

impl ReportRow {
    pub fn new(config: &ScenarioConfig, kind: RowKind, label: impl Into<String>) -> Self {
        Self {
            scenario: config.scenario.id().into(),
            config_hash: config.hash(),
            kind,
            label: label.into(),
            k: None,
            s_lower: None,
            s_upper: None,
            a: None,
            b: None,
            a_witness: None,
            b_witness: None,
            c: None,
            projection_norm: None,
            pre_frame: None,
            strictness: None,
            round_trip: None,
            expansion: None,
            probe: Vec::new(),
            profile: Vec::new(),
            passed: true,
            detail: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(config: ScenarioConfig, rows: Vec<ReportRow>) -> Self {
        Self { schema_version: SCHEMA_VERSION, tool: TOOL.into(), config_hash: config.hash(), config, rows }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// Rows whose hash differs from a rehash of the echoed config.
    pub fn hash_mismatches(&self) -> Vec<usize> {
        let expect = hash_echo(&self.config.echo());
        let mut bad: Vec<usize> = self.rows.iter().enumerate().filter(|(_, r)| r.config_hash != expect).map(|(i, _)| i).collect();
        if self.config_hash != expect {
            bad.insert(0, usize::MAX);
        }
        bad
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report has no rows")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed report: {0}")]
    Malformed(String),
}

/// `%g`-style decimal with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

const COLUMNS: [&str; 21] = [
    "scenario",
    "config_hash",
    "kind",
    "label",
    "k",
    "s_lower",
    "s_upper",
    "a",
    "b",
    "a_witness",
    "b_witness",
    "c",
    "projection_norm",
    "pre_frame",
    "strictness",
    "round_trip",
    "expansion",
    "probe",
    "profile",
    "passed",
    "detail",
];

fn enum_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(";")
}

fn csv_record(r: &ReportRow) -> Vec<String> {
    vec![
        r.scenario.clone(),
        r.config_hash.clone(),
        enum_name(&r.kind),
        r.label.clone(),
        opt(&r.k),
        opt(&r.s_lower),
        opt(&r.s_upper),
        opt_num(r.a),
        opt_num(r.b),
        r.a_witness.clone().unwrap_or_default(),
        r.b_witness.clone().unwrap_or_default(),
        opt_num(r.c),
        opt_num(r.projection_norm),
        opt(&r.pre_frame),
        r.strictness.as_ref().map(enum_name).unwrap_or_default(),
        opt(&r.round_trip),
        opt(&r.expansion),
        list(&r.probe),
        list(&r.profile),
        r.passed.to_string(),
        r.detail.clone(),
    ]
}

/// Serializes a report. CSV carries the metadata as `#` comment lines.
pub fn render(report: &Report, format: Format) -> Result<Vec<u8>, ReportError> {
    if report.rows.is_empty() {
        return Err(ReportError::Empty);
    }
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# schema_version: {}", report.schema_version)?;
            writeln!(out, "# tool: {}", report.tool)?;
            writeln!(out, "# config: {}", report.config.echo())?;
            writeln!(out, "# config_hash: {}", report.config_hash)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS)?;
            for r in &report.rows {
                w.write_record(csv_record(r))?;
            }
            w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
        }
    }
}

pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}

/// Parses a JSON or CSV report; CSV numbers come back at the printed precision.
pub fn parse_report(text: &str) -> Result<Report, ReportError> {
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(text)?);
    }
    let meta = |key: &str| {
        text.lines()
            .filter_map(|l| l.strip_prefix("# "))
            .find_map(|l| l.strip_prefix(key).and_then(|v| v.strip_prefix(": ")))
            .ok_or_else(|| ReportError::Malformed(format!("missing `{key}` header")))
    };
    let schema_version =
        meta("schema_version")?.parse().map_err(|_| ReportError::Malformed("bad schema_version".into()))?;
    let tool = meta("tool")?.to_string();
    let config: ScenarioConfig = serde_json::from_str(meta("config")?)?;
    let config_hash = meta("config_hash")?.to_string();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(row_from_record(&rec?)?);
    }
    Ok(Report { schema_version, tool, config, config_hash, rows })
}

fn row_from_record(rec: &csv::StringRecord) -> Result<ReportRow, ReportError> {
    if rec.len() != COLUMNS.len() {
        return Err(ReportError::Malformed(format!("expected {} columns, got {}", COLUMNS.len(), rec.len())));
    }
    let f = |i: usize| rec.get(i).unwrap_or("");
    let bad = |i: usize| ReportError::Malformed(format!("bad `{}` value `{}`", COLUMNS[i], f(i)));
    let parse_opt = |i: usize| -> Result<Option<String>, ReportError> {
        Ok((!f(i).is_empty()).then(|| f(i).to_string()))
    };
    let usize_opt = |i: usize| -> Result<Option<usize>, ReportError> {
        parse_opt(i)?.map(|s| s.parse().map_err(|_| bad(i))).transpose()
    };
    let f64_opt = |i: usize| -> Result<Option<f64>, ReportError> {
        parse_opt(i)?.map(|s| s.parse().map_err(|_| bad(i))).transpose()
    };
    let bool_opt = |i: usize| -> Result<Option<bool>, ReportError> {
        parse_opt(i)?.map(|s| s.parse().map_err(|_| bad(i))).transpose()
    };
    let from_name = |i: usize| serde_json::Value::String(f(i).to_string());
    let floats = |i: usize| -> Result<Vec<f64>, ReportError> {
        if f(i).is_empty() {
            return Ok(Vec::new());
        }
        f(i).split(';').map(|s| s.parse().map_err(|_| bad(i))).collect()
    };
    Ok(ReportRow {
        scenario: f(0).into(),
        config_hash: f(1).into(),
        kind: serde_json::from_value(from_name(2)).map_err(|_| bad(2))?,
        label: f(3).into(),
        k: usize_opt(4)?,
        s_lower: usize_opt(5)?,
        s_upper: usize_opt(6)?,
        a: f64_opt(7)?,
        b: f64_opt(8)?,
        a_witness: parse_opt(9)?,
        b_witness: parse_opt(10)?,
        c: f64_opt(11)?,
        projection_norm: f64_opt(12)?,
        pre_frame: bool_opt(13)?,
        strictness: match parse_opt(14)? {
            Some(_) => Some(serde_json::from_value(from_name(14)).map_err(|_| bad(14))?),
            None => None,
        },
        round_trip: bool_opt(15)?,
        expansion: bool_opt(16)?,
        probe: floats(17)?,
        profile: floats(18)?,
        passed: f(19).parse().map_err(|_| bad(19))?,
        detail: f(20).into(),
    })
}
