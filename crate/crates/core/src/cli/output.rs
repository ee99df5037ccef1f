//! Result rows and their CSV / JSON encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::Proportion;
use crate::error::{Result, SimError};

pub const CSV_HEADER: [&str; 7] = ["param_point", "metric", "estimate", "ci_low", "ci_high", "n", "seed"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_hash: String,
    pub param_point: String,
    pub metric: String,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub seed: u64,
}

impl ResultRow {
    pub fn point(param_point: impl Into<String>, metric: impl Into<String>, value: f64, n: u64) -> Self {
        ResultRow {
            config_hash: String::new(),
            param_point: param_point.into(),
            metric: metric.into(),
            estimate: value,
            ci_low: value,
            ci_high: value,
            n,
            seed: 0,
        }
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> Self {
        self.ci_low = lo.min(self.estimate);
        self.ci_high = hi.max(self.estimate);
        self
    }

    pub fn proportion(param_point: impl Into<String>, metric: impl Into<String>, p: &Proportion) -> Self {
        Self::point(param_point, metric, p.estimate, p.n).with_ci(p.ci_low, p.ci_high)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(SimError::param("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

/// `printf("%.9g")`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const P: i32 = 9;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], config_hash: &str, mut out: W) -> Result<()> {
    writeln!(out, "# config_hash={config_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| SimError::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.param_point.clone(),
            r.metric.clone(),
            fmt_g9(r.estimate),
            fmt_g9(r.ci_low),
            fmt_g9(r.ci_high),
            r.n.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| SimError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<Vec<ResultRow>> {
    serde_json::from_str(text).map_err(|e| SimError::InvalidInput(format!("result JSON: {e}")))
}

pub fn emit_results<W: Write>(rows: &[ResultRow], config_hash: &str, format: Format, out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(SimError::InvalidInput("no result rows to emit".into()));
    }
    match format {
        Format::Csv => write_csv(rows, config_hash, out),
        Format::Json => write_json(rows, out),
    }
}
