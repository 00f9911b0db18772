//! Parameter sweeps (scale, precision, exponent bits) and their CSV form.
//!
//! The CSV layout is a block of `# key: value` metadata lines, one header
//! row, then data. Floats are written in shortest round-trip form, so
//! `SweepResult::from_csv(&r.to_csv())` reproduces every value bit for bit.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{default_t_grid, kl_bounds};
use crate::distributions::Distribution;
use crate::entropy::full_report;
use crate::error::{Error, Result};
use crate::format::FpFormat;
use crate::mc::{mc_entropy, McConfig};

pub const TOOL_NAME: &str = "fpent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Scale,
    Precision,
    Exponent,
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMode::Scale => "scale",
            SweepMode::Precision => "precision",
            SweepMode::Exponent => "exponent",
        })
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scale" => Ok(SweepMode::Scale),
            "precision" => Ok(SweepMode::Precision),
            "exponent" => Ok(SweepMode::Exponent),
            _ => Err(Error::Parse {
                input: s.into(),
                reason: "mode must be scale, precision or exponent".into(),
            }),
        }
    }
}

/// Which columns a sweep computes. `p_overflow` and `p_underflow` are
/// always present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    pub exact: bool,
    pub approx_s: bool,
    pub approx_tilde: bool,
    pub bounds: bool,
    pub mc: Option<McConfig>,
}

impl Default for Quantities {
    fn default() -> Self {
        Quantities {
            exact: true,
            approx_s: true,
            approx_tilde: true,
            bounds: false,
            mc: None,
        }
    }
}

impl Quantities {
    fn columns(&self) -> Vec<&'static str> {
        let mut c = Vec::new();
        if self.exact {
            c.push("exact_H");
        }
        if self.approx_tilde {
            c.push("approx_H_tilde");
        }
        if self.approx_s {
            c.push("approx_H_s");
        }
        c.extend(["p_overflow", "p_underflow"]);
        if self.bounds {
            c.extend(["kl", "kl_lower", "kl_upper"]);
        }
        if self.mc.is_some() {
            c.extend(["mc_H", "mc_std_error"]);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub dists: Vec<Distribution>,
    /// Fixed precision; ignored in precision mode.
    pub precision: u32,
    /// Fixed exponent bits; ignored in exponent mode.
    pub exponent_bits: u32,
    /// Scale mode: positive endpoints. Other modes: integer endpoints.
    pub min: f64,
    pub max: f64,
    /// Number of log-spaced points in scale mode.
    pub points: usize,
    pub quantities: Quantities,
}

impl SweepSpec {
    pub fn scale(dists: Vec<Distribution>, precision: u32, exponent_bits: u32, min: f64, max: f64, points: usize) -> Self {
        SweepSpec {
            mode: SweepMode::Scale,
            dists,
            precision,
            exponent_bits,
            min,
            max,
            points,
            quantities: Quantities::default(),
        }
    }

    pub fn precision(dists: Vec<Distribution>, exponent_bits: u32, p_min: u32, p_max: u32) -> Self {
        SweepSpec {
            mode: SweepMode::Precision,
            dists,
            precision: 0,
            exponent_bits,
            min: p_min as f64,
            max: p_max as f64,
            points: 0,
            quantities: Quantities::default(),
        }
    }

    pub fn exponent(dists: Vec<Distribution>, precision: u32, e_min: u32, e_max: u32) -> Self {
        SweepSpec {
            mode: SweepMode::Exponent,
            dists,
            precision,
            exponent_bits: 0,
            min: e_min as f64,
            max: e_max as f64,
            points: 0,
            quantities: Quantities::default(),
        }
    }

    pub fn with_quantities(mut self, q: Quantities) -> Self {
        self.quantities = q;
        self
    }

    /// Swept values in ascending order.
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |reason: String| Error::InvalidParameter { family: "sweep", reason };
        if !(self.min <= self.max) {
            return Err(bad(format!("empty range [{}, {}]", self.min, self.max)));
        }
        match self.mode {
            SweepMode::Scale => {
                if !(self.min > 0.0 && self.max.is_finite()) {
                    return Err(bad("scale endpoints must be positive and finite".into()));
                }
                if self.points == 0 || (self.points == 1 && self.min != self.max) {
                    return Err(bad(format!("{} points cannot span [{}, {}]", self.points, self.min, self.max)));
                }
                let (lo, hi) = (self.min.ln(), self.max.ln());
                let n = self.points;
                Ok((0..n)
                    .map(|i| match i {
                        0 => self.min,
                        _ if i == n - 1 => self.max,
                        _ => (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp(),
                    })
                    .collect())
            }
            SweepMode::Precision | SweepMode::Exponent => {
                if self.min.fract() != 0.0 || self.max.fract() != 0.0 || self.min < 0.0 {
                    return Err(bad("precision and exponent ranges take non-negative integers".into()));
                }
                Ok((self.min as u32..=self.max as u32).map(f64::from).collect())
            }
        }
    }

    fn format_label(&self) -> String {
        match self.mode {
            SweepMode::Scale => format!("p={},E={}", self.precision, self.exponent_bits),
            SweepMode::Precision => format!("p={}..{},E={}", self.min, self.max, self.exponent_bits),
            SweepMode::Exponent => format!("p={},E={}..{}", self.precision, self.min, self.max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dist: String,
    pub swept_value: f64,
    pub precision: u32,
    pub exponent_bits: u32,
    /// One value per entry of `SweepResult::columns`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ordered `key: value` pairs; keys may repeat (one `dist` per
    /// distribution).
    pub metadata: Vec<(String, String)>,
    /// Names of the numeric columns after the fixed
    /// `dist,swept_value,p,E` prefix.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

const FIXED_COLUMNS: [&str; 4] = ["dist", "swept_value", "p", "E"];

fn evaluate(dist: &Distribution, fmt: &FpFormat, q: &Quantities) -> Result<Vec<f64>> {
    let r = full_report(dist, fmt)?;
    let mut v = Vec::new();
    if q.exact {
        v.push(r.exact_H);
    }
    if q.approx_tilde {
        v.push(r.approx_H_tilde);
    }
    if q.approx_s {
        v.push(r.approx_H_s);
    }
    v.extend([r.p_overflow, r.p_underflow]);
    if q.bounds {
        let b = kl_bounds(dist, fmt, &default_t_grid(), false)?;
        v.extend([b.kl, b.lower, b.upper]);
    }
    if let Some(cfg) = &q.mc {
        let m = mc_entropy(dist, fmt, cfg)?;
        v.extend([m.estimate, m.std_error]);
    }
    Ok(v)
}

/// Run a sweep. Rows are grouped by distribution in the given order, each
/// group ascending in the swept value.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.dists.is_empty() {
        return Err(Error::InvalidParameter {
            family: "sweep",
            reason: "at least one distribution is required".into(),
        });
    }
    let values = spec.values()?;
    // Reject an out-of-range format before any work starts.
    for &v in &values {
        match spec.mode {
            SweepMode::Scale => FpFormat::new(spec.precision, spec.exponent_bits)?,
            SweepMode::Precision => FpFormat::new(v as u32, spec.exponent_bits)?,
            SweepMode::Exponent => FpFormat::new(spec.precision, v as u32)?,
        };
    }
    let jobs: Vec<(&Distribution, f64)> = spec
        .dists
        .iter()
        .flat_map(|d| values.iter().map(move |&v| (d, v)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, v)| {
            let (p, e, dist) = match spec.mode {
                SweepMode::Scale => (spec.precision, spec.exponent_bits, d.scaled(v)?),
                SweepMode::Precision => (v as u32, spec.exponent_bits, *d),
                SweepMode::Exponent => (spec.precision, v as u32, *d),
            };
            let fmt = FpFormat::new(p, e)?;
            Ok(SweepRow {
                dist: d.to_string(),
                swept_value: v,
                precision: p,
                exponent_bits: e,
                values: evaluate(&dist, &fmt, &spec.quantities)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut metadata = vec![
        ("tool".to_string(), TOOL_NAME.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("mode".to_string(), spec.mode.to_string()),
        ("format".to_string(), spec.format_label()),
    ];
    metadata.extend(spec.dists.iter().map(|d| ("dist".to_string(), d.to_string())));
    if let Some(cfg) = &spec.quantities.mc {
        metadata.push((
            "mc".to_string(),
            format!("samples={},seed={},bias_correction={}", cfg.samples, cfg.seed, cfg.bias_correction),
        ));
    }
    Ok(SweepResult {
        metadata,
        columns: spec.quantities.columns().into_iter().map(String::from).collect(),
        rows,
    })
}

fn parse_error(reason: impl Into<String>) -> Error {
    Error::Parse {
        input: "sweep csv".into(),
        reason: reason.into(),
    }
}

impl SweepResult {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// All values of one numeric column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if name == "swept_value" {
            return Some(self.rows.iter().map(|r| r.swept_value).collect());
        }
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let header = FIXED_COLUMNS.iter().map(|s| s.to_string()).chain(self.columns.iter().cloned());
        // Writes into a Vec cannot fail.
        w.write_record(header).unwrap();
        for r in &self.rows {
            let fields = [
                r.dist.clone(),
                format!("{:?}", r.swept_value),
                r.precision.to_string(),
                r.exponent_bits.to_string(),
            ];
            let vals = r.values.iter().map(|v| format!("{v:?}"));
            w.write_record(fields.into_iter().chain(vals)).unwrap();
        }
        out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else { break };
            body_start += line.len();
            let (k, v) = rest.trim().split_once(": ").ok_or_else(|| parse_error(format!("bad metadata line {line:?}")))?;
            metadata.push((k.to_string(), v.to_string()));
        }
        let mut rdr = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
        let header = rdr.headers().map_err(|e| parse_error(e.to_string()))?.clone();
        if header.len() < FIXED_COLUMNS.len() || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
            return Err(parse_error(format!("header must start with {}", FIXED_COLUMNS.join(","))));
        }
        let columns: Vec<String> = header.iter().skip(FIXED_COLUMNS.len()).map(String::from).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_error(format!("not a number: {s:?}")));
        let int = |s: &str| s.parse::<u32>().map_err(|_| parse_error(format!("not an integer: {s:?}")));
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| parse_error(e.to_string()))?;
            rows.push(SweepRow {
                dist: rec[0].to_string(),
                swept_value: num(&rec[1])?,
                precision: int(&rec[2])?,
                exponent_bits: int(&rec[3])?,
                values: rec.iter().skip(FIXED_COLUMNS.len()).map(num).collect::<Result<_>>()?,
            });
        }
        Ok(SweepResult { metadata, columns, rows })
    }
}
