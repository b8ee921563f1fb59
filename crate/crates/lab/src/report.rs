//! CSV tables and JSON summaries. Floats are written with `{:e}`, the
//! shortest representation that reads back to the same value.

use std::fs::File;
use std::path::{Path, PathBuf};

use oldroyd_core::oldroyd::{ConstraintResiduals, CrossComparison, PhiOutput};
use oldroyd_core::verify::{RatioReport, ScalingReport, SmallnessTable};
use oldroyd_core::{BesovSpec, DyadicLadder, Exponent, HybridSpec, SpectralField};
use serde_json::{json, Value};

use crate::config::{NormConfig, NormKind};
use crate::error::LabError;

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn exponent(p: Exponent) -> String {
    match p {
        Exponent::Infinity => "inf".into(),
        Exponent::Finite(p) => num(p),
    }
}

/// A CSV file written row by row and flushed after each row, so a run that
/// stops early leaves every finished row on disk.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, LabError> {
        let file = File::create(path).map_err(|e| LabError::io(path, e))?;
        let mut sink = Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(file),
        };
        sink.row(header.iter().map(|s| s.to_string()))?;
        Ok(sink)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), LabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let io = |e: std::io::Error| LabError::io(&self.path, e);
        self.writer.write_record(fields).map_err(|e| io(e.into()))?;
        self.writer.flush().map_err(io)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub const NORM_HEADER: [&str; 7] = ["time", "field", "norm_name", "s", "p", "r", "value"];
pub const BLOCK_HEADER: [&str; 6] = ["field", "norm_name", "q", "block_lp", "weighted_term", "truncated_fraction"];
pub const RESIDUAL_HEADER: [&str; 6] = [
    "time",
    "divergence",
    "density_flux",
    "density_flux_column",
    "deformation",
    "perturbation",
];
pub const CONTRACTION_HEADER: [&str; 9] = [
    "outer_iter",
    "distance",
    "sigma_norm",
    "velocity_norm",
    "energy_norm",
    "sigma_ok",
    "velocity_ok",
    "energy_ok",
    "in_admissible_set",
];
pub const CROSS_HEADER: [&str; 4] = ["time", "discrepancy", "direct_norm", "relative"];
pub const RATIO_HEADER: [&str; 9] = [
    "experiment",
    "params",
    "count",
    "evaluated",
    "min_ratio",
    "max_ratio",
    "doubled_max_ratio",
    "stable",
    "hard_pass",
];
pub const SCALING_HEADER: [&str; 8] = ["m", "p", "field", "original", "rescaled", "relative_error", "hard", "passed"];
pub const SMALLNESS_HEADER: [&str; 8] = [
    "alpha",
    "amplitude",
    "initial_norm",
    "solution_norm",
    "solution_ratio",
    "pressure_l1",
    "pressure_ratio",
    "error",
];

/// Value of one configured norm on a group of fields.
pub fn norm_value(ladder: &DyadicLadder, fields: &[SpectralField], norm: &NormConfig, mu: f64) -> Result<f64, LabError> {
    match norm.kind {
        NormKind::Besov => Ok(ladder.besov_value(fields, &BesovSpec::new(norm.s, norm.p.0, norm.r.0))),
        NormKind::Hybrid => {
            let spec = HybridSpec::new(norm.s, norm.r.0, norm.weight.unwrap_or(mu)).map_err(LabError::Invalid)?;
            Ok(ladder.hybrid(fields, &spec))
        }
    }
}

pub fn norm_rows(
    ladder: &DyadicLadder,
    time: Option<f64>,
    groups: &[(&str, &[SpectralField])],
    norms: &[NormConfig],
    mu: f64,
) -> Result<Vec<[String; 7]>, LabError> {
    let mut rows = Vec::new();
    for (field, fields) in groups {
        for n in norms {
            rows.push([
                time.map_or(String::new(), num),
                field.to_string(),
                n.name.clone(),
                num(n.s),
                exponent(n.p.0),
                exponent(n.r.0),
                num(norm_value(ladder, fields, n, mu)?),
            ]);
        }
    }
    Ok(rows)
}

/// Per-block breakdown of the Besov norms of `groups`.
pub fn block_rows(ladder: &DyadicLadder, groups: &[(&str, &[SpectralField])], norms: &[NormConfig]) -> Vec<[String; 6]> {
    let mut rows = Vec::new();
    for (field, fields) in groups {
        for n in norms.iter().filter(|n| n.kind == NormKind::Besov) {
            let rep = ladder.besov(fields, &BesovSpec::new(n.s, n.p.0, n.r.0));
            for t in &rep.terms {
                rows.push([
                    field.to_string(),
                    n.name.clone(),
                    t.q.to_string(),
                    num(t.block_lp),
                    num(t.weighted),
                    num(rep.truncated_fraction),
                ]);
            }
        }
    }
    rows
}

pub fn residual_row(time: f64, r: &ConstraintResiduals) -> [String; 6] {
    [
        num(time),
        num(r.divergence),
        num(r.density_flux),
        num(r.density_flux_column),
        num(r.deformation),
        num(r.perturbation),
    ]
}

pub fn contraction_rows(out: &PhiOutput) -> Vec<[String; 9]> {
    out.distances
        .iter()
        .zip(&out.flags)
        .enumerate()
        .map(|(i, (d, f))| {
            [
                (i + 1).to_string(),
                num(*d),
                num(f.sigma_norm),
                num(f.velocity_norm),
                num(f.energy_norm),
                f.sigma_ok.to_string(),
                f.velocity_ok.to_string(),
                f.energy_ok.to_string(),
                f.all().to_string(),
            ]
        })
        .collect()
}

/// Rows for an iteration that stopped without contracting: distances only.
pub fn distance_rows(distances: &[f64]) -> Vec<[String; 9]> {
    distances
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut row: [String; 9] = Default::default();
            row[0] = (i + 1).to_string();
            row[1] = num(*d);
            row
        })
        .collect()
}

pub fn cross_rows(c: &CrossComparison) -> Vec<[String; 4]> {
    c.times
        .iter()
        .zip(c.discrepancy.iter().zip(&c.direct_norm))
        .map(|(t, (d, n))| [num(*t), num(*d), num(*n), num(if *n > 0.0 { d / n } else { *d })])
        .collect()
}

pub fn params_text(params: &[(String, f64)]) -> String {
    params.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect::<Vec<_>>().join(";")
}

pub fn ratio_row(r: &RatioReport) -> [String; 9] {
    [
        r.name.clone(),
        params_text(&r.params),
        r.count.to_string(),
        r.evaluated.to_string(),
        num(r.min_ratio),
        num(r.max_ratio),
        num(r.doubled_max_ratio),
        r.stable.to_string(),
        r.hard_pass.map_or(String::new(), |b| b.to_string()),
    ]
}

pub fn scaling_rows(r: &ScalingReport) -> Vec<[String; 8]> {
    r.entries
        .iter()
        .map(|e| {
            [
                r.m.to_string(),
                exponent(r.p),
                e.name.clone(),
                num(e.original),
                num(e.rescaled),
                num(e.relative_error),
                r.hard.to_string(),
                r.passed.to_string(),
            ]
        })
        .collect()
}

pub fn smallness_rows(t: &SmallnessTable) -> Vec<[String; 8]> {
    t.rows
        .iter()
        .map(|r| {
            [
                num(r.alpha),
                num(r.amplitude),
                num(r.initial_norm),
                num(r.solution_norm),
                num(r.solution_ratio),
                num(r.pressure_l1),
                num(r.pressure_ratio),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

fn params_json(params: &[(String, f64)]) -> Value {
    Value::Object(params.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
}

pub fn ratio_summary(r: &RatioReport) -> Value {
    json!({
        "experiment": r.name,
        "params": params_json(&r.params),
        "max_ratio": r.max_ratio,
        "min_ratio": r.min_ratio,
        "doubled_max_ratio": r.doubled_max_ratio,
        "count": r.count,
        "stable": r.stable,
        "hard_pass": r.hard_pass,
        "passed": r.passed(),
    })
}

pub fn scaling_summary(r: &ScalingReport) -> Value {
    let worst = r
        .entries
        .iter()
        .map(|e| if e.original > 0.0 { e.rescaled / e.original } else { 1.0 })
        .fold(0.0, f64::max);
    json!({
        "experiment": "scaling",
        "params": {"m": r.m, "p": r.p.as_f64()},
        "max_ratio": worst,
        "max_relative_error": r.max_relative_error,
        "stable": true,
        "hard_pass": r.hard.then_some(r.passed),
        "passed": r.passed,
    })
}

pub fn smallness_summary(t: &SmallnessTable) -> Value {
    let worst = t.rows.iter().map(|r| r.solution_ratio).fold(0.0, f64::max);
    json!({
        "experiment": "smallness",
        "params": {"T": t.t_end, "alphas": t.rows.iter().map(|r| r.alpha).collect::<Vec<_>>()},
        "max_ratio": worst,
        "ratio_spread": t.ratio_spread,
        "pressure_slope": t.pressure_slope,
        "stable": t.ratio_spread < 2.0,
        "passed": t.passed(),
    })
}
