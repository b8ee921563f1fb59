//! Run configuration files (JSON).

use std::path::PathBuf;

use oldroyd_core::oldroyd::{InitialFamily, InitialSpec, PhysicalParams};
use oldroyd_core::{Exponent, GridSpec, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// A Lebesgue or summation exponent: a number `≥ 1` or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExponent", into = "RawExponent")]
pub struct ExponentValue(pub Exponent);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Number(f64),
    Text(String),
}

impl TryFrom<RawExponent> for ExponentValue {
    type Error = String;

    fn try_from(raw: RawExponent) -> Result<Self, String> {
        match raw {
            RawExponent::Number(p) => Exponent::finite(p).map(ExponentValue).map_err(|e| e.to_string()),
            RawExponent::Text(t) => parse_exponent(&t).map(ExponentValue),
        }
    }
}

impl From<ExponentValue> for RawExponent {
    fn from(e: ExponentValue) -> Self {
        match e.0 {
            Exponent::Infinity => RawExponent::Text("inf".into()),
            Exponent::Finite(p) => RawExponent::Number(p),
        }
    }
}

pub fn parse_exponent(text: &str) -> Result<Exponent, String> {
    match text.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(Exponent::Infinity),
        t => {
            let p: f64 = t.parse().map_err(|_| format!("bad exponent {t:?}"))?;
            Exponent::finite(p).map_err(|e| e.to_string())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_floor")]
    pub sigma_floor: f64,
}

fn default_mu() -> f64 {
    1.0
}

fn default_floor() -> f64 {
    PhysicalParams::DEFAULT_SIGMA_FLOOR
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mu: default_mu(),
            sigma_floor: default_floor(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub save_stride: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Start from a saved snapshot instead of a random family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

fn default_family() -> String {
    "exact_gradient".into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Direct,
    Phi,
    Coupled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Besov,
    /// The `L²` hybrid norm with weight `weight` (default: the viscosity).
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub name: String,
    pub s: f64,
    #[serde(default = "two")]
    pub p: ExponentValue,
    #[serde(default = "one")]
    pub r: ExponentValue,
    #[serde(default)]
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

fn two() -> ExponentValue {
    ExponentValue(Exponent::TWO)
}

fn one() -> ExponentValue {
    ExponentValue(Exponent::ONE)
}

impl NormConfig {
    pub fn besov(name: &str, s: f64, p: Exponent, r: Exponent) -> Self {
        Self {
            name: name.into(),
            s,
            p: ExponentValue(p),
            r: ExponentValue(r),
            kind: NormKind::Besov,
            weight: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    #[serde(default = "default_outer")]
    pub max_outer: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_outer() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            max_outer: default_outer(),
            tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub norms: Vec<NormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub phi: PhiConfig,
}

/// The library objects a configuration describes.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub time: TimeGrid,
    pub initial: InitialSpec,
    pub norms: Vec<NormConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Checks every field and builds the library objects.
    pub fn resolve(&self) -> Result<Resolved, LabError> {
        let bad = |e: oldroyd_core::Error| LabError::Config(e.to_string());
        let grid = GridSpec::new(self.grid.dim, self.grid.m).map_err(bad)?;
        let params = PhysicalParams::new(self.params.mu, self.params.sigma_floor).map_err(bad)?;
        if self.time.save_stride == 0 {
            return Err(LabError::Config("save_stride must be at least 1".into()));
        }
        let time = TimeGrid::new(self.time.t_end, self.time.dt, self.time.save_stride).map_err(bad)?;
        let family: InitialFamily = self.initial.family.parse().map_err(bad)?;
        if !(self.initial.amplitude >= 0.0 && self.initial.amplitude.is_finite()) {
            return Err(LabError::Config(format!("amplitude {} must be nonnegative", self.initial.amplitude)));
        }
        if !(self.phi.tol > 0.0) || self.phi.max_outer == 0 {
            return Err(LabError::Config("phi needs tol > 0 and max_outer ≥ 1".into()));
        }
        let norms = if self.norms.is_empty() {
            default_norms(&grid)
        } else {
            for n in &self.norms {
                if n.kind == NormKind::Hybrid && n.p.0 != Exponent::TWO {
                    return Err(LabError::Config(format!("hybrid norm {} is defined for p = 2 only", n.name)));
                }
                if n.weight.is_some_and(|w| !(w > 0.0)) {
                    return Err(LabError::Config(format!("hybrid weight of {} must be positive", n.name)));
                }
            }
            self.norms.clone()
        };
        Ok(Resolved {
            grid,
            params,
            time,
            initial: InitialSpec::new(family, self.initial.amplitude, self.initial.seed),
            norms,
        })
    }
}

/// `Ḃ^{N/2}_{2,1}` and `Ḃ^{N/2−1}_{2,1}`, the critical pair.
pub fn default_norms(grid: &GridSpec) -> Vec<NormConfig> {
    let s = grid.dim() as f64 / 2.0;
    vec![
        NormConfig::besov("critical", s, Exponent::TWO, Exponent::ONE),
        NormConfig::besov("critical_minus_one", s - 1.0, Exponent::TWO, Exponent::ONE),
    ]
}
