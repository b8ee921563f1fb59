use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::norms::{time_norm, trapezoid, BesovSpec, Exponent, HybridSpec};
use crate::oldroyd::{make_initial_data, run, FluidState, InitialFamily, InitialSpec, PhysicalParams};
use crate::time::TimeGrid;

/// Discretization and data of a smallness run. Data come from the
/// constant-density family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallnessSettings {
    pub dt: f64,
    pub seed: u64,
    /// Relative accuracy of the amplitude bisection.
    pub target_accuracy: f64,
}

impl Default for SmallnessSettings {
    fn default() -> Self {
        Self {
            dt: 0.05,
            seed: 0,
            target_accuracy: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallnessRow {
    pub alpha: f64,
    pub amplitude: f64,
    /// Achieved `‖σ₀‖_{B̃^{N/2,∞}_μ} + ‖v₀‖_{B^{N/2−1}} + ‖H₀‖_{B̃^{N/2,∞}_μ}`.
    pub initial_norm: f64,
    /// `sup_{t ≤ T}` of the running solution norm (nondecreasing in `t`).
    pub solution_norm: f64,
    pub solution_ratio: f64,
    /// `‖∇P‖_{L¹_T(B^{N/2−1})}`.
    pub pressure_l1: f64,
    pub pressure_ratio: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallnessTable {
    pub t_end: f64,
    pub rows: Vec<SmallnessRow>,
    /// Largest over smallest `solution_ratio` among completed positive `α`.
    pub ratio_spread: f64,
    /// Least-squares slope of `log ‖∇P‖_{L¹_T}` against `log α`.
    pub pressure_slope: Option<f64>,
}

impl SmallnessTable {
    pub fn from_rows(t_end: f64, rows: Vec<SmallnessRow>) -> Self {
        let done: Vec<&SmallnessRow> = rows.iter().filter(|r| r.error.is_none() && r.alpha > 0.0).collect();
        let (lo, hi) = done
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.solution_ratio), hi.max(r.solution_ratio)));
        let ratio_spread = if done.is_empty() { 0.0 } else { hi / lo };
        let points: Vec<(f64, f64)> = done
            .iter()
            .filter(|r| r.pressure_l1 > 0.0)
            .map(|r| (libm::log(r.alpha), libm::log(r.pressure_l1)))
            .collect();
        Self {
            t_end,
            rows,
            ratio_spread,
            pressure_slope: slope(&points),
        }
    }

    /// Linear bound within ×2 and quadratic pressure with slope `2 ± 0.3`.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
            && self.ratio_spread < 2.0
            && self.pressure_slope.is_some_and(|s| (s - 2.0).abs() <= 0.3)
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `‖σ‖_{B̃^{N/2,∞}_μ} + ‖v‖_{B^{N/2−1}} + ‖H‖_{B̃^{N/2,∞}_μ}`.
pub fn hybrid_data_norm(state: &FluidState, mu: f64) -> Result<f64> {
    let ladder = DyadicLadder::new(state.grid());
    let s = state.dim() as f64 / 2.0;
    let hyb = HybridSpec::new(s, Exponent::Infinity, mu)?;
    Ok(ladder.hybrid(core::slice::from_ref(&state.sigma), &hyb)
        + ladder.besov_value(&state.velocity, &BesovSpec::l2(s - 1.0))
        + ladder.hybrid(&state.h, &hyb))
}

fn data(grid: &GridSpec, amplitude: f64, seed: u64) -> Result<FluidState> {
    Ok(make_initial_data(&InitialSpec::new(InitialFamily::ExactGradient, amplitude, seed), grid)?.0)
}

/// Amplitude whose data norm is `alpha` within `accuracy`, by bisection.
fn calibrate(grid: &GridSpec, alpha: f64, mu: f64, seed: u64, accuracy: f64) -> Result<(f64, FluidState, f64)> {
    let norm_at = |a: f64| -> Result<(FluidState, f64)> {
        let st = data(grid, a, seed)?;
        let n = hybrid_data_norm(&st, mu)?;
        Ok((st, n))
    };
    if alpha == 0.0 {
        return Ok((0.0, FluidState::zeros(grid), 0.0));
    }
    let mut hi = 1.0;
    let mut tries = 0;
    while norm_at(hi)?.1 < alpha {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::InvalidParameter(format!("no amplitude reaches norm {alpha}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (st, n) = norm_at(mid)?;
        if (n - alpha).abs() <= accuracy * alpha {
            return Ok((mid, st, n));
        }
        if n < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::InvalidParameter(format!("amplitude bisection for α = {alpha} did not settle")))
}

/// One line of the table. Run failures are recorded in `error`.
pub fn smallness_row(alpha: f64, t_end: f64, grid: &GridSpec, params: &PhysicalParams, settings: &SmallnessSettings) -> Result<SmallnessRow> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("α = {alpha} must be nonnegative")));
    }
    let mu = params.mu;
    let (amplitude, state0, initial_norm) = calibrate(grid, alpha, mu, settings.seed, settings.target_accuracy)?;
    let mut row = SmallnessRow {
        alpha,
        amplitude,
        initial_norm,
        solution_norm: 0.0,
        solution_ratio: 0.0,
        pressure_l1: 0.0,
        pressure_ratio: 0.0,
        error: None,
    };
    let tg = TimeGrid::fitted(t_end, settings.dt, 1)?;
    let out = match run(&state0, params, &tg) {
        Ok(out) => out,
        Err(e) => {
            row.error = Some(e.to_string());
            return Ok(row);
        }
    };
    let ladder = DyadicLadder::new(grid);
    let s = grid.dim() as f64 / 2.0;
    let hyb_inf = HybridSpec::new(s, Exponent::Infinity, mu)?;
    let hyb_one = HybridSpec::new(s, Exponent::ONE, mu)?;
    let mut stress_sup = Vec::new();
    let mut velocity_sup = Vec::new();
    let mut stress_int = Vec::new();
    let mut velocity_int = Vec::new();
    let mut pressure = Vec::new();
    for st in &out.snapshots {
        let sh = [core::slice::from_ref(&st.sigma), &st.h[..]];
        stress_sup.push(sh.iter().map(|f| ladder.hybrid(f, &hyb_inf)).sum());
        stress_int.push(sh.iter().map(|f| ladder.hybrid(f, &hyb_one)).sum());
        velocity_sup.push(ladder.besov_value(&st.velocity, &BesovSpec::l2(s - 1.0)));
        velocity_int.push(ladder.besov_value(&st.velocity, &BesovSpec::l2(s + 1.0)));
        pressure.push(ladder.besov_value(&st.pressure_grad, &BesovSpec::l2(s - 1.0)));
    }
    let t = &out.times;
    let sup = |v: &[f64]| time_norm(t, v, Exponent::Infinity, t_end);
    row.solution_norm =
        sup(&stress_sup) + sup(&velocity_sup) + mu * (trapezoid(t, &stress_int, t_end) + trapezoid(t, &velocity_int, t_end));
    row.pressure_l1 = trapezoid(t, &pressure, t_end);
    if alpha > 0.0 {
        row.solution_ratio = row.solution_norm / alpha;
        row.pressure_ratio = row.pressure_l1 / (alpha * alpha);
    }
    Ok(row)
}

pub fn smallness_experiment(
    alphas: &[f64],
    t_end: f64,
    grid: &GridSpec,
    params: &PhysicalParams,
    settings: &SmallnessSettings,
) -> Result<SmallnessTable> {
    let rows = alphas
        .iter()
        .map(|a| smallness_row(*a, t_end, grid, params, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(SmallnessTable::from_rows(t_end, rows))
}
