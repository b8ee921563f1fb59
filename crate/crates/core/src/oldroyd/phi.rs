//! The linearization map `Φ(a, u, ξ) = (σ, v, H)`:
//!
//! ```text
//! σ_t + u·∇σ = 0
//! v_t − μΔv = G − (a + 1)∇P,   div((a + 1)∇P) = div G
//! H_t + u·∇H = ∇u (ξ + I)
//! G = −u·∇u + μaΔu + div ξ + ξᵀ·∇ξ
//! ```
//!
//! Trajectories are represented by the state at every Runge-Kutta stage of
//! every step, so that a fixed point of the discrete map is exactly a run of
//! the direct stepper.

use alloc::vec::Vec;

use super::dynamics::{
    assemble, check_floor, compute_pressure_with, momentum_from, solve_pressure, split, transport_rates, velocity_rate,
    viscosities, Kinematics, PressureSettings,
};
use super::{FluidState, PhysicalParams};
use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::{chemin_lerner_norm, BesovSpec, Exponent, NormSeries};
use crate::ops;
use crate::solvers::Ifrk4;
use crate::time::TimeGrid;

/// Thresholds of the set `Φ` is shown to map into itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibleSetSpec {
    /// Bound on `‖σ‖_{L̃^∞_T(Ḃ^s)}`.
    pub r: f64,
    /// Bound on `‖v‖_{L̃^1_T(Ḃ^{s+1})} + ‖v‖_{L̃^2_T(Ḃ^s)}`.
    pub eta: f64,
    /// Bound on `‖v‖_{L̃^∞_T(Ḃ^{s−1})} + ‖H‖_{L̃^∞_T(Ḃ^s)}`.
    pub c0_e0: f64,
    pub t: f64,
}

impl AdmissibleSetSpec {
    pub fn new(r: f64, eta: f64, c0_e0: f64, t: f64) -> Result<Self> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(r) || !unit(eta) {
            return Err(Error::InvalidParameter(alloc::format!("R = {r} and η = {eta} must lie in (0, 1)")));
        }
        if !(c0_e0 >= 0.0) || !(t > 0.0) {
            return Err(Error::InvalidParameter("C₀E₀ must be nonnegative and T positive".into()));
        }
        Ok(Self { r, eta, c0_e0, t })
    }

    /// `R = η = 1/2`, `C₀E₀ = 6 E₀` with `E₀ = ‖v₀‖_{Ḃ^{s−1}} + ‖H₀‖_{Ḃ^s}`.
    pub fn default_for(state0: &FluidState, t: f64) -> Self {
        let ladder = DyadicLadder::new(state0.grid());
        let s = state0.dim() as f64 / 2.0;
        let e0 = ladder.besov_value(&state0.velocity, &BesovSpec::l2(s - 1.0)) + ladder.besov_value(&state0.h, &BesovSpec::l2(s));
        Self {
            r: 0.5,
            eta: 0.5,
            c0_e0: 6.0 * e0,
            t,
        }
    }
}

/// Monitored norms of one iterate and whether each is inside its bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibleFlags {
    pub sigma_norm: f64,
    pub velocity_norm: f64,
    pub energy_norm: f64,
    pub sigma_ok: bool,
    pub velocity_ok: bool,
    pub energy_ok: bool,
}

impl AdmissibleFlags {
    pub fn all(&self) -> bool {
        self.sigma_ok && self.velocity_ok && self.energy_ok
    }
}

#[derive(Clone, Debug)]
pub struct PhiOutput {
    pub times: Vec<f64>,
    /// Saved states of the last iterate, with their pressure gradients.
    pub snapshots: Vec<FluidState>,
    /// Distance between successive iterates, one per outer iteration.
    pub distances: Vec<f64>,
    pub flags: Vec<AdmissibleFlags>,
    /// Set when `‖σ₀‖_{Ḃ^{N/2}}` exceeds 0.1.
    pub large_density_warning: bool,
}

impl PhiOutput {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }

    pub fn final_state(&self) -> &FluidState {
        self.snapshots.last().expect("a trajectory holds its initial state")
    }
}

/// Frozen coefficients of one stage.
struct Frozen {
    kin: Kinematics,
    velocity: Vec<SpectralField>,
    rate: Vec<SpectralField>,
}

fn sup_distance(ladder: &DyadicLadder, a: &[FluidState], b: &[FluidState], s: f64) -> f64 {
    let blocks = ladder.block_count();
    let mut sup = [alloc::vec![0.0; blocks], alloc::vec![0.0; blocks], alloc::vec![0.0; blocks]];
    for (x, y) in a.iter().zip(b) {
        let ds = [&x.sigma - &y.sigma];
        let dv: Vec<SpectralField> = x.velocity.iter().zip(&y.velocity).map(|(p, q)| p - q).collect();
        let dh: Vec<SpectralField> = x.h.iter().zip(&y.h).map(|(p, q)| p - q).collect();
        for (g, fields) in [&ds[..], &dv[..], &dh[..]].into_iter().enumerate() {
            for (j, q) in ladder.q_range().enumerate() {
                sup[g][j] = f64::max(sup[g][j], ladder.block_lp(fields, q, Exponent::TWO));
            }
        }
    }
    let weighted = |g: usize, s: f64| -> f64 {
        ladder
            .q_range()
            .enumerate()
            .map(|(j, q)| libm::exp2(q as f64 * s) * sup[g][j])
            .sum()
    };
    weighted(0, s) + weighted(1, s - 1.0) + weighted(2, s)
}

fn monitor(
    ladder: &DyadicLadder,
    times: &[f64],
    states: &[FluidState],
    spec: &AdmissibleSetSpec,
    s: f64,
) -> Result<AdmissibleFlags> {
    let mut sigma = NormSeries::new(Exponent::TWO, ladder.q_min());
    let mut v = sigma.clone();
    let mut h = sigma.clone();
    for (t, st) in times.iter().zip(states) {
        sigma.record(ladder, *t, core::slice::from_ref(&st.sigma))?;
        v.record(ladder, *t, &st.velocity)?;
        h.record(ladder, *t, &st.h)?;
    }
    let t_end = *times.last().expect("nonempty trajectory");
    let t = spec.t.min(t_end);
    let cl = |series: &NormSeries, k: Exponent, s: f64| chemin_lerner_norm(series, k, &BesovSpec::l2(s), t);
    let sigma_norm = cl(&sigma, Exponent::Infinity, s)?;
    let velocity_norm = cl(&v, Exponent::ONE, s + 1.0)? + cl(&v, Exponent::TWO, s)?;
    let energy_norm = cl(&v, Exponent::Infinity, s - 1.0)? + cl(&h, Exponent::Infinity, s)?;
    Ok(AdmissibleFlags {
        sigma_norm,
        velocity_norm,
        energy_norm,
        sigma_ok: sigma_norm <= spec.r,
        velocity_ok: velocity_norm <= spec.eta,
        energy_ok: energy_norm <= spec.c0_e0,
    })
}

/// Iterates `Φ` from the constant-in-time trajectory `state0` until the
/// sampled-sup Chemin-Lerner distance between iterates drops below `tol`.
pub fn phi_iteration(
    state0: &FluidState,
    params: &PhysicalParams,
    tg: &TimeGrid,
    max_outer: usize,
    tol: f64,
) -> Result<PhiOutput> {
    let spec = AdmissibleSetSpec::default_for(state0, tg.t_end());
    phi_iteration_with(state0, params, tg, max_outer, tol, &spec, &PressureSettings::default())
}

pub fn phi_iteration_with(
    state0: &FluidState,
    params: &PhysicalParams,
    tg: &TimeGrid,
    max_outer: usize,
    tol: f64,
    admissible: &AdmissibleSetSpec,
    settings: &PressureSettings,
) -> Result<PhiOutput> {
    let grid = *state0.grid();
    let dim = grid.dim();
    let s = dim as f64 / 2.0;
    let ladder = DyadicLadder::new(&grid);
    check_floor(state0, params)?;
    let large_density_warning = ladder.besov_value(core::slice::from_ref(&state0.sigma), &BesovSpec::l2(s)) > 0.1;
    let integrator = Ifrk4::new(&grid, tg.dt(), &viscosities(dim, params.mu))?;

    let initial = state0.components();
    let mut stages: Vec<Vec<Vec<SpectralField>>> = alloc::vec![alloc::vec![initial.clone(); 4]; tg.steps()];
    let times: Vec<f64> = tg.snapshot_steps().map(|n| tg.time(n)).collect();
    let mut previous: Vec<FluidState> = alloc::vec![state0.clone(); times.len()];
    let mut distances = Vec::new();
    let mut flags = Vec::new();
    let mut potential: Option<SpectralField> = None;

    for _ in 0..max_outer.max(1) {
        let mut next_stages = Vec::with_capacity(tg.steps());
        let mut snapshots = Vec::with_capacity(times.len());
        snapshots.push(state0.clone());
        let mut comps = initial.clone();
        for n in 0..tg.steps() {
            let frozen: Vec<Frozen> = stages[n]
                .iter()
                .map(|y| {
                    let (a, u, xi) = split(y, dim);
                    let kin = Kinematics::new(a, u, xi);
                    let g = momentum_from(&kin, xi, params.mu, &grid);
                    let sol = solve_pressure(a, &g, potential.as_ref(), settings)?;
                    let rate = velocity_rate(&kin.sigma, g, &sol.gradient);
                    potential = Some(sol.potential);
                    Ok(Frozen {
                        kin,
                        velocity: u.to_vec(),
                        rate,
                    })
                })
                .collect::<Result<_>>()?;
            let mut seen: Vec<Vec<SpectralField>> = Vec::with_capacity(4);
            integrator.step(tg.time(n), &mut comps, |stage, y| {
                seen.push(y.to_vec());
                let (sigma, v, h) = split(y, dim);
                let unknown = Kinematics::new(sigma, v, h);
                let f = &frozen[stage.index];
                let (sigma_t, h_t) = transport_rates(&f.kin, &f.velocity, &unknown, &grid);
                Ok(assemble(sigma_t, f.rate.clone(), h_t))
            })?;
            next_stages.push(seen);
            let projected = ops::leray_project(&comps[1..1 + dim])?;
            for (c, p) in comps[1..1 + dim].iter_mut().zip(projected) {
                *c = p;
            }
            if tg.is_snapshot(n + 1) {
                let state = FluidState::from_components(comps.clone(), alloc::vec![SpectralField::zeros(&grid); dim]);
                check_floor(&state, params)?;
                snapshots.push(state);
            }
        }
        let distance = sup_distance(&ladder, &snapshots, &previous, s);
        distances.push(distance);
        flags.push(monitor(&ladder, &times, &snapshots, admissible, s)?);
        stages = next_stages;
        previous = snapshots;
        if distance < tol {
            for st in previous.iter_mut() {
                st.pressure_grad = compute_pressure_with(st, params, settings)?;
            }
            return Ok(PhiOutput {
                times,
                snapshots: previous,
                distances,
                flags,
                large_density_warning,
            });
        }
    }
    Err(Error::NonContraction { distances })
}
