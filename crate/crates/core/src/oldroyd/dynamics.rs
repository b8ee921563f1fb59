use alloc::vec::Vec;

use super::constraints::{constraint_residuals, ConstraintResiduals};
use super::{FluidState, PhysicalParams};
use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::norms::{Exponent, NormSeries};
use crate::ops;
use crate::solvers::{cfl_number, solve_variable_poisson_from, Ifrk4, PoissonSolution, SOLENOIDAL_TOLERANCE};
use crate::time::TimeGrid;

/// Stopping rule of the pressure solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PressureSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Physical samples of a state and of the derivatives the right sides use.
pub(crate) struct Kinematics {
    pub dim: usize,
    pub sigma: Vec<f64>,
    pub dsigma: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// `dv[i * dim + k] = ∂_k v^i`.
    pub dv: Vec<Vec<f64>>,
    pub lapv: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    /// `dh[(i * dim + j) * dim + l] = ∂_l H^{ij}`.
    pub dh: Vec<Vec<f64>>,
}

impl Kinematics {
    pub fn new(sigma: &SpectralField, v: &[SpectralField], h: &[SpectralField]) -> Self {
        let dim = sigma.grid().dim();
        fn grads(f: &SpectralField) -> impl Iterator<Item = Vec<f64>> + '_ {
            (0..f.grid().dim()).map(move |a| ops::partial(f, a).to_samples())
        }
        Self {
            dim,
            sigma: sigma.to_samples(),
            dsigma: grads(sigma).collect(),
            v: v.iter().map(|c| c.to_samples()).collect(),
            dv: v.iter().flat_map(grads).collect(),
            lapv: v.iter().map(|c| ops::laplacian(c).to_samples()).collect(),
            h: h.iter().map(|c| c.to_samples()).collect(),
            dh: h.iter().flat_map(grads).collect(),
        }
    }

    fn len(&self) -> usize {
        self.sigma.len()
    }
}

/// `G^i = −v·∇v^i + μσΔv^i + ∂_k H^{ik} + H^{jk}∂_j H^{ik}`, every product dealiased.
pub(crate) fn momentum_from(k: &Kinematics, h: &[SpectralField], mu: f64, grid: &GridSpec) -> Vec<SpectralField> {
    let d = k.dim;
    (0..d)
        .map(|i| {
            let mut acc = alloc::vec![0.0; k.len()];
            for (n, a) in acc.iter_mut().enumerate() {
                let mut x = mu * k.sigma[n] * k.lapv[i][n];
                for c in 0..d {
                    x -= k.v[c][n] * k.dv[i * d + c][n];
                }
                for j in 0..d {
                    for c in 0..d {
                        x += k.h[j * d + c][n] * k.dh[(i * d + c) * d + j][n];
                    }
                }
                *a = x;
            }
            let mut g = ops::from_physical(grid, &acc);
            for c in 0..d {
                g += &ops::partial(&h[i * d + c], c);
            }
            g
        })
        .collect()
}

/// Momentum right side `G_mom` of a state (everything but `μΔv` and the pressure).
pub fn momentum_forcing(state: &FluidState, mu: f64) -> Vec<SpectralField> {
    let k = Kinematics::new(&state.sigma, &state.velocity, &state.h);
    momentum_from(&k, &state.h, mu, state.grid())
}

/// `div((σ+1)∇P) = div G`.
pub(crate) fn solve_pressure(
    sigma: &SpectralField,
    g: &[SpectralField],
    warm: Option<&SpectralField>,
    settings: &PressureSettings,
) -> Result<PoissonSolution> {
    let a = sigma + &SpectralField::constant(sigma.grid(), 1.0);
    let f = ops::divergence(g)?.scaled(-1.0);
    solve_variable_poisson_from(&a, &f, warm, settings.tol, settings.max_iter)
}

/// `∇P` of a state.
pub fn compute_pressure(state: &FluidState, params: &PhysicalParams) -> Result<Vec<SpectralField>> {
    compute_pressure_with(state, params, &PressureSettings::default())
}

pub(crate) fn compute_pressure_with(
    state: &FluidState,
    params: &PhysicalParams,
    settings: &PressureSettings,
) -> Result<Vec<SpectralField>> {
    let g = momentum_forcing(state, params.mu);
    Ok(solve_pressure(&state.sigma, &g, None, settings)?.gradient)
}

/// `G − ∇P − σ∇P`.
pub(crate) fn velocity_rate(sigma: &[f64], g: Vec<SpectralField>, grad_p: &[SpectralField]) -> Vec<SpectralField> {
    let grid = *grad_p[0].grid();
    g.into_iter()
        .zip(grad_p)
        .map(|(mut gi, pi)| {
            let s: Vec<f64> = pi.to_samples().iter().zip(sigma).map(|(p, a)| p * a).collect();
            gi -= pi;
            gi -= &ops::from_physical(&grid, &s);
            gi
        })
        .collect()
}

/// Transport rates with coefficients from `coef` (velocity `u`, tensor `ξ`)
/// acting on the unknown `(σ, H)` described by `unknown`:
/// `σ_t = −u·∇σ`, `H^{ij}_t = −u·∇H^{ij} + ∂_k u^i ξ^{kj} + ∂_j u^i`.
pub(crate) fn transport_rates(
    coef: &Kinematics,
    u: &[SpectralField],
    unknown: &Kinematics,
    grid: &GridSpec,
) -> (SpectralField, Vec<SpectralField>) {
    let d = coef.dim;
    let n = coef.len();
    let mut acc = alloc::vec![0.0; n];
    for (m, a) in acc.iter_mut().enumerate() {
        *a = -(0..d).map(|c| coef.v[c][m] * unknown.dsigma[c][m]).sum::<f64>();
    }
    let sigma_t = ops::from_physical(grid, &acc);
    let mut h_t = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            for (m, a) in acc.iter_mut().enumerate() {
                let mut x = 0.0;
                for c in 0..d {
                    x += coef.dv[i * d + c][m] * coef.h[c * d + j][m];
                    x -= coef.v[c][m] * unknown.dh[(i * d + j) * d + c][m];
                }
                *a = x;
            }
            let mut r = ops::from_physical(grid, &acc);
            r += &ops::partial(&u[i], j);
            h_t.push(r);
        }
    }
    (sigma_t, h_t)
}

pub(crate) fn split(y: &[SpectralField], dim: usize) -> (&SpectralField, &[SpectralField], &[SpectralField]) {
    (&y[0], &y[1..1 + dim], &y[1 + dim..])
}

pub(crate) fn assemble(sigma_t: SpectralField, v_t: Vec<SpectralField>, h_t: Vec<SpectralField>) -> Vec<SpectralField> {
    let mut out = Vec::with_capacity(1 + v_t.len() + h_t.len());
    out.push(sigma_t);
    out.extend(v_t);
    out.extend(h_t);
    out
}

pub(crate) fn viscosities(dim: usize, mu: f64) -> Vec<f64> {
    let mut nu = alloc::vec![0.0; super::component_count(dim)];
    for x in &mut nu[1..1 + dim] {
        *x = mu;
    }
    nu
}

pub(crate) fn check_cfl(velocity: &[SpectralField], dt: f64) -> Result<()> {
    let number = cfl_number(velocity[0].grid(), dt, ops::max_magnitude(velocity));
    if number > 1.0 {
        return Err(Error::Cfl { number });
    }
    Ok(())
}

pub(crate) fn check_floor(state: &FluidState, params: &PhysicalParams) -> Result<()> {
    let min = state.min_inverse_density();
    if !(min >= params.sigma_floor) {
        return Err(Error::DensityFloor {
            min,
            floor: params.sigma_floor,
        });
    }
    Ok(())
}

/// Closes a step: Leray projection of `v`, density floor, pressure of the new state.
pub(crate) fn finish_step(
    comps: Vec<SpectralField>,
    params: &PhysicalParams,
    settings: &PressureSettings,
    warm: &mut Option<SpectralField>,
) -> Result<FluidState> {
    let dim = comps[0].grid().dim();
    let mut state = FluidState::from_components(comps, Vec::new());
    state.velocity = ops::leray_project(&state.velocity)?;
    check_floor(&state, params)?;
    let g = momentum_forcing(&state, params.mu);
    let sol = solve_pressure(&state.sigma, &g, warm.as_ref(), settings)?;
    *warm = Some(sol.potential);
    state.pressure_grad = sol.gradient;
    debug_assert_eq!(state.pressure_grad.len(), dim);
    Ok(state)
}

/// Direct time stepper for the nonlinear system.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: PhysicalParams,
    settings: PressureSettings,
    integrator: Ifrk4,
    potential: Option<SpectralField>,
}

impl Stepper {
    pub fn new(grid: &GridSpec, params: &PhysicalParams, dt: f64) -> Result<Self> {
        Ok(Self {
            params: *params,
            settings: PressureSettings::default(),
            integrator: Ifrk4::new(grid, dt, &viscosities(grid.dim(), params.mu))?,
            potential: None,
        })
    }

    pub fn with_pressure_settings(mut self, settings: PressureSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn dt(&self) -> f64 {
        self.integrator.dt()
    }

    /// One step from time `t`. The pressure is re-solved at every
    /// Runge-Kutta stage, warm-started from the previous solve.
    pub fn step(&mut self, t: f64, state: &FluidState) -> Result<FluidState> {
        check_cfl(&state.velocity, self.dt())?;
        let grid = *state.grid();
        let dim = grid.dim();
        let mu = self.params.mu;
        let settings = self.settings;
        let mut comps = state.components();
        let potential = &mut self.potential;
        self.integrator.step(t, &mut comps, |_, y| {
            let (sigma, v, h) = split(y, dim);
            let k = Kinematics::new(sigma, v, h);
            let g = momentum_from(&k, h, mu, &grid);
            let sol = solve_pressure(sigma, &g, potential.as_ref(), &settings)?;
            *potential = Some(sol.potential);
            let (sigma_t, h_t) = transport_rates(&k, v, &k, &grid);
            let v_t = velocity_rate(&k.sigma, g, &sol.gradient);
            Ok(assemble(sigma_t, v_t, h_t))
        })?;
        finish_step(comps, &self.params, &self.settings, &mut self.potential)
    }
}

/// One step of size `dt`.
pub fn step(state: &FluidState, params: &PhysicalParams, dt: f64) -> Result<FluidState> {
    Stepper::new(state.grid(), params, dt)?.step(0.0, state)
}

/// Per-block `L²` norms of each unknown at the saved times.
#[derive(Clone, Debug)]
pub struct RunSeries {
    pub sigma: NormSeries,
    pub velocity: NormSeries,
    pub h: NormSeries,
    pub pressure_grad: NormSeries,
}

impl RunSeries {
    pub(crate) fn new(ladder: &DyadicLadder) -> Self {
        let s = NormSeries::new(Exponent::TWO, ladder.q_min());
        Self {
            sigma: s.clone(),
            velocity: s.clone(),
            h: s.clone(),
            pressure_grad: s,
        }
    }

    pub(crate) fn record(&mut self, ladder: &DyadicLadder, t: f64, state: &FluidState) -> Result<()> {
        self.sigma.record(ladder, t, core::slice::from_ref(&state.sigma))?;
        self.velocity.record(ladder, t, &state.velocity)?;
        self.h.record(ladder, t, &state.h)?;
        self.pressure_grad.record(ladder, t, &state.pressure_grad)
    }
}

/// A saved instant handed to run observers.
#[derive(Clone, Copy, Debug)]
pub struct RunRecord<'a> {
    pub step: usize,
    pub time: f64,
    pub state: &'a FluidState,
    pub residuals: &'a ConstraintResiduals,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub times: Vec<f64>,
    pub snapshots: Vec<FluidState>,
    pub residuals: Vec<ConstraintResiduals>,
    pub series: RunSeries,
}

impl RunOutput {
    pub fn final_state(&self) -> &FluidState {
        self.snapshots.last().expect("a run holds its initial state")
    }
}

pub fn run(state0: &FluidState, params: &PhysicalParams, tg: &TimeGrid) -> Result<RunOutput> {
    run_with_observer(state0, params, tg, &PressureSettings::default(), &mut |_| {})
}

/// Runs the direct stepper over `tg`. `observer` sees every saved instant as
/// soon as it exists, so work done before an abort is not lost.
pub fn run_with_observer(
    state0: &FluidState,
    params: &PhysicalParams,
    tg: &TimeGrid,
    settings: &PressureSettings,
    observer: &mut dyn FnMut(&RunRecord<'_>),
) -> Result<RunOutput> {
    let grid = *state0.grid();
    let residual = ops::solenoidal_residual(&state0.velocity)?;
    if residual > SOLENOIDAL_TOLERANCE {
        return Err(Error::NotSolenoidal { residual });
    }
    check_floor(state0, params)?;
    let ladder = DyadicLadder::new(&grid);
    let mut stepper = Stepper::new(&grid, params, tg.dt())?.with_pressure_settings(*settings);
    let mut state = state0.clone();
    let g = momentum_forcing(&state, params.mu);
    let sol = solve_pressure(&state.sigma, &g, None, settings)?;
    state.pressure_grad = sol.gradient;
    stepper.potential = Some(sol.potential);

    let mut out = RunOutput {
        times: Vec::new(),
        snapshots: Vec::new(),
        residuals: Vec::new(),
        series: RunSeries::new(&ladder),
    };
    let mut save = |out: &mut RunOutput, step: usize, t: f64, state: &FluidState| -> Result<()> {
        let res = constraint_residuals(state);
        observer(&RunRecord {
            step,
            time: t,
            state,
            residuals: &res,
        });
        out.series.record(&ladder, t, state)?;
        out.times.push(t);
        out.snapshots.push(state.clone());
        out.residuals.push(res);
        Ok(())
    };
    save(&mut out, 0, 0.0, &state)?;
    for n in 0..tg.steps() {
        state = stepper.step(tg.time(n), &state)?;
        if tg.is_snapshot(n + 1) {
            save(&mut out, n + 1, tg.time(n + 1), &state)?;
        }
    }
    Ok(out)
}
