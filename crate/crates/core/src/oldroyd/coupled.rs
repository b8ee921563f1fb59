//! Hyperbolic-parabolic reformulation in `(σ, d, H)` with
//! `d^{ij} = −Λ^{-1}∂_j v^i` and `v^i = Λ^{-1}∂_j d^{ij}`:
//!
//! ```text
//! σ_t + v·∇σ = 0
//! d_t + v·∇d − μΔd − ΛH = G
//! H_t + v·∇H + Λd = F,        F^{ij} = ∂_k v^i H^{kj}
//! ```
//!
//! The derivation uses the identity `∂_k H^{ij} − ∂_j H^{ik} = H^{lj}∂_l H^{ik} − H^{lk}∂_l H^{ij}`,
//! so the two formulations agree only as far as the data satisfy it.

use alloc::vec::Vec;

use super::dynamics::{momentum_from, solve_pressure, Kinematics, PressureSettings};
use super::{FluidState, PhysicalParams};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops;
use crate::solvers::Ifrk4;
use crate::time::TimeGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledFluidState {
    pub sigma: SpectralField,
    /// Row-major `d^{ij}`.
    pub d: Vec<SpectralField>,
    pub h: Vec<SpectralField>,
}

pub fn transform_to_coupled(state: &FluidState) -> Result<CoupledFluidState> {
    for v in &state.velocity {
        let mean = v.mean();
        if mean != 0.0 {
            return Err(Error::NonzeroMean { mean });
        }
    }
    let dim = state.dim();
    let d = (0..dim * dim)
        .map(|n| {
            let (i, j) = (n / dim, n % dim);
            ops::lambda_power(&ops::partial(&state.velocity[i], j), -1.0).scaled(-1.0)
        })
        .collect();
    Ok(CoupledFluidState {
        sigma: state.sigma.clone(),
        d,
        h: state.h.clone(),
    })
}

fn velocity_of(d: &[SpectralField], dim: usize) -> Vec<SpectralField> {
    (0..dim)
        .map(|i| {
            let mut acc = ops::partial(&d[i * dim], 0);
            for j in 1..dim {
                acc += &ops::partial(&d[i * dim + j], j);
            }
            ops::lambda_power(&acc, -1.0)
        })
        .collect()
}

/// `v^i = Λ^{-1}∂_j d^{ij}`; the pressure gradient is left at zero.
pub fn transform_from_coupled(state: &CoupledFluidState) -> Result<FluidState> {
    let dim = state.sigma.grid().dim();
    FluidState::new(state.sigma.clone(), velocity_of(&state.d, dim), state.h.clone())
}

/// `(G, F)` of the reformulated system at a state whose `∇P` is current:
///
/// ```text
/// G^{ij} = v·∇d^{ij} + Λ^{-1}∂_j[v·∇v^i + (σ+1)∂_i P − μσΔv^i − H^{lk}∂_l H^{ik}]
///        + Λ^{-1}∂_k(H^{lj}∂_l H^{ik} − H^{lk}∂_l H^{ij})
/// ```
pub fn coupled_forcing(state: &FluidState, d: &[SpectralField], mu: f64) -> (Vec<SpectralField>, Vec<SpectralField>) {
    let grid = *state.grid();
    let dim = grid.dim();
    let k = Kinematics::new(&state.sigma, &state.velocity, &state.h);
    let n = grid.len();
    let dp: Vec<Vec<f64>> = state.pressure_grad.iter().map(|c| c.to_samples()).collect();
    let lam_inv = |f: &SpectralField| ops::lambda_power(f, -1.0);

    let bracket: Vec<SpectralField> = (0..dim)
        .map(|i| {
            let mut acc = alloc::vec![0.0; n];
            for (m, a) in acc.iter_mut().enumerate() {
                let mut x = k.sigma[m] * dp[i][m] - mu * k.sigma[m] * k.lapv[i][m];
                for c in 0..dim {
                    x += k.v[c][m] * k.dv[i * dim + c][m];
                }
                for l in 0..dim {
                    for c in 0..dim {
                        x -= k.h[l * dim + c][m] * k.dh[(i * dim + c) * dim + l][m];
                    }
                }
                *a = x;
            }
            &ops::from_physical(&grid, &acc) + &state.pressure_grad[i]
        })
        .collect();

    let v_samples = &k.v;
    let mut g = Vec::with_capacity(dim * dim);
    let mut f = Vec::with_capacity(dim * dim);
    let mut acc = alloc::vec![0.0; n];
    for i in 0..dim {
        for j in 0..dim {
            let mut gij = ops::advect_samples(v_samples, &d[i * dim + j]);
            gij += &lam_inv(&ops::partial(&bracket[i], j));
            for c in 0..dim {
                for (m, a) in acc.iter_mut().enumerate() {
                    let mut x = 0.0;
                    for l in 0..dim {
                        x += k.h[l * dim + j][m] * k.dh[(i * dim + c) * dim + l][m]
                            - k.h[l * dim + c][m] * k.dh[(i * dim + j) * dim + l][m];
                    }
                    *a = x;
                }
                gij += &lam_inv(&ops::partial(&ops::from_physical(&grid, &acc), c));
            }
            g.push(gij);

            for (m, a) in acc.iter_mut().enumerate() {
                *a = (0..dim).map(|c| k.dv[i * dim + c][m] * k.h[c * dim + j][m]).sum();
            }
            f.push(ops::from_physical(&grid, &acc));
        }
    }
    (g, f)
}

#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub times: Vec<f64>,
    pub coupled: Vec<CoupledFluidState>,
    /// The same states mapped back to `(σ, v, H)`.
    pub states: Vec<FluidState>,
}

fn flatten(c: &CoupledFluidState) -> Vec<SpectralField> {
    let mut out = Vec::with_capacity(1 + c.d.len() + c.h.len());
    out.push(c.sigma.clone());
    out.extend(c.d.iter().cloned());
    out.extend(c.h.iter().cloned());
    out
}

fn unflatten(mut y: Vec<SpectralField>, dim: usize) -> CoupledFluidState {
    let h = y.split_off(1 + dim * dim);
    let d = y.split_off(1);
    CoupledFluidState {
        sigma: y.pop().expect("σ component"),
        d,
        h,
    }
}

/// Runs the reformulated system; `v` is recovered from `d` and
/// Leray-projected at every stage.
pub fn run_coupled(state0: &FluidState, params: &PhysicalParams, tg: &TimeGrid) -> Result<CoupledRun> {
    let grid = *state0.grid();
    let dim = grid.dim();
    let settings = PressureSettings::default();
    let mut nu = alloc::vec![0.0; 1 + 2 * dim * dim];
    for x in &mut nu[1..1 + dim * dim] {
        *x = params.mu;
    }
    let integrator = Ifrk4::new(&grid, tg.dt(), &nu)?;
    let c0 = transform_to_coupled(state0)?;
    let mut y = flatten(&c0);
    let mut potential: Option<SpectralField> = None;
    let mut out = CoupledRun {
        times: Vec::new(),
        coupled: Vec::new(),
        states: Vec::new(),
    };
    let save = |out: &mut CoupledRun, t: f64, y: &[SpectralField]| -> Result<()> {
        let c = unflatten(y.to_vec(), dim);
        let mut s = transform_from_coupled(&c)?;
        s.velocity = ops::leray_project(&s.velocity)?;
        out.times.push(t);
        out.coupled.push(c);
        out.states.push(s);
        Ok(())
    };
    save(&mut out, 0.0, &y)?;
    for n in 0..tg.steps() {
        super::dynamics::check_cfl(&out.states.last().expect("saved").velocity, tg.dt())?;
        integrator.step(tg.time(n), &mut y, |_, y| {
            let sigma = &y[0];
            let d = &y[1..1 + dim * dim];
            let h = &y[1 + dim * dim..];
            let v = ops::leray_project(&velocity_of(d, dim))?;
            let mut state = FluidState::new(sigma.clone(), v, h.to_vec())?;
            let kin = Kinematics::new(&state.sigma, &state.velocity, &state.h);
            let g_mom = momentum_from(&kin, &state.h, params.mu, &grid);
            let sol = solve_pressure(&state.sigma, &g_mom, potential.as_ref(), &settings)?;
            potential = Some(sol.potential);
            state.pressure_grad = sol.gradient;
            let (g, f) = coupled_forcing(&state, d, params.mu);

            let mut rate = Vec::with_capacity(y.len());
            let mut s_t = ops::advect_samples(&kin.v, sigma);
            s_t.scale_in_place(-1.0);
            rate.push(s_t);
            for (dij, (gij, hij)) in d.iter().zip(g.into_iter().zip(h)) {
                let mut r = gij;
                r -= &ops::advect_samples(&kin.v, dij);
                r += &ops::lambda_power(hij, 1.0);
                rate.push(r);
            }
            for (hij, (fij, dij)) in h.iter().zip(f.into_iter().zip(d)) {
                let mut r = fij;
                r -= &ops::advect_samples(&kin.v, hij);
                r -= &ops::lambda_power(dij, 1.0);
                rate.push(r);
            }
            Ok(rate)
        })?;
        if tg.is_snapshot(n + 1) {
            save(&mut out, tg.time(n + 1), &y)?;
        } else if n + 1 < tg.steps() {
            // keep the CFL guard current between saves
            let c = unflatten(y.clone(), dim);
            let v = velocity_of(&c.d, dim);
            super::dynamics::check_cfl(&v, tg.dt())?;
        }
    }
    Ok(out)
}

/// `L²` distance between the coupled run (mapped back) and the direct run at
/// every saved time.
#[derive(Clone, Debug)]
pub struct CrossComparison {
    pub times: Vec<f64>,
    pub discrepancy: Vec<f64>,
    pub direct_norm: Vec<f64>,
}

impl CrossComparison {
    pub fn max_relative(&self) -> f64 {
        self.discrepancy
            .iter()
            .zip(&self.direct_norm)
            .map(|(d, n)| if *n > 0.0 { d / n } else { *d })
            .fold(0.0, f64::max)
    }
}

pub fn cross_compare(state0: &FluidState, params: &PhysicalParams, tg: &TimeGrid) -> Result<CrossComparison> {
    let direct = super::dynamics::run(state0, params, tg)?;
    let coupled = run_coupled(state0, params, tg)?;
    Ok(CrossComparison {
        times: direct.times.clone(),
        discrepancy: direct
            .snapshots
            .iter()
            .zip(&coupled.states)
            .map(|(a, b)| a.l2_distance(b))
            .collect(),
        direct_norm: direct.snapshots.iter().map(|s| s.l2_norm()).collect(),
    })
}
