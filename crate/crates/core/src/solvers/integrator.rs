//! Fourth-order Runge-Kutta in the integrating-factor variable (Lawson).
//!
//! Each component `c` of the state evolves as `y_t = -ν_c |k|² y + N(t, y)`;
//! the diagonal part is applied exactly through `e^{-ν_c |k|² h}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Where in a step the nonlinear part is being evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    /// `0..4`.
    pub index: usize,
    pub time: f64,
}

#[derive(Clone, Debug)]
struct Factors {
    half: Vec<f64>,
    full: Vec<f64>,
}

/// Stepper for a state with per-component viscosities.
#[derive(Clone, Debug)]
pub struct Ifrk4 {
    grid: GridSpec,
    dt: f64,
    viscosity: Vec<f64>,
    factors: Vec<(f64, Factors)>,
}

impl Ifrk4 {
    pub fn new(grid: &GridSpec, dt: f64, viscosity: &[f64]) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("step {dt} must be positive")));
        }
        let mut factors: Vec<(f64, Factors)> = Vec::new();
        for &nu in viscosity {
            if !(nu >= 0.0) || !nu.is_finite() {
                return Err(Error::InvalidParameter(format!("viscosity {nu} must be nonnegative")));
            }
            if nu > 0.0 && !factors.iter().any(|(n, _)| *n == nu) {
                let k2 = grid.wavenumbers();
                let half = k2.iter().map(|k| libm::exp(-nu * k * k * 0.5 * dt)).collect();
                let full = k2.iter().map(|k| libm::exp(-nu * k * k * dt)).collect();
                factors.push((nu, Factors { half, full }));
            }
        }
        Ok(Self {
            grid: *grid,
            dt,
            viscosity: viscosity.to_vec(),
            factors,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn factors(&self, component: usize) -> Option<&Factors> {
        let nu = self.viscosity[component];
        self.factors.iter().find(|(n, _)| *n == nu).map(|(_, f)| f)
    }

    fn apply(&self, state: &mut [SpectralField], full: bool) {
        for (c, field) in state.iter_mut().enumerate() {
            if let Some(f) = self.factors(c) {
                let table = if full { &f.full } else { &f.half };
                for (z, e) in field.coeffs_mut().iter_mut().zip(table) {
                    *z *= *e;
                }
            }
        }
    }

    fn propagated(&self, state: &[SpectralField], full: bool) -> Vec<SpectralField> {
        let mut out = state.to_vec();
        self.apply(&mut out, full);
        out
    }

    /// Advances `state` from `t` to `t + dt`. `rhs` evaluates the explicit part.
    pub fn step<F>(&self, t: f64, state: &mut Vec<SpectralField>, mut rhs: F) -> Result<()>
    where
        F: FnMut(Stage, &[SpectralField]) -> Result<Vec<SpectralField>>,
    {
        if state.len() != self.viscosity.len() {
            return Err(Error::ComponentMismatch {
                expected: self.viscosity.len(),
                got: state.len(),
            });
        }
        let dt = self.dt;
        let h = 0.5 * dt;
        let stage = |index, time| Stage { index, time };

        let k1 = rhs(stage(0, t), state)?;
        check_len(&k1, state.len())?;
        let mut y2 = state.clone();
        axpy_all(&mut y2, h, &k1);
        self.apply(&mut y2, false);

        let k2 = rhs(stage(1, t + h), &y2)?;
        check_len(&k2, state.len())?;
        let e_half_y = self.propagated(state, false);
        let mut y3 = e_half_y.clone();
        axpy_all(&mut y3, h, &k2);

        let k3 = rhs(stage(2, t + h), &y3)?;
        check_len(&k3, state.len())?;
        let e_y = self.propagated(state, true);
        let e_half_k3 = self.propagated(&k3, false);
        let mut y4 = e_y.clone();
        axpy_all(&mut y4, dt, &e_half_k3);

        let k4 = rhs(stage(3, t + dt), &y4)?;
        check_len(&k4, state.len())?;

        // E k1 + 2 E½ (k2 + k3) + k4
        let mut mid = k2;
        axpy_all(&mut mid, 1.0, &k3);
        self.apply(&mut mid, false);
        let mut acc = self.propagated(&k1, true);
        axpy_all(&mut acc, 2.0, &mid);
        axpy_all(&mut acc, 1.0, &k4);

        let mut next = e_y;
        axpy_all(&mut next, dt / 6.0, &acc);
        *state = next;
        Ok(())
    }
}

fn axpy_all(y: &mut [SpectralField], a: f64, x: &[SpectralField]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.axpy(a, xi);
    }
}

fn check_len(k: &[SpectralField], n: usize) -> Result<()> {
    if k.len() == n {
        Ok(())
    } else {
        Err(Error::ComponentMismatch { expected: n, got: k.len() })
    }
}
