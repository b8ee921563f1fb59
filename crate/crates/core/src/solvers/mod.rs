//! Linear building blocks as time steppers: transport, heat, the
//! variable-coefficient elliptic problem and the hyperbolic-parabolic pair.

use alloc::vec::Vec;

use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::norms::{Exponent, NormSeries};
use crate::ops;
use crate::time::TimeGrid;

mod coupled;
mod elliptic;
mod heat;
mod integrator;
mod transport;

pub use coupled::{solve_coupled, CoupledState, CoupledTrajectory};
pub use elliptic::{solve_variable_poisson, solve_variable_poisson_from, PoissonReport, PoissonSolution};
pub use heat::solve_heat;
pub use integrator::{Ifrk4, Stage};
pub use transport::solve_transport;

/// Time-dependent vector field, evaluated at Runge-Kutta stage times.
pub type VectorSource<'a> = &'a dyn Fn(f64) -> Vec<SpectralField>;
/// Time-dependent scalar field, evaluated at Runge-Kutta stage times.
pub type ScalarSource<'a> = &'a dyn Fn(f64) -> SpectralField;

/// Largest accepted `‖div v‖ / ‖∇v‖` for a velocity declared divergence-free.
pub const SOLENOIDAL_TOLERANCE: f64 = 1e-10;

/// `dt · max|v| · M/3`; a step is accepted when this is at most 1.
pub fn cfl_number(grid: &GridSpec, dt: f64, max_speed: f64) -> f64 {
    dt * max_speed * grid.points() as f64 / 3.0
}

/// Physical samples of `v` after the CFL guard and, optionally, the
/// divergence check.
pub(crate) fn checked_velocity(velocity: &[SpectralField], dt: f64, solenoidal: bool) -> Result<Vec<Vec<f64>>> {
    let grid = ops::check_vector(velocity)?;
    if solenoidal {
        let residual = ops::solenoidal_residual(velocity)?;
        if residual > SOLENOIDAL_TOLERANCE {
            return Err(Error::NotSolenoidal { residual });
        }
    }
    let samples: Vec<Vec<f64>> = velocity.iter().map(|c| c.to_samples()).collect();
    let speed = (0..grid.len())
        .map(|i| libm::sqrt(samples.iter().map(|s| s[i] * s[i]).sum()))
        .fold(0.0, f64::max);
    let number = cfl_number(&grid, dt, speed);
    if number > 1.0 {
        return Err(Error::Cfl { number });
    }
    Ok(samples)
}

/// Snapshots of a run at the save stride, with per-block `L²` norms.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<SpectralField>>,
    pub series: NormSeries,
}

impl Trajectory {
    fn new(ladder: &DyadicLadder) -> Self {
        Self {
            times: Vec::new(),
            snapshots: Vec::new(),
            series: NormSeries::new(Exponent::TWO, ladder.q_min()),
        }
    }

    fn record(&mut self, ladder: &DyadicLadder, t: f64, state: &[SpectralField]) -> Result<()> {
        self.series.record(ladder, t, state)?;
        self.times.push(t);
        self.snapshots.push(state.to_vec());
        Ok(())
    }

    pub fn final_state(&self) -> &[SpectralField] {
        self.snapshots.last().map_or(&[], |s| s.as_slice())
    }
}

/// Runs the integrating-factor stepper over `tg`, recording snapshots.
pub(crate) fn integrate<F>(initial: Vec<SpectralField>, tg: &TimeGrid, viscosity: &[f64], mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(Stage, &[SpectralField]) -> Result<Vec<SpectralField>>,
{
    let grid = *initial
        .first()
        .ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?
        .grid();
    let ladder = DyadicLadder::new(&grid);
    let stepper = Ifrk4::new(&grid, tg.dt(), viscosity)?;
    let mut out = Trajectory::new(&ladder);
    let mut state = initial;
    out.record(&ladder, 0.0, &state)?;
    for n in 0..tg.steps() {
        stepper.step(tg.time(n), &mut state, &mut rhs)?;
        if tg.is_snapshot(n + 1) {
            out.record(&ladder, tg.time(n + 1), &state)?;
        }
    }
    Ok(out)
}
