use alloc::vec::Vec;

use super::{checked_velocity, integrate, VectorSource};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops;
use crate::time::TimeGrid;

/// State of `c_t + v·∇c + Λd = f`, `d_t + v·∇d − μΔd − Λc = g`.
/// `c` and `d` hold the same number of components, paired index by index.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState {
    pub c: Vec<SpectralField>,
    pub d: Vec<SpectralField>,
}

impl CoupledState {
    pub fn new(c: Vec<SpectralField>, d: Vec<SpectralField>) -> Result<Self> {
        if c.len() != d.len() || c.is_empty() {
            return Err(Error::ComponentMismatch {
                expected: c.len().max(1),
                got: d.len(),
            });
        }
        for f in c.iter().chain(&d) {
            c[0].check_same_grid(f)?;
        }
        Ok(Self { c, d })
    }

    fn flatten(&self) -> Vec<SpectralField> {
        self.c.iter().chain(&self.d).cloned().collect()
    }

    fn unflatten(mut flat: Vec<SpectralField>) -> Self {
        let d = flat.split_off(flat.len() / 2);
        Self { c: flat, d }
    }
}

#[derive(Clone, Debug)]
pub struct CoupledTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CoupledState>,
}

impl CoupledTrajectory {
    pub fn final_state(&self) -> &CoupledState {
        self.states.last().expect("a trajectory holds its initial state")
    }
}

/// Skew pair `(Λd, −Λc)` and advection explicit, `μΔd` through the
/// integrating factor.
pub fn solve_coupled(
    initial: &CoupledState,
    velocity: Option<VectorSource<'_>>,
    f: Option<VectorSource<'_>>,
    g: Option<VectorSource<'_>>,
    mu: f64,
    tg: &TimeGrid,
) -> Result<CoupledTrajectory> {
    let n = initial.c.len();
    let mut viscosity = alloc::vec![0.0; n];
    viscosity.extend(core::iter::repeat_n(mu, n));
    let dt = tg.dt();
    let run = integrate(initial.flatten(), tg, &viscosity, |stage, y| {
        let (c, d) = y.split_at(n);
        let v = match velocity {
            Some(v) => Some(checked_velocity(&v(stage.time), dt, true)?),
            None => None,
        };
        let fs = f.map(|f| f(stage.time));
        let gs = g.map(|g| g(stage.time));
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut ct = ops::lambda_power(&d[i], 1.0).scaled(-1.0);
            if let Some(v) = &v {
                ct.axpy(-1.0, &ops::advect_samples(v, &c[i]));
            }
            if let Some(fs) = &fs {
                ct += &fs[i];
            }
            out.push(ct);
        }
        for i in 0..n {
            let mut dt_ = ops::lambda_power(&c[i], 1.0);
            if let Some(v) = &v {
                dt_.axpy(-1.0, &ops::advect_samples(v, &d[i]));
            }
            if let Some(gs) = &gs {
                dt_ += &gs[i];
            }
            out.push(dt_);
        }
        Ok(out)
    })?;
    Ok(CoupledTrajectory {
        times: run.times,
        states: run.snapshots.into_iter().map(CoupledState::unflatten).collect(),
    })
}
