//! The density-dependent incompressible Oldroyd system in the variables
//! `σ = 1/ρ − 1`, `v`, `H = U − I`:
//!
//! ```text
//! σ_t + v·∇σ = 0
//! v^i_t + v·∇v^i + (σ+1)∂_i P = μ(σ+1)Δv^i + ∂_k H^{ik} + H^{jk} ∂_j H^{ik}
//! H_t + v·∇H = ∇v (H + I),     (∇v)^{ij} = ∂_j v^i
//! div v = 0
//! ```

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{l2_norm_components, SpectralField};
use crate::grid::GridSpec;

mod constraints;
mod coupled;
mod dynamics;
mod initial;
mod phi;

pub use constraints::{constraint_fields, constraint_residuals, ConstraintFields, ConstraintResiduals};
pub use coupled::{
    coupled_forcing, cross_compare, run_coupled, transform_from_coupled, transform_to_coupled, CoupledFluidState, CoupledRun,
    CrossComparison,
};
pub use dynamics::{
    compute_pressure, momentum_forcing, run, run_with_observer, step, PressureSettings, RunOutput, RunRecord,
    RunSeries, Stepper,
};
pub use initial::{make_custom_initial_data, make_initial_data, CompatibilityReport, InitialFamily, InitialSpec};
pub use phi::{phi_iteration, phi_iteration_with, AdmissibleFlags, AdmissibleSetSpec, PhiOutput};

/// Physical parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub mu: f64,
    /// Lower bound enforced on `σ + 1 = 1/ρ`.
    pub sigma_floor: f64,
}

impl PhysicalParams {
    pub const DEFAULT_SIGMA_FLOOR: f64 = 0.1;

    pub fn new(mu: f64, sigma_floor: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("viscosity {mu} must be positive")));
        }
        if !(sigma_floor > 0.0 && sigma_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!("density floor {sigma_floor} must be positive")));
        }
        Ok(Self { mu, sigma_floor })
    }

    pub fn with_viscosity(mu: f64) -> Result<Self> {
        Self::new(mu, Self::DEFAULT_SIGMA_FLOOR)
    }
}

/// `(σ, v, H)` with the pressure gradient of the same instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub sigma: SpectralField,
    pub velocity: Vec<SpectralField>,
    /// Row-major, `h[i * dim + j] = H^{ij}`.
    pub h: Vec<SpectralField>,
    pub pressure_grad: Vec<SpectralField>,
}

impl FluidState {
    pub fn zeros(grid: &GridSpec) -> Self {
        let d = grid.dim();
        let z = SpectralField::zeros(grid);
        Self {
            sigma: z.clone(),
            velocity: alloc::vec![z.clone(); d],
            h: alloc::vec![z.clone(); d * d],
            pressure_grad: alloc::vec![z; d],
        }
    }

    /// State with a zero pressure gradient; see [`compute_pressure`].
    pub fn new(sigma: SpectralField, velocity: Vec<SpectralField>, h: Vec<SpectralField>) -> Result<Self> {
        let grid = *sigma.grid();
        let d = grid.dim();
        if velocity.len() != d {
            return Err(Error::ComponentMismatch {
                expected: d,
                got: velocity.len(),
            });
        }
        if h.len() != d * d {
            return Err(Error::ComponentMismatch {
                expected: d * d,
                got: h.len(),
            });
        }
        for f in velocity.iter().chain(&h) {
            sigma.check_same_grid(f)?;
        }
        Ok(Self {
            sigma,
            velocity,
            h,
            pressure_grad: alloc::vec![SpectralField::zeros(&grid); d],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.sigma.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn h_entry(&self, i: usize, j: usize) -> &SpectralField {
        &self.h[i * self.dim() + j]
    }

    /// `[σ, v_0 … v_{N−1}, H^{00} … H^{N−1,N−1}]`.
    pub(crate) fn components(&self) -> Vec<SpectralField> {
        let mut out = Vec::with_capacity(1 + self.velocity.len() + self.h.len());
        out.push(self.sigma.clone());
        out.extend(self.velocity.iter().cloned());
        out.extend(self.h.iter().cloned());
        out
    }

    pub(crate) fn from_components(mut comps: Vec<SpectralField>, pressure_grad: Vec<SpectralField>) -> Self {
        let d = comps[0].grid().dim();
        let h = comps.split_off(1 + d);
        let velocity = comps.split_off(1);
        let sigma = comps.pop().expect("σ component");
        Self {
            sigma,
            velocity,
            h,
            pressure_grad,
        }
    }

    /// Smallest sample of `σ + 1`.
    pub fn min_inverse_density(&self) -> f64 {
        1.0 + self.sigma.to_samples().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `L²` norm of `(σ, v, H)`.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(
            sq(self.sigma.l2_norm()) + sq(l2_norm_components(&self.velocity)) + sq(l2_norm_components(&self.h)),
        )
    }

    /// `L²` norm of the difference in `(σ, v, H)`.
    pub fn l2_distance(&self, other: &FluidState) -> f64 {
        let sq = |a: &SpectralField, b: &SpectralField| (a - b).energy();
        let mut e = sq(&self.sigma, &other.sigma);
        for (a, b) in self.velocity.iter().zip(&other.velocity) {
            e += sq(a, b);
        }
        for (a, b) in self.h.iter().zip(&other.h) {
            e += sq(a, b);
        }
        libm::sqrt(e * self.grid().volume())
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

pub(crate) fn component_count(dim: usize) -> usize {
    1 + dim + dim * dim
}
