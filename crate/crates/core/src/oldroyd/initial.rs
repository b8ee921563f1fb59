use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::constraints::{constraint_residuals, density};
use super::FluidState;
use crate::error::{Error, Result};
use crate::field::{l2_norm_components, SpectralField};
use crate::grid::GridSpec;
use crate::ops;
use crate::random::{random_field, random_solenoidal, SpectrumSpec};
use crate::solvers::{solve_variable_poisson, SOLENOIDAL_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialFamily {
    /// `σ₀ = 0`, `v₀` solenoidal, `H₀ = ∇w` with `div w = 0`.
    ExactGradient,
    /// Adds a nonconstant `σ₀` and corrects `H₀` so that `div(ρ₀U₀ᵀ) = 0`.
    General,
}

impl InitialFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialFamily::ExactGradient => "exact_gradient",
            InitialFamily::General => "general",
        }
    }
}

impl FromStr for InitialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_gradient" => Ok(InitialFamily::ExactGradient),
            "general" => Ok(InitialFamily::General),
            other => Err(Error::InvalidParameter(String::from("unknown initial family ") + other)),
        }
    }
}

/// Recipe for random compatible initial data. Each nonzero unknown has
/// `L²` norm equal to `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialSpec {
    pub family: InitialFamily,
    pub amplitude: f64,
    pub seed: u64,
    pub spectrum: SpectrumSpec,
}

impl InitialSpec {
    /// Low modes `1 ≤ |k| ≤ 2`, resolved identically on every admissible grid.
    pub const DEFAULT_SPECTRUM: SpectrumSpec = SpectrumSpec {
        k_min: 1.0,
        k_max: 2.0,
        decay: 1.0,
    };

    pub fn new(family: InitialFamily, amplitude: f64, seed: u64) -> Self {
        Self {
            family,
            amplitude,
            seed,
            spectrum: Self::DEFAULT_SPECTRUM,
        }
    }

    pub fn with_spectrum(mut self, spectrum: SpectrumSpec) -> Self {
        self.spectrum = spectrum;
        self
    }
}

/// Constraint defects of initial data.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompatibilityReport {
    /// `‖div v₀‖`.
    pub divergence: f64,
    /// `‖div(ρ₀U₀ᵀ)‖`, row convention.
    pub density_flux: f64,
    /// Same with the column convention, for comparison.
    pub density_flux_column: f64,
    /// `‖U₀^{lk}∂_l U₀^{ij} − U₀^{lj}∂_l U₀^{ik}‖`.
    pub deformation: f64,
    /// Richardson iterations spent on the density-flux correction.
    pub correction_iterations: usize,
}

fn report(state: &FluidState, correction_iterations: usize) -> CompatibilityReport {
    let r = constraint_residuals(state);
    CompatibilityReport {
        divergence: r.divergence,
        density_flux: r.density_flux,
        density_flux_column: r.density_flux_column,
        deformation: r.deformation,
        correction_iterations,
    }
}

fn scale_to(fields: &mut [SpectralField], amplitude: f64) {
    let norm = l2_norm_components(fields);
    if norm > 0.0 {
        for f in fields {
            f.scale_in_place(amplitude / norm);
        }
    }
}

pub fn make_initial_data(spec: &InitialSpec, grid: &GridSpec) -> Result<(FluidState, CompatibilityReport)> {
    if !(spec.amplitude >= 0.0 && spec.amplitude.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "amplitude {} must be nonnegative",
            spec.amplitude
        )));
    }
    let d = grid.dim();
    if spec.amplitude == 0.0 {
        let state = FluidState::zeros(grid);
        let rep = report(&state, 0);
        return Ok((state, rep));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut velocity = random_solenoidal(grid, &spec.spectrum, &mut rng);
    scale_to(&mut velocity, spec.amplitude);
    let w = random_solenoidal(grid, &spec.spectrum, &mut rng);
    // H^{ij} = ∂_j w^i
    let mut h: Vec<SpectralField> = (0..d * d).map(|n| ops::partial(&w[n / d], n % d)).collect();
    scale_to(&mut h, spec.amplitude);

    let mut sigma = SpectralField::zeros(grid);
    let mut iterations = 0;
    if spec.family == InitialFamily::General {
        sigma = random_field(grid, &spec.spectrum, &mut rng).scaled(spec.amplitude);
        let rho = density(&sigma);
        let rho_samples = rho.to_samples();
        // column i: −div(ρ∇φ^i) = ∂_iρ + ∂_j(ρH^{ji}), then H^{ji} += ∂_jφ^i
        for i in 0..d {
            let mut f = ops::partial(&rho, i);
            for j in 0..d {
                let s: Vec<f64> = h[j * d + i].to_samples().iter().zip(&rho_samples).map(|(x, r)| x * r).collect();
                f += &ops::partial(&ops::from_physical(grid, &s), j);
            }
            let sol = solve_variable_poisson(&rho, &f, 1e-13, 500)?;
            iterations += sol.report.iterations;
            for j in 0..d {
                h[j * d + i] += &sol.gradient[j];
            }
        }
    }
    let state = FluidState::new(sigma, velocity, h)?;
    let rep = report(&state, iterations);
    Ok((state, rep))
}

/// Accepts user-supplied data after the checks a finite-band construction
/// can make: `v` divergence-free, and `H = 0` only with constant density
/// (for `U = I`, `div(ρUᵀ) = ∇ρ`).
pub fn make_custom_initial_data(
    sigma: SpectralField,
    velocity: Vec<SpectralField>,
    h: Vec<SpectralField>,
) -> Result<(FluidState, CompatibilityReport)> {
    let state = FluidState::new(sigma, velocity, h)?;
    let residual = ops::solenoidal_residual(&state.velocity)?;
    if residual > SOLENOIDAL_TOLERANCE {
        return Err(Error::NotSolenoidal { residual });
    }
    if state.h.iter().all(|c| c.is_zero()) && state.sigma.without_mean().max_abs_coeff() > 1e-14 {
        return Err(Error::IncompatibleData(String::from(
            "H = 0 requires constant density: div(ρ I) = ∇ρ",
        )));
    }
    let rep = report(&state, 0);
    Ok((state, rep))
}
