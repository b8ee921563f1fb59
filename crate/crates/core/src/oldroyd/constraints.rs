use alloc::vec::Vec;

use super::FluidState;
use crate::field::{l2_norm_components, SpectralField};
use crate::ops;

/// `L²` norms of the constraint defects of a state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintResiduals {
    /// `div v`.
    pub divergence: f64,
    /// `∂_j(ρ U^{ji})`, the row-divergence reading of `div(ρUᵀ) = 0`.
    pub density_flux: f64,
    /// `∂_j(ρ U^{ij})`, the column-divergence reading.
    pub density_flux_column: f64,
    /// `U^{lk}∂_l U^{ij} − U^{lj}∂_l U^{ik}` with `U = I + H`.
    pub deformation: f64,
    /// `∂_k H^{ij} − ∂_j H^{ik} − (H^{lj}∂_l H^{ik} − H^{lk}∂_l H^{ij})`.
    pub perturbation: f64,
}

/// The constraint defects as fields, before taking norms.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintFields {
    pub divergence: SpectralField,
    pub density_flux: Vec<SpectralField>,
    pub density_flux_column: Vec<SpectralField>,
    /// Index `(i d + j) d + k`.
    pub deformation: Vec<SpectralField>,
    pub perturbation: Vec<SpectralField>,
}

impl ConstraintFields {
    pub fn norms(&self) -> ConstraintResiduals {
        ConstraintResiduals {
            divergence: self.divergence.l2_norm(),
            density_flux: l2_norm_components(&self.density_flux),
            density_flux_column: l2_norm_components(&self.density_flux_column),
            deformation: l2_norm_components(&self.deformation),
            perturbation: l2_norm_components(&self.perturbation),
        }
    }
}

pub fn constraint_residuals(state: &FluidState) -> ConstraintResiduals {
    constraint_fields(state).norms()
}

pub fn constraint_fields(state: &FluidState) -> ConstraintFields {
    let grid = *state.grid();
    let d = grid.dim();
    let divergence = ops::divergence(&state.velocity).expect("one velocity component per axis");

    let rho = density(&state.sigma);
    let rho_samples = rho.to_samples();
    let h: Vec<Vec<f64>> = state.h.iter().map(|c| c.to_samples()).collect();
    let flux = |transpose: bool| -> Vec<SpectralField> {
        (0..d)
            .map(|i| {
                let mut acc = ops::partial(&rho, i);
                for j in 0..d {
                    let entry = if transpose { &h[j * d + i] } else { &h[i * d + j] };
                    let s: Vec<f64> = entry.iter().zip(&rho_samples).map(|(x, r)| x * r).collect();
                    acc += &ops::partial(&ops::from_physical(&grid, &s), j);
                }
                acc
            })
            .collect()
    };
    let density_flux = flux(true);
    let density_flux_column = flux(false);

    // dh[(i d + j) d + l] = ∂_l H^{ij}
    let dh_spec: Vec<SpectralField> = state
        .h
        .iter()
        .flat_map(|c| (0..d).map(move |l| ops::partial(c, l)))
        .collect();
    let dh: Vec<Vec<f64>> = dh_spec.iter().map(|c| c.to_samples()).collect();
    let n = grid.len();
    let u = |a: usize, b: usize, m: usize| if a == b { 1.0 + h[a * d + b][m] } else { h[a * d + b][m] };
    let mut deformation = Vec::with_capacity(d * d * d);
    let mut perturbation = Vec::with_capacity(d * d * d);
    let mut acc = alloc::vec![0.0; n];
    let mut quad = alloc::vec![0.0; n];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for m in 0..n {
                    let mut x = 0.0;
                    let mut q = 0.0;
                    for l in 0..d {
                        x += u(l, k, m) * dh[(i * d + j) * d + l][m] - u(l, j, m) * dh[(i * d + k) * d + l][m];
                        q += h[l * d + j][m] * dh[(i * d + k) * d + l][m] - h[l * d + k][m] * dh[(i * d + j) * d + l][m];
                    }
                    acc[m] = x;
                    quad[m] = q;
                }
                deformation.push(ops::from_physical(&grid, &acc));
                let mut r = &dh_spec[(i * d + j) * d + k] - &dh_spec[(i * d + k) * d + j];
                r -= &ops::from_physical(&grid, &quad);
                perturbation.push(r);
            }
        }
    }
    ConstraintFields {
        divergence,
        density_flux,
        density_flux_column,
        deformation,
        perturbation,
    }
}

/// `ρ = 1/(1 + σ)`, dealiased.
pub(crate) fn density(sigma: &SpectralField) -> SpectralField {
    let samples: Vec<f64> = sigma.to_samples().iter().map(|s| 1.0 / (1.0 + s)).collect();
    ops::from_physical(sigma.grid(), &samples)
}
