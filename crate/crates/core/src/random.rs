//! Random band-limited fields with a prescribed radial spectrum.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::ops;

/// Radial band `[k_min, k_max]` and amplitude decay `|k|^{-decay}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub decay: f64,
}

impl SpectrumSpec {
    /// Every mode the dyadic ladder of `grid` represents exactly: `1 ≤ |k| ≤ 3M/16`.
    pub fn retained(grid: &GridSpec) -> Self {
        Self {
            k_min: 1.0,
            k_max: 3.0 * grid.points() as f64 / 16.0,
            decay: 1.0,
        }
    }

    /// Radii `2^{q_lo} ≤ |k| ≤ 2^{q_hi}`.
    pub fn dyadic(q_lo: i32, q_hi: i32, decay: f64) -> Self {
        Self {
            k_min: libm::ldexp(1.0, q_lo),
            k_max: libm::ldexp(1.0, q_hi),
            decay,
        }
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.k_min && rho <= self.k_max
    }
}

/// Mean-zero real field with complex Gaussian coefficients, normalized to
/// unit `L²` norm (unless the band holds no grid mode).
///
/// Wavevectors are drawn in an order that does not depend on the resolution,
/// so the same seed gives the same field on any grid resolving the band.
pub fn random_field<R: Rng + ?Sized>(grid: &GridSpec, spectrum: &SpectrumSpec, rng: &mut R) -> SpectralField {
    let dim = grid.dim();
    let mut out = SpectralField::zeros(grid);
    let reach = libm::floor(spectrum.k_max) as i64;
    let side = (2 * reach + 1) as usize;
    let total = side.pow(dim as u32);
    let cut = grid.dealias_cutoff();
    let mut k = [0i64; 3];
    for n in 0..total {
        let mut rest = n;
        for a in (0..dim).rev() {
            k[a] = (rest % side) as i64 - reach;
            rest /= side;
        }
        // one representative per conjugate pair
        match k[..dim].iter().find(|c| **c != 0) {
            Some(c) if *c > 0 => {}
            _ => continue,
        }
        let rho = libm::sqrt(k[..dim].iter().map(|c| (c * c) as f64).sum());
        if !spectrum.contains(rho) {
            continue;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if k[..dim].iter().any(|c| c.abs() > cut) {
            continue;
        }
        let z = Complex64::new(re, im) * libm::pow(rho, -spectrum.decay);
        let neg = [-k[0], -k[1], -k[2]];
        out.set_mode(&k[..dim], z);
        out.set_mode(&neg[..dim], z.conj());
    }
    let norm = out.l2_norm();
    if norm > 0.0 {
        out.scale_in_place(1.0 / norm);
    }
    out
}

/// Random divergence-free vector field of unit `L²` norm.
pub fn random_solenoidal<R: Rng + ?Sized>(grid: &GridSpec, spectrum: &SpectrumSpec, rng: &mut R) -> Vec<SpectralField> {
    let raw: Vec<SpectralField> = (0..grid.dim()).map(|_| random_field(grid, spectrum, rng)).collect();
    let mut v = ops::leray_project(&raw).expect("components share one grid");
    let norm = crate::field::l2_norm_components(&v);
    if norm > 0.0 {
        for c in &mut v {
            c.scale_in_place(1.0 / norm);
        }
    }
    v
}
