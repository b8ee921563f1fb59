use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;

/// Fourier coefficients of a real scalar field on a torus grid.
///
/// Normalization: the field `exp(i k·x)` has coefficient 1 at `k`, so the zero
/// mode is the spatial mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

/// Forward transform of real physical samples (row-major on `grid`).
pub fn forward_transform(grid: &GridSpec, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::transform(grid, &mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    Ok(SpectralField {
        grid: *grid,
        coeffs: data,
    })
}

/// Physical samples of a field; imaginary roundoff is discarded.
pub fn inverse_transform(field: &SpectralField) -> Vec<f64> {
    let mut data = field.coeffs.clone();
    fft::transform(&field.grid, &mut data, true);
    data.into_iter().map(|c| c.re).collect()
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: *grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Self {
        let mut out = Self::zeros(grid);
        out.coeffs[0] = Complex64::new(value, 0.0);
        out
    }

    pub fn from_coeffs(grid: &GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: *grid,
            coeffs,
        })
    }

    pub fn from_samples(grid: &GridSpec, samples: &[f64]) -> Result<Self> {
        forward_transform(grid, samples)
    }

    /// Samples `f(x)` at the grid nodes and transforms.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.coordinates(i);
                f(&x[..grid.dim()])
            })
            .collect();
        forward_transform(grid, &samples).expect("sample count matches grid")
    }

    /// `amplitude · cos(k·x)` built directly from its two coefficients.
    pub fn cosine(grid: &GridSpec, k: &[i64], amplitude: f64) -> Self {
        Self::plane_wave(grid, k, Complex64::new(0.5 * amplitude, 0.0))
    }

    /// `amplitude · sin(k·x)` built directly from its two coefficients.
    pub fn sine(grid: &GridSpec, k: &[i64], amplitude: f64) -> Self {
        Self::plane_wave(grid, k, Complex64::new(0.0, -0.5 * amplitude))
    }

    fn plane_wave(grid: &GridSpec, k: &[i64], c: Complex64) -> Self {
        let mut out = Self::zeros(grid);
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        if k.iter().all(|x| *x == 0) {
            out.coeffs[0] = Complex64::new(2.0 * c.re, 0.0);
            return out;
        }
        out.set_mode(k, c);
        out.set_mode(&neg, c.conj());
        out
    }

    pub fn to_samples(&self) -> Vec<f64> {
        inverse_transform(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn mode(&self, k: &[i64]) -> Complex64 {
        self.coeffs[self.grid.flat_index(k)]
    }

    pub fn set_mode(&mut self, k: &[i64], value: Complex64) {
        let i = self.grid.flat_index(k);
        self.coeffs[i] = value;
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Sum of squared coefficient moduli; `(2π)^N` times this is `‖u‖²_{L²}`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Exact `L²` norm through Parseval.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.grid.volume() * self.energy())
    }

    /// Largest `|c(-k) - conj c(k)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.coeffs.len() {
            if self.grid.is_nyquist(i) {
                continue;
            }
            let j = self.grid.conjugate_index(i);
            worst = worst.max((self.coeffs[j] - self.coeffs[i].conj()).norm());
        }
        worst / scale
    }

    /// Coefficients of the real field closest to `self`: `(c(k) + conj c(−k)) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.coeffs.len() {
            let j = self.grid.conjugate_index(i);
            out.coeffs[i] = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    /// Multiply every coefficient by a real symbol evaluated per flat index.
    pub fn map_modes(&self, mut symbol: impl FnMut(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(i))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs_difference(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Sum of squared `L²` norms of several components, as one Euclidean norm.
pub fn l2_norm_components(fields: &[SpectralField]) -> f64 {
    let mut total = 0.0;
    for f in fields {
        total += f.grid.volume() * f.energy();
    }
    libm::sqrt(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(2, 16).unwrap()
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = grid();
        let f = SpectralField::from_fn(&g, |_| 2.5);
        assert!((f.mean() - 2.5).abs() < 1e-15);
        let rest = f.without_mean();
        assert!(rest.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn cosine_has_half_coefficients() {
        for m in [16, 32, 64] {
            let g = GridSpec::new(2, m).unwrap();
            let f = SpectralField::from_fn(&g, |x| libm::cos(x[0]));
            assert!((f.mode(&[1, 0]).re - 0.5).abs() < 1e-14);
            assert!((f.mode(&[-1, 0]).re - 0.5).abs() < 1e-14);
            let mut rest = f.clone();
            rest.set_mode(&[1, 0], Complex64::new(0.0, 0.0));
            rest.set_mode(&[-1, 0], Complex64::new(0.0, 0.0));
            assert!(rest.max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn exponential_has_unit_coefficient() {
        let g = GridSpec::new(3, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| libm::cos(2.0 * x[1] - x[2]));
        assert!((f.mode(&[0, 2, -1]).re - 0.5).abs() < 1e-14);
        assert!(f.hermitian_defect() < 1e-12);
    }

    #[test]
    fn hermitian_part_drops_imaginary_samples() {
        let g = grid();
        let mut f = SpectralField::cosine(&g, &[1, 2], 1.0);
        f.set_mode(&[3, 0], Complex64::new(0.25, 0.0));
        let h = f.hermitian_part();
        assert_eq!(h.hermitian_defect(), 0.0);
        assert!((h.mode(&[3, 0]).re - 0.125).abs() < 1e-16);
        assert_eq!(h.mode(&[1, 2]), f.mode(&[1, 2]));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = grid();
        assert_eq!(
            forward_transform(&g, &[0.0; 10]),
            Err(Error::ShapeMismatch { expected: 256, got: 10 })
        );
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid();
        let f = SpectralField::from_fn(&g, |x| libm::sin(x[0]) + 0.5 * libm::cos(3.0 * x[1]));
        let samples = f.to_samples();
        let quad: f64 = samples.iter().map(|s| s * s).sum::<f64>() * g.cell_volume();
        assert!((libm::sqrt(quad) - f.l2_norm()).abs() < 1e-12);
        // ∫ sin² + ∫ cos²/4 = 2π²(1 + 1/4)
        assert!((quad - 2.0 * PI * PI * 1.25).abs() < 1e-10);
    }
}
