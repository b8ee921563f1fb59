//! Fourier multipliers and pseudo-spectral products.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{forward_transform, SpectralField};
use crate::grid::GridSpec;

/// `∂/∂x_axis`. The unmatched Nyquist mode of that axis is zeroed so the
/// result stays Hermitian.
pub fn derivative(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = *field.grid();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: grid.dim(),
        });
    }
    Ok(partial(field, axis))
}

pub(crate) fn partial(field: &SpectralField, axis: usize) -> SpectralField {
    let grid = *field.grid();
    let nyquist = -((grid.points() / 2) as i64);
    let mut out = field.clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = grid.wavevector(i)[axis];
        *c = if k == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-c.im * k as f64, c.re * k as f64)
        };
    }
    out
}

pub fn gradient(field: &SpectralField) -> Vec<SpectralField> {
    (0..field.grid().dim()).map(|a| partial(field, a)).collect()
}

pub fn divergence(components: &[SpectralField]) -> Result<SpectralField> {
    let grid = check_vector(components)?;
    let mut out = SpectralField::zeros(&grid);
    for (axis, c) in components.iter().enumerate() {
        out += &partial(c, axis);
    }
    Ok(out)
}

/// Row divergence of a row-major matrix field: `(div A)^i = ∂_j A^{ij}`.
pub fn row_divergence(matrix: &[SpectralField], dim: usize) -> Vec<SpectralField> {
    (0..dim)
        .map(|i| {
            let mut acc = partial(&matrix[i * dim], 0);
            for j in 1..dim {
                acc += &partial(&matrix[i * dim + j], j);
            }
            acc
        })
        .collect()
}

pub fn laplacian(field: &SpectralField) -> SpectralField {
    let grid = *field.grid();
    field.map_modes(|i| -grid.wavenumber_sq(i))
}

/// `Λ^e` with `Λ = (-Δ)^{1/2}`: multiplies mode `k ≠ 0` by `|k|^e`.
/// The zero mode is sent to 0 for every `e ≠ 0` (this is the convention
/// that makes `Λ^{-1}` well defined on the torus).
pub fn lambda_power(field: &SpectralField, exponent: f64) -> SpectralField {
    if exponent == 0.0 {
        return field.clone();
    }
    let grid = *field.grid();
    field.map_modes(|i| {
        if i == 0 {
            0.0
        } else {
            libm::pow(grid.wavenumber_sq(i), 0.5 * exponent)
        }
    })
}

/// Inverse of `-Δ` on mean-zero fields; the zero mode is dropped.
pub fn inverse_neg_laplacian(field: &SpectralField) -> SpectralField {
    let grid = *field.grid();
    field.map_modes(|i| if i == 0 { 0.0 } else { 1.0 / grid.wavenumber_sq(i) })
}

/// Leray projection `v - k (k·v)/|k|²` onto divergence-free fields. The zero
/// mode passes through; modes on the Nyquist plane are zeroed, matching the
/// odd-derivative convention.
pub fn leray_project(components: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let grid = check_vector(components)?;
    let dim = grid.dim();
    let mut out: Vec<SpectralField> = components.to_vec();
    for i in 1..grid.len() {
        if grid.is_nyquist(i) {
            for c in out.iter_mut() {
                c.coeffs_mut()[i] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let k = grid.wavevector(i);
        let k2 = grid.wavenumber_sq(i);
        let mut dot = Complex64::new(0.0, 0.0);
        for (a, c) in components.iter().enumerate() {
            dot += c.coeffs()[i] * k[a] as f64;
        }
        for (a, c) in out.iter_mut().enumerate().take(dim) {
            c.coeffs_mut()[i] -= dot * (k[a] as f64 / k2);
        }
    }
    Ok(out)
}

/// Two-thirds rule: zero every mode with some `|k_axis| > M/3`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(field: &mut SpectralField) {
    let grid = *field.grid();
    for (i, c) in field.coeffs_mut().iter_mut().enumerate() {
        if !grid.is_dealiased_mode(i) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn is_band_limited(field: &SpectralField) -> bool {
    let grid = *field.grid();
    field
        .coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| grid.is_dealiased_mode(i) || (c.re == 0.0 && c.im == 0.0))
}

/// Forward transform of physical samples followed by the two-thirds rule.
pub fn from_physical(grid: &GridSpec, samples: &[f64]) -> SpectralField {
    let mut f = forward_transform(grid, samples).expect("sample count matches grid");
    dealias_in_place(&mut f);
    f
}

/// Pseudo-spectral product `D(a b)`.
pub fn product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let pa = a.to_samples();
    let pb = b.to_samples();
    let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    from_physical(a.grid(), &prod)
}

/// Pseudo-spectral advection `D(v·∇u)` from physical samples of `v`.
pub fn advect_samples(velocity: &[Vec<f64>], u: &SpectralField) -> SpectralField {
    let grid = *u.grid();
    let mut acc = alloc::vec![0.0; grid.len()];
    for (axis, va) in velocity.iter().enumerate() {
        let du = partial(u, axis).to_samples();
        for ((a, v), d) in acc.iter_mut().zip(va).zip(&du) {
            *a += v * d;
        }
    }
    from_physical(&grid, &acc)
}

/// `D(v·∇u)`.
pub fn advection(velocity: &[SpectralField], u: &SpectralField) -> Result<SpectralField> {
    check_vector(velocity)?;
    u.check_same_grid(&velocity[0])?;
    let samples: Vec<Vec<f64>> = velocity.iter().map(|c| c.to_samples()).collect();
    Ok(advect_samples(&samples, u))
}

/// `‖∇u‖_{L²}` summed over components.
pub fn gradient_l2(components: &[SpectralField]) -> f64 {
    let Some(first) = components.first() else {
        return 0.0;
    };
    let grid = *first.grid();
    let energy: f64 = components
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .enumerate()
                .map(|(i, z)| grid.wavenumber_sq(i) * z.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    libm::sqrt(grid.volume() * energy)
}

/// `‖div v‖_{L²} / ‖∇v‖_{L²}`, zero for fields without gradient.
pub fn solenoidal_residual(velocity: &[SpectralField]) -> Result<f64> {
    let div = divergence(velocity)?;
    let scale = gradient_l2(velocity);
    Ok(if scale == 0.0 { 0.0 } else { div.l2_norm() / scale })
}

/// Dilation `u(x) ↦ u(2^m x)`: the coefficient at `k` moves to `2^m k`.
/// For `m < 0` every occupied frequency must be divisible by `2^{-m}`.
pub fn rescale(field: &SpectralField, m: i32) -> Result<SpectralField> {
    if m == 0 {
        return Ok(field.clone());
    }
    let grid = *field.grid();
    let dim = grid.dim();
    let half = (grid.points() / 2) as i64;
    let mut out = SpectralField::zeros(&grid);
    for (i, c) in field.coeffs().iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let k = grid.wavevector(i);
        let mut target = [0i64; 3];
        for a in 0..dim {
            target[a] = if m > 0 {
                let t = k[a] << m;
                if t.abs() >= half {
                    return Err(Error::FrequencyOverflow { m, freq: k[a] });
                }
                t
            } else {
                let div = 1i64 << (-m);
                if k[a] % div != 0 {
                    return Err(Error::FrequencyNotDivisible {
                        m,
                        divisor: div,
                        freq: k[a],
                    });
                }
                k[a] / div
            };
        }
        out.set_mode(&target[..dim], *c);
    }
    Ok(out)
}

pub(crate) fn check_vector(components: &[SpectralField]) -> Result<GridSpec> {
    let first = components.first().ok_or(Error::ComponentMismatch {
        expected: 1,
        got: 0,
    })?;
    let grid = *first.grid();
    if components.len() != grid.dim() {
        return Err(Error::ComponentMismatch {
            expected: grid.dim(),
            got: components.len(),
        });
    }
    for c in components {
        first.check_same_grid(c)?;
    }
    Ok(grid)
}

/// Largest Euclidean magnitude of a vector field over the grid samples.
pub fn max_magnitude(components: &[SpectralField]) -> f64 {
    let samples: Vec<Vec<f64>> = components.iter().map(|c| c.to_samples()).collect();
    let n = samples.first().map_or(0, |s| s.len());
    (0..n)
        .map(|i| libm::sqrt(samples.iter().map(|s| s[i] * s[i]).sum()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_norm_components;

    fn g(m: usize) -> GridSpec {
        GridSpec::new(2, m).unwrap()
    }

    fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
        a.max_abs_difference(b) <= tol
    }

    #[test]
    fn derivative_examples() {
        let grid = g(32);
        let s = SpectralField::from_fn(&grid, |x| libm::sin(x[0]));
        let c = SpectralField::from_fn(&grid, |x| libm::cos(x[0]));
        assert!(close(&derivative(&s, 0).unwrap(), &c, 1e-14));
        let k = SpectralField::constant(&grid, 3.0);
        assert!(derivative(&k, 1).unwrap().max_abs_coeff() == 0.0);
        let c2 = SpectralField::from_fn(&grid, |x| libm::cos(2.0 * x[1]));
        let want = SpectralField::from_fn(&grid, |x| -2.0 * libm::sin(2.0 * x[1]));
        assert!(close(&derivative(&c2, 1).unwrap(), &want, 1e-14));
        assert!(derivative(&c2, 2).is_err());
    }

    #[test]
    fn nyquist_is_zeroed_by_odd_multiplier() {
        let grid = g(16);
        let f = SpectralField::from_fn(&grid, |x| libm::cos(8.0 * x[0]));
        assert!(f.max_abs_coeff() > 0.9);
        assert!(partial(&f, 0).max_abs_coeff() == 0.0);
    }

    #[test]
    fn lambda_examples() {
        let grid = g(32);
        let c1 = SpectralField::cosine(&grid, &[1, 0], 1.0);
        assert!(close(&lambda_power(&c1, 2.0), &c1, 1e-14));
        let c2 = SpectralField::cosine(&grid, &[2, 0], 1.0);
        assert!(close(&lambda_power(&c2, 1.0), &c2.scaled(2.0), 1e-14));
        let f = SpectralField::from_fn(&grid, |x| libm::sin(x[0] + 3.0 * x[1]) + 0.3 * libm::cos(5.0 * x[1]));
        let back = lambda_power(&lambda_power(&f, 1.0), -1.0);
        assert!(close(&back, &f, 1e-14));
        let with_mean = SpectralField::constant(&grid, 1.0);
        assert_eq!(lambda_power(&with_mean, -1.0).mean(), 0.0);
    }

    #[test]
    fn leray_examples() {
        let grid = g(32);
        let psi = SpectralField::from_fn(&grid, |x| libm::cos(x[0] + x[1]));
        let grad = gradient(&psi);
        let p = leray_project(&grad).unwrap();
        assert!(l2_norm_components(&p) < 1e-13);

        // v = (sin x₂ + ∂₁ψ, ∂₂ψ) projects to (sin x₂, 0)
        let mut v = grad.clone();
        v[0] += &SpectralField::from_fn(&grid, |x| libm::sin(x[1]));
        let p = leray_project(&v).unwrap();
        assert!(close(&p[0], &SpectralField::from_fn(&grid, |x| libm::sin(x[1])), 1e-14));
        assert!(p[1].max_abs_coeff() < 1e-14);

        let again = leray_project(&p).unwrap();
        assert!(close(&again[0], &p[0], 1e-15) && close(&again[1], &p[1], 1e-15));
    }

    #[test]
    fn leray_keeps_mean() {
        let grid = g(16);
        let v = [SpectralField::constant(&grid, 2.0), SpectralField::constant(&grid, -1.0)];
        let p = leray_project(&v).unwrap();
        assert_eq!(p[0].mean(), 2.0);
        assert_eq!(p[1].mean(), -1.0);
    }

    #[test]
    fn dealias_examples() {
        let grid = g(64);
        let low = &SpectralField::cosine(&grid, &[21, 0], 1.0) + &SpectralField::sine(&grid, &[0, 3], 1.0);
        assert!(close(&dealias(&low), &low, 0.0));
        let high = SpectralField::cosine(&grid, &[31, 0], 1.0);
        assert_eq!(dealias(&high).max_abs_coeff(), 0.0);
    }

    #[test]
    fn dealiased_product_matches_direct_convolution() {
        // direct convolution oracle on a small grid
        let grid = g(16);
        let cut = grid.dealias_cutoff();
        let mut a = SpectralField::zeros(&grid);
        let mut b = SpectralField::zeros(&grid);
        let modes_a = [([1i64, 2i64], Complex64::new(0.3, -0.2)), ([4, -1], Complex64::new(0.1, 0.4))];
        let modes_b = [([2i64, 3i64], Complex64::new(-0.5, 0.1)), ([5, 5], Complex64::new(0.2, 0.2))];
        for (k, c) in modes_a {
            a.set_mode(&k, c);
            a.set_mode(&[-k[0], -k[1]], c.conj());
        }
        for (k, c) in modes_b {
            b.set_mode(&k, c);
            b.set_mode(&[-k[0], -k[1]], c.conj());
        }
        let fast = product(&a, &b);
        let mut direct = SpectralField::zeros(&grid);
        for i in 0..grid.len() {
            let ka = grid.wavevector(i);
            for j in 0..grid.len() {
                let kb = grid.wavevector(j);
                let k = [ka[0] + kb[0], ka[1] + kb[1]];
                if k[0].abs() <= cut && k[1].abs() <= cut {
                    let idx = grid.flat_index(&k);
                    direct.coeffs_mut()[idx] += a.coeffs()[i] * b.coeffs()[j];
                }
            }
        }
        assert!(close(&fast, &direct, 1e-15));
    }

    #[test]
    fn advection_of_plane_wave() {
        // (1, 0)·∇ sin(x₁) = cos(x₁)
        let grid = g(16);
        let v = [SpectralField::constant(&grid, 1.0), SpectralField::zeros(&grid)];
        let u = SpectralField::sine(&grid, &[1, 0], 1.0);
        let a = advection(&v, &u).unwrap();
        assert!(close(&a, &SpectralField::cosine(&grid, &[1, 0], 1.0), 1e-15));
        assert!(solenoidal_residual(&v).unwrap() == 0.0);
        let w = [SpectralField::sine(&grid, &[1, 0], 1.0), SpectralField::zeros(&grid)];
        assert!((solenoidal_residual(&w).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rescale_examples() {
        let grid = g(32);
        let c1 = SpectralField::cosine(&grid, &[1, 0], 1.0);
        let c2 = SpectralField::cosine(&grid, &[2, 0], 1.0);
        assert!(close(&rescale(&c1, 1).unwrap(), &c2, 1e-15));
        assert_eq!(rescale(&c1, 0).unwrap(), c1);
        assert!(close(&rescale(&c2, -1).unwrap(), &c1, 1e-15));
        assert!(rescale(&c1, -1).is_err());
        let hi = SpectralField::cosine(&grid, &[0, 9], 1.0);
        assert!(matches!(rescale(&hi, 1), Err(Error::FrequencyOverflow { .. })));
    }
}
