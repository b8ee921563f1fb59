use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops;

/// Convergence record of a Richardson solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonReport {
    pub iterations: usize,
    /// Final `‖f + div(a∇u)‖ / ‖f‖`.
    pub residual: f64,
    /// Ratio of successive residual norms.
    pub contraction: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub potential: SpectralField,
    pub gradient: Vec<SpectralField>,
    pub report: PoissonReport,
}

/// `−div(a∇u) = f` by Richardson iteration preconditioned with `−āΔ`,
/// `ā` the mean of `a`. Converges when the relative oscillation of `a` is
/// below one.
pub fn solve_variable_poisson(a: &SpectralField, f: &SpectralField, tol: f64, max_iter: usize) -> Result<PoissonSolution> {
    solve_variable_poisson_from(a, f, None, tol, max_iter)
}

/// As [`solve_variable_poisson`], starting from `initial`.
pub fn solve_variable_poisson_from(
    a: &SpectralField,
    f: &SpectralField,
    initial: Option<&SpectralField>,
    tol: f64,
    max_iter: usize,
) -> Result<PoissonSolution> {
    a.check_same_grid(f)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let grid = *a.grid();
    let a_samples = a.to_samples();
    let min = a_samples.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::CoefficientNotPositive { min });
    }
    let mean = f.mean();
    if mean.abs() > 1e-12 * f.max_abs_coeff().max(f64::MIN_POSITIVE) || (mean != 0.0 && f.without_mean().is_zero()) {
        return Err(Error::NonzeroMean { mean });
    }
    // imaginary sample content is invisible to the residual and would never decay
    let f = ops::dealias(&f.without_mean()).hermitian_part();
    let a_bar = a.mean();

    let residual = |u: &SpectralField| -> SpectralField {
        let flux: Vec<SpectralField> = ops::gradient(u)
            .iter()
            .map(|g| {
                let s: Vec<f64> = g.to_samples().iter().zip(&a_samples).map(|(x, c)| x * c).collect();
                ops::from_physical(&grid, &s)
            })
            .collect();
        let mut r = ops::divergence(&flux).expect("one component per axis");
        r += &f;
        r
    };

    let mut u = match initial {
        Some(u0) => {
            u0.check_same_grid(a)?;
            u0.without_mean().hermitian_part()
        }
        None => SpectralField::zeros(&grid),
    };
    let f_norm = f.l2_norm();
    let mut report = PoissonReport {
        iterations: 0,
        residual: 0.0,
        contraction: Vec::new(),
    };
    if f_norm == 0.0 && u.is_zero() {
        return Ok(PoissonSolution {
            gradient: ops::gradient(&u),
            potential: u,
            report,
        });
    }
    let scale = if f_norm > 0.0 { f_norm } else { 1.0 };
    let mut r = residual(&u);
    let mut r_norm = r.l2_norm();
    while r_norm > tol * f_norm {
        if report.iterations == max_iter || !r_norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations: report.iterations,
                residual: r_norm / scale,
            });
        }
        u.axpy(1.0 / a_bar, &ops::inverse_neg_laplacian(&r));
        r = residual(&u);
        let next = r.l2_norm();
        report.contraction.push(next / r_norm);
        r_norm = next;
        report.iterations += 1;
    }
    report.residual = r_norm / scale;
    Ok(PoissonSolution {
        gradient: ops::gradient(&u),
        potential: u,
        report,
    })
}
