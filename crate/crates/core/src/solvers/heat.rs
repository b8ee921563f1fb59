use alloc::format;
use alloc::vec;

use super::{integrate, ScalarSource, Trajectory};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::time::TimeGrid;

/// `∂_t u − μΔu = f`. With no forcing every mode is multiplied by
/// `e^{-μ|k|² dt}` per step and nothing else happens.
pub fn solve_heat(u0: &SpectralField, forcing: Option<ScalarSource<'_>>, mu: f64, tg: &TimeGrid) -> Result<Trajectory> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("viscosity {mu} must be positive")));
    }
    let grid = *u0.grid();
    integrate(vec![u0.clone()], tg, &[mu], |stage, _| {
        Ok(vec![match forcing {
            Some(f) => f(stage.time),
            None => SpectralField::zeros(&grid),
        }])
    })
}
