use alloc::vec;

use super::{checked_velocity, integrate, ScalarSource, Trajectory, VectorSource};
use crate::error::Result;
use crate::field::SpectralField;
use crate::ops;
use crate::time::TimeGrid;

/// `∂_t u + v·∇u = g` with a divergence-free, time-dependent `v`.
///
/// The velocity is checked (divergence and CFL) at every stage.
pub fn solve_transport(
    u0: &SpectralField,
    velocity: VectorSource<'_>,
    forcing: Option<ScalarSource<'_>>,
    tg: &TimeGrid,
) -> Result<Trajectory> {
    let dt = tg.dt();
    integrate(vec![u0.clone()], tg, &[0.0], |stage, u| {
        let v = checked_velocity(&velocity(stage.time), dt, true)?;
        let mut out = ops::advect_samples(&v, &u[0]);
        out.scale_in_place(-1.0);
        if let Some(g) = forcing {
            out += &g(stage.time);
        }
        Ok(vec![out])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::grid::GridSpec;
    use alloc::vec::Vec;

    #[test]
    fn zero_velocity_keeps_data() {
        let grid = GridSpec::new(2, 16).unwrap();
        let u0 = SpectralField::cosine(&grid, &[1, 2], 1.0);
        let zero = |_: f64| vec![SpectralField::zeros(&grid); 2];
        let run = solve_transport(&u0, &zero, None, &TimeGrid::new(1.0, 0.1, 5).unwrap()).unwrap();
        assert_eq!(run.final_state()[0], u0);
        assert_eq!(run.times.len(), 3);
    }

    #[test]
    fn translation() {
        let grid = GridSpec::new(2, 32).unwrap();
        let u0 = SpectralField::cosine(&grid, &[1, 0], 1.0);
        let v = |_: f64| vec![SpectralField::constant(&grid, 1.0), SpectralField::zeros(&grid)];
        let tg = TimeGrid::fitted(core::f64::consts::PI, 1e-3, 1000).unwrap();
        let run = solve_transport(&u0, &v, None, &tg).unwrap();
        let want = u0.scaled(-1.0);
        assert!(run.final_state()[0].max_abs_difference(&want) < 1e-8);
    }

    #[test]
    fn cfl_and_divergence_guards() {
        let grid = GridSpec::new(2, 32).unwrap();
        let u0 = SpectralField::cosine(&grid, &[1, 0], 1.0);
        let fast = |_: f64| vec![SpectralField::constant(&grid, 10.0), SpectralField::zeros(&grid)];
        let tg = TimeGrid::new(1.0, 0.1, 1).unwrap();
        assert!(matches!(solve_transport(&u0, &fast, None, &tg), Err(Error::Cfl { .. })));
        let compressive = |_: f64| vec![SpectralField::sine(&grid, &[1, 0], 0.1), SpectralField::zeros(&grid)];
        assert!(matches!(
            solve_transport(&u0, &compressive, None, &tg),
            Err(Error::NotSolenoidal { .. })
        ));
    }

    #[test]
    fn forcing_enters_linearly() {
        let grid = GridSpec::new(2, 16).unwrap();
        let zero = |_: f64| vec![SpectralField::zeros(&grid); 2];
        let g = |t: f64| SpectralField::cosine(&grid, &[1, 1], t);
        let run = solve_transport(&SpectralField::zeros(&grid), &zero, Some(&g), &TimeGrid::new(1.0, 0.25, 1).unwrap()).unwrap();
        let want = SpectralField::cosine(&grid, &[1, 1], 0.5);
        assert!(run.final_state()[0].max_abs_difference(&want) < 1e-15);
        let times: Vec<f64> = run.times.clone();
        assert_eq!(times, [0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
