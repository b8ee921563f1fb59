use oldroyd_core::oldroyd::*;
use oldroyd_core::{ops, Error, GridSpec, SpectralField, TimeGrid};

fn params(mu: f64) -> PhysicalParams {
    PhysicalParams::with_viscosity(mu).unwrap()
}

fn exact_gradient(grid: &GridSpec, amplitude: f64, seed: u64) -> FluidState {
    make_initial_data(&InitialSpec::new(InitialFamily::ExactGradient, amplitude, seed), grid)
        .unwrap()
        .0
}

fn rel_diff(a: &[SpectralField], b: &[SpectralField]) -> f64 {
    let d: Vec<SpectralField> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    oldroyd_core::field::l2_norm_components(&d) / oldroyd_core::field::l2_norm_components(b).max(f64::MIN_POSITIVE)
}

#[test]
fn zero_state_is_a_fixed_point() {
    let grid = GridSpec::new(2, 16).unwrap();
    let zero = FluidState::zeros(&grid);
    let next = step(&zero, &params(1.0), 0.1).unwrap();
    assert_eq!(next.l2_norm(), 0.0);
    let out = run(&zero, &params(1.0), &TimeGrid::new(1.0, 0.1, 2).unwrap()).unwrap();
    for s in [&out.series.sigma, &out.series.velocity, &out.series.h, &out.series.pressure_grad] {
        assert!((0..s.len()).all(|n| s.blocks_at(n).iter().all(|x| *x == 0.0)));
    }
}

#[test]
fn constant_tensor_is_a_fixed_point() {
    let grid = GridSpec::new(2, 16).unwrap();
    let c = SpectralField::constant(&grid, 0.3);
    let z = SpectralField::zeros(&grid);
    let state = FluidState::new(z.clone(), vec![z.clone(), z.clone()], vec![c.clone(), z.clone(), z, c]).unwrap();
    let out = run(&state, &params(0.5), &TimeGrid::new(0.5, 0.05, 5).unwrap()).unwrap();
    assert!(out.final_state().l2_distance(&state) < 1e-14);
}

#[test]
fn no_motion_means_no_pressure() {
    let grid = GridSpec::new(2, 16).unwrap();
    let mut state = FluidState::zeros(&grid);
    state.sigma = SpectralField::cosine(&grid, &[1, 1], 0.2);
    let gp = compute_pressure(&state, &params(1.0)).unwrap();
    assert!(gp.iter().all(|g| g.is_zero()));
}

#[test]
fn constant_density_pressure_is_the_leray_pressure() {
    let grid = GridSpec::new(2, 32).unwrap();
    let state = exact_gradient(&grid, 0.1, 3);
    let g = momentum_forcing(&state, 1.0);
    let gp = compute_pressure(&state, &params(1.0)).unwrap();
    // ∇P is the gradient part of G
    let leray = ops::leray_project(&g).unwrap();
    let want: Vec<SpectralField> = g.iter().zip(&leray).map(|(a, b)| (a - b).without_mean()).collect();
    assert!(rel_diff(&gp, &want) < 1e-12);
}

#[test]
fn variable_density_pressure_solves_its_equation() {
    let grid = GridSpec::new(2, 32).unwrap();
    let (state, _) = make_initial_data(&InitialSpec::new(InitialFamily::General, 0.1, 4), &grid).unwrap();
    let g = momentum_forcing(&state, 1.0);
    let gp = compute_pressure(&state, &params(1.0)).unwrap();
    let a = &state.sigma + &SpectralField::constant(&grid, 1.0);
    let flux: Vec<SpectralField> = gp.iter().map(|p| ops::product(&a, p)).collect();
    let lhs = ops::divergence(&flux).unwrap();
    let rhs = ops::dealias(&ops::divergence(&g).unwrap());
    assert!((&lhs - &rhs).l2_norm() <= 1e-10 * rhs.l2_norm());
}

#[test]
fn exact_gradient_data_constraints() {
    let grid = GridSpec::new(2, 32).unwrap();
    let (_, big) = make_initial_data(&InitialSpec::new(InitialFamily::ExactGradient, 2e-2, 9), &grid).unwrap();
    let (_, small) = make_initial_data(&InitialSpec::new(InitialFamily::ExactGradient, 1e-2, 9), &grid).unwrap();
    assert!(big.divergence <= 1e-12 && big.density_flux <= 1e-12);
    let ratio = big.deformation / small.deformation;
    assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
}

#[test]
fn general_data_restores_density_flux() {
    let grid = GridSpec::new(3, 16).unwrap();
    let (state, rep) = make_initial_data(&InitialSpec::new(InitialFamily::General, 0.05, 2), &grid).unwrap();
    assert!(!state.sigma.is_zero());
    assert!(rep.density_flux <= 1e-12, "{rep:?}");
    assert!(rep.correction_iterations > 0);
}

#[test]
fn zero_amplitude_gives_zero_data() {
    let grid = GridSpec::new(2, 16).unwrap();
    for family in [InitialFamily::ExactGradient, InitialFamily::General] {
        let (state, rep) = make_initial_data(&InitialSpec::new(family, 0.0, 1), &grid).unwrap();
        assert_eq!(state, FluidState::zeros(&grid));
        assert_eq!(rep.deformation, 0.0);
        assert_eq!(rep.density_flux, 0.0);
    }
}

#[test]
fn custom_data_checks() {
    let grid = GridSpec::new(2, 16).unwrap();
    let z = SpectralField::zeros(&grid);
    let bumpy = SpectralField::cosine(&grid, &[1, 0], 0.1);
    let r = make_custom_initial_data(bumpy, vec![z.clone(), z.clone()], vec![z.clone(); 4]);
    assert!(matches!(r, Err(Error::IncompatibleData(_))));
    let compressive = vec![SpectralField::sine(&grid, &[1, 0], 1.0), z.clone()];
    let r = make_custom_initial_data(z.clone(), compressive, vec![z.clone(); 4]);
    assert!(matches!(r, Err(Error::NotSolenoidal { .. })));
    let swirl = vec![z.clone(), SpectralField::cosine(&grid, &[1, 0], 1.0)];
    let (_, rep) = make_custom_initial_data(SpectralField::constant(&grid, 0.2), swirl, vec![z; 4]).unwrap();
    assert!(rep.density_flux <= 1e-12 && rep.deformation <= 1e-12 && rep.divergence <= 1e-12);
}

#[test]
fn coupled_transform_round_trip() {
    let grid = GridSpec::new(3, 16).unwrap();
    let state = exact_gradient(&grid, 1.0, 11);
    let back = transform_from_coupled(&transform_to_coupled(&state).unwrap()).unwrap();
    assert!(rel_diff(&back.velocity, &state.velocity) < 1e-12);
}

#[test]
fn coupled_transform_single_mode() {
    let grid = GridSpec::new(2, 16).unwrap();
    let z = SpectralField::zeros(&grid);
    let state = FluidState::new(z.clone(), vec![z.clone(), SpectralField::cosine(&grid, &[1, 0], 1.0)], vec![z.clone(); 4]).unwrap();
    let c = transform_to_coupled(&state).unwrap();
    // d^{10} = −Λ^{-1}∂_0 cos x₀ = sin x₀, the rest vanish
    assert!(c.d[2].max_abs_difference(&SpectralField::sine(&grid, &[1, 0], 1.0)) < 1e-16);
    for n in [0, 1, 3] {
        assert!(c.d[n].is_zero());
    }
    let mut moving = state.clone();
    moving.velocity[1] = &moving.velocity[1] + &SpectralField::constant(&grid, 0.5);
    assert!(matches!(transform_to_coupled(&moving), Err(Error::NonzeroMean { .. })));
    assert!(transform_to_coupled(&FluidState::zeros(&grid)).unwrap().d.iter().all(|f| f.is_zero()));
}

#[test]
fn phi_on_zero_data_stops_at_once() {
    let grid = GridSpec::new(2, 16).unwrap();
    let out = phi_iteration(&FluidState::zeros(&grid), &params(1.0), &TimeGrid::new(0.2, 0.05, 1).unwrap(), 5, 1e-8).unwrap();
    assert_eq!(out.iterations(), 1);
    assert_eq!(out.final_state().l2_norm(), 0.0);
}

#[test]
fn phi_fixed_point_is_the_direct_run() {
    let grid = GridSpec::new(2, 16).unwrap();
    let state = exact_gradient(&grid, 1e-3, 5);
    let tg = TimeGrid::new(0.2, 0.02, 5).unwrap();
    let out = phi_iteration(&state, &params(1.0), &tg, 12, 1e-10).unwrap();
    assert!(out.distances.windows(2).all(|w| w[1] < w[0]), "{:?}", out.distances);
    assert!(out.flags.iter().all(|f| f.all()));
    let direct = run(&state, &params(1.0), &tg).unwrap();
    assert!(out.final_state().l2_distance(direct.final_state()) < 1e-9);
}

#[test]
fn phi_reports_non_contraction() {
    let grid = GridSpec::new(2, 16).unwrap();
    let state = exact_gradient(&grid, 1e-3, 5);
    let r = phi_iteration(&state, &params(1.0), &TimeGrid::new(0.2, 0.02, 5).unwrap(), 2, 1e-14);
    match r {
        Err(Error::NonContraction { distances }) => assert_eq!(distances.len(), 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn coupled_matches_direct_without_initial_stress() {
    let grid = GridSpec::new(2, 16).unwrap();
    let mut state = exact_gradient(&grid, 1e-2, 6);
    for h in &mut state.h {
        *h = SpectralField::zeros(&grid);
    }
    let cmp = cross_compare(&state, &params(1.0), &TimeGrid::new(0.5, 0.01, 10).unwrap()).unwrap();
    assert!(cmp.max_relative() < 1e-7, "{}", cmp.max_relative());
}

#[test]
fn taylor_green_self_convergence() {
    let run_at = |m: usize, dt: f64| {
        let grid = GridSpec::new(2, m).unwrap();
        let z = SpectralField::zeros(&grid);
        let from = |f: fn(f64, f64) -> f64| SpectralField::from_fn(&grid, move |x| f(x[0], x[1]));
        let v = vec![from(|x, y| 0.5 * x.sin() * y.cos()), from(|x, y| -0.5 * x.cos() * y.sin())];
        let state = FluidState::new(z.clone(), v, vec![z; 4]).unwrap();
        let out = run(&state, &params(0.1), &TimeGrid::new(0.5, dt, 1000).unwrap()).unwrap();
        out.final_state().clone()
    };
    let coarse = run_at(32, 0.02);
    let fine = run_at(64, 0.005);
    let fine_on_coarse: Vec<SpectralField> = fine
        .velocity
        .iter()
        .map(|f| {
            let g = *coarse.grid();
            let mut out = SpectralField::zeros(&g);
            for i in 0..g.len() {
                let k = g.wavevector(i);
                if !g.is_nyquist(i) {
                    out.coeffs_mut()[i] = f.mode(&k[..2]);
                }
            }
            out
        })
        .collect();
    assert!(rel_diff(&coarse.velocity, &fine_on_coarse) <= 1e-6);
}

#[test]
fn twin_runs_converge() {
    let grid = GridSpec::new(2, 16).unwrap();
    let state = exact_gradient(&grid, 0.05, 8);
    let at = |dt: f64| run(&state, &params(1.0), &TimeGrid::new(0.5, dt, 1000).unwrap()).unwrap().final_state().clone();
    let (a, b, c) = (at(0.1), at(0.05), at(0.025));
    let ratio = a.l2_distance(&b) / b.l2_distance(&c);
    assert!(ratio >= 3.0, "ratio {ratio}");
}

#[test]
fn constant_density_is_preserved() {
    let grid = GridSpec::new(2, 16).unwrap();
    let state = exact_gradient(&grid, 0.05, 12);
    let out = run(&state, &params(1.0), &TimeGrid::new(0.3, 0.05, 1).unwrap()).unwrap();
    for s in &out.snapshots {
        assert!(s.sigma.is_zero());
        let g = momentum_forcing(s, 1.0);
        let leray = ops::leray_project(&g).unwrap();
        let want: Vec<SpectralField> = g.iter().zip(&leray).map(|(a, b)| (a - b).without_mean()).collect();
        assert!(rel_diff(&s.pressure_grad, &want) < 1e-10);
        assert!(ops::solenoidal_residual(&s.velocity).unwrap() <= 1e-10);
    }
}

#[test]
fn density_mean_and_range_are_kept() {
    let grid = GridSpec::new(2, 16).unwrap();
    let (state, _) = make_initial_data(&InitialSpec::new(InitialFamily::General, 0.1, 13), &grid).unwrap();
    let dt = 0.05;
    let out = run(&state, &params(1.0), &TimeGrid::new(1.0, dt, 1).unwrap()).unwrap();
    let m0 = state.sigma.mean();
    let floor0 = state.min_inverse_density();
    for s in &out.snapshots {
        assert!((s.sigma.mean() - m0).abs() <= 1e-10);
        assert!(s.min_inverse_density() >= floor0 - 10.0 * dt * dt * 0.1);
    }
}

#[test]
fn density_floor_aborts() {
    let grid = GridSpec::new(2, 16).unwrap();
    let mut state = FluidState::zeros(&grid);
    state.sigma = SpectralField::cosine(&grid, &[1, 0], 0.95);
    let r = run(&state, &params(1.0), &TimeGrid::new(0.1, 0.05, 1).unwrap());
    assert!(matches!(r, Err(Error::DensityFloor { .. })));
}

#[test]
fn cfl_violation_aborts() {
    let grid = GridSpec::new(2, 16).unwrap();
    let mut state = exact_gradient(&grid, 1.0, 1);
    for v in &mut state.velocity {
        v.scale_in_place(50.0);
    }
    assert!(matches!(step(&state, &params(1.0), 0.1), Err(Error::Cfl { .. })));
}
