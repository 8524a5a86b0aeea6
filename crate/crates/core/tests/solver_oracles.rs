mod common;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotns_core::coriolis_kernel::CoriolisParams;
use rotns_core::solvers::{
    pde_residual, solve_stationary, solve_transient, InitialIterate, SolveFailure, SolveStatus,
    StationarySolveConfig, TransientSolveConfig,
};
use rotns_core::spectral::leray_project;
use rotns_core::verification::{manufactured_band, manufactured_force, random_band_limited, random_divergence_free};
use rotns_core::{FrequencyGrid, NaiveDft, SpectralVectorField};

fn linear() -> StationarySolveConfig {
    StationarySolveConfig {
        nonlinear: false,
        ..StationarySolveConfig::default()
    }
}

#[test]
fn stokes_inverse_without_rotation() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_band_limited(g, &mut rng, 3);
    let sol = solve_stationary(&NaiveDft, &f, &CoriolisParams::new(0.0, 0.5).unwrap(), &linear()).unwrap();
    let pf = leray_project(&f);
    let expected = pf.map_modes(|i, v| {
        let xi = g.xi(i);
        let d = 0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        v.map(|c| c / d)
    });
    assert!(common::max_diff(&sol.u, &expected) < 1e-15);
    assert_eq!(sol.report.status, SolveStatus::Converged);
}

#[test]
fn stationary_linear_solution_satisfies_the_mode_equation() {
    // nu |xi|^2 u + Omega P(e3 x u) = P F, checked mode by mode
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_band_limited(g, &mut rng, 3);
    let params = CoriolisParams::new(13.0, 0.7).unwrap();
    let sol = solve_stationary(&NaiveDft, &f, &params, &linear()).unwrap();
    let pf = leray_project(&f);
    let cor = leray_project(&sol.u.map_modes(|_, v| [-v[1] * params.omega, v[0] * params.omega, Complex64::new(0.0, 0.0)]));
    for i in 1..g.len() {
        let xi = g.xi(i);
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let (u, c, p) = (sol.u.get(i), cor.get(i), pf.get(i));
        for a in 0..3 {
            assert!((u[a] * (params.nu * r2) + c[a] - p[a]).norm() < 1e-14);
        }
    }
}

#[test]
fn fixed_point_is_independent_of_the_starting_iterate() {
    let g = FrequencyGrid::new(12, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_divergence_free(g, &mut rng, 2).scale(0.3);
    let params = CoriolisParams::with_omega(5.0);
    let cfg = StationarySolveConfig {
        tol: 1e-13,
        ..StationarySolveConfig::default()
    };
    let a = solve_stationary(&NaiveDft, &f, &params, &cfg).unwrap();
    let b = solve_stationary(
        &NaiveDft,
        &f,
        &params,
        &StationarySolveConfig {
            initial: InitialIterate::Zero,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert!(common::max_diff(&a.u, &b.u) < 1e-12 * a.u.max_abs());
    let r = &a.report;
    assert!(4.0 * r.contraction_estimate * r.forcing_norm < 1.0);
    assert!(r.solution_norm <= 2.0 * r.forcing_norm);
    assert!(r.max_divergence < 1e-14 && r.hermitian_defect < 1e-14);
}

#[test]
fn manufactured_solution_is_recovered() {
    let g = FrequencyGrid::new(12, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u_star = random_divergence_free(g, &mut rng, manufactured_band(&g)).scale(0.05);
    let params = CoriolisParams::with_omega(2.0);
    let f = manufactured_force(&NaiveDft, &u_star, &params).unwrap();
    let cfg = StationarySolveConfig {
        tol: 1e-14,
        ..StationarySolveConfig::default()
    };
    let sol = solve_stationary(&NaiveDft, &f, &params, &cfg).unwrap();
    assert!(common::max_diff(&sol.u, &u_star) < 1e-13 * u_star.max_abs());
    let r = pde_residual(&NaiveDft, &sol.u, &f, &params, &cfg.norm, true).unwrap();
    assert!(r < 1e-12, "{r}");
}

#[test]
fn oversized_forcing_blows_up() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_divergence_free(g, &mut rng, 2).scale(500.0);
    let cfg = StationarySolveConfig {
        max_iter: 500,
        ..StationarySolveConfig::default()
    };
    match solve_stationary(&NaiveDft, &f, &CoriolisParams::with_omega(0.0), &cfg) {
        Err(SolveFailure::Blowup { report }) => assert!(report.blowup_iteration.is_some()),
        Err(SolveFailure::NonConvergence { .. }) => {}
        other => panic!("expected failure, got {:?}", other.map(|s| s.report.status)),
    }
}

#[test]
fn transient_heat_flow_is_exact() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u0 = random_divergence_free(g, &mut rng, 3);
    let cfg = TransientSolveConfig {
        dt: 0.03,
        t_end: 0.1,
        nonlinear: false,
        ..TransientSolveConfig::default()
    };
    let params = CoriolisParams::with_omega(0.0);
    let sol = solve_transient(&NaiveDft, &u0, None, &params, &cfg).unwrap();
    let expected = u0.map_modes(|i, v| {
        let xi = g.xi(i);
        let d = (-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * 0.1).exp();
        v.map(|c| c * d)
    });
    assert!(common::max_diff(&sol.u, &expected) < 1e-15);
    assert!((sol.samples.last().unwrap().time - 0.1).abs() < 1e-15);
}

#[test]
fn transient_forced_linear_flow_reaches_the_stationary_state() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_band_limited(g, &mut rng, 2);
    let params = CoriolisParams::with_omega(9.0);
    let stat = solve_stationary(&NaiveDft, &f, &params, &linear()).unwrap();
    let cfg = TransientSolveConfig {
        dt: 0.5,
        t_end: 40.0,
        nonlinear: false,
        record_stride: 100,
        ..TransientSolveConfig::default()
    };
    let zero = SpectralVectorField::zeros(g);
    let sol = solve_transient(&NaiveDft, &zero, Some(&f), &params, &cfg).unwrap();
    assert!(common::max_diff(&sol.u, &stat.u) < 1e-12);
}
