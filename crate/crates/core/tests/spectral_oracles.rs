mod common;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotns_core::coriolis_kernel::CoriolisParams;
use rotns_core::solvers::recover_pressure;
use rotns_core::spectral::{energy_transfer, leray_project, nonlinear_term};
use rotns_core::verification::random_divergence_free;
use rotns_core::{FrequencyGrid, NaiveDft, PhysicalVectorField, SpectralTransform, SpectralVectorField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn two_mode_convolution_oracle() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    // two divergence-free real modes: k = (1,0,0) with u || e2, k = (0,1,1) with u || (1,0,0)
    let mut u = SpectralVectorField::zeros(g);
    let p = g.flat([1, 0, 0]);
    let q = g.flat([0, 1, 1]);
    u.set(p, [c(0.0, 0.0), c(0.3, -0.2), c(0.1, 0.4)]);
    u.set(g.mirror(p), [c(0.0, 0.0), c(0.3, 0.2), c(0.1, -0.4)]);
    u.set(q, [c(0.5, 0.25), c(0.0, 0.0), c(0.0, 0.0)]);
    u.set(g.mirror(q), [c(0.5, -0.25), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(u.max_divergence() < 1e-15);

    let (n, warn) = nonlinear_term(&NaiveDft, &u).unwrap();
    assert!(!warn);
    let mut expected = SpectralVectorField::zeros(g);
    for i in 0..3 {
        for j in 0..3 {
            for (k, v) in common::convolve(&g, u.component(i), u.component(j)) {
                let Some(flat) = common::flat_of(&g, k) else { continue };
                if flat == 0 || !g.is_retained(flat) {
                    continue;
                }
                let mut cur = expected.get(flat);
                cur[i] += c(0.0, 1.0) * v * g.xi(flat)[j];
                expected.set(flat, cur);
            }
        }
    }
    assert!(common::max_diff(&n, &expected) < 1e-15, "{}", common::max_diff(&n, &expected));
}

#[test]
fn beltrami_field_has_gradient_nonlinearity_and_known_pressure() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let u = NaiveDft
        .forward(&PhysicalVectorField::from_fn(g, |x| {
            [x[2].sin() + x[1].cos(), x[2].cos(), x[1].sin()]
        }))
        .unwrap();
    let (n, _) = nonlinear_term(&NaiveDft, &u).unwrap();
    assert!(n.max_abs() > 0.1);
    assert!(leray_project(&n).max_abs() < 1e-15);

    let zero = SpectralVectorField::zeros(g);
    let p = recover_pressure(&NaiveDft, &u, &zero, &CoriolisParams::with_omega(0.0)).unwrap();
    let phys = NaiveDft.inverse_scalar(&g, p.data()).unwrap();
    for (m, val) in phys.iter().enumerate() {
        let idx = g.unflat(m);
        let y = g.coordinate(idx[1]);
        let z = g.coordinate(idx[2]);
        assert!((val + z.sin() * y.cos()).abs() < 1e-14);
    }
}

#[test]
fn energy_transfer_vanishes_and_output_is_real() {
    let g = FrequencyGrid::new(12, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..3 {
        let u = random_divergence_free(g, &mut rng, g.dealias_cutoff());
        let scale = u.inner(&u).re;
        assert!(energy_transfer(&NaiveDft, &u).unwrap().abs() < 1e-13 * scale);
        let (n, _) = nonlinear_term(&NaiveDft, &u).unwrap();
        assert!(n.hermitian_defect() <= 1e-14 * n.max_abs(), "{} {}", n.hermitian_defect(), n.max_abs());
        assert_eq!(n.energy_beyond_cutoff(), 0.0);
    }
}

#[test]
fn divergence_of_nonlinearity_matches_pressure_poisson() {
    // xi . N = -|xi|^2 (i^{-1}) p relation: recovered p reproduces the gradient part of N
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_divergence_free(g, &mut rng, 1);
    let zero = SpectralVectorField::zeros(g);
    let params = CoriolisParams::with_omega(0.0);
    let p = recover_pressure(&NaiveDft, &u, &zero, &params).unwrap();
    let (n, _) = nonlinear_term(&NaiveDft, &u).unwrap();
    let grad_part = n.sub(&leray_project(&n));
    for i in 1..g.len() {
        let xi = g.xi(i);
        let gp = grad_part.get(i);
        for a in 0..3 {
            assert!((gp[a] + c(0.0, 1.0) * p.data()[i] * xi[a]).norm() < 1e-15);
        }
    }
}
