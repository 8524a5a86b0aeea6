mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotns_core::coriolis_kernel::{
    apply_semigroup, interval_symbol, semigroup_symbol, stationary_symbol, xc_norm_parts, CoriolisParams,
};
use rotns_core::littlewood_paley::Exponent;
use rotns_core::verification::{random_divergence_free, region_decomposition};
use rotns_core::FrequencyGrid;

fn random_xi(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let xi: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if r > 0.5 {
            return xi;
        }
    }
}

#[test]
fn stationary_symbol_matches_time_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let xi = random_xi(&mut rng);
        let omega = rng.gen_range(-50.0..50.0);
        let params = CoriolisParams::new(omega, rng.gen_range(0.5..2.0)).unwrap();
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let a = omega * xi[2] / r2.sqrt();
        let b = params.nu * r2;
        let (c, s) = common::laplace_cos_sin(a, b);
        let k = stationary_symbol(&xi, &params).unwrap();
        assert!((k.identity - c).abs() <= 1e-9 * (c.abs() + s.abs()), "{} vs {}", k.identity, c);
        assert!((k.rotation - s).abs() <= 1e-9 * (c.abs() + s.abs()), "{} vs {}", k.rotation, s);
    }
}

#[test]
fn interval_symbol_matches_finite_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let xi = random_xi(&mut rng);
        let params = CoriolisParams::with_omega(rng.gen_range(-20.0..20.0));
        let h = rng.gen_range(1e-3..2.0);
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let a = params.omega * xi[2] / r2.sqrt();
        let c = common::integrate(&|t| (-r2 * t).exp() * (a * t).cos(), 0.0, h, 1e-15);
        let s = common::integrate(&|t| (-r2 * t).exp() * (a * t).sin(), 0.0, h, 1e-15);
        let k = interval_symbol(h, &xi, &params).unwrap();
        assert!((k.identity - c).abs() < 1e-12);
        assert!((k.rotation - s).abs() < 1e-12);
    }
}

#[test]
fn semigroup_composes() {
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_divergence_free(g, &mut rng, 3);
    let params = CoriolisParams::new(7.0, 0.3).unwrap();
    let a = apply_semigroup(0.2, &apply_semigroup(0.3, &u, &params).unwrap(), &params).unwrap();
    let b = apply_semigroup(0.5, &u, &params).unwrap();
    assert!(common::max_diff(&a, &b) < 1e-15);
    let id = apply_semigroup(0.0, &u, &params).unwrap();
    assert!(common::max_diff(&id, &u) == 0.0);
    let s = semigroup_symbol(0.0, &[1.0, 2.0, 3.0], &params).unwrap();
    assert_eq!((s.identity, s.rotation), (1.0, 0.0));
}

#[test]
fn weighted_norm_decreases_past_the_monotone_threshold() {
    // each per-mode weight is non-increasing in Omega once |Omega| >= |xi|^3 / |xi_3|
    let g = FrequencyGrid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = rotns_core::SpectralVectorField::random_real(g, &mut rng, |i| g.integer_frequency(i)[2] != 0);
    let start = (1..g.len())
        .filter(|&i| f.get(i).iter().any(|c| c.norm() > 0.0))
        .map(|i| {
            let xi = g.xi(i);
            let r: f64 = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.powi(3) / xi[2].abs()
        })
        .fold(0.0, f64::max);
    let mut prev = f64::INFINITY;
    for k in 0..12 {
        let omega = start * 2f64.powi(k);
        let (a, b) = xc_norm_parts(&f, Exponent::Finite(4.0), &CoriolisParams::with_omega(omega)).unwrap();
        assert!(a + b <= prev * (1.0 + 1e-12));
        prev = a + b;
    }
}

#[test]
fn region_masses_partition_the_total() {
    let g = FrequencyGrid::new(16, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_divergence_free(g, &mut rng, 5);
    let params = CoriolisParams::with_omega(30.0);
    for delta in [0.05, 0.3, 0.6, 0.9] {
        let r = region_decomposition(&f, delta, Exponent::Finite(4.0), &params).unwrap();
        assert!(r.additivity_defect < 1e-12);
        assert_eq!(r.a.modes + r.b.modes + r.c.modes, g.len() - 1);
    }
    // delta above every |xi| (in units of the lattice) makes A empty
    let r = region_decomposition(&f, 0.99, Exponent::Finite(4.0), &params).unwrap();
    assert!(r.a.w1 + r.a.w2 <= r.total.w1 + r.total.w2);
    // smallest lattice delta puts almost all mass of a smooth, compact spectrum in A
    let smooth = rotns_core::SpectralVectorField::from_fn(g, |i| {
        let xi = g.xi(i);
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let w = (-r2).exp() * xi[2] * xi[2];
        [num_complex::Complex64::new(w, 0.0), num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::new(0.0, 0.0)]
    });
    let r = region_decomposition(&smooth, 1e-3, Exponent::Finite(4.0), &params).unwrap();
    assert!(r.a_fraction() > 0.999, "{}", r.a_fraction());
}
