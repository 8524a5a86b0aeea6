//! Fourier symbols of the linear Stokes-Coriolis problem.
//!
//! With `a = Omega xi_3 / |xi|` and `b = nu |xi|^2` the semigroup acts per mode as
//!
//! ```text
//! G(t) = e^{-b t} ( cos(a t) I + sin(a t) R(xi) )
//! ```
//!
//! where `R(xi) v = v x xi / |xi|`. On divergence-free vectors `R^2 = -I`, so
//! `G` is `exp(t (-b + a R))`, the flow of `u_t = nu Lap u - Omega P(e3 x u)`.
//! The sine carries the factor `t` like the cosine does.
//!
//! Time integrals follow from `int_0^h e^{(-b + i a) s} ds = expm1(z h) / z`,
//! `z = -b + i a`; the infinite-horizon limit is
//! `(b I + a R) / (a^2 + b^2)`, which at `nu = 1` reads
//! `(|xi|^4 I + Omega xi_3 |xi| R) / (|xi|^6 + Omega^2 xi_3^2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralVectorField;
use crate::grid::FrequencyGrid;
use crate::linalg::{self, CVec3, Mat3, Vec3, CZERO};
use crate::littlewood_paley::Exponent;
use crate::math;

/// Coriolis parameter and viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoriolisParams {
    pub omega: f64,
    pub nu: f64,
}

impl CoriolisParams {
    pub fn new(omega: f64, nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidViscosity(nu));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidConfig("Coriolis parameter must be finite"));
        }
        Ok(Self { omega, nu })
    }

    /// Unit viscosity.
    pub fn with_omega(omega: f64) -> Self {
        Self { omega, nu: 1.0 }
    }

    /// `(a, b) = (Omega xi_3 / |xi|, nu |xi|^2)`.
    #[inline]
    fn rates(&self, xi: &Vec3) -> (f64, f64) {
        let r2 = linalg::dot(xi, xi);
        let r = math::sqrt(r2);
        (self.omega * xi[2] / r, self.nu * r2)
    }
}

/// The antisymmetric matrix `R(xi)` with rows
/// `(0, xi3, -xi2)`, `(-xi3, 0, xi1)`, `(xi2, -xi1, 0)` over `|xi|`.
pub fn rotation_matrix(xi: &Vec3) -> Result<Mat3> {
    let r = linalg::norm(xi);
    if r == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let [x1, x2, x3] = [xi[0] / r, xi[1] / r, xi[2] / r];
    Ok(Mat3([[0.0, x3, -x2], [-x3, 0.0, x1], [x2, -x1, 0.0]]))
}

/// `R(xi) v = v x xi / |xi|` without forming the matrix.
#[inline]
pub fn rotate_mode(xi: &Vec3, v: &CVec3) -> CVec3 {
    let r = linalg::norm(xi);
    if r == 0.0 {
        return [CZERO; 3];
    }
    let [x1, x2, x3] = [xi[0] / r, xi[1] / r, xi[2] / r];
    [
        v[1] * x3 - v[2] * x2,
        v[2] * x1 - v[0] * x3,
        v[0] * x2 - v[1] * x1,
    ]
}

/// A symbol of the form `alpha I + beta R(xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSymbol {
    pub identity: f64,
    pub rotation: f64,
}

impl KernelSymbol {
    pub const ZERO: KernelSymbol = KernelSymbol {
        identity: 0.0,
        rotation: 0.0,
    };

    pub fn matrix(&self, xi: &Vec3) -> Result<Mat3> {
        Ok(Mat3::IDENTITY.scaled(self.identity) + rotation_matrix(xi)?.scaled(self.rotation))
    }

    #[inline]
    pub fn apply(&self, xi: &Vec3, v: &CVec3) -> CVec3 {
        let rv = rotate_mode(xi, v);
        let (a, b) = (self.identity, self.rotation);
        [v[0] * a + rv[0] * b, v[1] * a + rv[1] * b, v[2] * a + rv[2] * b]
    }
}

fn check_xi(xi: &Vec3) -> Result<()> {
    if linalg::dot(xi, xi) == 0.0 {
        Err(Error::ZeroWavevector)
    } else {
        Ok(())
    }
}

/// `G(t)` at one wavevector.
pub fn semigroup_symbol(t: f64, xi: &Vec3, params: &CoriolisParams) -> Result<KernelSymbol> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    check_xi(xi)?;
    let (a, b) = params.rates(xi);
    let decay = math::exp(-b * t);
    Ok(KernelSymbol {
        identity: math::cos(a * t) * decay,
        rotation: math::sin(a * t) * decay,
    })
}

/// `int_0^infinity G(t) dt` at one wavevector.
pub fn stationary_symbol(xi: &Vec3, params: &CoriolisParams) -> Result<KernelSymbol> {
    check_xi(xi)?;
    Ok(stationary_unchecked(xi, params))
}

#[inline]
fn stationary_unchecked(xi: &Vec3, params: &CoriolisParams) -> KernelSymbol {
    let r2 = linalg::dot(xi, xi);
    let r = math::sqrt(r2);
    let r6 = r2 * r2 * r2;
    let nu = params.nu;
    let den = nu * nu * r6 + params.omega * params.omega * xi[2] * xi[2];
    KernelSymbol {
        identity: nu * r2 * r2 / den,
        rotation: params.omega * xi[2] * r / den,
    }
}

/// `int_0^h G(s) ds` at one wavevector.
pub fn interval_symbol(h: f64, xi: &Vec3, params: &CoriolisParams) -> Result<KernelSymbol> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    check_xi(xi)?;
    Ok(interval_unchecked(h, xi, params))
}

#[inline]
fn interval_unchecked(h: f64, xi: &Vec3, params: &CoriolisParams) -> KernelSymbol {
    let (a, b) = params.rates(xi);
    // expm1(z h) for z = -b + i a, written to avoid cancellation for small h
    let x = -b * h;
    let y = a * h;
    let em = math::expm1(x);
    let half = math::sin(0.5 * y);
    let re = em * math::cos(y) - 2.0 * half * half;
    let im = math::exp(x) * math::sin(y);
    let val = Complex64::new(re, im) / Complex64::new(-b, a);
    KernelSymbol {
        identity: val.re,
        rotation: val.im,
    }
}

/// `w1(xi) = nu |xi|^{6-3/p} / (nu^2 |xi|^6 + Omega^2 xi_3^2)`.
pub fn weight_w1(xi: &Vec3, p: Exponent, params: &CoriolisParams) -> Result<f64> {
    check_weight_args(xi, p)?;
    Ok(weight_coefficients(xi, p, params).0)
}

/// `w2(xi) = Omega |xi_3| |xi|^{3-3/p} / (nu^2 |xi|^6 + Omega^2 xi_3^2) R(xi)`.
pub fn weight_w2(xi: &Vec3, p: Exponent, params: &CoriolisParams) -> Result<Mat3> {
    check_weight_args(xi, p)?;
    Ok(rotation_matrix(xi)?.scaled(weight_coefficients(xi, p, params).1))
}

fn check_weight_args(xi: &Vec3, p: Exponent) -> Result<()> {
    check_xi(xi)?;
    if let Exponent::Finite(v) = p {
        if v <= 1.0 {
            return Err(Error::InvalidExponent(v));
        }
    }
    Ok(())
}

/// Scalar parts `(w1, c2)` with `w2 = c2 R(xi)`.
#[inline]
pub fn weight_coefficients(xi: &Vec3, p: Exponent, params: &CoriolisParams) -> (f64, f64) {
    let r2 = linalg::dot(xi, xi);
    let r = math::sqrt(r2);
    let r6 = r2 * r2 * r2;
    let inv_p = p.reciprocal();
    let nu = params.nu;
    let den = nu * nu * r6 + params.omega * params.omega * xi[2] * xi[2];
    let w1 = nu * math::powf(r, 6.0 - 3.0 * inv_p) / den;
    let c2 = params.omega * xi[2].abs() * math::powf(r, 3.0 - 3.0 * inv_p) / den;
    (w1, c2)
}

/// Per-mode `G(t) u`.
pub fn apply_semigroup(
    t: f64,
    u: &SpectralVectorField,
    params: &CoriolisParams,
) -> Result<SpectralVectorField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let g = *u.grid();
    Ok(u.map_modes(|i, v| {
        let xi = g.xi(i);
        let (a, b) = params.rates(&xi);
        let decay = math::exp(-b * t);
        KernelSymbol {
            identity: math::cos(a * t) * decay,
            rotation: math::sin(a * t) * decay,
        }
        .apply(&xi, &v)
    }))
}

/// Per-mode `int_0^infinity G(t) dt F`.
pub fn apply_stationary_kernel(
    f: &SpectralVectorField,
    params: &CoriolisParams,
) -> SpectralVectorField {
    let g = *f.grid();
    f.map_modes(|i, v| {
        let xi = g.xi(i);
        stationary_unchecked(&xi, params).apply(&xi, &v)
    })
}

/// Exponential-integrator update `u + int_0^h G(s) ds f` with `f` frozen over the step.
pub fn duhamel_step(
    u: &SpectralVectorField,
    h: f64,
    f: &SpectralVectorField,
    params: &CoriolisParams,
) -> Result<SpectralVectorField> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    let g = *u.grid();
    Ok(u.map_modes(|i, v| {
        let xi = g.xi(i);
        let w = interval_unchecked(h, &xi, params).apply(&xi, &f.get(i));
        [v[0] + w[0], v[1] + w[1], v[2] + w[2]]
    }))
}

/// The two parts `(||w1 F||_{L^p}, ||w2 F||_{L^p})` of the weighted force norm.
pub fn xc_norm_parts(
    f: &SpectralVectorField,
    p: Exponent,
    params: &CoriolisParams,
) -> Result<(f64, f64)> {
    xc_norm_parts_masked(f, p, params, |_| true)
}

/// Like [`xc_norm_parts`] but restricted to modes accepted by `mask`.
pub fn xc_norm_parts_masked(
    f: &SpectralVectorField,
    p: Exponent,
    params: &CoriolisParams,
    mut mask: impl FnMut(usize) -> bool,
) -> Result<(f64, f64)> {
    if let Exponent::Finite(v) = p {
        if v <= 1.0 {
            return Err(Error::InvalidExponent(v));
        }
    }
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m1, m2) = weighted_masses(f, p, params, &mut mask);
    Ok(match p {
        Exponent::Finite(p) => (math::powf(m1, 1.0 / p), math::powf(m2, 1.0 / p)),
        Exponent::Infinity => (m1, m2),
    })
}

/// `p`-th power masses (or maxima for `p = infinity`) of `|w1 F|` and `|w2 F|`.
pub(crate) fn weighted_masses(
    f: &SpectralVectorField,
    p: Exponent,
    params: &CoriolisParams,
    mask: &mut dyn FnMut(usize) -> bool,
) -> (f64, f64) {
    let g: FrequencyGrid = *f.grid();
    let cv = g.cell_volume();
    let (mut m1, mut m2) = (0.0_f64, 0.0_f64);
    for i in 1..g.len() {
        if !mask(i) {
            continue;
        }
        let v = f.get(i);
        let mag = linalg::cnorm(&v);
        if mag == 0.0 {
            continue;
        }
        let xi = g.xi(i);
        let (w1, c2) = weight_coefficients(&xi, p, params);
        let a = w1 * mag;
        let b = c2 * linalg::cnorm(&rotate_mode(&xi, &v));
        match p {
            Exponent::Finite(p) => {
                m1 += math::powf(a, p) * cv;
                m2 += math::powf(b, p) * cv;
            }
            Exponent::Infinity => {
                m1 = m1.max(a);
                m2 = m2.max(b);
            }
        }
    }
    (m1, m2)
}

/// `||F||_X = ||w1 F||_{L^p} + ||w2 F||_{L^p}` on the lattice.
pub fn xc_norm(f: &SpectralVectorField, p: Exponent, params: &CoriolisParams) -> Result<f64> {
    let (a, b) = xc_norm_parts(f, p, params)?;
    Ok(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_inf() -> Exponent {
        Exponent::Infinity
    }

    #[test]
    fn rotation_matrix_on_vertical_axis() {
        let r = rotation_matrix(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.0, [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(rotation_matrix(&[0.0; 3]), Err(Error::ZeroWavevector));
    }

    #[test]
    fn rotate_mode_matches_matrix() {
        let xi = [0.4, -1.1, 2.3];
        let m = rotation_matrix(&xi).unwrap();
        let v = [1.0, -2.0, 0.5];
        let a = m.apply(&v);
        let cv = [
            Complex64::new(v[0], 0.0),
            Complex64::new(v[1], 0.0),
            Complex64::new(v[2], 0.0),
        ];
        let b = rotate_mode(&xi, &cv);
        for k in 0..3 {
            assert!((a[k] - b[k].re).abs() < 1e-15);
        }
    }

    #[test]
    fn semigroup_special_cases() {
        let xi = [1.0, 2.0, -0.5];
        let params = CoriolisParams::with_omega(3.0);
        let g0 = semigroup_symbol(0.0, &xi, &params).unwrap();
        assert_eq!(g0.matrix(&xi).unwrap(), Mat3::IDENTITY + Mat3::ZERO);
        let heat = semigroup_symbol(0.3, &xi, &CoriolisParams::with_omega(0.0)).unwrap();
        assert_eq!(heat.rotation, 0.0);
        assert!((heat.identity - (-0.3_f64 * 5.25).exp()).abs() < 1e-15);
        assert_eq!(
            semigroup_symbol(-1.0, &xi, &params),
            Err(Error::NegativeTime(-1.0))
        );
        assert_eq!(
            semigroup_symbol(1.0, &[0.0; 3], &params),
            Err(Error::ZeroWavevector)
        );
    }

    #[test]
    fn stationary_special_cases() {
        let xi = [1.0, -2.0, 2.0];
        let s = stationary_symbol(&xi, &CoriolisParams::with_omega(0.0)).unwrap();
        assert!((s.identity - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(s.rotation, 0.0);
        let flat = [1.0, -2.0, 0.0];
        let s = stationary_symbol(&flat, &CoriolisParams::with_omega(50.0)).unwrap();
        assert!((s.identity - 0.2).abs() < 1e-16);
        assert_eq!(s.rotation, 0.0);
    }

    #[test]
    fn interval_symbol_heat_case() {
        let xi = [0.0, 3.0, 0.0];
        let params = CoriolisParams::new(0.0, 0.7).unwrap();
        let h = 0.05;
        let s = interval_symbol(h, &xi, &params).unwrap();
        let b = 0.7 * 9.0;
        let expected = (1.0 - (-b * h).exp()) / b;
        assert!((s.identity - expected).abs() < 1e-15);
        assert_eq!(s.rotation, 0.0);
        assert_eq!(
            interval_symbol(0.0, &xi, &params),
            Err(Error::NonPositiveStep(0.0))
        );
    }

    #[test]
    fn interval_symbol_small_step_limit() {
        // int_0^h G ~ h I for tiny h
        let xi = [1.0, 1.0, 1.0];
        let params = CoriolisParams::with_omega(10.0);
        let h = 1e-9;
        let s = interval_symbol(h, &xi, &params).unwrap();
        assert!((s.identity / h - 1.0).abs() < 1e-8);
        let a = 10.0 / 3.0_f64.sqrt();
        assert!((s.rotation / (0.5 * a * h * h) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weights_special_cases() {
        let xi = [0.0, 0.0, 1.0];
        for omega in [0.0, 1.0, 7.5] {
            let params = CoriolisParams::with_omega(omega);
            let w1 = weight_w1(&xi, Exponent::Finite(4.0), &params).unwrap();
            assert!((w1 - 1.0 / (1.0 + omega * omega)).abs() < 1e-15);
        }
        let xi = [1.0, 2.0, 2.0];
        let params = CoriolisParams::with_omega(0.0);
        let w1 = weight_w1(&xi, Exponent::Finite(4.0), &params).unwrap();
        assert!((w1 - 3.0_f64.powf(-0.75)).abs() < 1e-15);
        assert_eq!(weight_w2(&xi, p_inf(), &params).unwrap(), Mat3::ZERO.scaled(0.0));
        assert!(weight_w1(&xi, Exponent::Finite(1.0), &params).is_err());
        assert!(weight_w1(&[0.0; 3], p_inf(), &params).is_err());
    }
}
