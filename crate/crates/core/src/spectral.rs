//! Incompressible-flow primitives in Fourier space.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::grid::FrequencyGrid;
use crate::linalg::{self, CVec3, Mat3, Vec3, CZERO};
use crate::transform::SpectralTransform;

/// Divergence level above which `nonlinear_term` flags its input.
pub const DIVERGENCE_WARN: f64 = 1e-8;

/// `I - xi xi^T / |xi|^2` applied to one mode; zero at `xi = 0`.
#[inline]
pub fn leray_mode(xi: &Vec3, v: &CVec3) -> CVec3 {
    let r2 = linalg::dot(xi, xi);
    if r2 == 0.0 {
        return [CZERO; 3];
    }
    let d = linalg::cdot(xi, v) / r2;
    [v[0] - d * xi[0], v[1] - d * xi[1], v[2] - d * xi[2]]
}

/// Leray projector as a matrix.
pub fn leray_matrix(xi: &Vec3) -> Result<Mat3> {
    let r2 = linalg::dot(xi, xi);
    if r2 == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let mut m = Mat3::IDENTITY.0;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= xi[i] * xi[j] / r2;
        }
    }
    Ok(Mat3(m))
}

/// Per-mode Leray projection onto divergence-free fields.
pub fn leray_project(u: &SpectralVectorField) -> SpectralVectorField {
    let g = *u.grid();
    u.map_modes(|i, v| leray_mode(&g.xi(i), &v))
}

/// `e3 x v = (-v2, v1, 0)`.
#[inline]
pub fn coriolis_mode(v: &CVec3) -> CVec3 {
    [-v[1], v[0], CZERO]
}

/// Per-mode `e3 x u`; the caller multiplies by the Coriolis parameter.
pub fn coriolis_term(u: &SpectralVectorField) -> SpectralVectorField {
    u.map_modes(|_, v| coriolis_mode(&v))
}

/// Dealiased pseudo-spectral product of two scalar fields.
///
/// Both inputs are truncated to the 2/3-rule band before the product and the
/// result is truncated again, so retained modes equal the exact convolution
/// `sum_{p+q=k} f_p g_q` restricted to the band. The mean is discarded.
pub fn product<T: SpectralTransform + ?Sized>(
    transform: &T,
    f: &SpectralScalarField,
    g: &SpectralScalarField,
) -> Result<SpectralScalarField> {
    let grid = *f.grid();
    let fp = physical_dealiased(transform, &grid, f.data())?;
    let gp = physical_dealiased(transform, &grid, g.data())?;
    let prod: Vec<f64> = fp.iter().zip(gp.iter()).map(|(a, b)| a * b).collect();
    let mut out = transform.forward_scalar(&grid, &prod)?;
    truncate(&grid, &mut out);
    SpectralScalarField::from_vec(grid, out)
}

/// `div(u (x) u)` with components `i xi_j (u_i u_j)^`, dealiased by the 2/3 rule.
///
/// The divergence form equals `(u . grad) u` only for divergence-free input;
/// the returned flag reports `max |xi . u|` above [`DIVERGENCE_WARN`].
pub fn nonlinear_term<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
) -> Result<(SpectralVectorField, bool)> {
    let grid = *u.grid();
    let warn = u.max_divergence() > DIVERGENCE_WARN;
    let phys: Vec<Vec<f64>> = (0..3)
        .map(|c| physical_dealiased(transform, &grid, u.component(c)))
        .collect::<Result<_>>()?;
    // symmetric products u_i u_j, i <= j
    let mut pairs: [[usize; 3]; 3] = [[0; 3]; 3];
    let mut products: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for i in 0..3 {
        for j in i..3 {
            let p: Vec<f64> = phys[i].iter().zip(phys[j].iter()).map(|(a, b)| a * b).collect();
            pairs[i][j] = products.len();
            pairs[j][i] = products.len();
            products.push(transform.forward_scalar(&grid, &p)?);
        }
    }
    let mut out = SpectralVectorField::zeros(grid);
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 1..grid.len() {
        if !grid.is_retained(k) {
            continue;
        }
        let xi = grid.xi(k);
        let mut v = [CZERO; 3];
        for (i, vi) in v.iter_mut().enumerate() {
            let mut acc = CZERO;
            for (j, x) in xi.iter().enumerate() {
                acc += products[pairs[i][j]][k] * *x;
            }
            *vi = i_unit * acc;
        }
        out.set(k, v);
    }
    Ok((out, warn))
}

/// `Re sum_xi conj(u) . P div(u (x) u)`; vanishes for divergence-free dealiased `u`.
pub fn energy_transfer<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
) -> Result<f64> {
    let (n, _) = nonlinear_term(transform, u)?;
    Ok(u.inner(&leray_project(&n)).re)
}

fn physical_dealiased<T: SpectralTransform + ?Sized>(
    transform: &T,
    grid: &FrequencyGrid,
    coeffs: &[Complex64],
) -> Result<Vec<f64>> {
    let mut buf = coeffs.to_vec();
    truncate(grid, &mut buf);
    transform.inverse_scalar(grid, &buf)
}

fn truncate(grid: &FrequencyGrid, data: &mut [Complex64]) {
    for (i, c) in data.iter_mut().enumerate() {
        if !grid.is_retained(i) {
            *c = CZERO;
        }
    }
}
