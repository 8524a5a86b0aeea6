//! Physical <-> spectral transforms.
//!
//! Normalization: `forward` divides by `n^3`, so the field `cos(xi . x)`
//! has amplitude `1/2` at `+xi` and at `-xi`; `inverse` is the plain
//! Fourier sum and returns the real part.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{PhysicalVectorField, SpectralScalarField, SpectralVectorField};
use crate::grid::FrequencyGrid;
use crate::linalg::CZERO;
use crate::math;

/// A 3-D discrete Fourier transform on the lattice.
///
/// Implementors only provide the scalar complex-to-complex pass; the
/// normalization and real/complex plumbing live in the provided methods.
pub trait SpectralTransform {
    /// In-place unnormalized 3-D DFT. `inverse = false` uses `exp(-i k x)`.
    fn dft3(&self, grid: &FrequencyGrid, data: &mut [Complex64], inverse: bool);

    fn forward_scalar(&self, grid: &FrequencyGrid, samples: &[f64]) -> Result<Vec<Complex64>> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.dft3(grid, &mut buf, false);
        let norm = 1.0 / grid.len() as f64;
        for c in buf.iter_mut() {
            *c *= norm;
        }
        Ok(buf)
    }

    fn inverse_scalar(&self, grid: &FrequencyGrid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        let mut buf = coeffs.to_vec();
        self.dft3(grid, &mut buf, true);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    fn forward(&self, field: &PhysicalVectorField) -> Result<SpectralVectorField> {
        let g = field.grid();
        let comps = [
            self.forward_scalar(g, field.component(0))?,
            self.forward_scalar(g, field.component(1))?,
            self.forward_scalar(g, field.component(2))?,
        ];
        SpectralVectorField::from_components(*g, comps)
    }

    /// Forward transform without pinning the mean; used for products.
    fn forward_raw(&self, grid: &FrequencyGrid, samples: &[f64]) -> Result<SpectralScalarField> {
        let data = self.forward_scalar(grid, samples)?;
        SpectralScalarField::from_vec(*grid, data)
    }

    fn inverse(&self, field: &SpectralVectorField) -> Result<PhysicalVectorField> {
        let g = field.grid();
        let comps = [
            self.inverse_scalar(g, field.component(0))?,
            self.inverse_scalar(g, field.component(1))?,
            self.inverse_scalar(g, field.component(2))?,
        ];
        PhysicalVectorField::from_components(*g, comps)
    }
}

impl<T: SpectralTransform + ?Sized> SpectralTransform for &T {
    fn dft3(&self, grid: &FrequencyGrid, data: &mut [Complex64], inverse: bool) {
        (**self).dft3(grid, data, inverse)
    }
}

/// Direct `O(n^4)` separable DFT. Slow, dependency-free, and used as the
/// reference the FFT backend is tested against.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveDft;

impl SpectralTransform for NaiveDft {
    fn dft3(&self, grid: &FrequencyGrid, data: &mut [Complex64], inverse: bool) {
        let n = grid.n();
        let sign = if inverse { 1.0 } else { -1.0 };
        let twiddle: Vec<Complex64> = (0..n)
            .map(|j| {
                let a = sign * 2.0 * math::PI * j as f64 / n as f64;
                Complex64::new(math::cos(a), math::sin(a))
            })
            .collect();
        let mut line = alloc::vec![CZERO; n];
        let mut out = alloc::vec![CZERO; n];
        for stride in [1usize, n, n * n] {
            for start in 0..data.len() {
                // lines start where the axis coordinate is 0
                if (start / stride) % n != 0 {
                    continue;
                }
                for (m, v) in line.iter_mut().enumerate() {
                    *v = data[start + m * stride];
                }
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = CZERO;
                    for (m, v) in line.iter().enumerate() {
                        acc += *v * twiddle[(k * m) % n];
                    }
                    *o = acc;
                }
                for (m, v) in out.iter().enumerate() {
                    data[start + m * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalVectorField;

    #[test]
    fn cosine_mode_has_half_amplitude() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let f = PhysicalVectorField::from_fn(g, |x| [math::cos(x[0]), 0.0, 0.0]);
        let s = NaiveDft.forward(&f).unwrap();
        let plus = g.flat([1, 0, 0]);
        let minus = g.flat([7, 0, 0]);
        for i in 0..g.len() {
            let expect = if i == plus || i == minus { 0.5 } else { 0.0 };
            assert!((s.component(0)[i] - Complex64::new(expect, 0.0)).norm() < 1e-14);
            assert!(s.component(1)[i].norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip() {
        let g = FrequencyGrid::new(6, 1.5).unwrap();
        let f = PhysicalVectorField::from_fn(g, |x| {
            [
                math::sin(x[0] / 1.5 + 2.0 * x[2] / 1.5),
                math::cos(x[1] / 1.5) * math::sin(x[2] / 1.5),
                math::sin(x[0] / 1.5 - x[1] / 1.5),
            ]
        });
        let back = NaiveDft.inverse(&NaiveDft.forward(&f).unwrap()).unwrap();
        for c in 0..3 {
            for (a, b) in f.component(c).iter().zip(back.component(c)) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
