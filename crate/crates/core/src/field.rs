//! Spectral and physical fields on a [`FrequencyGrid`].

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{self, CVec3, CZERO};

/// Complex Fourier amplitudes of a scalar on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: FrequencyGrid,
    data: Vec<Complex64>,
}

/// Three complex amplitude arrays (velocity, force, initial data).
///
/// The zero mode is kept at exactly zero: all fields are mean-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: FrequencyGrid,
    comps: [Vec<Complex64>; 3],
}

/// Real samples of a vector field on the dual periodic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVectorField {
    grid: FrequencyGrid,
    comps: [Vec<f64>; 3],
}

impl SpectralScalarField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            data: vec![CZERO; grid.len()],
        }
    }

    pub fn from_vec(grid: FrequencyGrid, mut data: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, data.len())?;
        data[0] = CZERO;
        Ok(Self { grid, data })
    }

    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(usize) -> Complex64) -> Self {
        let mut data: Vec<Complex64> = (0..grid.len()).map(&mut f).collect();
        data[0] = CZERO;
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Largest `|c(xi) - conj(c(-xi))|` over non-Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.grid, &self.data)
    }

    pub fn map_modes(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { CZERO } else { f(i, *c) })
            .collect();
        Self {
            grid: self.grid,
            data,
        }
    }
}

impl SpectralVectorField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: [vec![CZERO; n], vec![CZERO; n], vec![CZERO; n]],
        }
    }

    /// Builds a field from three component arrays; the zero mode is pinned to 0.
    pub fn from_components(grid: FrequencyGrid, mut comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in comps.iter_mut() {
            check_len(&grid, c.len())?;
            c[0] = CZERO;
        }
        Ok(Self { grid, comps })
    }

    /// Builds a field from a per-mode closure; the zero mode is skipped.
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(usize) -> CVec3) -> Self {
        let mut out = Self::zeros(grid);
        for i in 1..grid.len() {
            out.set(i, f(i));
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    /// Scalar view of one component.
    pub fn scalar(&self, c: usize) -> SpectralScalarField {
        SpectralScalarField {
            grid: self.grid,
            data: self.comps[c].clone(),
        }
    }

    #[inline]
    pub fn get(&self, flat: usize) -> CVec3 {
        [self.comps[0][flat], self.comps[1][flat], self.comps[2][flat]]
    }

    #[inline]
    pub fn set(&mut self, flat: usize, v: CVec3) {
        if flat == 0 {
            return;
        }
        self.comps[0][flat] = v[0];
        self.comps[1][flat] = v[1];
        self.comps[2][flat] = v[2];
    }

    /// Applies a per-mode map; the zero mode stays 0.
    pub fn map_modes(&self, mut f: impl FnMut(usize, CVec3) -> CVec3) -> Self {
        let mut out = Self::zeros(self.grid);
        for i in 1..self.grid.len() {
            out.set(i, f(i, self.get(i)));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.grid.len()).fold(0.0_f64, |m, i| m.max(linalg::cnorm(&self.get(i))))
    }

    /// `max_xi |xi . u(xi)|`.
    pub fn max_divergence(&self) -> f64 {
        (1..self.grid.len()).fold(0.0_f64, |m, i| {
            m.max(linalg::cdot(&self.grid.xi(i), &self.get(i)).norm())
        })
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| hermitian_defect(&self.grid, c))
            .fold(0.0, f64::max)
    }

    /// Largest amplitude outside the 2/3-rule band.
    pub fn energy_beyond_cutoff(&self) -> f64 {
        (1..self.grid.len())
            .filter(|&i| !self.grid.is_retained(i))
            .fold(0.0_f64, |m, i| m.max(linalg::cnorm(&self.get(i))))
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let g = self.grid;
        self.map_modes(|i, v| if g.is_retained(i) { v } else { [CZERO; 3] })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, v| [v[0] * s, v[1] * s, v[2] * s])
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map_modes(|i, v| {
            let w = other.get(i);
            [v[0] + w[0], v[1] + w[1], v[2] + w[2]]
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map_modes(|i, v| {
            let w = other.get(i);
            [v[0] - w[0], v[1] - w[1], v[2] - w[2]]
        })
    }

    /// `sum_xi conj(self) . other`, without quadrature weight.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = CZERO;
        for c in 0..3 {
            for (a, b) in self.comps[c].iter().zip(other.comps[c].iter()) {
                acc += a.conj() * b;
            }
        }
        acc
    }

    /// Random real field: Hermitian-symmetric amplitudes uniform in the unit
    /// disc on modes accepted by `support`, zero elsewhere and at Nyquist modes.
    pub fn random_real<R: Rng + ?Sized>(
        grid: FrequencyGrid,
        rng: &mut R,
        mut support: impl FnMut(usize) -> bool,
    ) -> Self {
        let mut out = Self::zeros(grid);
        for i in 1..grid.len() {
            let m = grid.mirror(i);
            if grid.is_nyquist(i) || m < i || !support(i) || !support(m) {
                continue;
            }
            let mut v = [CZERO; 3];
            for c in v.iter_mut() {
                *c = if m == i {
                    Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                };
            }
            out.set(i, v);
            out.set(m, [v[0].conj(), v[1].conj(), v[2].conj()]);
        }
        out
    }
}

impl PhysicalVectorField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_components(grid: FrequencyGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in comps.iter() {
            check_len(&grid, c.len())?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f(x)` at every lattice point of the periodic box.
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let [a, b, c] = grid.unflat(i);
            let v = f([grid.coordinate(a), grid.coordinate(b), grid.coordinate(c)]);
            for (k, val) in v.into_iter().enumerate() {
                out.comps[k][i] = val;
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }
}

fn check_len(grid: &FrequencyGrid, found: usize) -> Result<()> {
    if found != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            found,
        });
    }
    Ok(())
}

fn hermitian_defect(grid: &FrequencyGrid, data: &[Complex64]) -> f64 {
    (0..grid.len())
        .filter(|&i| !grid.is_nyquist(i))
        .fold(0.0_f64, |m, i| {
            m.max((data[i] - data[grid.mirror(i)].conj()).norm())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_mode_is_pinned() {
        let g = FrequencyGrid::new(4, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let f = SpectralVectorField::from_components(
            g,
            [vec![one; 64], vec![one; 64], vec![one; 64]],
        )
        .unwrap();
        assert_eq!(f.get(0), [CZERO; 3]);
        let f = SpectralVectorField::from_fn(g, |_| [one; 3]);
        assert_eq!(f.get(0), [CZERO; 3]);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let g = FrequencyGrid::new(4, 1.0).unwrap();
        let err = SpectralScalarField::from_vec(g, vec![CZERO; 10]).unwrap_err();
        assert_eq!(err, Error::SizeMismatch { expected: 64, found: 10 });
    }

    #[test]
    fn random_real_is_hermitian() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = SpectralVectorField::random_real(g, &mut rng, |_| true);
        assert_eq!(f.hermitian_defect(), 0.0);
        assert!(f.max_abs() > 0.0);
    }
}
