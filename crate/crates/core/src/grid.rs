//! Truncated frequency lattice standing in for the continuous spectrum.
//!
//! Storage order is `(i0 * n + i1) * n + i2` with each `i` in `[0, n)`.
//! Index `i` carries the signed integer frequency `k = i` for `i < n/2` and
//! `k = i - n` otherwise, and the wavevector component `k / L`. The physical
//! dual lattice is the periodic box of side `2 pi L` sampled at `2 pi L m / n`.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyGrid {
    n: usize,
    scale: f64,
}

impl FrequencyGrid {
    pub fn new(n: usize, scale: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGridSize(n));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidScale(scale));
        }
        Ok(Self { n, scale })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain scale `L`; the frequency spacing is `1 / L` per axis.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Quadrature weight `L^-3` of one lattice cell.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        1.0 / (self.scale * self.scale * self.scale)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed integer frequency of a 1-D storage index.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn flat(&self, index: [usize; 3]) -> usize {
        (index[0] * self.n + index[1]) * self.n + index[2]
    }

    #[inline]
    pub fn unflat(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        [flat / (n * n), (flat / n) % n, flat % n]
    }

    /// Signed integer frequencies of a flat index.
    #[inline]
    pub fn integer_frequency(&self, flat: usize) -> [i64; 3] {
        let [a, b, c] = self.unflat(flat);
        [self.signed(a), self.signed(b), self.signed(c)]
    }

    /// Wavevector of a lattice index, checked.
    pub fn wavevector(&self, index: [usize; 3]) -> Result<Vec3> {
        if index.iter().any(|&i| i >= self.n) {
            return Err(Error::IndexOutOfRange(index[0], index[1], index[2]));
        }
        Ok(self.xi(self.flat(index)))
    }

    /// Wavevector of a flat index (unchecked beyond debug assertions).
    #[inline]
    pub fn xi(&self, flat: usize) -> Vec3 {
        debug_assert!(flat < self.len());
        let k = self.integer_frequency(flat);
        let inv = 1.0 / self.scale;
        [k[0] as f64 * inv, k[1] as f64 * inv, k[2] as f64 * inv]
    }

    /// Flat index of the mode carrying `-xi` (Nyquist indices map to themselves).
    #[inline]
    pub fn mirror(&self, flat: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.unflat(flat);
        self.flat([(n - a) % n, (n - b) % n, (n - c) % n])
    }

    /// Largest retained integer frequency per axis under the 2/3 rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// True if the mode survives 2/3-rule truncation on every axis.
    #[inline]
    pub fn is_retained(&self, flat: usize) -> bool {
        let kc = self.dealias_cutoff();
        self.integer_frequency(flat).iter().all(|k| k.abs() <= kc)
    }

    /// True if any axis sits at the unpaired Nyquist index `-n/2`.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.integer_frequency(flat).iter().any(|k| *k == -half)
    }

    /// Smallest nonzero radius on the lattice.
    pub fn min_radius(&self) -> f64 {
        1.0 / self.scale
    }

    /// Largest radius on the lattice (the `(-n/2, -n/2, -n/2)` corner).
    pub fn max_radius(&self) -> f64 {
        let h = (self.n / 2) as f64 / self.scale;
        math::sqrt(3.0) * h
    }

    /// `|xi|` of a flat index.
    #[inline]
    pub fn radius(&self, flat: usize) -> f64 {
        linalg::norm(&self.xi(flat))
    }

    /// Sample coordinate of a physical-space index along one axis.
    #[inline]
    pub fn coordinate(&self, m: usize) -> f64 {
        2.0 * math::PI * self.scale * m as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavevector_examples() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        assert_eq!(g.wavevector([0, 0, 0]).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(g.wavevector([1, 0, 0]).unwrap(), [1.0, 0.0, 0.0]);
        let g2 = FrequencyGrid::new(8, 2.0).unwrap();
        assert_eq!(g2.wavevector([0, 0, 3]).unwrap(), [0.0, 0.0, 1.5]);
        // upper half of the index range is negative frequency
        assert_eq!(g.wavevector([7, 4, 0]).unwrap(), [-1.0, -4.0, 0.0]);
    }

    #[test]
    fn wavevector_rejects_out_of_range() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        assert_eq!(g.wavevector([8, 0, 0]), Err(Error::IndexOutOfRange(8, 0, 0)));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(FrequencyGrid::new(2, 1.0).is_err());
        assert!(FrequencyGrid::new(7, 1.0).is_err());
        assert!(FrequencyGrid::new(8, 0.0).is_err());
        assert!(FrequencyGrid::new(8, f64::NAN).is_err());
    }

    #[test]
    fn mirror_negates_frequency() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        for flat in 0..g.len() {
            let m = g.mirror(flat);
            let (a, b) = (g.integer_frequency(flat), g.integer_frequency(m));
            if !g.is_nyquist(flat) {
                assert_eq!([a[0] + b[0], a[1] + b[1], a[2] + b[2]], [0, 0, 0]);
            }
            assert_eq!(g.mirror(m), flat);
        }
    }

    #[test]
    fn dealias_cutoff_is_alias_free() {
        for n in [4usize, 8, 12, 16, 32, 64] {
            let g = FrequencyGrid::new(n, 1.0).unwrap();
            let kc = g.dealias_cutoff();
            // a sum of two retained frequencies either stays in range or wraps outside the kept band
            assert!(2 * kc < n as i64 - kc, "n = {n}");
            assert!(kc < (n / 2) as i64);
        }
    }
}
