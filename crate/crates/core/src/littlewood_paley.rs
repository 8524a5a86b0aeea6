//! Dyadic partition of unity, the localization operators `Delta_j` and `S_j`,
//! Bony's paraproduct split, and Fourier-Besov norms on the lattice.
//!
//! The radial profile is built from the bump
//! `chi(r) = exp(-1 / ((r - 3/4)(8/3 - r)))` on `(3/4, 8/3)`, normalized by its
//! dyadic sum: `phi(r) = chi(r) / sum_j chi(2^-j r)`. The normalizer is
//! invariant under `r -> 2r`, so `sum_j phi(2^-j r) = 1` for every `r > 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::math;
use crate::spectral;
use crate::transform::SpectralTransform;

/// Lower edge of the canonical annulus.
pub const SUPPORT_LO: f64 = 3.0 / 4.0;
/// Upper edge of the canonical annulus.
pub const SUPPORT_HI: f64 = 8.0 / 3.0;

/// Lebesgue exponent: finite `p >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    /// `1/p`, zero for infinity.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// Indices `(s, p, q)` of `FB^s_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourierBesovParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl FourierBesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidExponent(s));
        }
        Ok(Self {
            s,
            p: Exponent::new(p)?,
            q: Exponent::new(q)?,
        })
    }

    /// `FB^{2-3/p}_{p,p}`, the solution space of the stationary problem.
    pub fn solution_space(p: f64) -> Result<Self> {
        let e = Exponent::new(p)?;
        Ok(Self {
            s: 2.0 - 3.0 * e.reciprocal(),
            p: e,
            q: e,
        })
    }

    /// `FB^{-3/p}_{p,p}`, the force space compared against the weighted norm.
    pub fn force_space(p: f64) -> Result<Self> {
        let e = Exponent::new(p)?;
        Ok(Self {
            s: -3.0 * e.reciprocal(),
            p: e,
            q: e,
        })
    }
}

/// Radial bump supported in `[lo, hi]`; the canonical choice is `[3/4, 8/3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicProfile {
    lo: f64,
    hi: f64,
}

impl Default for DyadicProfile {
    fn default() -> Self {
        Self {
            lo: SUPPORT_LO,
            hi: SUPPORT_HI,
        }
    }
}

impl DyadicProfile {
    /// A profile with a different support. The dyadic sum still resums to 1
    /// whenever `hi / lo > 2`; anything other than the canonical annulus
    /// breaks the support and orthogonality properties.
    pub fn with_support(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > 2.0 * lo && hi.is_finite()) {
            return Err(Error::InvalidConfig("profile support must satisfy 0 < 2 lo < hi"));
        }
        Ok(Self { lo, hi })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// The unnormalized bump.
    pub fn chi(&self, r: f64) -> f64 {
        if r <= self.lo || r >= self.hi {
            return 0.0;
        }
        math::exp(-1.0 / ((r - self.lo) * (self.hi - r)))
    }

    /// Range of `j` for which `2^-j r` can fall inside the support.
    #[inline]
    fn candidate_scales(&self, r: f64) -> (i32, i32) {
        let a = math::floor(math::log2(r / self.hi)) as i32;
        let b = math::ceil(math::log2(r / self.lo)) as i32;
        (a, b)
    }

    fn dyadic_sum(&self, r: f64) -> f64 {
        let (a, b) = self.candidate_scales(r);
        (a..=b).map(|j| self.chi(math::scale2(r, -j))).sum()
    }

    /// The normalized profile `phi(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        let c = self.chi(r);
        if c == 0.0 {
            return 0.0;
        }
        c / self.dyadic_sum(r)
    }

    /// `phi_j(r) = phi(2^-j r)`.
    #[inline]
    pub fn phi_j(&self, j: i32, r: f64) -> f64 {
        self.phi(math::scale2(r, -j))
    }

    /// Nonzero `(j, phi_j(r))` pairs, at most two for the canonical profile.
    pub fn active(&self, r: f64) -> impl Iterator<Item = (i32, f64)> + '_ {
        let (a, b) = if r > 0.0 { self.candidate_scales(r) } else { (1, 0) };
        (a..=b).filter_map(move |j| {
            let w = self.phi_j(j, r);
            (w > 0.0).then_some((j, w))
        })
    }

    /// `psi_j(r) = sum_{k <= j-1} phi_k(r)`.
    pub fn psi_j(&self, j: i32, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.active(r).filter(|(k, _)| *k < j).map(|(_, w)| w).sum()
    }
}

/// A dyadic partition bound to a grid: the profile plus the active block range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    profile: DyadicProfile,
    grid: FrequencyGrid,
    j_min: i32,
    j_max: i32,
}

/// The three parts of `fg = T_f g + T_g f + R(f, g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BonyParts {
    pub low_high: SpectralScalarField,
    pub high_low: SpectralScalarField,
    pub remainder: SpectralScalarField,
}

impl BonyParts {
    pub fn sum(&self) -> SpectralScalarField {
        let (a, b, c) = (&self.low_high, &self.high_low, &self.remainder);
        a.map_modes(|i, v| v + b.data()[i] + c.data()[i])
    }
}

impl DyadicPartition {
    pub fn build(grid: &FrequencyGrid) -> Self {
        Self::with_profile(grid, DyadicProfile::default())
    }

    /// Block range `j_min = floor(log2(lo r_min)) - 1`, `j_max = ceil(log2(hi r_max)) + 1`.
    pub fn with_profile(grid: &FrequencyGrid, profile: DyadicProfile) -> Self {
        let (lo, hi) = profile.support();
        let j_min = math::floor(math::log2(grid.min_radius() * lo)) as i32 - 1;
        let j_max = math::ceil(math::log2(grid.max_radius() * hi)) as i32 + 1;
        Self {
            profile,
            grid: *grid,
            j_min,
            j_max,
        }
    }

    pub fn profile(&self) -> &DyadicProfile {
        &self.profile
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// `phi_j(|xi|)` at a flat index.
    #[inline]
    pub fn phi_j_at(&self, j: i32, flat: usize) -> f64 {
        if flat == 0 {
            return 0.0;
        }
        self.profile.phi_j(j, self.grid.radius(flat))
    }

    /// `Delta_j f`; zero for `j` outside the partition range.
    pub fn block_project(&self, j: i32, f: &SpectralVectorField) -> SpectralVectorField {
        if !self.contains(j) {
            return SpectralVectorField::zeros(*f.grid());
        }
        f.map_modes(|i, v| {
            let w = self.phi_j_at(j, i);
            [v[0] * w, v[1] * w, v[2] * w]
        })
    }

    pub fn block_project_scalar(&self, j: i32, f: &SpectralScalarField) -> SpectralScalarField {
        if !self.contains(j) {
            return SpectralScalarField::zeros(*f.grid());
        }
        f.map_modes(|i, v| v * self.phi_j_at(j, i))
    }

    /// `S_j f = psi_j f`.
    pub fn low_pass(&self, j: i32, f: &SpectralVectorField) -> SpectralVectorField {
        let g = *f.grid();
        f.map_modes(|i, v| {
            let w = self.profile.psi_j(j, g.radius(i));
            [v[0] * w, v[1] * w, v[2] * w]
        })
    }

    pub fn low_pass_scalar(&self, j: i32, f: &SpectralScalarField) -> SpectralScalarField {
        let g = *f.grid();
        f.map_modes(|i, v| v * self.profile.psi_j(j, g.radius(i)))
    }

    /// Bony decomposition of the dealiased product of two scalar fields.
    ///
    /// `T_f g = sum_j S_{j-1} f Delta_j g` and
    /// `R(f, g) = sum_j Delta_j f (Delta_{j-1} + Delta_j + Delta_{j+1}) g`.
    pub fn bony_decompose<T: SpectralTransform + ?Sized>(
        &self,
        transform: &T,
        f: &SpectralScalarField,
        g: &SpectralScalarField,
    ) -> Result<BonyParts> {
        for field in [f, g] {
            let beyond = (1..self.grid.len())
                .filter(|&i| !self.grid.is_retained(i))
                .fold(0.0_f64, |m, i| m.max(field.data()[i].norm()));
            if beyond > 0.0 {
                return Err(Error::Aliasing(beyond));
            }
        }
        let blocks_f: Vec<_> = (self.j_min..=self.j_max)
            .map(|j| self.block_project_scalar(j, f))
            .collect();
        let blocks_g: Vec<_> = (self.j_min..=self.j_max)
            .map(|j| self.block_project_scalar(j, g))
            .collect();
        let zero = SpectralScalarField::zeros(self.grid);
        let mut low_high = zero.clone();
        let mut high_low = zero.clone();
        let mut remainder = zero;
        let accumulate = |acc: &mut SpectralScalarField, term: &SpectralScalarField| {
            for (a, b) in acc.data_mut().iter_mut().zip(term.data()) {
                *a += b;
            }
        };
        for (idx, j) in (self.j_min..=self.j_max).enumerate() {
            let df = &blocks_f[idx];
            let dg = &blocks_g[idx];
            let active_f = df.max_abs() > 0.0;
            let active_g = dg.max_abs() > 0.0;
            if active_g {
                let sf = self.low_pass_scalar(j - 1, f);
                accumulate(&mut low_high, &spectral::product(transform, &sf, dg)?);
            }
            if active_f {
                let sg = self.low_pass_scalar(j - 1, g);
                accumulate(&mut high_low, &spectral::product(transform, &sg, df)?);
                let mut wide = dg.clone();
                if idx > 0 {
                    accumulate(&mut wide, &blocks_g[idx - 1]);
                }
                if idx + 1 < blocks_g.len() {
                    accumulate(&mut wide, &blocks_g[idx + 1]);
                }
                accumulate(&mut remainder, &spectral::product(transform, df, &wide)?);
            }
        }
        Ok(BonyParts {
            low_high,
            high_low,
            remainder,
        })
    }

    /// `||phi_j |f|||_{L^p}` for every block in range, indexed by `j - j_min`.
    pub fn block_norms(&self, f: &SpectralVectorField, p: Exponent) -> Result<Vec<f64>> {
        if !f.is_finite() {
            return Err(Error::NonFinite);
        }
        let g = *f.grid();
        let cv = g.cell_volume();
        let mut acc = vec![0.0_f64; (self.j_max - self.j_min + 1) as usize];
        for i in 1..g.len() {
            let m = linalg::cnorm(&f.get(i));
            if m == 0.0 {
                continue;
            }
            for (j, w) in self.profile.active(g.radius(i)) {
                if !self.contains(j) {
                    continue;
                }
                let slot = &mut acc[(j - self.j_min) as usize];
                match p {
                    Exponent::Finite(p) => *slot += math::powf(w * m, p) * cv,
                    Exponent::Infinity => *slot = slot.max(w * m),
                }
            }
        }
        if let Exponent::Finite(p) = p {
            for v in acc.iter_mut() {
                *v = math::powf(*v, 1.0 / p);
            }
        }
        Ok(acc)
    }

    /// Lattice value of `||f||_{FB^s_{p,q}}`.
    pub fn fb_norm(&self, f: &SpectralVectorField, params: &FourierBesovParams) -> Result<f64> {
        let blocks = self.block_norms(f, params.p)?;
        Ok(combine_blocks(self.j_min, &blocks, params.s, params.q))
    }
}

/// `(sum_j (2^{js} b_j)^q)^{1/q}` or `sup_j 2^{js} b_j`.
pub fn combine_blocks(j_min: i32, blocks: &[f64], s: f64, q: Exponent) -> f64 {
    let weighted = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| math::pow2((j_min + k as i32) as f64 * s) * b);
    match q {
        Exponent::Finite(q) => {
            let sum: f64 = weighted.map(|v| math::powf(v, q)).sum();
            math::powf(sum, 1.0 / q)
        }
        Exponent::Infinity => weighted.fold(0.0, f64::max),
    }
}
