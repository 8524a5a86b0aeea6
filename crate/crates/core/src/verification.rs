//! Numeric checks of the kernel inequalities, the dispersive decay of the
//! Coriolis-weighted force norm, the Littlewood-Paley machinery and the
//! bilinear estimates, plus the oracle builders used by the solver tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coriolis_kernel::{self, rotate_mode, CoriolisParams};
use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::grid::FrequencyGrid;
use crate::linalg::{self, CZERO};
use crate::littlewood_paley::{
    combine_blocks, DyadicPartition, DyadicProfile, Exponent, FourierBesovParams, SUPPORT_HI,
    SUPPORT_LO,
};
use crate::math;
use crate::spectral::{self, coriolis_mode, leray_project};
use crate::transform::SpectralTransform;

/// Slack allowed on the inequalities that hold exactly per mode.
pub const EXACT_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------- kernels

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelInequalityReport {
    pub modes_checked: usize,
    /// Largest `|xi|^2 * int_0^infinity e^{-t|xi|^2} cos(...) dt`.
    pub max_cos_ratio: f64,
    /// Largest `|xi|^2 * |int_0^infinity e^{-t|xi|^2} sin(...) dt|`.
    pub max_sin_ratio: f64,
    /// Integer frequency and `Omega` of the largest ratio overall.
    pub worst_mode: [i64; 3],
    pub worst_omega: f64,
    pub passed: bool,
}

/// Evaluates the closed forms `|xi|^4 / (|xi|^6 + Omega^2 xi_3^2)` and
/// `|Omega xi_3 |xi|| / (|xi|^6 + Omega^2 xi_3^2)` against `|xi|^-2` at every
/// nonzero mode and every `Omega`.
pub fn check_kernel_inequalities(grid: &FrequencyGrid, omegas: &[f64]) -> Result<KernelInequalityReport> {
    if omegas.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut rep = KernelInequalityReport {
        modes_checked: 0,
        max_cos_ratio: 0.0,
        max_sin_ratio: 0.0,
        worst_mode: [0; 3],
        worst_omega: omegas[0],
        passed: true,
    };
    let mut worst = f64::NEG_INFINITY;
    for &omega in omegas {
        if !omega.is_finite() {
            return Err(Error::NonFinite);
        }
        for i in 1..grid.len() {
            let xi = grid.xi(i);
            let r2 = linalg::dot(&xi, &xi);
            let r = math::sqrt(r2);
            let den = r2 * r2 * r2 + omega * omega * xi[2] * xi[2];
            let cos_ratio = r2 * r2 / den * r2;
            let sin_ratio = (omega * xi[2] * r).abs() / den * r2;
            rep.modes_checked += 1;
            rep.max_cos_ratio = rep.max_cos_ratio.max(cos_ratio);
            rep.max_sin_ratio = rep.max_sin_ratio.max(sin_ratio);
            let m = cos_ratio.max(sin_ratio);
            if m > worst {
                worst = m;
                rep.worst_mode = grid.integer_frequency(i);
                rep.worst_omega = omega;
            }
        }
    }
    rep.passed = worst <= 1.0 + EXACT_SLACK;
    Ok(rep)
}

// ---------------------------------------------------------------- sweeps

/// `Omega = 10^{k/4}`, `k = 0..=16`.
pub fn default_omega_values() -> Vec<f64> {
    (0..=16).map(|k| math::powf(10.0, k as f64 / 4.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Omega0Entry {
    pub epsilon: f64,
    /// `None` when no tested `Omega` qualifies.
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub p: f64,
    pub nu: f64,
    pub omega_values: Vec<f64>,
    pub xc_norms: Vec<f64>,
    pub w1_parts: Vec<f64>,
    pub w2_parts: Vec<f64>,
    /// `||F||_{FB^{-3/p}_{p,p}}`, independent of `Omega`.
    pub reference_norm: f64,
    /// `xc_norm / reference_norm`.
    pub ratios: Vec<f64>,
    pub fit_window: (f64, f64),
    pub slope_xc: f64,
    pub slope_w1: f64,
    pub slope_w2: f64,
    pub omega0: Vec<Omega0Entry>,
}

/// Least-squares slope of `ln y` against `ln x` over points with `lo <= x <= hi`.
///
/// Returns `0` when every `y` in the window vanishes and `NaN` when fewer
/// than two positive samples are available otherwise.
pub fn loglog_slope(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let mut pts = Vec::new();
    let mut all_zero = true;
    for (&x, &y) in xs.iter().zip(ys) {
        if x < lo * (1.0 - 1e-12) || x > hi * (1.0 + 1e-12) {
            continue;
        }
        if y != 0.0 {
            all_zero = false;
        }
        if x > 0.0 && y > 0.0 {
            pts.push((math::ln(x), math::ln(y)));
        }
    }
    if all_zero {
        return 0.0;
    }
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Smallest tested `Omega` from which the ratio stays at or below `epsilon`
/// for every larger tested `Omega`.
pub fn omega0_for(omegas: &[f64], ratios: &[f64], epsilon: f64) -> Option<f64> {
    let mut found = None;
    for (&o, &r) in omegas.iter().zip(ratios).rev() {
        if r <= epsilon {
            found = Some(o);
        } else {
            break;
        }
    }
    found
}

/// Tabulates the weighted force norm over `omegas` (positive, increasing).
///
/// Slopes are fitted over `fit_window`, defaulting to the last two decades
/// `[Omega_max / 100, Omega_max]`.
pub fn omega_sweep(
    f: &SpectralVectorField,
    p: f64,
    nu: f64,
    omegas: &[f64],
    epsilons: &[f64],
    fit_window: Option<(f64, f64)>,
) -> Result<SweepResult> {
    if omegas.is_empty() {
        return Err(Error::EmptyList);
    }
    if omegas.iter().any(|o| !(*o > 0.0 && o.is_finite())) {
        return Err(Error::InvalidConfig("sweep values must be positive and finite"));
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing);
    }
    let exp = Exponent::new(p)?;
    if !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let reference = DyadicPartition::build(f.grid()).fb_norm(f, &FourierBesovParams::force_space(p)?)?;
    let mut out = SweepResult {
        p,
        nu,
        omega_values: omegas.to_vec(),
        xc_norms: Vec::with_capacity(omegas.len()),
        w1_parts: Vec::with_capacity(omegas.len()),
        w2_parts: Vec::with_capacity(omegas.len()),
        reference_norm: reference,
        ratios: Vec::with_capacity(omegas.len()),
        fit_window: (0.0, 0.0),
        slope_xc: 0.0,
        slope_w1: 0.0,
        slope_w2: 0.0,
        omega0: Vec::new(),
    };
    for &omega in omegas {
        let params = CoriolisParams::new(omega, nu)?;
        let (a, b) = coriolis_kernel::xc_norm_parts(f, exp, &params)?;
        out.w1_parts.push(a);
        out.w2_parts.push(b);
        out.xc_norms.push(a + b);
        out.ratios.push(if reference > 0.0 { (a + b) / reference } else { 0.0 });
    }
    let last = *omegas.last().unwrap();
    let window = fit_window.unwrap_or((last / 100.0, last));
    out.fit_window = window;
    out.slope_xc = loglog_slope(omegas, &out.xc_norms, window.0, window.1);
    out.slope_w1 = loglog_slope(omegas, &out.w1_parts, window.0, window.1);
    out.slope_w2 = loglog_slope(omegas, &out.w2_parts, window.0, window.1);
    out.omega0 = epsilons
        .iter()
        .map(|&epsilon| Omega0Entry {
            epsilon,
            omega0: omega0_for(omegas, &out.ratios, epsilon),
        })
        .collect();
    Ok(out)
}

// ---------------------------------------------------------------- regions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    /// `|xi_3| > delta` and `|xi| <= 1/delta`.
    A,
    /// `|xi_3| > delta` and `|xi| > 1/delta`.
    B,
    /// `|xi_3| <= delta`.
    C,
}

pub fn classify_region(xi: &[f64; 3], delta: f64) -> Region {
    if xi[2].abs() <= delta {
        Region::C
    } else if linalg::norm(xi) <= 1.0 / delta {
        Region::A
    } else {
        Region::B
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionMass {
    pub modes: usize,
    /// `p`-th power mass of `|w1 F|` (maximum for `p = infinity`).
    pub w1: f64,
    pub w2: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionReport {
    pub delta: f64,
    pub p: f64,
    pub omega: f64,
    pub a: RegionMass,
    pub b: RegionMass,
    pub c: RegionMass,
    pub total: RegionMass,
    /// `|A + B + C - total|` relative to the total (finite `p` only, else 0).
    pub additivity_defect: f64,
}

impl RegionReport {
    /// Share of the combined mass carried by region `A`.
    pub fn a_fraction(&self) -> f64 {
        let t = self.total.w1 + self.total.w2;
        if t == 0.0 {
            0.0
        } else {
            (self.a.w1 + self.a.w2) / t
        }
    }
}

/// Splits the weighted force mass over the three frequency regions.
pub fn region_decomposition(
    f: &SpectralVectorField,
    delta: f64,
    p: Exponent,
    params: &CoriolisParams,
) -> Result<RegionReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let g = *f.grid();
    let mass = |region: Option<Region>| -> Result<RegionMass> {
        let mut modes = 0;
        let mut mask = |i: usize| {
            let keep = region.map_or(true, |r| classify_region(&g.xi(i), delta) == r);
            modes += keep as usize;
            keep
        };
        let (w1, w2) = coriolis_kernel::weighted_masses(f, p, params, &mut mask);
        Ok(RegionMass { modes, w1, w2 })
    };
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let a = mass(Some(Region::A))?;
    let b = mass(Some(Region::B))?;
    let c = mass(Some(Region::C))?;
    let total = mass(None)?;
    let additivity_defect = match p {
        Exponent::Finite(_) => {
            let t = total.w1 + total.w2;
            let s = a.w1 + a.w2 + b.w1 + b.w2 + c.w1 + c.w2;
            if t == 0.0 {
                s.abs()
            } else {
                (s - t).abs() / t
            }
        }
        Exponent::Infinity => 0.0,
    };
    Ok(RegionReport {
        delta,
        p: p.value(),
        omega: params.omega,
        a,
        b,
        c,
        total,
        additivity_defect,
    })
}

/// `sup_{|k| >= K} 2^{-3k/p} (||phi_k w1 F||_p + ||phi_k w2 F||_p)` over the blocks in range.
pub fn tail_functional(
    f: &SpectralVectorField,
    p: f64,
    params: &CoriolisParams,
    k_threshold: i32,
) -> Result<f64> {
    let exp = Exponent::new(p)?;
    let (w1f, w2f) = weighted_fields(f, exp, params);
    let part = DyadicPartition::build(f.grid());
    let b1 = part.block_norms(&w1f, exp)?;
    let b2 = part.block_norms(&w2f, exp)?;
    let (j_min, _) = part.j_range();
    let mut sup = 0.0_f64;
    for (idx, (x, y)) in b1.iter().zip(b2.iter()).enumerate() {
        let k = j_min + idx as i32;
        if k.abs() >= k_threshold {
            sup = sup.max(math::pow2(-3.0 * k as f64 * exp.reciprocal()) * (x + y));
        }
    }
    Ok(sup)
}

/// `(w1 F, w2 F)` as fields.
pub fn weighted_fields(
    f: &SpectralVectorField,
    p: Exponent,
    params: &CoriolisParams,
) -> (SpectralVectorField, SpectralVectorField) {
    let g = *f.grid();
    let w1f = f.map_modes(|i, v| {
        let (w1, _) = coriolis_kernel::weight_coefficients(&g.xi(i), p, params);
        [v[0] * w1, v[1] * w1, v[2] * w1]
    });
    let w2f = f.map_modes(|i, v| {
        let xi = g.xi(i);
        let (_, c2) = coriolis_kernel::weight_coefficients(&xi, p, params);
        let r = rotate_mode(&xi, &v);
        [r[0] * c2, r[1] * c2, r[2] * c2]
    });
    (w1f, w2f)
}

// ---------------------------------------------------------------- example force

/// Which frequency component enters the amplification factor of the example force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExampleForceVariant {
    /// `(|xi|^6 + Omega^2 xi_2^2) / |xi|^6`.
    #[default]
    Xi2,
    /// `(|xi|^6 + Omega^2 xi_3^2) / |xi|^6`, matching the weight denominators.
    Xi3,
}

/// `F(xi) = (|xi|^6 + Omega^2 xi_a^2) / |xi|^6 * xi_3 xi / |xi|^2`, real and even.
pub fn example_force(grid: &FrequencyGrid, omega: f64, variant: ExampleForceVariant) -> SpectralVectorField {
    let axis = match variant {
        ExampleForceVariant::Xi2 => 1,
        ExampleForceVariant::Xi3 => 2,
    };
    SpectralVectorField::from_fn(*grid, |i| {
        if i == 0 {
            return [CZERO; 3];
        }
        let xi = grid.xi(i);
        let r2 = linalg::dot(&xi, &xi);
        let r6 = r2 * r2 * r2;
        let amp = (r6 + omega * omega * xi[axis] * xi[axis]) / r6 * xi[2] / r2;
        [
            Complex64::new(amp * xi[0], 0.0),
            Complex64::new(amp * xi[1], 0.0),
            Complex64::new(amp * xi[2], 0.0),
        ]
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExampleForceRow {
    pub n: usize,
    pub scale: f64,
    pub omega: f64,
    /// `||F||_{X^infinity}` on the lattice.
    pub xc_inf: f64,
    /// Unweighted `sup |F(xi)|`.
    pub sup_abs: f64,
}

pub fn example_force_row(grid: &FrequencyGrid, omega: f64, variant: ExampleForceVariant) -> Result<ExampleForceRow> {
    let f = example_force(grid, omega, variant);
    let params = CoriolisParams::with_omega(omega);
    let xc_inf = coriolis_kernel::xc_norm(&f, Exponent::Infinity, &params)?;
    let sup_abs = (1..grid.len())
        .map(|i| linalg::cnorm(&f.get(i)))
        .fold(0.0, f64::max);
    Ok(ExampleForceRow {
        n: grid.n(),
        scale: grid.scale(),
        omega,
        xc_inf,
        sup_abs,
    })
}

// ---------------------------------------------------------------- manufactured data

/// Largest `|k_i|` a field may carry so that quadratic products stay inside the dealiased band.
pub fn manufactured_band(grid: &FrequencyGrid) -> i64 {
    grid.dealias_cutoff() / 2
}

fn band_excess(f: &SpectralVectorField, max_index: i64) -> f64 {
    let g = f.grid();
    (1..g.len())
        .filter(|&i| g.integer_frequency(i).iter().any(|k| k.abs() > max_index))
        .map(|i| linalg::cnorm(&f.get(i)))
        .fold(0.0, f64::max)
}

/// `F = (u* . grad) u* + Omega e3 x u* + nu |xi|^2 u*`.
pub fn manufactured_force<T: SpectralTransform + ?Sized>(
    transform: &T,
    u_star: &SpectralVectorField,
    params: &CoriolisParams,
) -> Result<SpectralVectorField> {
    let excess = band_excess(u_star, manufactured_band(u_star.grid()));
    if excess > 0.0 {
        return Err(Error::Aliasing(excess));
    }
    let g = *u_star.grid();
    let (n, _) = spectral::nonlinear_term(transform, u_star)?;
    Ok(u_star.map_modes(|i, v| {
        let xi = g.xi(i);
        let r2 = linalg::dot(&xi, &xi);
        let c = coriolis_mode(&v);
        let nv = n.get(i);
        let mut out = [CZERO; 3];
        for k in 0..3 {
            out[k] = nv[k] + c[k] * params.omega + v[k] * (params.nu * r2);
        }
        out
    }))
}

/// Real field with random amplitudes on modes with `max |k_i| <= max_index`.
pub fn random_band_limited<R: Rng + ?Sized>(grid: FrequencyGrid, rng: &mut R, max_index: i64) -> SpectralVectorField {
    SpectralVectorField::random_real(grid, rng, |i| {
        grid.integer_frequency(i).iter().all(|k| k.abs() <= max_index)
    })
}

/// Leray projection of [`random_band_limited`].
pub fn random_divergence_free<R: Rng + ?Sized>(grid: FrequencyGrid, rng: &mut R, max_index: i64) -> SpectralVectorField {
    leray_project(&random_band_limited(grid, rng, max_index))
}

/// First component of [`random_band_limited`] as a real scalar field.
pub fn random_band_limited_scalar<R: Rng + ?Sized>(grid: FrequencyGrid, rng: &mut R, max_index: i64) -> SpectralScalarField {
    random_band_limited(grid, rng, max_index).scalar(0)
}

// ---------------------------------------------------------------- bilinear estimates

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum BilinearEstimate {
    /// `||(uv)^||_{L^1} <= ||u^||_{L^1} ||v^||_{L^1}`.
    L1Sharp,
    /// `|| |xi| (uv)^ ||_{L^1} <= ||u||_{FB^0_{1,1} cap FB^1_{1,1}} ||v||_{...}` with `L^1` weights.
    L1Gradient,
    /// `||uv||_{FB^{1-3/p}_{p,inf}} <= C ||u||_{FB^{2-3/p}_{p,inf}} ||v||_{FB^{2-3/p}_{p,inf}}`.
    ProductInfinity { p: f64 },
    /// `sup_t ||int_0^t G(t - s) P div(u (x) v) ds||_{FB^{2-3/p}_{p,p}} <= C ||u|| ||v||`
    /// for fields held constant in time.
    DuhamelProduct { p: f64 },
}

impl BilinearEstimate {
    pub fn name(&self) -> String {
        match self {
            BilinearEstimate::L1Sharp => String::from("l1_sharp"),
            BilinearEstimate::L1Gradient => String::from("l1_gradient"),
            BilinearEstimate::ProductInfinity { p } => format!("product_inf_p{p}"),
            BilinearEstimate::DuhamelProduct { p } => format!("duhamel_product_p{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BilinearRatio {
    pub estimate: BilinearEstimate,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, or `0` when both sides vanish.
    pub ratio: f64,
}

/// Largest `|k_i|` allowed for an exact (wrap-free) product on the grid.
pub fn exact_product_band(grid: &FrequencyGrid) -> i64 {
    (grid.n() as i64) / 4 - 1
}

/// Lattice tensor product `(u_i v_j)^` as nine coefficient arrays, mean included.
///
/// Inputs must be supported in `max |k_i| <= n/4 - 1`, so the full
/// convolution fits on the grid without wrap-around.
pub fn tensor_product<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    v: &SpectralVectorField,
) -> Result<[[Vec<Complex64>; 3]; 3]> {
    let grid = *u.grid();
    if v.grid() != &grid {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            found: v.grid().len(),
        });
    }
    let band = exact_product_band(&grid);
    let excess = band_excess(u, band).max(band_excess(v, band));
    if excess > 0.0 {
        return Err(Error::Aliasing(excess));
    }
    let up: Vec<Vec<f64>> = (0..3)
        .map(|c| transform.inverse_scalar(&grid, u.component(c)))
        .collect::<Result<_>>()?;
    let vp: Vec<Vec<f64>> = (0..3)
        .map(|c| transform.inverse_scalar(&grid, v.component(c)))
        .collect::<Result<_>>()?;
    let mut out: [[Vec<Complex64>; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let prod: Vec<f64> = up[i].iter().zip(vp[j].iter()).map(|(a, b)| a * b).collect();
            out[i][j] = transform.forward_scalar(&grid, &prod)?;
        }
    }
    Ok(out)
}

fn magnitude_field(grid: FrequencyGrid, mag: &[f64]) -> SpectralVectorField {
    SpectralVectorField::from_fn(grid, |i| [Complex64::new(mag[i], 0.0), CZERO, CZERO])
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Sample times for the time-sup in [`BilinearEstimate::DuhamelProduct`], in units of `1 / (nu |xi|_min^2)`.
const DUHAMEL_TIMES: [f64; 9] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

/// Left and right sides of each requested bilinear estimate.
///
/// The lattice convolution carries the cell volume, `(u^ * v^)(xi) = cv sum_eta u^(eta) v^(xi - eta)`,
/// matching the quadrature of every norm.
pub fn bilinear_ratio<T: SpectralTransform + ?Sized>(
    transform: &T,
    u: &SpectralVectorField,
    v: &SpectralVectorField,
    estimates: &[BilinearEstimate],
    params: &CoriolisParams,
) -> Result<Vec<BilinearRatio>> {
    let grid = *u.grid();
    let cv = grid.cell_volume();
    let tp = tensor_product(transform, u, v)?;
    let mag: Vec<f64> = (0..grid.len())
        .map(|k| {
            let mut s = 0.0;
            for row in tp.iter() {
                for c in row.iter() {
                    s += c[k].norm_sqr();
                }
            }
            cv * math::sqrt(s)
        })
        .collect();
    let l1 = |f: &SpectralVectorField, weight: &dyn Fn(usize) -> f64| -> f64 {
        (1..grid.len()).map(|i| weight(i) * linalg::cnorm(&f.get(i)) * cv).sum()
    };
    let one = |_: usize| 1.0;
    let radius = |i: usize| grid.radius(i);
    let part = DyadicPartition::build(&grid);
    let mut out = Vec::with_capacity(estimates.len());
    for est in estimates {
        let (lhs, rhs) = match *est {
            BilinearEstimate::L1Sharp => {
                let lhs: f64 = mag.iter().map(|m| m * cv).sum();
                (lhs, l1(u, &one) * l1(v, &one))
            }
            BilinearEstimate::L1Gradient => {
                let lhs: f64 = mag.iter().enumerate().map(|(i, m)| grid.radius(i) * m * cv).sum();
                let nu = l1(u, &one) + l1(u, &radius);
                let nv = l1(v, &one) + l1(v, &radius);
                (lhs, nu * nv)
            }
            BilinearEstimate::ProductInfinity { p } => {
                let exp = Exponent::new(p)?;
                let lhs_params = FourierBesovParams {
                    s: 1.0 - 3.0 / p,
                    p: exp,
                    q: Exponent::Infinity,
                };
                let rhs_params = FourierBesovParams {
                    s: 2.0 - 3.0 / p,
                    p: exp,
                    q: Exponent::Infinity,
                };
                let lhs = part.fb_norm(&magnitude_field(grid, &mag), &lhs_params)?;
                (lhs, part.fb_norm(u, &rhs_params)? * part.fb_norm(v, &rhs_params)?)
            }
            BilinearEstimate::DuhamelProduct { p } => {
                let norm = FourierBesovParams::solution_space(p)?;
                let i_unit = Complex64::new(0.0, 1.0);
                let div = SpectralVectorField::from_fn(grid, |k| {
                    let xi = grid.xi(k);
                    let mut w = [CZERO; 3];
                    for (i, wi) in w.iter_mut().enumerate() {
                        let mut acc = CZERO;
                        for (j, x) in xi.iter().enumerate() {
                            acc += tp[i][j][k] * *x;
                        }
                        *wi = i_unit * acc * cv;
                    }
                    w
                });
                let pdiv = leray_project(&div);
                let t0 = 1.0 / (params.nu * grid.min_radius() * grid.min_radius());
                let mut lhs = part.fb_norm(&coriolis_kernel::apply_stationary_kernel(&pdiv, params), &norm)?;
                for tau in DUHAMEL_TIMES {
                    let h = tau * t0;
                    let zero = SpectralVectorField::zeros(grid);
                    let w = coriolis_kernel::duhamel_step(&zero, h, &pdiv, params)?;
                    lhs = lhs.max(part.fb_norm(&w, &norm)?);
                }
                (lhs, part.fb_norm(u, &norm)? * part.fb_norm(v, &norm)?)
            }
        };
        out.push(BilinearRatio {
            estimate: *est,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
        });
    }
    Ok(out)
}

/// Largest ratio per estimate over `trials` random band-limited pairs.
pub fn bilinear_trials<T: SpectralTransform + ?Sized>(
    transform: &T,
    grid: FrequencyGrid,
    estimates: &[BilinearEstimate],
    trials: usize,
    seed: u64,
    params: &CoriolisParams,
) -> Result<Vec<BilinearRatio>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = exact_product_band(&grid);
    let mut worst: Vec<BilinearRatio> = estimates
        .iter()
        .map(|&estimate| BilinearRatio {
            estimate,
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
        })
        .collect();
    for _ in 0..trials {
        let u = random_band_limited(grid, &mut rng, band);
        let v = random_band_limited(grid, &mut rng, band);
        for (w, r) in worst.iter_mut().zip(bilinear_ratio(transform, &u, &v, estimates, params)?) {
            if !(r.ratio <= w.ratio) {
                *w = r;
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------- invariant suite

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Hard checks decide the suite verdict; soft ones are reported only.
    pub hard: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.hard)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.hard && !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub grid: FrequencyGrid,
    pub omegas: Vec<f64>,
    pub seed: u64,
    pub profile: DyadicProfile,
    pub bony_pairs: usize,
    pub bilinear_trials: usize,
    pub embedding_trials: usize,
    pub p: f64,
}

impl VerifyConfig {
    pub fn new(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            omegas: alloc::vec![0.0, 1.0, 10.0, 100.0, 1e4],
            seed: 0,
            profile: DyadicProfile::default(),
            bony_pairs: 10,
            bilinear_trials: 20,
            embedding_trials: 5,
            p: 4.0,
        }
    }
}

/// Sum of `phi_j` over the partition range and the support of every active block.
pub fn check_partition_of_unity(partition: &DyadicPartition, samples: usize, seed: u64) -> CheckResult {
    let grid = *partition.grid();
    let profile = *partition.profile();
    let (j_min, j_max) = partition.j_range();
    let mut max_defect = 0.0_f64;
    let mut support_violation = 0.0_f64;
    let mut probe = |r: f64| {
        let s: f64 = (j_min..=j_max).map(|j| profile.phi_j(j, r)).sum();
        max_defect = max_defect.max((s - 1.0).abs());
        for (j, _) in profile.active(r) {
            let x = math::scale2(r, -j);
            let out = (SUPPORT_LO - x).max(x - SUPPORT_HI);
            if out > 0.0 {
                support_violation = support_violation.max(out);
            }
        }
    };
    for i in 1..grid.len() {
        probe(grid.radius(i));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        probe(rng.gen_range(grid.min_radius()..grid.max_radius()));
    }
    let passed = max_defect <= EXACT_SLACK && support_violation == 0.0;
    CheckResult {
        name: String::from("partition_of_unity"),
        passed,
        hard: true,
        measured: max_defect,
        threshold: EXACT_SLACK,
        detail: format!("max |sum phi_j - 1| = {max_defect:.3e}, support overshoot = {support_violation:.3e}"),
    }
}

/// `phi_j phi_k = 0` at every mode whenever `|j - k| >= 2`.
pub fn check_block_orthogonality(partition: &DyadicPartition) -> CheckResult {
    let grid = *partition.grid();
    let profile = *partition.profile();
    let mut worst = 0.0_f64;
    for i in 1..grid.len() {
        let act: Vec<(i32, f64)> = profile.active(grid.radius(i)).collect();
        for (a, wa) in &act {
            for (b, wb) in &act {
                if (a - b).abs() >= 2 {
                    worst = worst.max(wa * wb);
                }
            }
        }
    }
    CheckResult {
        name: String::from("block_orthogonality"),
        passed: worst == 0.0,
        hard: true,
        measured: worst,
        threshold: 0.0,
        detail: format!("max phi_j phi_k over |j-k|>=2: {worst:.3e}"),
    }
}

/// Relative error of `T_f g + T_g f + R(f, g)` against the dealiased product.
pub fn check_bony_reconstruction<T: SpectralTransform + ?Sized>(
    transform: &T,
    partition: &DyadicPartition,
    pairs: usize,
    seed: u64,
) -> Result<CheckResult> {
    let grid = *partition.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = manufactured_band(&grid);
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let f = random_band_limited_scalar(grid, &mut rng, band);
        let g = random_band_limited_scalar(grid, &mut rng, band);
        let parts = partition.bony_decompose(transform, &f, &g)?;
        let exact = spectral::product(transform, &f, &g)?;
        let sum = parts.sum();
        let scale = exact.max_abs().max(f64::MIN_POSITIVE);
        let err = sum
            .data()
            .iter()
            .zip(exact.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        worst = worst.max(err);
    }
    Ok(CheckResult {
        name: String::from("bony_reconstruction"),
        passed: worst <= 1e-10,
        hard: true,
        measured: worst,
        threshold: 1e-10,
        detail: format!("{pairs} random pairs"),
    })
}

/// Per-mode `w1 <= |xi|^{-3/p}` and `c2 <= |xi|^{-3/p} / 2` give
/// `||F||_X(Omega) <= 1.5 ||F||_X(0)`; also reports the lattice constant
/// `||F||_X(0) / ||F||_{FB^{-3/p}_{p,p}}`.
pub fn check_embedding(
    grid: FrequencyGrid,
    p: f64,
    omegas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<CheckResult> {
    let exp = Exponent::new(p)?;
    let part = DyadicPartition::build(&grid);
    let fb = FourierBesovParams::force_space(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut c_min = f64::INFINITY;
    let mut c_max = 0.0_f64;
    for _ in 0..trials {
        let f = random_band_limited(grid, &mut rng, grid.dealias_cutoff());
        let base = coriolis_kernel::xc_norm(&f, exp, &CoriolisParams::with_omega(0.0))?;
        let c = base / part.fb_norm(&f, &fb)?;
        c_min = c_min.min(c);
        c_max = c_max.max(c);
        for &omega in omegas {
            let x = coriolis_kernel::xc_norm(&f, exp, &CoriolisParams::with_omega(omega))?;
            worst = worst.max(x / (1.5 * base));
        }
    }
    Ok(CheckResult {
        name: String::from("embedding"),
        passed: worst <= 1.0 + EXACT_SLACK,
        hard: true,
        measured: worst,
        threshold: 1.0 + EXACT_SLACK,
        detail: format!("X(Omega)/(1.5 X(0)) max; lattice constant X(0)/FB in [{c_min:.4}, {c_max:.4}]"),
    })
}

/// The whole invariant suite.
pub fn run_verification<T: SpectralTransform + ?Sized>(
    transform: &T,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let part = DyadicPartition::with_profile(&cfg.grid, cfg.profile);
    let mut checks = Vec::new();
    checks.push(check_partition_of_unity(&part, 1000, cfg.seed));
    checks.push(check_block_orthogonality(&part));

    let k = check_kernel_inequalities(&cfg.grid, &cfg.omegas)?;
    checks.push(CheckResult {
        name: String::from("kernel_inequalities"),
        passed: k.passed,
        hard: true,
        measured: k.max_cos_ratio.max(k.max_sin_ratio),
        threshold: 1.0 + EXACT_SLACK,
        detail: format!(
            "{} evaluations; cos {:.15}, sin {:.15}; worst at k={:?}, Omega={}",
            k.modes_checked, k.max_cos_ratio, k.max_sin_ratio, k.worst_mode, k.worst_omega
        ),
    });

    checks.push(check_bony_reconstruction(transform, &part, cfg.bony_pairs, cfg.seed.wrapping_add(1))?);
    checks.push(check_embedding(cfg.grid, cfg.p, &cfg.omegas, cfg.embedding_trials, cfg.seed.wrapping_add(2))?);

    let params = CoriolisParams::with_omega(0.0);
    let estimates = [
        BilinearEstimate::L1Sharp,
        BilinearEstimate::L1Gradient,
        BilinearEstimate::ProductInfinity { p: cfg.p },
        BilinearEstimate::DuhamelProduct { p: cfg.p },
    ];
    let ratios = bilinear_trials(transform, cfg.grid, &estimates, cfg.bilinear_trials, cfg.seed.wrapping_add(3), &params)?;
    for r in ratios {
        let (hard, threshold, passed) = match r.estimate {
            BilinearEstimate::L1Sharp | BilinearEstimate::L1Gradient => {
                (true, 1.0 + EXACT_SLACK, r.ratio <= 1.0 + EXACT_SLACK)
            }
            _ => (true, f64::INFINITY, r.ratio.is_finite()),
        };
        checks.push(CheckResult {
            name: format!("bilinear_{}", r.estimate.name()),
            passed,
            hard,
            measured: r.ratio,
            threshold,
            detail: format!("max over {} trials (lhs {:.6e}, rhs {:.6e})", cfg.bilinear_trials, r.lhs, r.rhs),
        });
    }
    Ok(VerificationReport { checks })
}

/// `combine_blocks` on per-block norms of `F` restricted to `|j| >= k`, exposed for tables.
pub fn fb_norm_above(f: &SpectralVectorField, params: &FourierBesovParams, k: i32) -> Result<f64> {
    let part = DyadicPartition::build(f.grid());
    let mut blocks = part.block_norms(f, params.p)?;
    let (j_min, _) = part.j_range();
    for (idx, b) in blocks.iter_mut().enumerate() {
        if (j_min + idx as i32).abs() < k {
            *b = 0.0;
        }
    }
    Ok(combine_blocks(j_min, &blocks, params.s, params.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::NaiveDft;

    #[test]
    fn kernel_inequality_equality_at_zero_omega() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let r = check_kernel_inequalities(&g, &[0.0]).unwrap();
        assert!((r.max_cos_ratio - 1.0).abs() < 1e-15);
        assert_eq!(r.max_sin_ratio, 0.0);
        assert!(r.passed);
        assert_eq!(check_kernel_inequalities(&g, &[]), Err(Error::EmptyList));
    }

    #[test]
    fn omega0_is_tail_based() {
        let om = [1.0, 2.0, 3.0, 4.0];
        let ratios = [0.1, 0.5, 0.2, 0.05];
        assert_eq!(omega0_for(&om, &ratios, 0.3), Some(3.0));
        assert_eq!(omega0_for(&om, &ratios, 0.6), Some(1.0));
        assert_eq!(omega0_for(&om, &ratios, 0.01), None);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (0..10).map(|k| math::powf(10.0, k as f64 / 3.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * math::powf(*x, -1.5)).collect();
        assert!((loglog_slope(&xs, &ys, 0.0, f64::INFINITY) + 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&xs, &[0.0; 10], 0.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn regions_examples() {
        assert_eq!(classify_region(&[0.0, 0.0, 0.5], 0.5), Region::C);
        assert_eq!(classify_region(&[0.0, 0.0, 1.0], 0.5), Region::A);
        assert_eq!(classify_region(&[3.0, 0.0, 1.0], 0.5), Region::B);
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let f = example_force(&g, 1.0, ExampleForceVariant::Xi3);
        assert!(region_decomposition(&f, 1.0, Exponent::Finite(4.0), &CoriolisParams::with_omega(1.0)).is_err());
    }

    #[test]
    fn example_force_at_unit_xi3() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        for variant in [ExampleForceVariant::Xi2, ExampleForceVariant::Xi3] {
            let f = example_force(&g, 0.0, variant);
            let v = f.get(g.flat([0, 0, 1]));
            assert_eq!(v, [CZERO, CZERO, Complex64::new(1.0, 0.0)]);
            let f = example_force(&g, 5.0, variant);
            assert!(linalg::cnorm(&f.get(g.flat([1, 2, 0]))) == 0.0);
        }
    }

    #[test]
    fn manufactured_force_rejects_wide_fields() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let mut u = SpectralVectorField::zeros(g);
        u.set(g.flat([2, 0, 0]), [CZERO, Complex64::new(1.0, 0.0), CZERO]);
        assert!(matches!(
            manufactured_force(&NaiveDft, &u, &CoriolisParams::with_omega(0.0)),
            Err(Error::Aliasing(_))
        ));
        let z = SpectralVectorField::zeros(g);
        let f = manufactured_force(&NaiveDft, &z, &CoriolisParams::with_omega(2.0)).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn bilinear_zero_over_zero() {
        let g = FrequencyGrid::new(8, 1.0).unwrap();
        let z = SpectralVectorField::zeros(g);
        let r = bilinear_ratio(
            &NaiveDft,
            &z,
            &z,
            &[BilinearEstimate::L1Sharp, BilinearEstimate::ProductInfinity { p: 4.0 }],
            &CoriolisParams::with_omega(0.0),
        )
        .unwrap();
        assert!(r.iter().all(|x| x.ratio == 0.0));
    }
}
