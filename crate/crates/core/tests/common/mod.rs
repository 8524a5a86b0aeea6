#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rotns_core::{FrequencyGrid, SpectralVectorField};

/// 15-point Gauss-Kronrod rule on `[a, b]`: (estimate, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const XGK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WGK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    while let Some((a, b, tol)) = stack.pop() {
        let (v, err) = gk15(f, a, b);
        if err <= tol || (b - a) < 1e-12 {
            total += v;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, 0.5 * tol));
            stack.push((m, b, 0.5 * tol));
        }
    }
    total
}

/// `int_0^infinity e^{-b t} (cos(a t), sin(a t)) dt` by panel-wise adaptive quadrature,
/// panels one oscillation wide, truncated where `e^{-b t} < 1e-17`.
pub fn laplace_cos_sin(a: f64, b: f64) -> (f64, f64) {
    let t_end = 40.0 / b;
    let period = if a == 0.0 { t_end } else { 2.0 * std::f64::consts::PI / a.abs() };
    let panels = ((t_end / period).ceil() as usize).clamp(1, 1_000_000);
    let width = t_end / panels as f64;
    let scale = 1.0 / b;
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..panels {
        let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
        let tol = 1e-13 * scale / panels as f64;
        c += integrate(&|t| (-b * t).exp() * (a * t).cos(), lo, hi, tol);
        s += integrate(&|t| (-b * t).exp() * (a * t).sin(), lo, hi, tol);
    }
    (c, s)
}

/// Exact `sum_{p + q = k} f(p) g(q)` over integer frequencies, by brute force over nonzero modes.
pub fn convolve(grid: &FrequencyGrid, f: &[Complex64], g: &[Complex64]) -> BTreeMap<[i64; 3], Complex64> {
    let nz = |d: &[Complex64]| -> Vec<([i64; 3], Complex64)> {
        (0..grid.len())
            .filter(|&i| d[i] != Complex64::new(0.0, 0.0))
            .map(|i| (grid.integer_frequency(i), d[i]))
            .collect()
    };
    let (a, b) = (nz(f), nz(g));
    let mut out = BTreeMap::new();
    for (p, x) in &a {
        for (q, y) in &b {
            let k = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += x * y;
        }
    }
    out
}

/// Flat index of an integer frequency, if it lives on the grid.
pub fn flat_of(grid: &FrequencyGrid, k: [i64; 3]) -> Option<usize> {
    let n = grid.n() as i64;
    let mut idx = [0usize; 3];
    for a in 0..3 {
        if k[a] < -n / 2 || k[a] >= n / 2 {
            return None;
        }
        idx[a] = k[a].rem_euclid(n) as usize;
    }
    Some(grid.flat(idx))
}

pub fn max_diff(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    a.sub(b).max_abs()
}
