//! Small fixed-size linear algebra used per Fourier mode.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::math;

/// A real 3-vector; wavevectors are represented this way.
pub type Vec3 = [f64; 3];

/// A complex 3-vector: the three Fourier amplitudes of a vector field at one mode.
pub type CVec3 = [Complex64; 3];

pub const CZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    math::sqrt(dot(a, a))
}

/// `xi . v` for a real `xi` and complex `v`.
#[inline]
pub fn cdot(xi: &Vec3, v: &CVec3) -> Complex64 {
    v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]
}

/// Euclidean magnitude of a complex 3-vector.
#[inline]
pub fn cnorm(v: &CVec3) -> f64 {
    math::sqrt(v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr())
}

/// Real 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    #[inline]
    pub fn scaled(&self, s: f64) -> Mat3 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let a = &self.0;
        Mat3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    #[inline]
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ]
    }

    #[inline]
    pub fn apply_complex(&self, v: &CVec3) -> CVec3 {
        let a = &self.0;
        [
            v[0] * a[0][0] + v[1] * a[0][1] + v[2] * a[0][2],
            v[0] * a[1][0] + v[1] * a[1][1] + v[2] * a[1][2],
            v[0] * a[2][0] + v[1] * a[2][1] + v[2] * a[2][2],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.0.iter().flat_map(|r| r.iter()).map(|v| v * v).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flat_map(|r| r.iter()).all(|v| v.is_finite())
    }

    /// Spectral norm (largest singular value), from the symmetric eigenproblem
    /// of `A^T A` solved with cyclic Jacobi sweeps.
    pub fn operator_norm(&self) -> f64 {
        let mut s = (self.transpose() * *self).0;
        for _ in 0..64 {
            let off = s[0][1] * s[0][1] + s[0][2] * s[0][2] + s[1][2] * s[1][2];
            if off <= 1e-300 {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if s[p][q] == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let sn = t * c;
                let mut rot = Mat3::IDENTITY.0;
                rot[p][p] = c;
                rot[q][q] = c;
                rot[p][q] = sn;
                rot[q][p] = -sn;
                let r = Mat3(rot);
                s = (r.transpose() * Mat3(s) * r).0;
            }
        }
        let max_eig = s[0][0].max(s[1][1]).max(s[2][2]).max(0.0);
        math::sqrt(max_eig)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += rhs.0[i][j];
            }
        }
        Mat3(out)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self + (-rhs)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scaled(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_of_diagonal() {
        let m = Mat3([[3.0, 0.0, 0.0], [0.0, -5.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((m.operator_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_of_rotation_is_one() {
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let m = Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]);
        assert!((m.operator_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_rank_one() {
        // u v^T has norm |u||v|
        let u = [1.0, 2.0, -2.0];
        let v = [0.5, 0.0, 1.0];
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = u[i] * v[j];
            }
        }
        let expected = norm(&u) * norm(&v);
        assert!((Mat3(a).operator_norm() - expected).abs() < 1e-12);
    }
}
