//! The Lie algebra su(2) and the group SU(2).
//!
//! An algebra element is stored by its coefficients in the orthonormal basis
//! `T_a = -i sigma_a / sqrt(2)`, so `|X|^2 = -tr(X^2)` is the Euclidean norm of
//! the coefficient vector and `[T_a, T_b] = sqrt(2) eps_abc T_c`.
//!
//! A group element is a unit quaternion `q = (w, x, y, z)` standing for the
//! matrix `w - i (x sigma_1 + y sigma_2 + z sigma_3)`. Under this identification
//! the algebra element with coefficients `v` is the pure quaternion `v / sqrt(2)`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Lie bracket of two coefficient triples.
#[inline(always)]
pub fn bracket(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        SQRT2 * (a[1] * b[2] - a[2] * b[1]),
        SQRT2 * (a[2] * b[0] - a[0] * b[2]),
        SQRT2 * (a[0] * b[1] - a[1] * b[0]),
    ]
}

/// Accumulates `s * [a, b]` into `out`.
#[inline(always)]
pub fn bracket_acc(out: &mut [f64], s: f64, a: &[f64], b: &[f64]) {
    let c = s * SQRT2;
    out[0] += c * (a[1] * b[2] - a[2] * b[1]);
    out[1] += c * (a[2] * b[0] - a[0] * b[2]);
    out[2] += c * (a[0] * b[1] - a[1] * b[0]);
}

/// An element of su(2) in the orthonormal basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgElement(pub [f64; 3]);

impl AlgElement {
    pub const ZERO: AlgElement = AlgElement([0.0; 3]);

    pub fn basis(a: usize) -> Self {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        AlgElement(v)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Inner product `-tr(XY)`.
    pub fn dot(&self, o: &Self) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn bracket(&self, o: &Self) -> Self {
        AlgElement(bracket(&self.0, &o.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgElement([s * self.0[0], s * self.0[1], s * self.0[2]])
    }

    /// Group exponential.
    pub fn exp(&self) -> GroupElement {
        let v = [self.0[0] / SQRT2, self.0[1] / SQRT2, self.0[2] / SQRT2];
        let th = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if th < 1e-300 {
            return GroupElement::IDENTITY;
        }
        let s = th.sin() / th;
        GroupElement([th.cos(), s * v[0], s * v[1], s * v[2]])
    }

    /// The 2x2 complex matrix, as `[re, im]` pairs in row-major order.
    pub fn matrix(&self) -> [[(f64, f64); 2]; 2] {
        let [a, b, c] = self.0.map(|t| t / SQRT2);
        // -i (a s1 + b s2 + c s3)
        [[(0.0, -c), (-b, -a)], [(b, -a), (0.0, c)]]
    }
}

impl Add for AlgElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        AlgElement([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for AlgElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        AlgElement([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for AlgElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// A unit quaternion representing an element of SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement(pub [f64; 4]);

impl Default for GroupElement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement([1.0, 0.0, 0.0, 0.0]);
    pub const MINUS_IDENTITY: GroupElement = GroupElement([-1.0, 0.0, 0.0, 0.0]);

    /// Rotation by `angle` about the unit algebra direction `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = (0.5 * angle).sin_cos();
        GroupElement([c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n])
    }

    pub fn inverse(&self) -> Self {
        let q = self.0;
        GroupElement([q[0], -q[1], -q[2], -q[3]])
    }

    pub fn normalized(&self) -> Self {
        let q = self.0;
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        GroupElement(q.map(|t| t / n))
    }

    pub fn neg(&self) -> Self {
        GroupElement(self.0.map(|t| -t))
    }

    pub fn is_central(&self) -> bool {
        self.0[1] == 0.0 && self.0[2] == 0.0 && self.0[3] == 0.0
    }

    /// Matrix of `Ad_g` acting on algebra coefficients.
    ///
    /// Built from pairwise products only, so `g` and `-g` give bit-identical results.
    pub fn adjoint_matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.0;
        let (ww, xx, yy, zz) = (w * w, x * x, y * y, z * z);
        let (xy, xz, yz, wx, wy, wz) = (x * y, x * z, y * z, w * x, w * y, w * z);
        [
            [ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz],
        ]
    }

    pub fn adjoint(&self, v: &AlgElement) -> AlgElement {
        AlgElement(mat_vec(&self.adjoint_matrix(), &v.0))
    }

    /// Principal logarithm, with the rotation angle in `[0, pi]`.
    pub fn log(&self) -> AlgElement {
        let q = self.normalized().0;
        let vn = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if vn < 1e-300 {
            // at -1 every axis is minimizing; take the first
            return if q[0] < 0.0 { AlgElement([SQRT2 * std::f64::consts::PI, 0.0, 0.0]) } else { AlgElement::ZERO };
        }
        let th = vn.atan2(q[0]);
        let s = SQRT2 * th / vn;
        AlgElement([s * q[1], s * q[2], s * q[3]])
    }

    /// Bi-invariant distance, equal to the norm of the principal logarithm of `g^{-1} h`.
    pub fn distance(&self, o: &Self) -> f64 {
        (self.inverse() * *o).log().norm()
    }

    /// Geodesic interpolation `g exp(t log(g^{-1} h))`.
    pub fn slerp(&self, o: &Self, t: f64) -> Self {
        *self * (self.inverse() * *o).log().scale(t).exp()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.0[0]
    }
}

impl Mul for GroupElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GroupElement(quat_mul(&self.0, &o.0))
    }
}

#[inline(always)]
pub fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline(always)]
pub fn mat_vec(m: &[[f64; 3]; 3], v: &[f64]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn commutator(x: &AlgElement, y: &AlgElement) -> [[(f64, f64); 2]; 2] {
        let (a, b) = (x.matrix(), y.matrix());
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let p = cmul(a[i][k], b[k][j]);
                    let q = cmul(b[i][k], a[k][j]);
                    out[i][j].0 += p.0 - q.0;
                    out[i][j].1 += p.1 - q.1;
                }
            }
        }
        out
    }

    #[test]
    fn bracket_matches_matrix_commutator() {
        let x = AlgElement([0.3, -1.2, 0.7]);
        let y = AlgElement([-0.4, 0.5, 2.0]);
        let lhs = x.bracket(&y).matrix();
        let rhs = commutator(&x, &y);
        for i in 0..2 {
            for j in 0..2 {
                assert!((lhs[i][j].0 - rhs[i][j].0).abs() < 1e-14);
                assert!((lhs[i][j].1 - rhs[i][j].1).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn basis_is_orthonormal_under_trace_form() {
        for a in 0..3 {
            let m = AlgElement::basis(a).matrix();
            let mut tr = 0.0;
            for i in 0..2 {
                for k in 0..2 {
                    tr += cmul(m[i][k], m[k][i]).0;
                }
            }
            assert!((-tr - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let x = AlgElement([0.4, -0.9, 1.3]);
        let y = x.exp().log();
        assert!((x - y).norm() < 1e-14);
    }

    #[test]
    fn adjoint_is_conjugation() {
        let g = GroupElement::from_axis_angle([1.0, 2.0, -0.5], 1.1);
        let x = AlgElement([0.2, 0.1, -0.7]);
        let via_exp = g * x.scale(1e-6).exp() * g.inverse();
        let lin = via_exp.log().scale(1e6);
        assert!((lin - g.adjoint(&x)).norm() < 1e-6);
    }

    #[test]
    fn center_acts_trivially_bitwise() {
        let g = GroupElement([0.3, -0.5, 0.1, 0.8]).normalized();
        assert_eq!(g.adjoint_matrix(), g.neg().adjoint_matrix());
    }
}
