//! 2×2 complex matrices, the step type of every cocycle in the crate.

use core::ops::{Add, Mul, Sub};

pub use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C { a11: ONE, a12: ZERO, a21: ZERO, a22: ONE };
    pub const ZERO: Mat2C = Mat2C { a11: ZERO, a12: ZERO, a21: ZERO, a22: ZERO };
    /// The rank-one hopping `[[1,0],[0,0]]` of the Type-III strip.
    pub const J: Mat2C = Mat2C { a11: ONE, a12: ZERO, a21: ZERO, a22: ZERO };

    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2C { a11, a12, a21, a22 }
    }

    pub const fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2C {
            a11: C64::new(a11, 0.0),
            a12: C64::new(a12, 0.0),
            a21: C64::new(a21, 0.0),
            a22: C64::new(a22, 0.0),
        }
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2C::new(d1, ZERO, ZERO, d2)
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Mat2C::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.is_finite() {
            return None;
        }
        let inv = d.inv();
        Some(Mat2C::new(self.a22 * inv, -self.a12 * inv, -self.a21 * inv, self.a11 * inv))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.a11.norm().max(self.a12.norm()).max(self.a21.norm()).max(self.a22.norm())
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr()
    }

    /// Spectral (operator 2-) norm.
    pub fn op_norm(&self) -> f64 {
        let s = self.frobenius_sqr();
        let d = self.det().norm();
        let disc = (s * s - 4.0 * d * d).max(0.0);
        libm::sqrt(0.5 * (s + libm::sqrt(disc)))
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn max_diff(&self, other: &Mat2C) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_diff(&self.adjoint()) <= tol
    }

    /// Projects onto the Hermitian part, removing rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        let off = (self.a12 + self.a21.conj()) * 0.5;
        Mat2C::new(C64::new(self.a11.re, 0.0), off, off.conj(), C64::new(self.a22.re, 0.0))
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, b: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, b: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 + b.a11, self.a12 + b.a12, self.a21 + b.a21, self.a22 + b.a22)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, b: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn op_norm_of_diagonal_is_largest_modulus() {
        let m = Mat2C::diag(c(3.0, 4.0), c(-1.0, 0.0));
        assert!((m.op_norm() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_of_shear() {
        // [[1,1],[0,1]] has singular values golden ratio and its inverse.
        let m = Mat2C::real(1.0, 1.0, 0.0, 1.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m.op_norm() - phi).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_singular_is_none() {
        assert!(Mat2C::J.inverse().is_none());
    }

    proptest! {
        #[test]
        fn det_is_multiplicative(e in proptest::array::uniform8(-3.0f64..3.0)) {
            let a = Mat2C::new(c(e[0], e[1]), c(e[2], e[3]), c(e[4], e[5]), c(e[6], e[7]));
            let b = Mat2C::new(c(e[7], e[0]), c(e[1], -e[2]), c(e[3], e[4]), c(-e[5], e[6]));
            let lhs = (a * b).det();
            let rhs = a.det() * b.det();
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
        }

        #[test]
        fn op_norm_bounds(e in proptest::array::uniform8(-3.0f64..3.0)) {
            let a = Mat2C::new(c(e[0], e[1]), c(e[2], e[3]), c(e[4], e[5]), c(e[6], e[7]));
            let n = a.op_norm();
            prop_assert!(n + 1e-12 >= a.max_abs());
            prop_assert!(n <= a.frobenius_sqr().sqrt() + 1e-12);
        }

        #[test]
        fn inverse_roundtrip(e in proptest::array::uniform4(-3.0f64..3.0)) {
            let a = Mat2C::real(e[0], e[1], e[2], e[3]);
            prop_assume!(a.det().norm() > 1e-3);
            let p = a * a.inverse().unwrap();
            prop_assert!(p.max_diff(&Mat2C::IDENTITY) < 1e-9);
        }
    }
}
