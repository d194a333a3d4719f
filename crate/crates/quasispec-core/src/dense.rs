//! Dense Hermitian matrices and a cyclic Jacobi eigensolver.
//!
//! This is the small-size reference against which the banded counting and
//! bisection routines are checked, and the eigenvector source for the
//! interlacing verifier.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] += v;
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `U* A U` for block-diagonal `U` built from one 2×2 block per site.
    pub fn conjugate_blockwise(&self, u: &crate::Mat2C) -> DenseMatrix {
        let n = self.n;
        let ua = [[u.a11, u.a12], [u.a21, u.a22]];
        let mut tmp = DenseMatrix::zeros(n);
        for i in 0..n {
            for bj in 0..n / 2 {
                for c in 0..2 {
                    let mut s = C64::new(0.0, 0.0);
                    for r in 0..2 {
                        s += self.get(i, 2 * bj + r) * ua[r][c];
                    }
                    tmp.set(i, 2 * bj + c, s);
                }
            }
        }
        let mut out = DenseMatrix::zeros(n);
        for bi in 0..n / 2 {
            for r in 0..2 {
                for j in 0..n {
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        s += ua[k][r].conj() * tmp.get(2 * bi + k, j);
                    }
                    out.set(2 * bi + r, j, s);
                }
            }
        }
        out
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[j]` is the eigenvector of `values[j]`.
    pub vectors: Vec<Vec<C64>>,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry, then applies a
/// real plane rotation; sweeps continue until the off-diagonal mass falls
/// below `1e-30` of the total.
pub fn jacobi_eigen(matrix: &DenseMatrix) -> Eigen {
    let n = matrix.n;
    let mut a = matrix.clone();
    let mut v = DenseMatrix::zeros(n);
    for i in 0..n {
        v.set(i, i, C64::new(1.0, 0.0));
    }
    let total: f64 = a.data.iter().map(|x| x.norm_sqr()).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Phase factor making the pivot real, then the classic rotation.
                let ph = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // U = diag(1, conj(ph)) · [[c, s], [−s, c]]
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = ph.conj() * (-s);
                let u_qq = ph.conj() * c;
                rotate_columns(&mut a, p, q, u_pp, u_pq, u_qp, u_qq);
                rotate_rows(&mut a, p, q, u_pp, u_pq, u_qp, u_qq);
                rotate_columns(&mut v, p, q, u_pp, u_pq, u_qp, u_qq);
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                let d = a.get(p, p).re;
                a.set(p, p, C64::new(d, 0.0));
                let d = a.get(q, q).re;
                a.set(q, q, C64::new(d, 0.0));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|i| v.get(i, j)).collect()).collect();
    Eigen { values, vectors }
}

fn rotate_columns(m: &mut DenseMatrix, p: usize, q: usize, u_pp: C64, u_pq: C64, u_qp: C64, u_qq: C64) {
    for i in 0..m.n {
        let (x, y) = (m.get(i, p), m.get(i, q));
        m.set(i, p, x * u_pp + y * u_qp);
        m.set(i, q, x * u_pq + y * u_qq);
    }
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, u_pp: C64, u_pq: C64, u_qp: C64, u_qq: C64) {
    for j in 0..m.n {
        let (x, y) = (m.get(p, j), m.get(q, j));
        m.set(p, j, u_pp.conj() * x + u_qp.conj() * y);
        m.set(q, j, u_pq.conj() * x + u_qq.conj() * y);
    }
}

/// Number of eigenvalues strictly below `e` from a dense diagonalization.
pub fn dense_count_below(eigen: &Eigen, e: f64) -> usize {
    eigen.values.iter().filter(|&&v| v < e).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_hermitian(n: usize, seed: &[f64]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n);
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (1.0 + (k as f64 * 0.37).sin())
        };
        for i in 0..n {
            m.set(i, i, C64::new(next(), 0.0));
            for j in i + 1..n {
                let z = C64::new(next(), next());
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix() {
        let mut m = DenseMatrix::zeros(3);
        m.set(0, 0, C64::new(3.0, 0.0));
        m.set(1, 1, C64::new(-1.0, 0.0));
        m.set(2, 2, C64::new(2.0, 0.0));
        let e = jacobi_eigen(&m);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y() {
        let mut m = DenseMatrix::zeros(2);
        m.set(0, 1, C64::new(0.0, -1.0));
        m.set(1, 0, C64::new(0.0, 1.0));
        let e = jacobi_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn agrees_with_nalgebra(n in 1usize..24, seed in proptest::collection::vec(-2.0f64..2.0, 7..19)) {
            let m = random_hermitian(n, &seed);
            let e = jacobi_eigen(&m);
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let z = m.get(i, j);
                nalgebra::Complex::new(z.re, z.im)
            });
            let mut want: Vec<f64> = na.symmetric_eigenvalues().iter().cloned().collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in e.values.iter().zip(&want) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }

        #[test]
        fn eigenpairs_have_small_residual(n in 1usize..20, seed in proptest::collection::vec(-2.0f64..2.0, 5..13)) {
            let m = random_hermitian(n, &seed);
            let e = jacobi_eigen(&m);
            for (lam, v) in e.values.iter().zip(&e.vectors) {
                let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-12);
                for i in 0..n {
                    let mut s = C64::new(0.0, 0.0);
                    for j in 0..n {
                        s += m.get(i, j) * v[j];
                    }
                    prop_assert!((s - v[i] * *lam).norm() < 1e-10);
                }
            }
        }
    }
}
