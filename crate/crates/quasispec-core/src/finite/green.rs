//! Green's functions of finite restrictions, `(ξ,k)`-regularity and
//! `ε`-uniformity of interpolation nodes.

use alloc::vec;
use alloc::vec::Vec;

use super::{BlockTridiag, FiniteRestriction, Tridiag};
use crate::models::{cos2pi, ModelSpec, ScalarMosaicModel};
use crate::{Error, Result, C64};

/// A determinant `mantissa · e^{exponent}`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ScaledDet {
    mantissa: f64,
    exponent: f64,
}

impl ScaledDet {
    fn ln_abs(&self) -> f64 {
        libm::log(self.mantissa.abs()) + self.exponent
    }
}

/// Three-term determinant recurrence with rescaling; returns `D_0..=D_L`
/// where `D_k` is the determinant of the first `k` rows of `(d, c)`.
fn scaled_dets(d: &[f64], c: &[f64]) -> Vec<ScaledDet> {
    let mut out = Vec::with_capacity(d.len() + 1);
    out.push(ScaledDet { mantissa: 1.0, exponent: 0.0 });
    let (mut prev, mut cur, mut scale) = (0.0f64, 1.0f64, 0.0f64);
    for k in 0..d.len() {
        let coupling = if k == 0 { 0.0 } else { c[k - 1] * c[k - 1] };
        let next = d[k] * cur - coupling * prev;
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e50 || (m < 1e-50 && m > 0.0) {
            prev /= m;
            cur /= m;
            scale += libm::log(m);
        }
        out.push(ScaledDet { mantissa: cur, exponent: scale });
    }
    out
}

/// `(H − E)⁻¹` of a scalar chain on `[n1, n2]` by the determinant-ratio
/// formula
/// `G(n,m) = (−1)^{m−n} P_{[n1,n−1]} P_{[m+1,n2]} Π_{l=n}^{m−1} c(l) / P_{[n1,n2]}`
/// for `n ≤ m`.
#[derive(Clone, Debug)]
pub struct ScalarGreen {
    pub n1: i64,
    pub n2: i64,
    off: Vec<f64>,
    left: Vec<ScaledDet>,
    /// `right[k]` is the determinant of local sites `k..L`.
    right: Vec<ScaledDet>,
}

impl ScalarGreen {
    pub fn new(model: &ScalarMosaicModel, theta: f64, e: f64, n1: i64, n2: i64) -> Result<Self> {
        if n2 < n1 {
            return Err(Error::InvalidArgument("interval needs n1 <= n2"));
        }
        Self::from_tridiag(&Tridiag::interval(model, theta, n1, n2), e)
    }

    pub fn from_tridiag(t: &Tridiag, e: f64) -> Result<Self> {
        let n1 = t.first_site;
        let n2 = n1 + t.len() as i64 - 1;
        let d: Vec<f64> = t.diag.iter().map(|v| v - e).collect();
        let left = scaled_dets(&d, &t.off);
        let dr: Vec<f64> = d.iter().rev().copied().collect();
        let cr: Vec<f64> = t.off.iter().rev().copied().collect();
        let mut right = scaled_dets(&dr, &cr);
        right.reverse();
        if left[d.len()].mantissa == 0.0 {
            return Err(Error::EigenvalueCollision { n1, n2 });
        }
        Ok(ScalarGreen { n1, n2, off: t.off.clone(), left, right })
    }

    /// `G(n, m)` for sites `n, m ∈ [n1, n2]`.
    pub fn entry(&self, n: i64, m: i64) -> f64 {
        let (i, j) = if n <= m { (n, m) } else { (m, n) };
        let (i, j) = ((i - self.n1) as usize, (j - self.n1) as usize);
        let len = self.left.len() - 1;
        let top = self.left[i];
        let bottom = self.right[j + 1];
        let total = self.left[len];
        let mut sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        let mut ln = top.ln_abs() + bottom.ln_abs() - total.ln_abs();
        for l in i..j {
            let c = self.off[l];
            if c == 0.0 {
                return 0.0;
            }
            sign *= c.signum();
            ln += libm::log(c.abs());
        }
        if top.mantissa == 0.0 || bottom.mantissa == 0.0 {
            return 0.0;
        }
        sign * top.mantissa.signum() * bottom.mantissa.signum() * total.mantissa.signum() * libm::exp(ln)
    }
}

/// `⟨δ_n, (H|_{[n1,n2]} − E)⁻¹ δ_m⟩`.
///
/// Scalar chains use the determinant-ratio formula. Strips are indexed by
/// interleaved components, `a(j) ↦ 2j` and `b(j) ↦ 2j+1` for blocks
/// `j ∈ [n1, n2]`, and use a banded solve.
pub fn green_restricted(model: &ModelSpec, phase: f64, e: f64, n1: i64, n2: i64, n: i64, m: i64) -> Result<C64> {
    if n2 < n1 {
        return Err(Error::InvalidArgument("interval needs n1 <= n2"));
    }
    match model {
        ModelSpec::Scalar(s) => {
            if !(n1..=n2).contains(&n) || !(n1..=n2).contains(&m) {
                return Err(Error::InvalidArgument("Green's function indices lie outside the interval"));
            }
            let g = ScalarGreen::new(s, phase, e, n1, n2)?;
            Ok(C64::new(g.entry(n, m), 0.0))
        }
        ModelSpec::Strip(s) => {
            let range = 2 * n1..=2 * n2 + 1;
            if !range.contains(&n) || !range.contains(&m) {
                return Err(Error::InvalidArgument("Green's function indices lie outside the interval"));
            }
            let r = FiniteRestriction::Strip(BlockTridiag::interval(s, phase, n1, n2));
            let mut rhs = vec![C64::new(0.0, 0.0); r.dim()];
            rhs[(m - 2 * n1) as usize] = C64::new(1.0, 0.0);
            let x = r.solve(C64::new(e, 0.0), &rhs).map_err(|_| Error::EigenvalueCollision { n1, n2 })?;
            Ok(x[(n - 2 * n1) as usize])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    /// The interval `[n1, n2]` witnessing the decay bound.
    Regular { n1: i64, n2: i64 },
    Singular,
}

/// Looks for an interval `[n1, n1+k−1] ∋ y` with `|y − n_i| ≥ k/7` and
/// `|G(y, n_i)| < e^{−ξ|y−n_i|}` at both ends.
pub fn regularity_classify(model: &ScalarMosaicModel, theta: f64, e: f64, y: i64, k: usize, xi: f64) -> Result<Regularity> {
    if k < 7 {
        return Err(Error::InvalidArgument("regularity needs k >= 7"));
    }
    let k = k as i64;
    let margin = k as f64 / 7.0;
    for n1 in (y - k + 1)..=y {
        let n2 = n1 + k - 1;
        if ((y - n1) as f64) < margin || ((n2 - y) as f64) < margin {
            continue;
        }
        let Ok(g) = ScalarGreen::new(model, theta, e, n1, n2) else {
            continue;
        };
        let ok = [n1, n2].iter().all(|&ni| g.entry(y, ni).abs() < libm::exp(-xi * (y - ni).abs() as f64));
        if ok {
            return Ok(Regularity::Regular { n1, n2 });
        }
    }
    Ok(Regularity::Singular)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityReport {
    /// Largest Lagrange basis value found on the grid.
    pub max_lagrange: f64,
    /// `e^{kε}` with `k` the number of nodes.
    pub bound: f64,
    pub uniform: bool,
}

/// Evaluates `max_{x,i} Π_{j≠i} |x − cos2πθ_j| / |cos2πθ_i − cos2πθ_j|` on a
/// 1000-point grid of `[−1, 1]` against `e^{kε}`.
pub fn epsilon_uniform_check(theta_set: &[f64], eps: f64) -> Result<UniformityReport> {
    let k = theta_set.len();
    if k == 0 {
        return Err(Error::InvalidArgument("at least one node is required"));
    }
    let nodes: Vec<f64> = theta_set.iter().map(|&t| cos2pi(t)).collect();
    let mut ln_denom = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = (nodes[i] - nodes[j]).abs();
            if d < 1e-14 {
                return Err(Error::CoincidentNodes { i, j });
            }
            ln_denom[i] += libm::log(d);
        }
    }
    let grid = 1000;
    let mut max_ln = f64::NEG_INFINITY;
    for g in 0..grid {
        let x = -1.0 + 2.0 * g as f64 / (grid - 1) as f64;
        if nodes.iter().any(|&c| c == x) {
            // At a node every basis polynomial is 0 except one, which is 1.
            max_ln = max_ln.max(0.0);
            continue;
        }
        let ln_omega: f64 = nodes.iter().map(|&c| libm::log((x - c).abs())).sum();
        for i in 0..k {
            let v = ln_omega - libm::log((x - nodes[i]).abs()) - ln_denom[i];
            max_ln = max_ln.max(v);
        }
    }
    let bound = libm::exp(k as f64 * eps);
    Ok(UniformityReport { max_lagrange: libm::exp(max_ln), bound, uniform: max_ln < k as f64 * eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Frequency;
    use crate::finite::{build_restriction, bulk_eigenvalues, eigenvector};
    use crate::models::{closed_form_le, ScalarKind, StripModel};
    use proptest::prelude::*;

    fn type2(l: f64) -> ScalarMosaicModel {
        ScalarMosaicModel::new(ScalarKind::TypeII, l, Frequency::golden()).unwrap()
    }

    fn dense_inverse(t: &Tridiag, e: f64) -> nalgebra::DMatrix<f64> {
        let n = t.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i] - e
            } else if j == i + 1 {
                t.off[i]
            } else if i == j + 1 {
                t.off[j]
            } else {
                0.0
            }
        });
        m.lu().try_inverse().unwrap()
    }

    #[test]
    fn single_site() {
        let m = type2(1.0);
        let (v, _) = m.sample(0.3, 4);
        let g = green_restricted(&ModelSpec::Scalar(m), 0.3, 0.25, 4, 4, 4, 4).unwrap();
        assert!((g.re * (v - 0.25) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn determinant_ratio_matches_dense_inverse() {
        let m = type2(1.0);
        for (len, theta, e) in [(5usize, 0.11, 0.3), (17, 0.52, -1.1), (30, 0.77, 1.7), (30, 0.31, 0.05)] {
            let t = Tridiag::interval(&m, theta, 3, 3 + len as i64 - 1);
            let g = ScalarGreen::from_tridiag(&t, e).unwrap();
            let inv = dense_inverse(&t, e);
            for i in 0..len {
                for j in 0..len {
                    let got = g.entry(3 + i as i64, 3 + j as i64);
                    let want = inv[(i, j)];
                    assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-300), "len={len} ({i},{j}): {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn strip_entries_match_scalar_chain() {
        let m = type2(0.9);
        let strip = m.to_strip().unwrap();
        for (n, mm) in [(4i64, 4i64), (4, 9), (7, 12), (11, 5)] {
            let a = green_restricted(&ModelSpec::Scalar(m.clone()), 0.4, 0.37, 2, 13, n, mm).unwrap();
            let b = green_restricted(&ModelSpec::Strip(strip.clone()), 0.4, 0.37, 1, 6, n, mm).unwrap();
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn reconstruction_from_boundary_values() {
        let m = type2(1.3);
        let theta = 0.2;
        let e = 0.83;
        // A formal solution of the eigenvalue equation on a long window.
        let (lo, hi) = (-5i64, 40i64);
        let mut u = vec![0.0; (hi - lo + 1) as usize];
        u[0] = 0.3;
        u[1] = -0.7;
        for n in lo + 1..hi {
            let i = (n - lo) as usize;
            let (v, c) = m.sample(theta, n);
            let (_, cp) = m.sample(theta, n - 1);
            u[i + 1] = ((e - v) * u[i] - cp * u[i - 1]) / c;
        }
        let at = |n: i64| u[(n - lo) as usize];
        let (n1, n2) = (3i64, 25i64);
        let g = ScalarGreen::new(&m, theta, e, n1, n2).unwrap();
        let c_left = m.sample(theta, n1 - 1).1;
        let c_right = m.sample(theta, n2).1;
        for n in n1..=n2 {
            let rec = -c_left * at(n1 - 1) * g.entry(n, n1) - c_right * at(n2 + 1) * g.entry(n, n2);
            assert!((rec - at(n)).abs() < 1e-8 * (1.0 + at(n).abs()), "n={n}");
        }
    }

    #[test]
    fn regular_in_localized_tail() {
        let m = type2(1.0);
        let theta = crate::DEFAULT_PHASE;
        let r = build_restriction(&ModelSpec::Scalar(m.clone()), theta, 600).unwrap();
        let eigs = bulk_eigenvalues(&r, 2.25, 2.45, 1e-13).unwrap();
        let e = *eigs.iter().min_by(|a, b| (*a - 2.35).abs().total_cmp(&(*b - 2.35).abs())).unwrap();
        let v = eigenvector(&r, e).unwrap();
        let center = (0..v.len()).max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())).unwrap() as i64;
        let l = closed_form_le(e, 1.0);
        let y = if center > 300 { center - 120 } else { center + 120 };
        let reg = regularity_classify(&m, theta, e, y, 70, l - 0.2).unwrap();
        assert!(matches!(reg, Regularity::Regular { .. }), "{reg:?}");
        let sing = regularity_classify(&m, theta, e, center, 140, 0.5 * l).unwrap();
        assert_eq!(sing, Regularity::Singular);
    }

    #[test]
    fn zero_decay_rate_far_from_spectrum() {
        let m = type2(1.0);
        let reg = regularity_classify(&m, 0.3, 12.0, 50, 21, 0.0).unwrap();
        assert!(matches!(reg, Regularity::Regular { .. }));
    }

    #[test]
    fn chebyshev_nodes_are_uniform() {
        let k = 20;
        let nodes: Vec<f64> = (0..=k).map(|j| (2 * j + 1) as f64 / (4 * k + 4) as f64).collect();
        let rep = epsilon_uniform_check(&nodes, 1.0).unwrap();
        assert!(rep.uniform);
        assert!(rep.max_lagrange <= 1.0 + 2.0 / core::f64::consts::PI * libm::log((k + 1) as f64) + 1e-9);
    }

    #[test]
    fn clustered_nodes_fail() {
        let rep = epsilon_uniform_check(&[0.1, 0.1 + 1e-9, 0.3, 0.45], 1.0).unwrap();
        assert!(!rep.uniform);
        assert_eq!(epsilon_uniform_check(&[0.1, 0.9], 1.0), Err(Error::CoincidentNodes { i: 0, j: 1 }));
    }

    #[test]
    fn rotation_orbit_nodes() {
        let f = Frequency::golden();
        let a = f.value();
        let theta = 0.1371;
        let nodes: Vec<f64> = (1..=610).map(|j| theta + (2 * j - 1) as f64 * a).collect();
        assert!(epsilon_uniform_check(&nodes, 0.1).unwrap().uniform);
    }

    #[test]
    fn strip_green_is_symmetric() {
        let s = StripModel::type3(1.0, Frequency::golden()).unwrap();
        let spec = ModelSpec::Strip(s);
        let a = green_restricted(&spec, 0.2, 0.31, 1, 10, 3, 14).unwrap();
        let b = green_restricted(&spec, 0.2, 0.31, 1, 10, 14, 3).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn green_is_symmetric(theta in 0.0f64..1.0, e in -2.0f64..2.0, len in 1i64..30) {
            let g = ScalarGreen::new(&type2(1.1), theta, e, 0, len - 1).unwrap();
            for i in 0..len {
                for j in 0..len {
                    prop_assert_eq!(g.entry(i, j), g.entry(j, i));
                }
            }
        }
    }
}
