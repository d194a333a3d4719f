//! Finite Dirichlet restrictions: assembly, inertia counting, eigenvalues,
//! banded solves, determinant recurrences and the integrated density of
//! states.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::models::{ModelSpec, ScalarMosaicModel, StripModel};
use crate::{Error, Mat2C, Result, C64};

mod green;
mod interlacing;
mod localization;

pub use green::{epsilon_uniform_check, green_restricted, regularity_classify, Regularity, ScalarGreen, UniformityReport};
pub use interlacing::{check_omega0, interlacing_verify, omega0_margin, InterlacingCase, InterlacingReport, Violation};
pub use localization::{decay_rate, ipr, localization_scan, LocalizationRecord};

/// Shift applied when an inertia count hits an exactly singular pivot.
pub const PIVOT_RETRY_SHIFT: f64 = 1e-12;

/// Symmetric tridiagonal restriction of a scalar chain to `[first_site, first_site + N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiag {
    pub first_site: i64,
    pub diag: Vec<f64>,
    /// `off[i]` couples local sites `i` and `i+1`.
    pub off: Vec<f64>,
}

/// Block-tridiagonal restriction of a strip to blocks
/// `first_site..first_site + N`, with `hop` above and `hop*` below the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTridiag {
    pub first_site: i64,
    pub diag: Vec<Mat2C>,
    pub hop: Mat2C,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiniteRestriction {
    Scalar(Tridiag),
    Strip(BlockTridiag),
}

impl Tridiag {
    /// `H` on sites `n1..=n2` at phase `theta`.
    pub fn interval(model: &ScalarMosaicModel, theta: f64, n1: i64, n2: i64) -> Self {
        let diag = (n1..=n2).map(|n| model.sample(theta, n).0).collect();
        let off = (n1..n2).map(|n| model.sample(theta, n).1).collect();
        Tridiag { first_site: n1, diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn count_exact(&self, e: f64) -> Option<usize> {
        let mut count = 0;
        let mut s = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / s };
            s = self.diag[i] - e - coupling;
            if s == 0.0 || !s.is_finite() {
                return None;
            }
            if s < 0.0 {
                count += 1;
            }
        }
        Some(count)
    }

    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let n = self.diag.len();
        let mut w = vec![C64::new(0.0, 0.0); n];
        let mut y = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let d = C64::new(self.diag[i], 0.0) - z;
            if i == 0 {
                w[0] = d;
                y[0] = rhs[0];
            } else {
                let c = self.off[i - 1];
                let r = c / w[i - 1];
                w[i] = d - r * c;
                y[i] = rhs[i] - r * y[i - 1];
            }
            if w[i].norm() == 0.0 || !w[i].is_finite() {
                return Err(Error::PivotBreakdown { energy: z.re });
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let next = if i + 1 < n { x[i + 1] * self.off[i] } else { C64::new(0.0, 0.0) };
            x[i] = (y[i] - next) / w[i];
        }
        Ok(x)
    }
}

impl BlockTridiag {
    /// Blocks `V(ω + 2nα)` for `n = n1..=n2`.
    pub fn interval(model: &StripModel, omega: f64, n1: i64, n2: i64) -> Self {
        let diag = (n1..=n2).map(|n| model.strip_potential(omega, n)).collect();
        BlockTridiag { first_site: n1, diag, hop: model.hop }
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    /// Block LDL* with 2×2 pivots; the inertia of `S − E` is the sum of the
    /// pivot inertias.
    fn count_exact(&self, e: f64) -> Option<usize> {
        if self.hop == Mat2C::J {
            return self.count_exact_j(e);
        }
        let shift = Mat2C::real(e, 0.0, 0.0, e);
        let hop_adj = self.hop.adjoint();
        let mut count = 0;
        let mut prev_inv: Option<Mat2C> = None;
        for d in &self.diag {
            let mut s = *d - shift;
            if let Some(inv) = prev_inv {
                s = s - hop_adj * inv * self.hop;
            }
            let s = s.hermitian_part();
            let det = s.det().re;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            count += if det < 0.0 {
                1
            } else if s.a11.re < 0.0 {
                2
            } else {
                0
            };
            prev_inv = Some(s.inverse()?);
        }
        Some(count)
    }

    /// With hopping `J` the Schur complement only changes the `(1,1)` entry.
    fn count_exact_j(&self, e: f64) -> Option<usize> {
        let mut count = 0;
        let mut inv11 = 0.0;
        for v in &self.diag {
            let a = v.a11.re - e - inv11;
            let d = v.a22.re - e;
            let det = a * d - v.a12.norm_sqr();
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            count += if det < 0.0 {
                1
            } else if a < 0.0 {
                2
            } else {
                0
            };
            inv11 = d / det;
        }
        Some(count)
    }

    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let nb = self.diag.len();
        let zi = Mat2C::diag(z, z);
        let hop_adj = self.hop.adjoint();
        let mut w_inv = Vec::with_capacity(nb);
        let mut y: Vec<[C64; 2]> = Vec::with_capacity(nb);
        for i in 0..nb {
            let r = [rhs[2 * i], rhs[2 * i + 1]];
            let (w, yi) = if i == 0 {
                (self.diag[0] - zi, r)
            } else {
                let l = hop_adj * w_inv[i - 1];
                let prev: [C64; 2] = y[i - 1];
                let ly = l.apply(prev);
                (self.diag[i] - zi - l * self.hop, [r[0] - ly[0], r[1] - ly[1]])
            };
            let inv = w.inverse().ok_or(Error::PivotBreakdown { energy: z.re })?;
            w_inv.push(inv);
            y.push(yi);
        }
        let mut x = vec![C64::new(0.0, 0.0); 2 * nb];
        for i in (0..nb).rev() {
            let mut r = y[i];
            if i + 1 < nb {
                let h = self.hop.apply([x[2 * i + 2], x[2 * i + 3]]);
                r = [r[0] - h[0], r[1] - h[1]];
            }
            let xi = w_inv[i].apply(r);
            x[2 * i] = xi[0];
            x[2 * i + 1] = xi[1];
        }
        Ok(x)
    }
}

/// Assembles the Dirichlet restriction: scalar chains on sites `0..N`,
/// strips on blocks `1..=N`.
pub fn build_restriction(model: &ModelSpec, phase: f64, n: usize) -> Result<FiniteRestriction> {
    if n == 0 {
        return Err(Error::InvalidArgument("restriction size must be at least 1"));
    }
    Ok(match model {
        ModelSpec::Scalar(m) => FiniteRestriction::Scalar(Tridiag::interval(m, phase, 0, n as i64 - 1)),
        ModelSpec::Strip(m) => FiniteRestriction::Strip(BlockTridiag::interval(m, phase, 1, n as i64)),
    })
}

impl FiniteRestriction {
    /// Matrix dimension (`N` scalar, `2N` strip).
    pub fn dim(&self) -> usize {
        match self {
            FiniteRestriction::Scalar(t) => t.len(),
            FiniteRestriction::Strip(b) => 2 * b.blocks(),
        }
    }

    pub fn bandwidth(&self) -> usize {
        match self {
            FiniteRestriction::Scalar(_) => 1,
            FiniteRestriction::Strip(b) => {
                let h = b.hop;
                let zero = C64::new(0.0, 0.0);
                if h.a21 != zero {
                    1
                } else if h.a11 != zero || h.a22 != zero {
                    2
                } else if h.a12 != zero {
                    3
                } else {
                    1
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            FiniteRestriction::Scalar(t) => {
                let mut m = DenseMatrix::zeros(t.len());
                for i in 0..t.len() {
                    m.set(i, i, C64::new(t.diag[i], 0.0));
                    if i + 1 < t.len() {
                        m.set(i, i + 1, C64::new(t.off[i], 0.0));
                        m.set(i + 1, i, C64::new(t.off[i], 0.0));
                    }
                }
                m
            }
            FiniteRestriction::Strip(b) => {
                let nb = b.blocks();
                let mut m = DenseMatrix::zeros(2 * nb);
                let h = [[b.hop.a11, b.hop.a12], [b.hop.a21, b.hop.a22]];
                for (k, v) in b.diag.iter().enumerate() {
                    let vb = [[v.a11, v.a12], [v.a21, v.a22]];
                    for r in 0..2 {
                        for c in 0..2 {
                            m.set(2 * k + r, 2 * k + c, vb[r][c]);
                            if k + 1 < nb {
                                m.set(2 * k + r, 2 * k + 2 + c, h[r][c]);
                                m.set(2 * k + 2 + c, 2 * k + r, h[r][c].conj());
                            }
                        }
                    }
                }
                m
            }
        }
    }

    /// `H x` for a vector in site order (`(a_1, b_1, a_2, b_2, …)` for strips).
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        match self {
            FiniteRestriction::Scalar(t) => (0..t.len())
                .map(|i| {
                    let mut s = x[i] * t.diag[i];
                    if i > 0 {
                        s += x[i - 1] * t.off[i - 1];
                    }
                    if i + 1 < t.len() {
                        s += x[i + 1] * t.off[i];
                    }
                    s
                })
                .collect(),
            FiniteRestriction::Strip(b) => {
                let nb = b.blocks();
                let adj = b.hop.adjoint();
                let mut out = vec![C64::new(0.0, 0.0); 2 * nb];
                for k in 0..nb {
                    let mut s = b.diag[k].apply([x[2 * k], x[2 * k + 1]]);
                    if k + 1 < nb {
                        let h = b.hop.apply([x[2 * k + 2], x[2 * k + 3]]);
                        s = [s[0] + h[0], s[1] + h[1]];
                    }
                    if k > 0 {
                        let h = adj.apply([x[2 * k - 2], x[2 * k - 1]]);
                        s = [s[0] + h[0], s[1] + h[1]];
                    }
                    out[2 * k] = s[0];
                    out[2 * k + 1] = s[1];
                }
                out
            }
        }
    }

    /// Gershgorin interval containing the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let m = self.to_dense_rows_bound();
        (m.0, m.1)
    }

    fn to_dense_rows_bound(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        match self {
            FiniteRestriction::Scalar(t) => {
                for i in 0..t.len() {
                    let mut r = 0.0;
                    if i > 0 {
                        r += t.off[i - 1].abs();
                    }
                    if i + 1 < t.len() {
                        r += t.off[i].abs();
                    }
                    lo = lo.min(t.diag[i] - r);
                    hi = hi.max(t.diag[i] + r);
                }
            }
            FiniteRestriction::Strip(b) => {
                let row = |m: &Mat2C, r: usize| if r == 0 { m.a11.norm() + m.a12.norm() } else { m.a21.norm() + m.a22.norm() };
                let adj = b.hop.adjoint();
                for (k, v) in b.diag.iter().enumerate() {
                    for r in 0..2 {
                        let d = if r == 0 { v.a11.re } else { v.a22.re };
                        let off_diag = if r == 0 { v.a12.norm() } else { v.a21.norm() };
                        let mut rad = off_diag;
                        if k + 1 < b.blocks() {
                            rad += row(&b.hop, r);
                        }
                        if k > 0 {
                            rad += row(&adj, r);
                        }
                        lo = lo.min(d - rad);
                        hi = hi.max(d + rad);
                    }
                }
            }
        }
        (lo - 1e-9, hi + 1e-9)
    }

    fn count_exact(&self, e: f64) -> Option<usize> {
        match self {
            FiniteRestriction::Scalar(t) => t.count_exact(e),
            FiniteRestriction::Strip(b) => b.count_exact(e),
        }
    }

    /// Solves `(H − z) x = rhs` by block Gaussian elimination without pivoting.
    pub fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        if rhs.len() != self.dim() {
            return Err(Error::InvalidArgument("right-hand side length does not match the restriction"));
        }
        match self {
            FiniteRestriction::Scalar(t) => t.solve(z, rhs),
            FiniteRestriction::Strip(b) => b.solve(z, rhs),
        }
    }
}

/// Number of eigenvalues strictly below `e`, read off the inertia of the
/// block LDL* factorization of `H − e`.
///
/// An exactly singular pivot is retried at `e ± 1e−12·max(1,|e|)`.
pub fn count_below(restriction: &FiniteRestriction, e: f64) -> Result<usize> {
    if let Some(c) = restriction.count_exact(e) {
        return Ok(c);
    }
    let h = PIVOT_RETRY_SHIFT * e.abs().max(1.0);
    let lo = restriction.count_exact(e - h);
    let hi = restriction.count_exact(e + h);
    match (lo, hi) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(Error::PivotBreakdown { energy: e }),
    }
}

/// All eigenvalues in `[lo, hi]`, repeated by multiplicity, by bisection on
/// [`count_below`] down to width `tol`.
pub fn eigenvalues(restriction: &FiniteRestriction, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument("eigenvalue window needs lo < hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("bisection tolerance must be positive"));
    }
    let mut out = Vec::new();
    let clo = count_below(restriction, lo)?;
    let chi = count_below(restriction, hi)?;
    let mut stack = vec![(lo, clo, hi, chi)];
    while let Some((a, ca, b, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            for _ in ca..cb {
                out.push(mid);
            }
            continue;
        }
        let cm = count_below(restriction, mid)?;
        // Right half is pushed first so the left half is processed first.
        stack.push((mid, cm, b, cb));
        stack.push((a, ca, mid, cm));
    }
    Ok(out)
}

/// Every eigenvalue of the restriction.
pub fn all_eigenvalues(restriction: &FiniteRestriction, tol: f64) -> Result<Vec<f64>> {
    let (lo, hi) = restriction.spectral_bounds();
    eigenvalues(restriction, lo, hi, tol)
}

/// Eigenvalues in `[lo, hi]` whose eigenvectors are not boundary states:
/// at most a quarter of the weight may sit in the outer tenth on either end.
///
/// Dirichlet truncation creates phase-dependent eigenvalues inside gaps of
/// the infinite operator, with eigenvectors pinned to an end.
pub fn bulk_eigenvalues(restriction: &FiniteRestriction, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for e in eigenvalues(restriction, lo, hi, tol)? {
        let v = eigenvector(restriction, e)?;
        let edge = v.len() / 10;
        let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let head: f64 = v[..edge].iter().map(|x| x.norm_sqr()).sum();
        let tail: f64 = v[v.len() - edge..].iter().map(|x| x.norm_sqr()).sum();
        if head < 0.25 * total && tail < 0.25 * total {
            out.push(e);
        }
    }
    Ok(out)
}

/// Eigenvector for an (approximate) eigenvalue by shifted inverse iteration
/// with two refinement sweeps; normalized with largest component real.
pub fn eigenvector(restriction: &FiniteRestriction, e: f64) -> Result<Vec<C64>> {
    let n = restriction.dim();
    let eta = 1e-10 * e.abs().max(1.0);
    let z = C64::new(e, eta);
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.1 * libm::sin(i as f64 * 1.7), 0.0)).collect();
    for _ in 0..3 {
        x = restriction.solve(z, &x)?;
        normalize(&mut x);
    }
    let imax = (0..n).max_by(|&i, &j| x[i].norm().total_cmp(&x[j].norm())).unwrap_or(0);
    let ph = x[imax].conj() / x[imax].norm();
    for v in &mut x {
        *v *= ph;
    }
    Ok(x)
}

fn normalize(x: &mut [C64]) {
    let s = libm::sqrt(x.iter().map(|v| v.norm_sqr()).sum::<f64>());
    for v in x.iter_mut() {
        *v /= s;
    }
}

/// `n_phases` phases `φ0 + j/n_phases`.
pub fn equidistributed_phases(n_phases: usize) -> Vec<f64> {
    (0..n_phases).map(|j| crate::frac(crate::DEFAULT_PHASE + j as f64 / n_phases as f64)).collect()
}

/// Phase-averaged normalized counting function over the given phases.
pub fn ids_with_phases(model: &ModelSpec, e: f64, n: usize, phases: &[f64]) -> Result<f64> {
    if phases.is_empty() {
        return Err(Error::InvalidArgument("at least one phase is required"));
    }
    let mut total = 0.0;
    for &p in phases {
        let r = build_restriction(model, p, n)?;
        total += count_below(&r, e)? as f64 / r.dim() as f64;
    }
    Ok(total / phases.len() as f64)
}

/// Integrated density of states of the size-`N` restriction averaged over
/// `n_phases` equidistributed phases.
pub fn ids(model: &ModelSpec, e: f64, n: usize, n_phases: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InvalidArgument("IDS estimates need N >= 10"));
    }
    ids_with_phases(model, e, n, &equidistributed_phases(n_phases))
}

/// Scaled determinants `Δ_n = det(z − S|[1,n]) / Π_{j≤n}(z − V22(j))` of a
/// strip with hopping `J`, for `n = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripDetRecurrence {
    pub z: C64,
    pub delta: Vec<C64>,
    /// `z − V22(j)` for `j = 1..=N`.
    pub denominators: Vec<C64>,
}

impl StripDetRecurrence {
    /// `det(z − S|[1,n])` undoing the scaling.
    pub fn unscaled(&self, n: usize) -> C64 {
        self.denominators[..n].iter().fold(self.delta[n], |acc, d| acc * d)
    }
}

/// Determinants `P_k = det(H−E)|[0,k−1]` and `Q_k = det(H−E)|[1,k]` of a scalar
/// chain, for `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarDetRecurrence {
    pub energy: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DetRecurrence {
    Strip(StripDetRecurrence),
    Scalar(ScalarDetRecurrence),
}

/// `det(H − E)` on `[n1, n1 + j)` for `j = 0..=len`.
pub fn scalar_prefix_dets(model: &ScalarMosaicModel, theta: f64, e: f64, n1: i64, len: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(len + 1);
    d.push(1.0);
    for j in 0..len {
        let n = n1 + j as i64;
        let (v, _) = model.sample(theta, n);
        let next = if j == 0 {
            v - e
        } else {
            let (_, c) = model.sample(theta, n - 1);
            let before = if j >= 2 { d[j - 1] } else { 1.0 };
            (v - e) * d[j] - c * c * before
        };
        d.push(next);
    }
    d
}

pub fn scalar_det_recurrence(model: &ScalarMosaicModel, theta: f64, e: f64, k: usize) -> ScalarDetRecurrence {
    ScalarDetRecurrence { energy: e, p: scalar_prefix_dets(model, theta, e, 0, k), q: scalar_prefix_dets(model, theta, e, 1, k) }
}

/// `Z_n = A^z(site n) Z_{n−1}` with `Z_0 = (1, 0)`.
pub fn strip_det_recurrence(model: &StripModel, omega: f64, z: C64, n: usize) -> Result<StripDetRecurrence> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    let mut delta = Vec::with_capacity(n + 1);
    let mut denominators = Vec::with_capacity(n);
    delta.push(C64::new(1.0, 0.0));
    let mut prev = C64::new(0.0, 0.0);
    for j in 1..=n {
        let (t, d) = model.reduced_entry(z, model.site_phase(omega, j as i64)).map_err(|e| match e {
            Error::Pole { distance, .. } => Error::Pole { index: j as i64, distance },
            other => other,
        })?;
        let cur = delta[j - 1];
        delta.push(t * cur - prev);
        prev = cur;
        denominators.push(d);
    }
    Ok(StripDetRecurrence { z, delta, denominators })
}

/// Determinant recurrence for either model family; scalar chains use the
/// real part of `z`.
pub fn det_recurrence(model: &ModelSpec, phase: f64, z: C64, n: usize) -> Result<DetRecurrence> {
    Ok(match model {
        ModelSpec::Strip(m) => DetRecurrence::Strip(strip_det_recurrence(m, phase, z, n)?),
        ModelSpec::Scalar(m) => DetRecurrence::Scalar(scalar_det_recurrence(m, phase, z.re, n)),
    })
}

/// Eigenvalues of finite restrictions standing in for the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumApprox {
    /// Sorted eigenvalues pooled over the sampled phases.
    pub eigenvalues: Vec<f64>,
}

impl SpectrumApprox {
    pub fn new(model: &ModelSpec, phases: &[f64], n: usize, tol: f64) -> Result<Self> {
        let mut eigenvalues = Vec::new();
        for &p in phases {
            eigenvalues.extend(all_eigenvalues(&build_restriction(model, p, n)?, tol)?);
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(SpectrumApprox { eigenvalues })
    }

    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// Distance from `e` to the nearest eigenvalue.
    pub fn distance(&self, e: f64) -> f64 {
        let i = self.eigenvalues.partition_point(|&v| v < e);
        let mut d = f64::INFINITY;
        if i < self.eigenvalues.len() {
            d = d.min(self.eigenvalues[i] - e);
        }
        if i > 0 {
            d = d.min(e - self.eigenvalues[i - 1]);
        }
        d
    }

    pub fn contains(&self, e: f64, tol: f64) -> bool {
        self.distance(e) <= tol
    }

    pub fn in_window(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.eigenvalues.iter().copied().filter(|&v| lo <= v && v <= hi).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Frequency;
    use crate::dense::{dense_count_below, jacobi_eigen};
    use crate::models::ScalarKind;
    use proptest::prelude::*;

    fn type3(l: f64) -> StripModel {
        StripModel::type3(l, Frequency::golden()).unwrap()
    }

    fn type2(l: f64) -> ScalarMosaicModel {
        ScalarMosaicModel::new(ScalarKind::TypeII, l, Frequency::golden()).unwrap()
    }

    #[test]
    fn single_block_restriction() {
        let m = type3(1.0);
        let r = build_restriction(&ModelSpec::Strip(m.clone()), 0.3, 1).unwrap();
        let d = r.to_dense();
        let v = m.strip_potential(0.3, 1);
        assert_eq!(d.get(0, 1), v.a12);
        assert_eq!(d.dim(), 2);
        assert!(d.is_hermitian());
        assert_eq!(count_below(&r, 0.0).unwrap(), 1);
        assert_eq!(count_below(&r, -1.5).unwrap(), 0);
        assert_eq!(count_below(&r, 1.5).unwrap(), 2);
    }

    #[test]
    fn bandwidths() {
        let r = build_restriction(&ModelSpec::Strip(type3(1.0)), 0.3, 5).unwrap();
        assert_eq!(r.bandwidth(), 2);
        let r = build_restriction(&ModelSpec::Scalar(type2(1.0)), 0.3, 5).unwrap();
        assert_eq!(r.bandwidth(), 1);
    }

    #[test]
    fn reflection_symmetry_of_p4() {
        // P_4(θ − α) = P_4(−θ − α).
        let m = type2(0.9);
        let a = m.alpha();
        for &theta in &[0.11, 0.37, 0.73] {
            for &e in &[-1.3, 0.2, 2.1] {
                let p1 = scalar_prefix_dets(&m, theta - a, e, 0, 4)[4];
                let p2 = scalar_prefix_dets(&m, -theta - a, e, 0, 4)[4];
                assert!((p1 - p2).abs() < 1e-12 * (1.0 + p1.abs()));
            }
        }
    }

    #[test]
    fn strip_form_of_type2_matches_chain() {
        let m = type2(0.8);
        let strip = m.to_strip().unwrap();
        let n = 12;
        let chain = FiniteRestriction::Scalar(Tridiag::interval(&m, 0.21, 2, 2 * n as i64 + 1));
        let blocks = FiniteRestriction::Strip(BlockTridiag::interval(&strip, 0.21, 1, n as i64));
        assert!(chain.to_dense().max_abs_diff(&blocks.to_dense()) < 1e-12);
        for e in [-1.7, -0.3, 0.05, 0.9, 2.2] {
            assert_eq!(count_below(&chain, e).unwrap(), count_below(&blocks, e).unwrap());
        }
    }

    #[test]
    fn eigenvalues_match_dense() {
        let m = type3(1.0);
        for (i, n) in [3usize, 8, 17, 30].into_iter().enumerate() {
            let r = build_restriction(&ModelSpec::Strip(m.clone()), 0.1 + 0.2 * i as f64, n).unwrap();
            let want = jacobi_eigen(&r.to_dense()).values;
            let got = all_eigenvalues(&r, 1e-12).unwrap();
            assert_eq!(got.len(), want.len());
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn det_recurrence_small_cases() {
        let m = type3(1.3);
        let z = C64::new(0.4, 0.7);
        let rec = strip_det_recurrence(&m, 0.2, z, 1).unwrap();
        let v = m.strip_potential(0.2, 1);
        let want = (z - v.a11) * (z - v.a22) - v.a12 * v.a21;
        assert!((rec.unscaled(1) - want).norm() < 1e-13);
    }

    #[test]
    fn det_recurrence_matches_dense_lu() {
        let m = type3(0.8);
        for n in 1..=12usize {
            let z = C64::new(0.3, 0.2);
            let rec = strip_det_recurrence(&m, 0.45, z, n).unwrap();
            let r = build_restriction(&ModelSpec::Strip(m.clone()), 0.45, n).unwrap();
            let d = r.to_dense();
            let mat = nalgebra::DMatrix::from_fn(2 * n, 2 * n, |i, j| {
                let x = if i == j { z - d.get(i, j) } else { -d.get(i, j) };
                nalgebra::Complex::new(x.re, x.im)
            });
            let det = mat.determinant();
            let got = rec.unscaled(n);
            let rel = ((got.re - det.re).powi(2) + (got.im - det.im).powi(2)).sqrt() / det.norm();
            assert!(rel < 1e-8, "n={n} rel={rel}");
        }
    }

    #[test]
    fn det_recurrence_matches_cocycle_column() {
        let m = type3(1.0);
        let z = C64::new(0.6, 0.3);
        let omega = 0.27;
        let n = 40;
        let rec = strip_det_recurrence(&m, omega, z, n).unwrap();
        let mut p = Mat2C::IDENTITY;
        for j in 1..=n {
            p = m.reduced_matrix(z, m.site_phase(omega, j as i64)).unwrap() * p;
            let scale = 1.0 + rec.delta[j].norm();
            assert!((p.a11 - rec.delta[j]).norm() < 1e-9 * scale);
            assert!((p.a21 - rec.delta[j - 1]).norm() < 1e-9 * (1.0 + rec.delta[j - 1].norm()));
        }
    }

    #[test]
    fn three_determinant_identities() {
        let m = type2(1.2);
        let a = m.alpha();
        for &theta in &[0.123, 0.456, 0.789] {
            for &e in &[-0.7, 0.3, 1.9] {
                let d = |th: f64, k: usize| scalar_prefix_dets(&m, th, e, 0, k)[k];
                let q = |k: usize| scalar_prefix_dets(&m, theta, e, 1, k)[k];
                let vs = |n: i64| m.sample(theta, n).0;
                let cs = |n: i64| m.sample(theta, n).1;
                for k in 2..=20usize {
                    let k2 = 2 * k as i64;
                    let p2k = d(theta, 2 * k);
                    let scale = 1.0 + p2k.abs();
                    let lhs = (vs(k2 - 2) - e) * d(theta, 2 * k - 1);
                    let rhs = p2k + cs(k2 - 2).powi(2) * d(theta, 2 * k - 2);
                    assert!((lhs - rhs).abs() < 1e-10 * scale.max(lhs.abs()));
                    let lhs = (vs(0) - e) * q(2 * k - 1);
                    let rhs = p2k + cs(0).powi(2) * d(theta + 2.0 * a, 2 * k - 2);
                    assert!((lhs - rhs).abs() < 1e-10 * scale.max(lhs.abs()));
                    let lhs = (vs(0) - e) * (vs(k2 - 2) - e) * q(2 * k - 2);
                    let rhs = p2k
                        + cs(0).powi(2) * d(theta + 2.0 * a, 2 * k - 2)
                        + cs(k2 - 2).powi(2) * d(theta, 2 * k - 2)
                        + cs(k2 - 2).powi(2) * cs(0).powi(2) * if k >= 2 { d(theta + 2.0 * a, 2 * k - 4) } else { 1.0 };
                    assert!((lhs - rhs).abs() < 1e-10 * scale.max(lhs.abs()), "k={k}");
                }
            }
        }
    }

    #[test]
    fn ids_bounds_and_rotation_relation() {
        let m = ModelSpec::Strip(type3(1.0));
        assert_eq!(ids(&m, -10.0, 50, 3).unwrap(), 0.0);
        assert_eq!(ids(&m, 10.0, 50, 3).unwrap(), 1.0);
        let strip = type3(1.0);
        for e in [1.3, 2.0, -1.4, -2.2] {
            let n = 400;
            let nn = ids_with_phases(&m, e, n, &[0.1]).unwrap();
            let rho = crate::cocycle::rotation_number(&strip, e, n as u64, 0.1).unwrap();
            let want = if e > 0.0 { 1.0 - rho } else { 0.5 - rho };
            assert!((nn - want).abs() <= 2.0 / n as f64, "E={e}: n={nn} want={want}");
        }
    }

    #[test]
    fn degenerate_pair_at_v22_is_a_double_jump() {
        // A block decoupled from its neighbours (V12 = 0 and zero hopping to
        // the b-component) puts V22 into the spectrum; two identical decoupled
        // b-sites give a count jump of two.
        let b = BlockTridiag {
            first_site: 1,
            diag: vec![Mat2C::real(0.3, 0.0, 0.0, 0.5), Mat2C::real(-0.2, 0.0, 0.0, 0.5)],
            hop: Mat2C::J,
        };
        let r = FiniteRestriction::Strip(b);
        let jump = count_below(&r, 0.5 + 1e-9).unwrap() - count_below(&r, 0.5 - 1e-9).unwrap();
        assert_eq!(jump, 2);
    }

    #[test]
    fn banded_solve_matches_dense() {
        let m = type3(1.1);
        let r = build_restriction(&ModelSpec::Strip(m), 0.33, 9).unwrap();
        let z = C64::new(0.4, 0.1);
        let rhs: Vec<C64> = (0..18).map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let x = r.solve(z, &rhs).unwrap();
        let hx = r.matvec(&x);
        for i in 0..18 {
            assert!((hx[i] - x[i] * z - rhs[i]).norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_iteration_eigenvector() {
        let m = type2(1.0);
        let r = build_restriction(&ModelSpec::Scalar(m), 0.1371, 200).unwrap();
        let eigs = all_eigenvalues(&r, 1e-13).unwrap();
        let e = eigs[137];
        let v = eigenvector(&r, e).unwrap();
        let hv = r.matvec(&v);
        let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-8, "{res}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn count_matches_dense(omega in 0.0f64..1.0, l in 0.2f64..2.5, n in 1usize..30, e in -4.0f64..4.0) {
            let r = build_restriction(&ModelSpec::Strip(type3(l)), omega, n).unwrap();
            let eig = jacobi_eigen(&r.to_dense());
            prop_assume!(eig.values.iter().all(|v| (v - e).abs() > 1e-9));
            prop_assert_eq!(count_below(&r, e).unwrap(), dense_count_below(&eig, e));
        }

        #[test]
        fn count_monotone_with_total_jump(theta in 0.0f64..1.0, l in 0.2f64..2.5, n in 1usize..60) {
            let r = build_restriction(&ModelSpec::Scalar(type2(l)), theta, n).unwrap();
            let (lo, hi) = r.spectral_bounds();
            let mut prev = 0;
            for i in 0..=200 {
                let e = lo + (hi - lo) * i as f64 / 200.0;
                let c = count_below(&r, e).unwrap();
                prop_assert!(c >= prev);
                prev = c;
            }
            prop_assert_eq!(count_below(&r, lo).unwrap(), 0);
            prop_assert_eq!(count_below(&r, hi).unwrap(), r.dim());
        }

        #[test]
        fn restriction_is_hermitian(omega in 0.0f64..1.0, n in 1usize..20) {
            let r = build_restriction(&ModelSpec::Strip(type3(0.7)), omega, n).unwrap();
            prop_assert!(r.to_dense().is_hermitian());
        }

        #[test]
        fn p_depends_on_reflected_phase_only(theta in 0.0f64..1.0, e in -2.0f64..2.0, l in 1usize..8) {
            let m = type2(1.1);
            let a = m.alpha();
            let k = 2 * l;
            let p1 = scalar_prefix_dets(&m, theta - (l as f64 - 1.0) * a, e, 0, k)[k];
            let p2 = scalar_prefix_dets(&m, -theta - (l as f64 - 1.0) * a, e, 0, k)[k];
            prop_assert!((p1 - p2).abs() < 1e-9 * (1.0 + p1.abs()));
        }
    }
}
