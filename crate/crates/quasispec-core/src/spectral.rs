//! Half-line solutions, m-functions and the Green's function on `Z`, the
//! Thouless formula, Jitomirskaya–Last length scales, spectral-measure
//! bounds and the spectral-type diagnostic.

use alloc::vec;
use alloc::vec::Vec;

use crate::cocycle::{growth_exponent, scalar_le, strip_le, GrowthParams, LeParams};
use crate::finite::{all_eigenvalues, build_restriction, count_below, equidistributed_phases, ids_with_phases};
use crate::models::{reduce_strip_to_scalar, ModelSpec, StripModel};
use crate::{Error, Result, C64};

/// Largest truncation the continued fractions may use.
pub const N_FAR_MAX: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// First components `a(n)`, `n = first..first+len`, of a solution of
/// `S u = z u` for a strip with hopping `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub z: C64,
    pub first: i64,
    pub a: Vec<C64>,
}

impl Solution {
    pub fn last(&self) -> i64 {
        self.first + self.a.len() as i64 - 1
    }

    pub fn at(&self, n: i64) -> C64 {
        self.a[(n - self.first) as usize]
    }

    /// `b(n) = V21(n) a(n) / (z − V22(n))`.
    pub fn b(&self, model: &StripModel, omega: f64, n: i64) -> Result<C64> {
        model.slaved_b(self.z, model.site_phase(omega, n), self.at(n))
    }

    /// Solution with prescribed `a(first)`, `a(first+1)`, extended forward.
    pub fn from_initial(model: &StripModel, omega: f64, z: C64, first: i64, init: (C64, C64), len: usize) -> Result<Self> {
        let mut a = Vec::with_capacity(len.max(2));
        a.push(init.0);
        a.push(init.1);
        for k in 2..len {
            let n = first + k as i64 - 1;
            let t = t_at(model, omega, z, n)?;
            let next = t * a[k - 1] - a[k - 2];
            a.push(next);
        }
        a.truncate(len.max(2));
        Ok(Solution { z, first, a })
    }
}

/// The solution square-summable at `+∞` (plus) or `−∞` (minus), normalized
/// by `a(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineSolution {
    pub side: Side,
    pub solution: Solution,
    /// Truncation point used by the continued fraction.
    pub n_far: usize,
}

fn t_at(model: &StripModel, omega: f64, z: C64, n: i64) -> Result<C64> {
    model.reduced_entry(z, model.site_phase(omega, n)).map(|(t, _)| t).map_err(|e| match e {
        Error::Pole { distance, .. } => Error::Pole { index: n, distance },
        other => other,
    })
}

/// Ratios `s_k = a⁺(k+1)/a⁺(k)` for `k = 0..count` from the continued
/// fraction `s_{n−1} = 1/(t_n − s_n)` started at `s_{n_far} = 0`.
fn plus_ratios(model: &StripModel, omega: f64, z: C64, count: usize, n_far: usize) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); count];
    let mut s = C64::new(0.0, 0.0);
    for n in (1..=n_far as i64).rev() {
        s = (t_at(model, omega, z, n)? - s).inv();
        let k = (n - 1) as usize;
        if k < count {
            out[k] = s;
        }
    }
    Ok(out)
}

/// Ratios `r_k = a⁻(k−1)/a⁻(k)` for `k = 1, 0, …, 2−count` from
/// `r_{n+1} = 1/(t_n − r_n)` started at `r_{−n_far} = 0`.
fn minus_ratios(model: &StripModel, omega: f64, z: C64, count: usize, n_far: usize) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); count];
    let mut r = C64::new(0.0, 0.0);
    for n in -(n_far as i64)..=0 {
        r = (t_at(model, omega, z, n)? - r).inv();
        let k = (-n) as usize;
        if k < count {
            out[k] = r;
        }
    }
    Ok(out)
}

fn converged<F: FnMut(usize) -> Result<Vec<C64>>>(z: C64, extra: usize, mut ratios: F) -> Result<(Vec<C64>, usize)> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidArgument("half-line solutions need Im z > 0"));
    }
    let start = libm::fmin(1e6, 20.0 / z.im).max(16.0) as usize;
    let mut n_far = start + extra;
    let mut prev = ratios(n_far)?;
    loop {
        let next_far = 2 * n_far;
        if next_far > N_FAR_MAX {
            return Err(Error::NoContraction { imag: z.im });
        }
        let next = ratios(next_far)?;
        let diff = (next[0] - prev[0]).norm();
        if diff <= 1e-14 * next[0].norm().max(1e-300) {
            return Ok((next, next_far));
        }
        prev = next;
        n_far = next_far;
    }
}

/// The decaying solution on sites `lo..=hi` (with `lo ≤ 0 < hi`).
pub fn half_line_solution(model: &StripModel, omega: f64, z: C64, side: Side, lo: i64, hi: i64) -> Result<HalfLineSolution> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    if !(lo <= 0 && hi >= 1) {
        return Err(Error::InvalidArgument("window must contain sites 0 and 1"));
    }
    let len = (hi - lo + 1) as usize;
    let mut a = vec![C64::new(0.0, 0.0); len];
    let idx = |n: i64| (n - lo) as usize;
    let one = C64::new(1.0, 0.0);
    let n_far = match side {
        Side::Plus => {
            let count = hi as usize;
            let (s, n_far) = converged(z, count, |nf| plus_ratios(model, omega, z, count, nf))?;
            a[idx(0)] = one;
            for k in 0..hi {
                a[idx(k + 1)] = s[k as usize] * a[idx(k)];
            }
            for k in (lo + 1..=0).rev() {
                a[idx(k - 1)] = t_at(model, omega, z, k)? * a[idx(k)] - a[idx(k + 1)];
            }
            n_far
        }
        Side::Minus => {
            // r_k for k = 1 down to lo + 1, stored at index 1 − k.
            let count = (2 - lo) as usize;
            let (r, n_far) = converged(z, count, |nf| minus_ratios(model, omega, z, count + 1, nf))?;
            a[idx(0)] = one;
            a[idx(1)] = one / r[0];
            for k in (lo + 1..=0).rev() {
                a[idx(k - 1)] = r[(1 - k) as usize] * a[idx(k)];
            }
            for k in 1..hi {
                a[idx(k + 1)] = t_at(model, omega, z, k)? * a[idx(k)] - a[idx(k - 1)];
            }
            n_far
        }
    };
    Ok(HalfLineSolution { side, solution: Solution { z, first: lo, a }, n_far })
}

/// `m⁺(z) = −a⁺(1)/a⁺(0)` or `m⁻(z) = −a⁻(0)/a⁻(1)`.
pub fn m_function(model: &StripModel, omega: f64, z: C64, side: Side) -> Result<C64> {
    let h = half_line_solution(model, omega, z, side, 0, 1)?;
    let s = &h.solution;
    Ok(match side {
        Side::Plus => -s.at(1) / s.at(0),
        Side::Minus => -s.at(0) / s.at(1),
    })
}

/// `M(z) = (m⁺ + m⁻)/(1 − m⁺m⁻)`, the Borel transform of `μ_{δ0} + μ_{δ1}`.
pub fn borel_transform(model: &StripModel, omega: f64, z: C64) -> Result<C64> {
    let mp = m_function(model, omega, z, Side::Plus)?;
    let mm = m_function(model, omega, z, Side::Minus)?;
    Ok((mp + mm) / (C64::new(1.0, 0.0) - mp * mm))
}

/// `W(n) = v(n−1)u(n) − u(n−1)v(n)` on the common window; errors if it
/// varies by more than `1e−8` relative.
pub fn wronskian(u: &Solution, v: &Solution) -> Result<C64> {
    let lo = u.first.max(v.first) + 1;
    let hi = u.last().min(v.last());
    if hi < lo {
        return Err(Error::InvalidArgument("solutions need two common sites"));
    }
    let w_at = |n: i64| v.at(n - 1) * u.at(n) - u.at(n - 1) * v.at(n);
    // Cancellation in `w_at(n)` is measured against the sizes at site `n`.
    let scale = |n: i64| (u.at(n).norm() + u.at(n - 1).norm()) * (v.at(n).norm() + v.at(n - 1).norm());
    let w0 = w_at(lo);
    let mut spread: f64 = 0.0;
    for n in lo + 1..=hi {
        let s = w0.norm().max(scale(n)).max(f64::MIN_POSITIVE);
        spread = spread.max((w_at(n) - w0).norm() / s);
    }
    if spread > 1e-8 {
        return Err(Error::InconsistentWronskian { spread });
    }
    Ok(w0)
}

/// `G(n, m; z) = a⁻(n∧m) a⁺(n∨m) / W[u⁺, u⁻]` for the first components.
pub fn green_infinite(model: &StripModel, omega: f64, z: C64, n: i64, m: i64) -> Result<C64> {
    let lo = n.min(m).min(0);
    let hi = n.max(m).max(1);
    let plus = half_line_solution(model, omega, z, Side::Plus, lo, hi)?.solution;
    let minus = half_line_solution(model, omega, z, Side::Minus, lo, hi)?.solution;
    let w = minus.at(0) * plus.at(1) - plus.at(0) * minus.at(1);
    Ok(minus.at(n.min(m)) * plus.at(n.max(m)) / w)
}

/// The canonical solutions at `z`: `u₁` with `(a(1), a(0)) = (1, 0)` and
/// `u₂` with `(a(1), a(0)) = (0, 1)`, on sites `0..=len`.
pub fn canonical_solutions(model: &StripModel, omega: f64, z: C64, len: usize) -> Result<(Solution, Solution)> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let u1 = Solution::from_initial(model, omega, z, 0, (zero, one), len + 1)?;
    let u2 = Solution::from_initial(model, omega, z, 0, (one, zero), len + 1)?;
    Ok((u1, u2))
}

/// `‖u‖²` restricted to site `n`, `|a(n)|² + |b(n)|²`.
fn site_norm_sqr(model: &StripModel, omega: f64, u: &Solution, n: i64) -> Result<f64> {
    Ok(u.at(n).norm_sqr() + u.b(model, omega, n)?.norm_sqr())
}

/// Ingredients of the Jitomirskaya–Last comparison at `E + iε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JlReport {
    pub length: f64,
    pub norm_u1: f64,
    pub norm_u2: f64,
    pub m_plus: C64,
    /// `|m⁺(E+iε)| ‖u₁‖_{L_ε} / ‖u₂‖_{L_ε}`.
    pub ratio: f64,
}

/// Bracketing constants `66 ∓ √(66² ∓ 1)` of the inequality.
pub fn jl_constants() -> (f64, f64) {
    (66.0 - libm::sqrt(66.0 * 66.0 - 1.0), 66.0 + libm::sqrt(66.0 * 66.0 + 1.0))
}

/// Solves `‖u₁‖_L ‖u₂‖_L = 1/(4ε)` for `L` and evaluates the comparison.
///
/// `‖u‖_L² = Σ_{n=1}^{⌊L⌋} |u(n)|² + (L − ⌊L⌋)|u(⌊L⌋+1)|²`.
pub fn jl_ratio(model: &StripModel, omega: f64, e: f64, eps: f64) -> Result<JlReport> {
    let (lo, hi) = model.v22_range();
    let delta = if e < lo { lo - e } else if e > hi { e - hi } else { 0.0 };
    if !(eps > 0.0 && eps < delta) {
        return Err(Error::InvalidArgument("need E in T_δ and 0 < ε < δ"));
    }
    let target = 1.0 / (4.0 * eps);
    let z = C64::new(e, 0.0);
    let mut len = 64usize;
    loop {
        let (u1, u2) = canonical_solutions(model, omega, z, len)?;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for k in 1..len as i64 {
            let w1 = site_norm_sqr(model, omega, &u1, k + 1)?;
            let w2 = site_norm_sqr(model, omega, &u2, k + 1)?;
            let (n1, n2) = (s1 + site_norm_sqr(model, omega, &u1, k)?, s2 + site_norm_sqr(model, omega, &u2, k)?);
            // P(L) on [k, k+1] with f = L − k.
            let p = |f: f64| libm::sqrt((n1 + f * w1) * (n2 + f * w2));
            if p(1.0) >= target {
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    if p(mid) < target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let f = 0.5 * (a + b);
                let norm_u1 = libm::sqrt(n1 + f * w1);
                let norm_u2 = libm::sqrt(n2 + f * w2);
                let m_plus = m_function(model, omega, C64::new(e, eps), Side::Plus)?;
                return Ok(JlReport { length: k as f64 + f, norm_u1, norm_u2, m_plus, ratio: m_plus.norm() * norm_u1 / norm_u2 });
            }
            s1 = n1;
            s2 = n2;
        }
        if len >= 1 << 24 {
            return Err(Error::InvalidArgument("length scale exceeds the search range"));
        }
        len *= 4;
    }
}

/// `L_ε` of the Jitomirskaya–Last comparison.
pub fn jl_length_scale(model: &StripModel, omega: f64, e: f64, eps: f64) -> Result<f64> {
    jl_ratio(model, omega, e, eps).map(|r| r.length)
}

/// `ε · sup_{s ≤ 1/ε} ‖A^E_s‖²`, with the sup norm over phases sampled at
/// `ω + j/8`.
pub fn measure_bound(model: &StripModel, omega: f64, e: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive"));
    }
    let cocycle = reduce_strip_to_scalar(model, C64::new(e, 0.0))?;
    let s_max = libm::floor(1.0 / eps).max(0.0) as u64;
    let mut sup: f64 = 0.0;
    for j in 0..8 {
        let mut x = crate::frac(omega + j as f64 / 8.0);
        let mut p = crate::cocycle::LogProduct::identity();
        for _ in 0..s_max {
            use crate::cocycle::Sampler;
            p.push(cocycle.sample(x)?);
            x = crate::frac(x + model.step());
            sup = sup.max(p.log_norm());
        }
    }
    Ok(eps * libm::exp(2.0 * sup))
}

/// Eigenvalues of size-`N` restrictions at equidistributed phases.
#[derive(Clone, Debug, PartialEq)]
pub struct ThoulessSpectrum {
    pub n: usize,
    pub per_phase: Vec<Vec<f64>>,
}

impl ThoulessSpectrum {
    pub fn new(model: &StripModel, n: usize, n_phases: usize, tol: f64) -> Result<Self> {
        let spec = ModelSpec::Strip(model.clone());
        let per_phase = equidistributed_phases(n_phases)
            .into_iter()
            .map(|p| all_eigenvalues(&build_restriction(&spec, p, n)?, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(ThoulessSpectrum { n, per_phase })
    }

    /// `∫ ln|E′ − z| dn_N(E′)`.
    pub fn log_potential(&self, z: C64) -> f64 {
        let total: f64 = self.per_phase.iter().flat_map(|v| v.iter()).map(|&e| libm::log((C64::new(e, 0.0) - z).norm())).sum();
        let count: usize = self.per_phase.iter().map(|v| v.len()).sum();
        total / count as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThoulessReport {
    /// `½L(A^z) + ½ avg ln|z − V22|`.
    pub lhs: f64,
    /// `∫ ln|E′ − z| dn_N(E′)`.
    pub rhs: f64,
    pub residual: f64,
    pub le_error: f64,
}

/// Trapezoidal average of `ln|z − V22(ω)|` over the torus.
pub fn mean_log_v22(model: &StripModel, z: C64, points: usize) -> f64 {
    (0..points).map(|j| libm::log((z - model.v22((j as f64 + 0.5) / points as f64)).norm())).sum::<f64>() / points as f64
}

pub fn thouless_report(model: &StripModel, spectrum: &ThoulessSpectrum, z: C64, le: &LeParams) -> Result<ThoulessReport> {
    if z.im == 0.0 {
        return Err(Error::InvalidArgument("the Thouless check needs Im z != 0"));
    }
    let l = strip_le(model, z, le)?;
    let lhs = 0.5 * l.value + 0.5 * mean_log_v22(model, z, 8192);
    let rhs = spectrum.log_potential(z);
    Ok(ThoulessReport { lhs, rhs, residual: (lhs - rhs).abs(), le_error: 0.5 * l.error })
}

/// `|½L(A^z) + ½ avg ln|z−V22| − ∫ ln|E′−z| dn_N(E′)|`.
pub fn thouless_residual(model: &StripModel, z: C64, n: usize, n_phases: usize) -> Result<f64> {
    let spectrum = ThoulessSpectrum::new(model, n, n_phases, 1e-8)?;
    thouless_report(model, &spectrum, z, &LeParams::default()).map(|r| r.residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Localized,
    Critical,
    Extended,
    Gap,
    /// Thresholds straddled; no label assigned.
    Ambiguous,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Localized => "localized",
            Classification::Critical => "critical",
            Classification::Extended => "extended",
            Classification::Gap => "gap",
            Classification::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSample {
    pub energy: f64,
    pub le: f64,
    pub le_error: f64,
    pub acceleration: f64,
    pub ids: f64,
    /// Fibered rotation number; strips with hopping `J` only.
    pub rotation: Option<f64>,
    pub growth_exponent: f64,
    pub in_spectrum: bool,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyParams {
    pub le: LeParams,
    pub growth: GrowthParams,
    /// Restriction size for the spectrum and IDS estimates.
    pub n: usize,
    pub n_phases: usize,
    /// Distance to the nearest finite eigenvalue accepted as "in σ".
    pub spectrum_tol: f64,
    pub accel_delta: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            le: LeParams::default(),
            growth: GrowthParams::default(),
            n: 1000,
            n_phases: 4,
            spectrum_tol: 1e-2,
            accel_delta: 0.02,
        }
    }
}

/// `|LE|` below this is treated as zero.
pub fn le_zero_threshold(error: f64) -> f64 {
    libm::fmax(5e-3, 3.0 * error)
}

/// Decision table from the exponent and the growth of `sup_{s≤n} ‖A_s‖`.
pub fn decide(le: f64, le_error: f64, growth: f64, in_spectrum: bool) -> Classification {
    let positive = le > le_zero_threshold(le_error);
    match (in_spectrum, positive) {
        (false, true) => Classification::Gap,
        (true, true) => Classification::Localized,
        (_, false) if growth >= 0.1 => Classification::Critical,
        (_, false) if growth <= 0.05 => Classification::Extended,
        _ => Classification::Ambiguous,
    }
}

/// Whether some size-`N` restriction has an eigenvalue within `tol` of `e`.
pub fn in_spectrum(model: &ModelSpec, e: f64, n: usize, phases: &[f64], tol: f64) -> Result<bool> {
    for &p in phases {
        let r = build_restriction(model, p, n)?;
        if count_below(&r, e + tol)? > count_below(&r, e - tol)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Norm-growth exponent of the determinant-one cocycle at real `e`.
pub fn energy_growth(model: &ModelSpec, e: f64, params: &GrowthParams, x0: f64) -> Result<f64> {
    let z = C64::new(e, 0.0);
    match model {
        ModelSpec::Scalar(m) => {
            let sampler = |x: f64| m.two_step_matrix(z, x);
            growth_exponent(&sampler, 2.0 * m.alpha(), x0, params)
        }
        ModelSpec::Strip(s) => {
            let c = reduce_strip_to_scalar(s, z)?;
            growth_exponent(&c, s.step(), x0, params)
        }
    }
}

/// Lyapunov exponent per site (scalar) or per block (strip) at real `e`.
pub fn energy_le(model: &ModelSpec, e: f64, params: &LeParams) -> Result<crate::cocycle::LeEstimate> {
    match model {
        ModelSpec::Scalar(m) => scalar_le(m, e, params),
        ModelSpec::Strip(s) => strip_le(s, C64::new(e, 0.0), params),
    }
}

/// Fills a [`SpectralSample`] at energy `e`. Labels are numerical
/// diagnostics.
pub fn classify(model: &ModelSpec, e: f64, params: &ClassifyParams) -> Result<SpectralSample> {
    let le = energy_le(model, e, &params.le)?;
    let phases = equidistributed_phases(params.n_phases);
    let ids = ids_with_phases(model, e, params.n, &phases)?;
    let in_sigma = in_spectrum(model, e, params.n, &phases, params.spectrum_tol)?;
    let growth = energy_growth(model, e, &params.growth, params.le.x0)?;
    let accel = match model {
        ModelSpec::Scalar(m) => {
            crate::cocycle::scalar_acceleration(m, e, params.accel_delta, params.accel_delta, &params.le)?.rounded
        }
        ModelSpec::Strip(s) if s.is_j_hop() => {
            crate::cocycle::strip_acceleration(s, e, params.accel_delta, params.accel_delta, &params.le)?.rounded
        }
        ModelSpec::Strip(_) => f64::NAN,
    };
    let rotation = match model {
        ModelSpec::Strip(s) if s.is_j_hop() => Some(crate::cocycle::rotation_number(s, e, params.le.steps, params.le.x0)?),
        _ => None,
    };
    Ok(SpectralSample {
        energy: e,
        le: le.value,
        le_error: le.error,
        acceleration: accel,
        ids,
        rotation,
        growth_exponent: growth,
        in_spectrum: in_sigma,
        classification: decide(le.value, le.error, growth, in_sigma),
    })
}

/// Label used to locate mobility edges: the exponent threshold for scalar
/// chains, the growth exponent for strips.
pub fn edge_label(model: &ModelSpec, e: f64, le: &LeParams, growth: &GrowthParams) -> Result<Classification> {
    match model {
        ModelSpec::Scalar(_) => {
            let l = energy_le(model, e, le)?;
            Ok(if l.value > le_zero_threshold(l.error) { Classification::Localized } else { Classification::Critical })
        }
        ModelSpec::Strip(_) => {
            // Eigenvalues can sit on a sample of V22; step off the pole.
            let g = match energy_growth(model, e, growth, le.x0) {
                Err(Error::Pole { .. }) => energy_growth(model, e + 1e-8 * libm::fmax(1.0, e.abs()), growth, le.x0)?,
                other => other?,
            };
            Ok(decide(0.0, 0.0, g, true))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobilityEdge {
    pub energy: f64,
    /// Half the distance between the two eigenvalues bracketing the switch.
    pub uncertainty: f64,
    pub below: Classification,
    pub above: Classification,
}

/// Locates label switches among the bulk eigenvalues of a size-`n`
/// restriction inside `[lo, hi]`: labels are sampled at `samples` eigenvalues, and each
/// switch is refined by bisection on the eigenvalue index.
pub fn mobility_edges(
    model: &ModelSpec,
    lo: f64,
    hi: f64,
    n: usize,
    samples: usize,
    le: &LeParams,
    growth: &GrowthParams,
) -> Result<Vec<MobilityEdge>> {
    let r = build_restriction(model, crate::DEFAULT_PHASE, n)?;
    let eigs = crate::finite::bulk_eigenvalues(&r, lo, hi, 1e-10)?;
    if eigs.len() < 2 || samples < 2 {
        return Err(Error::NoEdgeFound { lo, hi });
    }
    let mut labels: Vec<Option<Classification>> = vec![None; eigs.len()];
    let label = |i: usize, labels: &mut Vec<Option<Classification>>| -> Result<Classification> {
        if let Some(l) = labels[i] {
            return Ok(l);
        }
        let l = edge_label(model, eigs[i], le, growth)?;
        labels[i] = Some(l);
        Ok(l)
    };
    let idx: Vec<usize> = (0..samples).map(|j| j * (eigs.len() - 1) / (samples - 1)).collect();
    let mut edges = Vec::new();
    for w in idx.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let la = label(a, &mut labels)?;
        let lb = label(b, &mut labels)?;
        if la == lb || a == b {
            continue;
        }
        while b - a > 1 {
            let mid = (a + b) / 2;
            if label(mid, &mut labels)? == la {
                a = mid;
            } else {
                b = mid;
            }
        }
        edges.push(MobilityEdge {
            energy: 0.5 * (eigs[a] + eigs[b]),
            uncertainty: 0.5 * (eigs[b] - eigs[a]),
            below: la,
            above: label(b, &mut labels)?,
        });
    }
    if edges.is_empty() {
        return Err(Error::NoEdgeFound { lo, hi });
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Frequency;
    use crate::finite::{FiniteRestriction, BlockTridiag};
    use crate::models::{ScalarKind, ScalarMosaicModel};
    use proptest::prelude::*;

    fn type3(l: f64) -> StripModel {
        StripModel::type3(l, Frequency::golden()).unwrap()
    }

    fn resolvent_entries(model: &StripModel, omega: f64, z: C64, half: i64, targets: &[(i64, i64)]) -> Vec<C64> {
        let r = FiniteRestriction::Strip(BlockTridiag::interval(model, omega, -half, half));
        targets
            .iter()
            .map(|&(n, m)| {
                let mut rhs = vec![C64::new(0.0, 0.0); r.dim()];
                rhs[(2 * (m + half)) as usize] = C64::new(1.0, 0.0);
                r.solve(z, &rhs).unwrap()[(2 * (n + half)) as usize]
            })
            .collect()
    }

    #[test]
    fn borel_transform_matches_truncated_resolvent() {
        let m = type3(1.0);
        for (omega, z) in [(0.3, C64::new(0.4, 0.1)), (0.71, C64::new(1.6, 0.1)), (0.05, C64::new(-0.9, 0.1))] {
            let got = borel_transform(&m, omega, z).unwrap();
            let g = resolvent_entries(&m, omega, z, 2500, &[(0, 0), (1, 1)]);
            let want = g[0] + g[1];
            assert!((got - want).norm() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn green_matches_truncated_resolvent() {
        let m = type3(0.8);
        let z = C64::new(0.35, 0.1);
        let pairs = [(0, 0), (0, 5), (-3, 4), (7, -2), (2, 2)];
        let want = resolvent_entries(&m, 0.2, z, 2500, &pairs);
        for (&(n, k), w) in pairs.iter().zip(&want) {
            let g = green_infinite(&m, 0.2, z, n, k).unwrap();
            assert!((g - w).norm() < 1e-6, "({n},{k}): {g} vs {w}");
            let sym = green_infinite(&m, 0.2, z, k, n).unwrap();
            assert!((g - sym).norm() < 1e-12);
        }
    }

    #[test]
    fn green_decays() {
        let m = type3(1.0);
        let z = C64::new(0.2, 0.5);
        let g: Vec<f64> = [0i64, 20, 40, 80].iter().map(|&k| green_infinite(&m, 0.4, z, 0, k).unwrap().norm()).collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn imaginary_part_identity() {
        let m = type3(1.0);
        let omega = 0.17;
        let z = C64::new(0.6, 0.05);
        let h = half_line_solution(&m, omega, z, Side::Plus, 0, 4000).unwrap().solution;
        let sum: f64 = (1..=4000).map(|n| h.at(n).norm_sqr() + h.b(&m, omega, n).unwrap().norm_sqr()).sum();
        let mp = m_function(&m, omega, z, Side::Plus).unwrap();
        assert!((mp.im / z.im - sum).abs() < 1e-6 * sum.max(1.0), "{} vs {}", mp.im / z.im, sum);
    }

    #[test]
    fn large_energy_asymptotics() {
        let m = type3(1.0);
        let z = C64::new(3e3, 4e3);
        let mp = m_function(&m, 0.3, z, Side::Plus).unwrap();
        assert!((mp * z + 1.0).norm() < 1e-2);
    }

    #[test]
    fn wronskian_properties() {
        let m = type3(1.0);
        let z = C64::new(0.3, 0.2);
        let (u1, u2) = canonical_solutions(&m, 0.3, z, 100).unwrap();
        assert!((wronskian(&u1, &u2).unwrap() - 1.0).norm() < 1e-10);
        assert_eq!(wronskian(&u1, &u1).unwrap(), C64::new(0.0, 0.0));
        let mut bad = u2.clone();
        bad.a[50] *= 1.5;
        assert!(matches!(wronskian(&u1, &bad), Err(Error::InconsistentWronskian { .. })));
        let plus = half_line_solution(&m, 0.3, z, Side::Plus, -10, 90).unwrap().solution;
        let minus = half_line_solution(&m, 0.3, z, Side::Minus, -10, 90).unwrap().solution;
        let w = wronskian(&plus, &minus).unwrap();
        let mp = m_function(&m, 0.3, z, Side::Plus).unwrap();
        let mm = m_function(&m, 0.3, z, Side::Minus).unwrap();
        assert!((w - (1.0 / mm - mp)).norm() < 1e-10 * w.norm());
    }

    #[test]
    fn thouless_formula_off_axis() {
        let m = type3(1.0);
        let r = thouless_residual(&m, C64::new(0.7, 0.5), 2000, 16).unwrap();
        assert!(r <= 1e-2, "{r}");
    }

    #[test]
    fn thouless_far_field() {
        let m = type3(1.0);
        let spec = ThoulessSpectrum::new(&m, 200, 4, 1e-8).unwrap();
        let z = C64::new(600.0, 800.0);
        let rep = thouless_report(&m, &spec, z, &LeParams { steps: 20_000, ..LeParams::default() }).unwrap();
        assert!(rep.residual <= 1e-3, "{rep:?}");
        assert!((rep.rhs - libm::log(1000.0)).abs() < 1e-3);
    }

    #[test]
    fn jl_bracketing() {
        let m = type3(1.0);
        let (c1, c2) = jl_constants();
        for (e, eps) in [(1.3, 0.1), (1.5, 0.01), (-1.8, 0.2), (2.4, 1e-3), (-1.2, 0.05)] {
            let r = jl_ratio(&m, 0.23, e, eps).unwrap();
            assert!(c1 < r.ratio && r.ratio < c2, "E={e} ε={eps}: {r:?}");
        }
    }

    #[test]
    fn jl_length_grows_as_eps_shrinks() {
        let m = type3(0.5);
        let a = jl_length_scale(&m, 0.1, 0.9, 0.1).unwrap();
        let b = jl_length_scale(&m, 0.1, 0.9, 0.05).unwrap();
        assert!(b > a);
        assert!(jl_ratio(&m, 0.1, 0.3, 0.01).is_err());
    }

    #[test]
    fn measure_bound_regimes() {
        // Extended regime: bounded products, the bound scales like ε.
        let m = type3(0.5);
        let r = build_restriction(&ModelSpec::Strip(m.clone()), 0.1, 400).unwrap();
        let e = *all_eigenvalues(&r, 1e-10).unwrap().iter().find(|&&v| v > 1.0).unwrap();
        let a = measure_bound(&m, 0.1, e, 1e-2).unwrap();
        let b = measure_bound(&m, 0.1, e, 1e-3).unwrap();
        assert!(b < 0.5 * a, "{a} {b}");
        // A gap energy: products grow exponentially and the bound diverges.
        let a = measure_bound(&m, 0.1, 5.0, 1e-1).unwrap();
        let b = measure_bound(&m, 0.1, 5.0, 1e-2).unwrap();
        assert!(b > 1e3 * a);
        assert!((measure_bound(&m, 0.1, 5.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
    }

    fn nearest_eigenvalue(model: &ModelSpec, e: f64) -> f64 {
        let r = build_restriction(model, crate::DEFAULT_PHASE, 1000).unwrap();
        let eigs = crate::finite::bulk_eigenvalues(&r, e - 0.2, e + 0.2, 1e-12).unwrap();
        *eigs.iter().min_by(|a, b| (*a - e).abs().total_cmp(&(*b - e).abs())).unwrap()
    }

    #[test]
    fn classification_examples() {
        let params = ClassifyParams::default();
        let t2 = ModelSpec::Scalar(ScalarMosaicModel::new(ScalarKind::TypeII, 1.0, Frequency::golden()).unwrap());
        let e = nearest_eigenvalue(&t2, 1.5);
        let s = classify(&t2, e, &params).unwrap();
        assert_eq!(s.classification, Classification::Localized, "{s:?}");
        assert_eq!(s.acceleration, 1.0);

        let t3 = ModelSpec::Strip(type3(1.0));
        let e = nearest_eigenvalue(&t3, 0.4);
        let s = classify(&t3, e, &params).unwrap();
        assert_eq!(s.classification, Classification::Critical, "{s:?}");

        let t3 = ModelSpec::Strip(type3(0.5));
        let e = nearest_eigenvalue(&t3, 1.0);
        let s = classify(&t3, e, &params).unwrap();
        assert_eq!(s.classification, Classification::Extended, "{s:?}");
    }

    #[test]
    fn gap_energy() {
        let t3 = ModelSpec::Strip(type3(1.0));
        let s = classify(&t3, 6.0, &ClassifyParams::default()).unwrap();
        assert_eq!(s.classification, Classification::Gap);
        assert_eq!(s.ids, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn herglotz(re in -4.0f64..4.0, im in 0.05f64..3.0, omega in 0.0f64..1.0) {
            let m = type3(1.0);
            let mm = borel_transform(&m, omega, C64::new(re, im)).unwrap();
            prop_assert!(mm.im > 0.0);
        }
    }
}
