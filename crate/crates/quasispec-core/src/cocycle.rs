//! Transfer-matrix products over the irrational rotation and the quantities
//! read off them: Lyapunov exponents, acceleration, rotation numbers,
//! disk contraction and norm growth.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::{cos2pi_complex, ScalarMosaicModel, StripModel};
use crate::{frac, Error, Mat2C, Result, C64};

/// A map from phase to cocycle step.
pub trait Sampler {
    fn sample(&self, x: f64) -> Result<Mat2C>;
}

impl<F: Fn(f64) -> Result<Mat2C>> Sampler for F {
    fn sample(&self, x: f64) -> Result<Mat2C> {
        self(x)
    }
}

/// `A_n = e^{log_scale} · product`, renormalized so the product's largest
/// entry stays in `[1/2, 2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogProduct {
    log_scale: f64,
    product: Mat2C,
    steps: u64,
}

impl Default for LogProduct {
    fn default() -> Self {
        LogProduct::identity()
    }
}

impl LogProduct {
    pub fn identity() -> Self {
        LogProduct { log_scale: 0.0, product: Mat2C::IDENTITY, steps: 0 }
    }

    /// Left-multiplies by one more step.
    pub fn push(&mut self, a: Mat2C) {
        self.product = a * self.product;
        self.steps += 1;
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let m = self.product.max_abs();
        if m > 0.0 && m.is_finite() && !(0.5..=2.0).contains(&m) {
            self.log_scale += libm::log(m);
            self.product = self.product.scale_real(1.0 / m);
        }
    }

    /// `self · earlier`, the product of `earlier` followed by `self`.
    pub fn compose(&self, earlier: &LogProduct) -> LogProduct {
        let mut out = LogProduct {
            log_scale: self.log_scale + earlier.log_scale,
            product: self.product * earlier.product,
            steps: self.steps + earlier.steps,
        };
        out.renormalize();
        out
    }

    pub fn accumulated_log_norm(&self) -> f64 {
        self.log_scale
    }

    pub fn normalized_product(&self) -> Mat2C {
        self.product
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `ln ‖A_n‖` in the operator norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + libm::log(self.product.op_norm())
    }

    /// `ln |det A_n|`.
    pub fn log_abs_det(&self) -> f64 {
        2.0 * self.log_scale + libm::log(self.product.det().norm())
    }
}

/// `A_n(x0) = A(x0 + (n−1)s) ⋯ A(x0 + s) A(x0)`.
///
/// Pole errors from the sampler are reported with the orbit index.
pub fn iterate<S: Sampler + ?Sized>(sampler: &S, step: f64, x0: f64, n: u64) -> Result<LogProduct> {
    let mut p = LogProduct::identity();
    let step = frac(step);
    let mut x = frac(x0);
    for j in 0..n {
        let a = sampler.sample(x).map_err(|e| with_index(e, j as i64))?;
        p.push(a);
        x += step;
        if x >= 1.0 {
            x -= 1.0;
        }
    }
    Ok(p)
}

fn with_index(e: Error, j: i64) -> Error {
    match e {
        Error::Pole { distance, .. } => Error::Pole { index: j, distance },
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeParams {
    pub steps: u64,
    pub phases: usize,
    pub x0: f64,
    pub seed: u64,
}

impl Default for LeParams {
    fn default() -> Self {
        LeParams { steps: 100_000, phases: 8, x0: crate::DEFAULT_PHASE, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeEstimate {
    pub value: f64,
    /// Bootstrap standard error of the phase average.
    pub error: f64,
    pub per_phase: Vec<f64>,
}

impl LeEstimate {
    fn from_samples(per_phase: Vec<f64>, seed: u64) -> Self {
        let value = mean(&per_phase);
        let error = bootstrap_error(&per_phase, seed);
        LeEstimate { value, error, per_phase }
    }

    /// Applies `value ↦ a·value + b` to the estimate and every sample.
    pub fn affine(mut self, a: f64, b: f64) -> Self {
        self.value = a * self.value + b;
        self.error *= a.abs();
        for v in &mut self.per_phase {
            *v = a * *v + b;
        }
        self
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn bootstrap_error(xs: &[f64], seed: u64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rounds = 200;
    let means: Vec<f64> = (0..rounds)
        .map(|_| (0..xs.len()).map(|_| xs[rng.gen_range(0..xs.len())]).sum::<f64>() / xs.len() as f64)
        .collect();
    let m = mean(&means);
    libm::sqrt(means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (rounds - 1) as f64)
}

/// Phase-averaged `(1/n) ln ‖A_n(x)‖` over equidistributed starting phases.
pub fn lyapunov<S: Sampler + ?Sized>(sampler: &S, step: f64, params: &LeParams) -> Result<LeEstimate> {
    if params.steps < 1000 {
        return Err(Error::InvalidArgument("Lyapunov estimates need at least 10^3 steps"));
    }
    if params.phases == 0 {
        return Err(Error::InvalidArgument("at least one phase is required"));
    }
    let mut per_phase = Vec::with_capacity(params.phases);
    for j in 0..params.phases {
        let x = params.x0 + j as f64 / params.phases as f64;
        let p = iterate(sampler, step, x, params.steps)?;
        per_phase.push(p.log_norm() / params.steps as f64);
    }
    Ok(LeEstimate::from_samples(per_phase, params.seed))
}

/// `L(2α, B̃^E_ε)`: the exponent of the entire two-site cocycle at phase `θ + iε`.
pub fn lyapunov_complexified(model: &ScalarMosaicModel, energy: f64, eps: f64, params: &LeParams) -> Result<LeEstimate> {
    let e = C64::new(energy, 0.0);
    let sampler = |x: f64| Ok(model.two_step_analytic(e, x, eps));
    lyapunov(&sampler, 2.0 * model.alpha(), params)
}

/// Per-site Lyapunov exponent of a scalar chain.
///
/// Uses the entire cocycle `B̃` and removes the exactly known average
/// `∫ ln|λ cos 2πθ| dθ = ln(λ/2)` of the prefactor, so the product never
/// meets a pole; the two-site exponent is then halved.
pub fn scalar_le(model: &ScalarMosaicModel, energy: f64, params: &LeParams) -> Result<LeEstimate> {
    let raw = lyapunov_complexified(model, energy, 0.0, params)?;
    let shift = match model.kind {
        crate::models::ScalarKind::TypeII => libm::log(model.lambda / 2.0),
        crate::models::ScalarKind::Mosaic => 0.0,
    };
    Ok(raw.affine(0.5, -0.5 * shift))
}

/// Lyapunov exponent per strip site of `A^z`.
pub fn strip_le(model: &StripModel, z: C64, params: &LeParams) -> Result<LeEstimate> {
    let sampler = crate::models::reduce_strip_to_scalar(model, z)?;
    lyapunov(&sampler, model.step(), params)
}

/// Trapezoidal quadrature of `∫₀¹ ln|λ cos 2π(θ+iε)| dθ`.
pub fn jensen_integral(lambda: f64, eps: f64, points: usize) -> f64 {
    let n = points.max(1);
    (0..n)
        .map(|j| libm::log((cos2pi_complex((j as f64 + 0.5) / n as f64, eps) * lambda).norm()))
        .sum::<f64>()
        / n as f64
}

/// `2π|ε| + ln(λ/2)`, the closed form of [`jensen_integral`].
pub fn jensen_closed_form(lambda: f64, eps: f64) -> f64 {
    2.0 * PI * eps.abs() + libm::log(lambda / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acceleration {
    pub raw: f64,
    /// Nearest half-integer.
    pub rounded: f64,
    /// False when `|raw − rounded| > 0.1`.
    pub quantized: bool,
}

/// Symmetric difference `(L(ε+δ) − L(ε−δ)) / (4πδ)` of an exponent as a
/// function of the imaginary phase shift.
pub fn acceleration<F: FnMut(f64) -> Result<f64>>(mut le_at: F, eps: f64, delta: f64) -> Result<Acceleration> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive"));
    }
    let hi = le_at(eps + delta)?;
    let lo = le_at(eps - delta)?;
    let raw = (hi - lo) / (4.0 * PI * delta);
    let rounded = libm::round(2.0 * raw) / 2.0;
    Ok(Acceleration { raw, rounded, quantized: (raw - rounded).abs() <= 0.1 })
}

/// Acceleration of the entire two-site cocycle of a scalar chain.
pub fn scalar_acceleration(model: &ScalarMosaicModel, energy: f64, eps: f64, delta: f64, params: &LeParams) -> Result<Acceleration> {
    acceleration(|y| lyapunov_complexified(model, energy, y, params).map(|l| l.value), eps, delta)
}

/// Acceleration of `(E − V22)·A^E` for a strip with hopping `J`, whose
/// entries are trigonometric polynomials in the phase.
pub fn strip_acceleration(model: &StripModel, energy: f64, eps: f64, delta: f64, params: &LeParams) -> Result<Acceleration> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    let terms = match &model.potential {
        crate::models::Potential::TypeIII { lambda } => crate::duality::type3_fourier(*lambda),
        crate::models::Potential::Fourier(t) => t.clone(),
    };
    let e = C64::new(energy, 0.0);
    let le_at = |y: f64| {
        let sampler = |x: f64| {
            let v = complexified_potential(&terms, x, y);
            let d = e - v.a22;
            let t = e * d - v.a11 * d - v.a12 * v.a21;
            Ok(Mat2C::new(t, -d, d, C64::new(0.0, 0.0)))
        };
        lyapunov(&sampler, model.step(), params).map(|l| l.value)
    };
    acceleration(le_at, eps, delta)
}

fn complexified_potential(terms: &[crate::models::FourierTerm], x: f64, y: f64) -> Mat2C {
    let mut v = Mat2C::ZERO;
    for t in terms {
        let k = t.k as f64;
        let arg = 2.0 * PI * frac(k * frac(x));
        let e = C64::new(libm::cos(arg), libm::sin(arg)) * libm::exp(-2.0 * PI * k * y);
        v = v + t.coeff.scale(e);
    }
    v
}

/// Fibered rotation number of `A^E` for a strip with hopping `J`, with
/// `ρ(+∞) = 0` and `ρ(−∞) = 1/2`.
///
/// Follows `Z_n = (Δ_n, Δ_{n−1})` from `Z_0 = (1, 0)` over sites `1..=n`.
/// Each step `(x, y) ↦ (tx − y, x)` is lifted with the angle increment in
/// `(−π/2, 3π/2)`: the image never points along the clockwise normal of the
/// input, so this branch is continuous in `E` and `Z`.
pub fn rotation_number(model: &StripModel, energy: f64, n: u64, omega0: f64) -> Result<f64> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("rotation number needs at least one step"));
    }
    let z = C64::new(energy, 0.0);
    let (mut x, mut y) = (1.0f64, 0.0f64);
    let mut angle = 0.0f64;
    let mut total = 0.0f64;
    for j in 1..=n {
        let omega = model.site_phase(omega0, j as i64);
        let (t, _) = model.reduced_entry(z, omega).map_err(|e| with_index(e, j as i64))?;
        let (nx, ny) = (t.re * x - y, x);
        let new_angle = libm::atan2(ny, nx);
        let mut d = new_angle - angle;
        while d <= -PI / 2.0 {
            d += 2.0 * PI;
        }
        while d > 1.5 * PI {
            d -= 2.0 * PI;
        }
        total += d;
        angle = new_angle;
        let r = libm::hypot(nx, ny);
        x = nx / r;
        y = ny / r;
    }
    Ok(total / (2.0 * PI * n as f64))
}

/// Image of the closed unit disk under `w ↦ (aw + b)/(cw + d)`:
/// `(center, radius)`, or `None` if the image is unbounded.
pub fn mobius_disk_image(m: &Mat2C) -> Option<(C64, f64)> {
    let (a, b, c, d) = (m.a11, m.a12, m.a21, m.a22);
    let denom = d.norm_sqr() - c.norm_sqr();
    if denom <= 0.0 {
        return None;
    }
    let center = (b * d.conj() - a * c.conj()) / denom;
    let radius = (a * d - b * c).norm() / denom;
    Some((center, radius))
}

/// `Q = −(1/(1+i))[[1, −i],[1, i]]`, the Cayley map from the upper half-plane
/// to the disk.
pub fn cayley() -> Mat2C {
    let s = -C64::new(1.0, 1.0).inv();
    Mat2C::new(C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)).scale(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskReport {
    /// Largest `|center| + radius` of the image disk over sampled phases.
    pub sup_radius: f64,
    /// `−ln(sup_radius)/2`, a lower bound for the Lyapunov exponent when
    /// `sup_radius < 1`.
    pub le_lower_bound: f64,
    /// Whether `sup_radius < e^{−eps_floor}`.
    pub certified: bool,
}

/// Uniform contraction of the disk under `Q B(x) Q⁻¹` over `n_samples`
/// phases, where `B` is typically a second iterate.
pub fn disk_contraction<S: Sampler + ?Sized>(sampler: &S, eps_floor: f64, n_samples: usize) -> Result<DiskReport> {
    let q = cayley();
    let q_inv = q.inverse().expect("Cayley matrix is invertible");
    let mut sup: f64 = 0.0;
    for j in 0..n_samples.max(1) {
        let b = sampler.sample(j as f64 / n_samples.max(1) as f64)?;
        let r = match mobius_disk_image(&(q * b * q_inv)) {
            Some((c, r)) => c.norm() + r,
            None => f64::INFINITY,
        };
        sup = sup.max(r);
    }
    Ok(DiskReport {
        sup_radius: sup,
        le_lower_bound: -0.5 * libm::log(sup),
        certified: sup < libm::exp(-eps_floor),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams {
    pub n_min: u64,
    pub n_max: u64,
    pub checkpoints: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams { n_min: 1_000, n_max: 100_000, checkpoints: 16 }
    }
}

/// Least-squares slope of `ln sup_{s≤n} ‖A_s‖` against `ln n` over
/// log-spaced `n` in `[n_min, n_max]`.
pub fn growth_exponent<S: Sampler + ?Sized>(sampler: &S, step: f64, x0: f64, params: &GrowthParams) -> Result<f64> {
    if params.n_min == 0 || params.n_max <= params.n_min || params.checkpoints < 2 {
        return Err(Error::InvalidArgument("growth exponent needs 0 < n_min < n_max and two checkpoints"));
    }
    let ratio = params.n_max as f64 / params.n_min as f64;
    let marks: Vec<u64> = (0..params.checkpoints)
        .map(|i| {
            let t = i as f64 / (params.checkpoints - 1) as f64;
            libm::round(params.n_min as f64 * libm::pow(ratio, t)) as u64
        })
        .collect();
    let mut p = LogProduct::identity();
    let step = frac(step);
    let mut x = frac(x0);
    let mut sup = f64::NEG_INFINITY;
    let mut pts = Vec::with_capacity(marks.len());
    let mut next = 0;
    for s in 1..=params.n_max {
        let a = sampler.sample(x).map_err(|e| with_index(e, s as i64 - 1))?;
        p.push(a);
        x = frac(x + step);
        sup = sup.max(p.log_norm());
        while next < marks.len() && marks[next] == s {
            pts.push((libm::log(s as f64), sup));
            next += 1;
        }
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
