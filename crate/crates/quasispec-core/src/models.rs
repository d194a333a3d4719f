//! Operator definitions: the mosaic and Type-II scalar chains, the Type-III
//! strip, and generic singular strips with trigonometric-polynomial potential.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::arithmetic::Frequency;
use crate::cocycle::Sampler;
use crate::{frac, Error, Mat2C, Result, C64};

/// Relative distance to `Ran V22` below which the strip reduction has a pole.
pub const POLE_TOL: f64 = 1e-10;

/// Minimal `|cos|` along an orbit for a phase to count as a member of T₀.
pub const T0_TOL: f64 = 1e-8;

pub(crate) fn cos2pi(x: f64) -> f64 {
    libm::cos(2.0 * PI * frac(x))
}

pub(crate) fn sin2pi(x: f64) -> f64 {
    libm::sin(2.0 * PI * frac(x))
}

/// `cos 2π(x + iy)` for a complexified phase.
pub(crate) fn cos2pi_complex(x: f64, y: f64) -> C64 {
    let t = 2.0 * PI * frac(x);
    let s = 2.0 * PI * y;
    C64::new(libm::cos(t) * libm::cosh(s), -libm::sin(t) * libm::sinh(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    /// `v = 2λ cos 2π(θ+nα)` on even sites, 0 on odd sites, `c ≡ 1`.
    Mosaic,
    /// Potential and hopping both modulated on even sites, `c = λ` on odd sites.
    TypeII,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMosaicModel {
    pub lambda: f64,
    pub freq: Frequency,
    pub kind: ScalarKind,
}

impl ScalarMosaicModel {
    pub fn new(kind: ScalarKind, lambda: f64, freq: Frequency) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be positive"));
        }
        Ok(ScalarMosaicModel { lambda, freq, kind })
    }

    pub fn alpha(&self) -> f64 {
        self.freq.value()
    }

    /// Potential and hopping `(v(θ,n), c(θ,n))`.
    pub fn sample(&self, theta: f64, n: i64) -> (f64, f64) {
        sample_scalar(self, theta, n)
    }

    /// Rejects `theta` if some `|cos 2π(θ+nα)|`, `|n| ≤ n_run`, is below [`T0_TOL`].
    ///
    /// Only the Type-II hopping vanishes on the orbit; the mosaic model
    /// accepts every phase.
    pub fn check_phase(&self, theta: f64, n_run: i64) -> Result<()> {
        if self.kind == ScalarKind::Mosaic {
            return Ok(());
        }
        let alpha = self.alpha();
        let mut worst = (f64::INFINITY, 0);
        for n in -n_run..=n_run {
            let c = cos2pi(theta + n as f64 * alpha).abs();
            if c < worst.0 {
                worst = (c, n);
            }
        }
        if worst.0 < T0_TOL {
            return Err(Error::PhaseNotInT0 { phase: theta, site: worst.1, min_cos: worst.0 });
        }
        Ok(())
    }

    /// One-site transfer matrix `S_E(n) = (1/c(n))[[E−v(n), −c(n−1)],[c(n), 0]]`.
    pub fn one_step(&self, energy: C64, theta: f64, n: i64) -> Result<Mat2C> {
        let (v, c) = self.sample(theta, n);
        let (_, c_prev) = self.sample(theta, n - 1);
        if c.abs() < T0_TOL {
            return Err(Error::Pole { index: n, distance: c.abs() });
        }
        let m = Mat2C::new(energy - v, C64::new(-c_prev, 0.0), C64::new(c, 0.0), C64::new(0.0, 0.0));
        Ok(m.scale_real(1.0 / c))
    }

    /// The entire part of the two-site cocycle at the (possibly complex) phase
    /// `x + iy`.
    ///
    /// For Type-II this is `B̃ = [[E²−2E cos, −λE+λ cos],[λE−λ cos, −λ²]]`,
    /// equal to `λ cos 2πx · S_E(2k+1) S_E(2k)`. For the mosaic model the
    /// two-site product has no poles and is returned as is.
    pub fn two_step_analytic(&self, energy: C64, x: f64, y: f64) -> Mat2C {
        let l = self.lambda;
        let cs = cos2pi_complex(x, y);
        match self.kind {
            ScalarKind::TypeII => Mat2C::new(
                energy * energy - energy * cs * 2.0,
                (cs - energy) * l,
                (energy - cs) * l,
                C64::new(-l * l, 0.0),
            ),
            ScalarKind::Mosaic => {
                let odd = Mat2C::new(energy, C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
                let even = Mat2C::new(
                    energy - cs * (2.0 * l),
                    C64::new(-1.0, 0.0),
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                );
                odd * even
            }
        }
    }

    /// Prefactor `f` with `two_step_matrix = two_step_analytic / f`.
    pub fn two_step_denominator(&self, x: f64, y: f64) -> C64 {
        match self.kind {
            ScalarKind::TypeII => cos2pi_complex(x, y) * self.lambda,
            ScalarKind::Mosaic => C64::new(1.0, 0.0),
        }
    }

    /// The determinant-one two-site cocycle `Ã^E(θ) = S_E(θ+α,1) S_E(θ,0)`.
    pub fn two_step_matrix(&self, energy: C64, theta: f64) -> Result<Mat2C> {
        let d = self.two_step_denominator(theta, 0.0);
        if d.norm() < T0_TOL * self.lambda {
            return Err(Error::Pole { index: 0, distance: d.norm() });
        }
        Ok(self.two_step_analytic(energy, theta, 0.0).scale(d.inv()))
    }

    /// The same chain written as a strip with blocks `(u(2n), u(2n+1))`.
    pub fn to_strip(&self) -> Result<StripModel> {
        let l = self.lambda;
        let (hop, terms) = match self.kind {
            ScalarKind::TypeII => {
                let half = Mat2C::real(0.5, 0.5, 0.5, 0.5);
                (Mat2C::real(0.0, 0.0, l, 0.0), vec![FourierTerm { k: 1, coeff: half }, FourierTerm { k: -1, coeff: half }])
            }
            ScalarKind::Mosaic => {
                let lam = Mat2C::real(l, 0.0, 0.0, 0.0);
                (
                    Mat2C::real(0.0, 0.0, 1.0, 0.0),
                    vec![
                        FourierTerm { k: 0, coeff: Mat2C::real(0.0, 1.0, 1.0, 0.0) },
                        FourierTerm { k: 1, coeff: lam },
                        FourierTerm { k: -1, coeff: lam },
                    ],
                )
            }
        };
        StripModel::custom(hop, terms, self.freq.clone(), l)
    }
}

/// `(v(θ,n), c(θ,n))` for the mosaic or Type-II chain.
pub fn sample_scalar(model: &ScalarMosaicModel, theta: f64, n: i64) -> (f64, f64) {
    let alpha = model.alpha();
    let even = n.rem_euclid(2) == 0;
    match model.kind {
        ScalarKind::Mosaic => {
            let v = if even { 2.0 * model.lambda * cos2pi(theta + n as f64 * alpha) } else { 0.0 };
            (v, 1.0)
        }
        ScalarKind::TypeII => {
            if even {
                let c = cos2pi(n as f64 * alpha + theta);
                (c, c)
            } else {
                (cos2pi((n - 1) as f64 * alpha + theta), model.lambda)
            }
        }
    }
}

/// One Fourier mode `V^(k) e^{2πikω}` of a strip potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTerm {
    pub k: i32,
    pub coeff: Mat2C,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `λ[[cos 2πω, i sin 2πω],[−i sin 2πω, −cos 2πω]]`.
    TypeIII { lambda: f64 },
    /// `Σ_k V^(k) e^{2πikω}`.
    Fourier(Vec<FourierTerm>),
}

/// Singular Jacobi operator on the strip,
/// `(Su)(n) = C u(n+1) + C* u(n−1) + V(ω + 2nα) u(n)` with `det C = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripModel {
    pub hop: Mat2C,
    pub potential: Potential,
    pub freq: Frequency,
    pub freq_doubled: Frequency,
    /// Coupling of the Type-III instance; the overall scale for custom strips.
    pub lambda: f64,
}

impl StripModel {
    pub fn type3(lambda: f64, freq: Frequency) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be positive"));
        }
        let freq_doubled = freq.doubled()?;
        Ok(StripModel { hop: Mat2C::J, potential: Potential::TypeIII { lambda }, freq, freq_doubled, lambda })
    }

    /// Strip with a real rank-one hopping and a Hermitian trigonometric
    /// polynomial potential.
    pub fn custom(hop: Mat2C, terms: Vec<FourierTerm>, freq: Frequency, scale: f64) -> Result<Self> {
        if hop.det().norm() > 1e-12 * hop.frobenius_sqr() {
            return Err(Error::InvalidArgument("strip hopping must be singular"));
        }
        if [hop.a11, hop.a12, hop.a21, hop.a22].iter().any(|c| c.im != 0.0) {
            return Err(Error::InvalidArgument("strip hopping must be real"));
        }
        for t in &terms {
            let partner: Mat2C = terms
                .iter()
                .filter(|s| s.k == -t.k)
                .fold(Mat2C::ZERO, |acc, s| acc + s.coeff);
            let own: Mat2C = terms.iter().filter(|s| s.k == t.k).fold(Mat2C::ZERO, |acc, s| acc + s.coeff);
            if partner.max_diff(&own.adjoint()) > 1e-12 * (1.0 + own.max_abs()) {
                return Err(Error::InvalidArgument("potential is not Hermitian: V^(-k) must equal V^(k)*"));
            }
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument("scale must be positive"));
        }
        let freq_doubled = freq.doubled()?;
        Ok(StripModel { hop, potential: Potential::Fourier(terms), freq, freq_doubled, lambda: scale })
    }

    pub fn step(&self) -> f64 {
        self.freq_doubled.value()
    }

    pub fn is_j_hop(&self) -> bool {
        self.hop == Mat2C::J
    }

    /// `V(ω)`.
    pub fn potential_at(&self, omega: f64) -> Mat2C {
        match &self.potential {
            Potential::TypeIII { lambda } => {
                let c = cos2pi(omega) * lambda;
                let s = sin2pi(omega) * lambda;
                Mat2C::new(C64::new(c, 0.0), C64::new(0.0, s), C64::new(0.0, -s), C64::new(-c, 0.0))
            }
            Potential::Fourier(terms) => {
                let mut v = Mat2C::ZERO;
                for t in terms {
                    let phase = frac(t.k as f64 * frac(omega));
                    let e = C64::new(cos2pi(phase), sin2pi(phase));
                    v = v + t.coeff.scale(e);
                }
                v.hermitian_part()
            }
        }
    }

    /// Phase of site `n`: `ω + 2nα mod 1`.
    pub fn site_phase(&self, omega: f64, n: i64) -> f64 {
        frac(omega + n as f64 * self.step())
    }

    /// `V(ω + 2nα)`.
    pub fn strip_potential(&self, omega: f64, n: i64) -> Mat2C {
        self.potential_at(self.site_phase(omega, n))
    }

    /// `V22(ω)`.
    pub fn v22(&self, omega: f64) -> f64 {
        match &self.potential {
            Potential::TypeIII { lambda } => -lambda * cos2pi(omega),
            Potential::Fourier(_) => self.potential_at(omega).a22.re,
        }
    }

    /// Range of `V22` over the torus (sampled for custom potentials).
    pub fn v22_range(&self) -> (f64, f64) {
        match &self.potential {
            Potential::TypeIII { lambda } => (-lambda, *lambda),
            Potential::Fourier(_) => {
                let n = 4096;
                (0..n).map(|j| self.v22(j as f64 / n as f64)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
            }
        }
    }

    /// `A^z(ω) = [[z − V11 − |V12|²/(z − V22), −1],[1, 0]]` at a single phase.
    pub fn reduced_matrix(&self, z: C64, omega: f64) -> Result<Mat2C> {
        if !self.is_j_hop() {
            return Err(Error::HopNotJ);
        }
        let (t, _) = self.reduced_entry(z, omega)?;
        Ok(Mat2C::new(t, C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)))
    }

    /// `(t, z − V22)` with `t` the upper-left entry of `A^z(ω)`.
    pub(crate) fn reduced_entry(&self, z: C64, omega: f64) -> Result<(C64, C64)> {
        let v = self.potential_at(omega);
        let d = z - v.a22;
        if d.norm() < POLE_TOL * self.lambda {
            return Err(Error::Pole { index: 0, distance: d.norm() });
        }
        let t = z - v.a11 - d.inv() * (v.a12 * v.a21);
        Ok((t, d))
    }

    /// `b = V21 a / (z − V22)`, the second component slaved to the first.
    pub(crate) fn slaved_b(&self, z: C64, omega: f64, a: C64) -> Result<C64> {
        let v = self.potential_at(omega);
        let d = z - v.a22;
        if d.norm() < POLE_TOL * self.lambda {
            return Err(Error::Pole { index: 0, distance: d.norm() });
        }
        Ok(v.a21 * a / d)
    }
}

/// Either kind of model; the CLI presets map onto this.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Scalar(ScalarMosaicModel),
    Strip(StripModel),
}

impl ModelSpec {
    pub fn lambda(&self) -> f64 {
        match self {
            ModelSpec::Scalar(m) => m.lambda,
            ModelSpec::Strip(m) => m.lambda,
        }
    }

    pub fn freq(&self) -> &Frequency {
        match self {
            ModelSpec::Scalar(m) => &m.freq,
            ModelSpec::Strip(m) => &m.freq,
        }
    }
}

/// `½ ln|(|E| + √(E²−λ²))/λ|`, which vanishes for `|E| ≤ λ`.
pub fn closed_form_le(energy: f64, lambda: f64) -> f64 {
    let e = energy.abs();
    if e <= lambda {
        return 0.0;
    }
    0.5 * libm::log((e + libm::sqrt(e * e - lambda * lambda)) / lambda)
}

/// Energies at which the Type-III cocycle is subcritical: `σ \ [−λ, λ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubcriticalWindow {
    pub lambda: f64,
}

impl SubcriticalWindow {
    /// `in_spectrum` is the caller's spectrum membership for `energy`.
    pub fn contains(&self, energy: f64, in_spectrum: bool) -> bool {
        in_spectrum && energy.abs() > self.lambda
    }
}

pub fn subcritical_window(model: &StripModel) -> SubcriticalWindow {
    SubcriticalWindow { lambda: model.lambda }
}

/// The scalar cocycle `ω ↦ A^z(ω)` of a strip with hopping `J`.
#[derive(Clone, Debug)]
pub struct StripCocycle<'a> {
    pub model: &'a StripModel,
    pub z: C64,
}

impl Sampler for StripCocycle<'_> {
    fn sample(&self, omega: f64) -> Result<Mat2C> {
        self.model.reduced_matrix(self.z, omega)
    }
}

pub fn reduce_strip_to_scalar(model: &StripModel, z: C64) -> Result<StripCocycle<'_>> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    Ok(StripCocycle { model, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{Frequency, GOLDEN};
    use proptest::prelude::*;

    fn type2(lambda: f64) -> ScalarMosaicModel {
        ScalarMosaicModel::new(ScalarKind::TypeII, lambda, Frequency::golden()).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn type2_samples() {
        let m = type2(0.8);
        assert_eq!(m.sample(0.0, 0), (1.0, 1.0));
        assert_eq!(m.sample(0.0, 1), (1.0, 0.8));
        let (v, c) = m.sample(0.3, 4);
        let x = (2.0 * PI * (4.0 * GOLDEN + 0.3)).cos();
        assert!((v - x).abs() < 1e-12 && (c - x).abs() < 1e-12);
        let (v, c) = m.sample(0.3, 5);
        assert!((v - x).abs() < 1e-12 && c == 0.8);
    }

    #[test]
    fn mosaic_samples() {
        let m = ScalarMosaicModel::new(ScalarKind::Mosaic, 1.5, Frequency::golden()).unwrap();
        let (v, c) = m.sample(0.25, 2);
        assert!((v - 3.0 * (2.0 * PI * (0.25 + 2.0 * GOLDEN)).cos()).abs() < 1e-12);
        assert_eq!(c, 1.0);
        assert_eq!(m.sample(0.25, 3), (0.0, 1.0));
    }

    #[test]
    fn type3_potential_examples() {
        let m = StripModel::type3(1.0, Frequency::golden()).unwrap();
        let v = m.strip_potential(0.0, 0);
        assert!(v.max_diff(&Mat2C::real(1.0, 0.0, 0.0, -1.0)) < 1e-15);
        let v = m.strip_potential(0.25, 0);
        let want = Mat2C::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0));
        assert!(v.max_diff(&want) < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_le(1.0, 1.0), 0.0);
        assert_eq!(closed_form_le(0.3, 1.0), 0.0);
        let want = 0.5 * (2.0 + 3f64.sqrt()).ln();
        assert!((closed_form_le(2.0, 1.0) - want).abs() < 1e-15);
        assert!((closed_form_le(2.0, 1.0) - 0.658479).abs() < 1e-6);
    }

    #[test]
    fn closed_form_is_continuous_at_lambda() {
        for l in [0.5, 1.0, 2.0] {
            assert!(closed_form_le(l + 1e-12, l) < 1e-5);
            assert!(closed_form_le(-l - 1e-12, l) < 1e-5);
        }
    }

    #[test]
    fn two_step_examples() {
        let m = type2(1.0);
        let b = m.two_step_analytic(c(0.0, 0.0), 0.0, 0.0);
        let want = Mat2C::real(0.0, 1.0, -1.0, -1.0);
        assert!(b.max_diff(&want) < 1e-15);
        let a = m.two_step_matrix(c(0.0, 0.0), 0.0).unwrap();
        assert!(a.max_diff(&want) < 1e-15);
        assert!(matches!(m.two_step_matrix(c(0.0, 0.0), 0.25), Err(Error::Pole { .. })));
        assert!(m.two_step_analytic(c(0.0, 0.0), 0.25, 0.0).is_finite());
    }

    #[test]
    fn reduction_example() {
        let m = StripModel::type3(1.0, Frequency::golden()).unwrap();
        let a = m.reduced_matrix(c(2.0, 0.0), 0.0).unwrap();
        assert!(a.max_diff(&Mat2C::real(1.0, -1.0, 1.0, 0.0)) < 1e-15);
        // E = −λ cos 2πω is a pole.
        assert!(matches!(m.reduced_matrix(c(-1.0, 0.0), 0.0), Err(Error::Pole { .. })));
        let a = m.reduced_matrix(c(0.3, 0.5), 0.17).unwrap();
        assert!(a.a11.im > 0.0);
    }

    #[test]
    fn reduction_requires_j() {
        let m = type2(1.0).to_strip().unwrap();
        assert!(matches!(reduce_strip_to_scalar(&m, c(1.0, 0.1)), Err(Error::HopNotJ)));
    }

    #[test]
    fn phase_window_check() {
        let m = type2(1.0);
        assert!(m.check_phase(0.1371, 100_000).is_ok());
        assert!(matches!(m.check_phase(0.25, 10), Err(Error::PhaseNotInT0 { site: 0, .. })));
    }

    #[test]
    fn strip_forms_reproduce_scalar_blocks() {
        for kind in [ScalarKind::TypeII, ScalarKind::Mosaic] {
            let m = ScalarMosaicModel::new(kind, 0.7, Frequency::golden()).unwrap();
            let s = m.to_strip().unwrap();
            let theta = 0.31;
            for n in 0..5i64 {
                let v = s.strip_potential(theta, n);
                let (v0, c0) = m.sample(theta, 2 * n);
                let (v1, c1) = m.sample(theta, 2 * n + 1);
                let want = Mat2C::real(v0, c0, c0, v1);
                assert!(v.max_diff(&want) < 1e-12, "{kind:?} block {n}");
                assert!(s.hop.max_diff(&Mat2C::real(0.0, 0.0, c1, 0.0)) < 1e-15);
            }
        }
    }

    #[test]
    fn custom_rejects_non_hermitian() {
        let t = vec![FourierTerm { k: 1, coeff: Mat2C::real(1.0, 0.0, 0.0, 0.0) }];
        assert!(StripModel::custom(Mat2C::J, t, Frequency::golden(), 1.0).is_err());
        assert!(StripModel::custom(Mat2C::IDENTITY, vec![], Frequency::golden(), 1.0).is_err());
        // Rank one up to rounding.
        let (a, b, t) = (0.3, 0.7, 0.1);
        assert!(StripModel::custom(Mat2C::real(a, a * t, b, b * t), vec![], Frequency::golden(), 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn two_step_equals_product_of_one_steps(theta in 0.0f64..1.0, e in -3.0f64..3.0, l in 0.3f64..2.5) {
            let m = type2(l);
            prop_assume!(m.check_phase(theta, 2).is_ok());
            let e = c(e, 0.0);
            let prod = m.one_step(e, theta, 1).unwrap() * m.one_step(e, theta, 0).unwrap();
            let a = m.two_step_matrix(e, theta).unwrap();
            prop_assert!(prod.max_diff(&a) <= 1e-12 * (1.0 + a.max_abs()));
            prop_assert!((a.det() - c(1.0, 0.0)).norm() < 1e-9 * (1.0 + a.max_abs() * a.max_abs()));
        }

        #[test]
        fn potential_periodic_and_hermitian(omega in -5.0f64..5.0, l in 0.1f64..3.0) {
            let m = StripModel::type3(l, Frequency::golden()).unwrap();
            let v = m.potential_at(omega);
            prop_assert!(v.is_hermitian(0.0));
            prop_assert!(v.max_diff(&m.potential_at(omega + 1.0)) < 1e-12);
            prop_assert!(v.trace().norm() < 1e-14);
            prop_assert!((v.det() + c(l * l, 0.0)).norm() < 1e-12);
        }

        #[test]
        fn closed_form_even(e in -5.0f64..5.0, l in 0.1f64..3.0) {
            prop_assert_eq!(closed_form_le(e, l), closed_form_le(-e, l));
            prop_assert!(closed_form_le(e, l) >= 0.0);
        }

        #[test]
        fn reduced_matrix_unimodular(omega in 0.0f64..1.0, re in -3.0f64..3.0, im in -1.0f64..1.0) {
            let m = StripModel::type3(1.0, Frequency::golden()).unwrap();
            if let Ok(a) = m.reduced_matrix(c(re, im), omega) {
                prop_assert!((a.det() - c(1.0, 0.0)).norm() < 1e-14);
            }
        }

        #[test]
        fn type3_reduction_closed_form(omega in 0.0f64..1.0, e in 1.1f64..3.0) {
            let m = StripModel::type3(1.0, Frequency::golden()).unwrap();
            let a = m.reduced_matrix(c(e, 0.0), omega).unwrap();
            let t = (e * e - 1.0) / (e + (2.0 * PI * omega).cos());
            prop_assert!((a.a11.re - t).abs() < 1e-12 * (1.0 + t.abs()));
        }
    }
}
