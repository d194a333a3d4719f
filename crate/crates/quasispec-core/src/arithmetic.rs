//! Continued fractions, torus distances and Diophantine diagnostics.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::{Error, Result};

/// Remainders below this are treated as an exact rational termination.
pub const RATIONAL_TOL: f64 = 1e-14;

/// `|sin|` below this makes a logarithmic sum degenerate.
const SIN_FLOOR: f64 = 1e-300;

/// The golden mean `(√5 − 1)/2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// An irrational rotation number with its continued-fraction data.
///
/// `cf_coeffs[k-1]` is `x_k`; `convergents[n]` is `(p_n, q_n)` for
/// `n = 0..=depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    value: f64,
    cf_coeffs: Vec<u64>,
    convergents: Vec<(u64, u64)>,
}

impl Frequency {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn cf_coeffs(&self) -> &[u64] {
        &self.cf_coeffs
    }

    pub fn convergents(&self) -> &[(u64, u64)] {
        &self.convergents
    }

    /// Denominator `q_n`.
    pub fn q(&self, n: usize) -> Option<u64> {
        self.convergents.get(n).map(|c| c.1)
    }

    pub fn depth(&self) -> usize {
        self.cf_coeffs.len()
    }

    /// The golden mean expanded to a depth safe in double precision.
    pub fn golden() -> Self {
        cf_expand(GOLDEN, 30).expect("golden mean is irrational")
    }

    /// Expands `alpha` as deep as double precision allows, up to `max_depth`.
    ///
    /// Fails only if `alpha` terminates within the first few terms.
    pub fn new(alpha: f64, max_depth: usize) -> Result<Self> {
        let mut last = None;
        for depth in 1..=max_depth {
            match cf_expand(alpha, depth) {
                Ok(f) if f.convergents.last().is_some_and(|c| c.1 > MAX_RESOLVED_Q) => break,
                Ok(f) => last = Some(f),
                Err(e) if depth <= 4 => return Err(e),
                Err(_) => break,
            }
        }
        last.ok_or(Error::InvalidArgument("max_depth must be at least 1"))
    }

    /// The frequency `2α mod 1` used by the strip operators.
    pub fn doubled(&self) -> Result<Self> {
        Frequency::new(crate::frac(2.0 * self.value), self.depth().max(1))
    }
}

/// Beyond this denominator `|α − p/q| < 1/q²` is below double precision.
const MAX_RESOLVED_Q: u64 = 100_000_000;

/// Continued-fraction expansion `α = [0; x_1, x_2, …]` to `depth` terms.
pub fn cf_expand(alpha: f64, depth: usize) -> Result<Frequency> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in (0,1)"));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1"));
    }
    let mut coeffs = Vec::with_capacity(depth);
    let mut y = alpha;
    for k in 1..=depth {
        if y < RATIONAL_TOL {
            return Err(Error::Rational { alpha, depth: k - 1, remainder: y });
        }
        let inv = 1.0 / y;
        let x = libm::floor(inv);
        coeffs.push(x as u64);
        y = inv - x;
    }
    if y < RATIONAL_TOL {
        return Err(Error::Rational { alpha, depth, remainder: y });
    }

    let mut convergents = Vec::with_capacity(depth + 1);
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    convergents.push((p, q));
    for &x in &coeffs {
        let next = |a: u64, b: u64| x.checked_mul(a).and_then(|v| v.checked_add(b));
        let (Some(pn), Some(qn)) = (next(p, p_prev), next(q, q_prev)) else {
            return Err(Error::InvalidArgument("convergents overflow u64"));
        };
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
        convergents.push((p, q));
    }
    Ok(Frequency { value: alpha, cf_coeffs: coeffs, convergents })
}

/// Distance from `x` to the nearest integer.
pub fn torus_norm(x: f64) -> f64 {
    (x - libm::round(x)).abs()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiophantineReport {
    /// `min ‖kα‖·|k|^σ/γ` over `1 ≤ k ≤ k_max`; at least 1 certifies DC(γ,σ).
    pub margin: f64,
    pub worst_k: u64,
}

pub fn diophantine_margin(freq: &Frequency, gamma: f64, sigma: f64, k_max: u64) -> DiophantineReport {
    let alpha = freq.value;
    let mut report = DiophantineReport { margin: f64::INFINITY, worst_k: 1 };
    for k in 1..=k_max.max(1) {
        let kf = k as f64;
        let m = torus_norm(kf * alpha) * libm::pow(kf, sigma) / gamma;
        if m < report.margin {
            report = DiophantineReport { margin: m, worst_k: k };
        }
    }
    report
}

/// `Σ ln|sin π(x+lα)|` over `0 ≤ l < q_n`, skipping the smallest term.
///
/// Returns the sum and the skipped index `l0`.
pub fn ln_sin_sum(x: f64, freq: &Frequency, n: usize) -> Result<(f64, usize)> {
    let q = freq.q(n).ok_or(Error::InvalidArgument("convergent index beyond expansion depth"))? as usize;
    let alpha = freq.value;
    let mut terms = Vec::with_capacity(q);
    for l in 0..q {
        let s = libm::sin(PI * crate::frac(x + l as f64 * alpha)).abs();
        if s < SIN_FLOOR {
            return Err(Error::DegenerateOrbit { index: l });
        }
        terms.push(s);
    }
    let l0 = terms
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let sum = terms
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != l0)
        .map(|(_, s)| libm::log(*s))
        .sum();
    Ok((sum, l0))
}

/// Largest observed `|sum + (q_n − 1) ln 2| / ln q_n` over convergents in `ns`.
///
/// This is the fitted constant of the logarithmic sine-sum bound; `q_n = 1`
/// entries are skipped because `ln q_n` vanishes there.
pub fn fitted_sin_sum_constant(x: f64, freq: &Frequency, ns: core::ops::RangeInclusive<usize>) -> Result<f64> {
    let mut c: f64 = 0.0;
    for n in ns {
        let q = freq.q(n).ok_or(Error::InvalidArgument("convergent index beyond expansion depth"))?;
        if q < 2 {
            continue;
        }
        let (sum, _) = ln_sin_sum(x, freq, n)?;
        let dev = (sum + (q as f64 - 1.0) * LN_2).abs() / libm::log(q as f64);
        c = c.max(dev);
    }
    Ok(c)
}
