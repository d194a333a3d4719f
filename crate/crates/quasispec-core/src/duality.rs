//! Aubry duality: Fourier coefficients of strip potentials, the long-range
//! dual operator, the `U₂` conjugation and IDS comparisons.

use alloc::vec::Vec;

use crate::arithmetic::Frequency;
use crate::dense::DenseMatrix;
use crate::finite::{build_restriction, count_below, equidistributed_phases, FiniteRestriction};
use crate::models::{FourierTerm, ModelSpec, Potential, ScalarKind, ScalarMosaicModel, StripModel};
use crate::{frac, Error, Mat2C, Result, C64};

/// `V^(±1)` of `λ[[cos 2πω, i sin 2πω],[−i sin 2πω, −cos 2πω]]`.
pub fn type3_fourier(lambda: f64) -> Vec<FourierTerm> {
    let h = 0.5 * lambda;
    alloc::vec![
        FourierTerm { k: 1, coeff: Mat2C::real(h, h, -h, -h) },
        FourierTerm { k: -1, coeff: Mat2C::real(h, -h, h, -h) },
    ]
}

/// `(Ŝψ)(n) = Σ_k V^(k) ψ(n−k) + (C e^{iφ_n} + C* e^{−iφ_n}) ψ(n)` with
/// `φ_n = 2π(2nα + ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualOperator {
    /// One entry per `k`, sorted by `k`.
    pub coeffs: Vec<FourierTerm>,
    /// The primal hopping `C`, which becomes the diagonal modulation.
    pub hop: Mat2C,
    pub freq_doubled: Frequency,
    /// Largest `|k|` present.
    pub radius: usize,
}

impl DualOperator {
    pub fn coeff(&self, k: i32) -> Mat2C {
        self.coeffs.iter().find(|t| t.k == k).map(|t| t.coeff).unwrap_or(Mat2C::ZERO)
    }

    /// `Σ_k V^(k) e^{2πikω}`.
    pub fn reconstruct(&self, omega: f64) -> Mat2C {
        self.coeffs.iter().fold(Mat2C::ZERO, |acc, t| {
            let p = frac(t.k as f64 * frac(omega));
            let e = C64::new(libm::cos(2.0 * core::f64::consts::PI * p), libm::sin(2.0 * core::f64::consts::PI * p));
            acc + t.coeff.scale(e)
        })
    }

    /// Diagonal block `C e^{iφ_n} + C* e^{−iφ_n}`.
    pub fn diagonal(&self, omega: f64, n: i64) -> Mat2C {
        let p = frac(omega + n as f64 * self.freq_doubled.value());
        let arg = 2.0 * core::f64::consts::PI * p;
        let e = C64::new(libm::cos(arg), libm::sin(arg));
        self.hop.scale(e) + self.hop.adjoint().scale(e.conj())
    }

    /// Dirichlet restriction of `Ŝ_ω` to blocks `n1..=n2`.
    pub fn restriction(&self, omega: f64, n1: i64, n2: i64) -> DenseMatrix {
        let nb = (n2 - n1 + 1) as usize;
        let mut m = DenseMatrix::zeros(2 * nb);
        for i in 0..nb {
            let d = self.diagonal(omega, n1 + i as i64);
            put_block(&mut m, i, i, &d);
            for j in 0..nb {
                let k = i as i64 - j as i64;
                if k != 0 && k.unsigned_abs() as usize <= self.radius {
                    put_block(&mut m, i, j, &self.coeff(k as i32));
                }
            }
        }
        m
    }
}

fn put_block(m: &mut DenseMatrix, bi: usize, bj: usize, b: &Mat2C) {
    let e = [[b.a11, b.a12], [b.a21, b.a22]];
    for (r, row) in e.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            m.set(2 * bi + r, 2 * bj + c, *v);
        }
    }
}

/// Fourier data of a strip potential; exact for the trigonometric
/// polynomials used by every preset.
pub fn fourier_coeffs(model: &StripModel) -> DualOperator {
    let raw = match &model.potential {
        Potential::TypeIII { lambda } => type3_fourier(*lambda),
        Potential::Fourier(t) => t.clone(),
    };
    let mut coeffs: Vec<FourierTerm> = Vec::new();
    for t in raw {
        match coeffs.iter_mut().find(|s| s.k == t.k) {
            Some(s) => s.coeff = s.coeff + t.coeff,
            None => coeffs.push(t),
        }
    }
    coeffs.retain(|t| t.coeff.max_abs() > 0.0);
    coeffs.sort_by_key(|t| t.k);
    let radius = coeffs.iter().map(|t| t.k.unsigned_abs() as usize).max().unwrap_or(0);
    DualOperator { coeffs, hop: model.hop, freq_doubled: model.freq_doubled.clone(), radius }
}

/// `(1/√2)[[1, 1],[1, −1]]`.
pub fn u2() -> Mat2C {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Mat2C::real(s, s, s, -s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugationReport {
    pub n: usize,
    /// Largest entrywise difference between `U₂* Ŝ U₂` and the Type-III
    /// restriction.
    pub max_error: f64,
    pub passed: bool,
}

/// Conjugates the dual of the Type-II chain by blockwise `U₂` on blocks
/// `1..=n` and compares with the Type-III strip at the same phase.
pub fn u2_conjugate_check(lambda: f64, freq: &Frequency, omega: f64, n: usize) -> Result<ConjugationReport> {
    let chain = ScalarMosaicModel::new(ScalarKind::TypeII, lambda, freq.clone())?;
    let dual = fourier_coeffs(&chain.to_strip()?);
    let conj = dual.restriction(omega, 1, n as i64).conjugate_blockwise(&u2());
    let strip = StripModel::type3(lambda, freq.clone())?;
    let want = build_restriction(&ModelSpec::Strip(strip), omega, n)?.to_dense();
    let max_error = conj.max_abs_diff(&want);
    Ok(ConjugationReport { n, max_error, passed: max_error < 1e-14 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityIdsReport {
    pub grid: Vec<f64>,
    pub ids_chain: Vec<f64>,
    pub ids_strip: Vec<f64>,
    pub sup_distance: f64,
    /// `(min, max)` eigenvalue over the sampled phases.
    pub chain_range: (f64, f64),
    pub strip_range: (f64, f64),
    /// Whether each family has an eigenvalue within `0.01` of `−λ` and `+λ`.
    pub chain_hits_lambda: (bool, bool),
    pub strip_hits_lambda: (bool, bool),
}

fn extreme_eigenvalues(r: &FiniteRestriction) -> Result<(f64, f64)> {
    let (lo, hi) = r.spectral_bounds();
    let dim = r.dim();
    let bisect = |target: usize| -> Result<f64> {
        // Smallest E with count_below(E) >= target.
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if count_below(r, mid)? >= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    Ok((bisect(1)?, bisect(dim)?))
}

fn has_eigenvalue_near(r: &FiniteRestriction, e: f64, tol: f64) -> Result<bool> {
    Ok(count_below(r, e + tol)? > count_below(r, e - tol)?)
}

/// Phase-averaged IDS of the Type-II chain on `2N` sites and of the Type-III
/// strip on `N` blocks, on a `grid_points` grid spanning both sampled
/// spectra padded by 5%.
pub fn duality_ids_compare(
    chain: &ScalarMosaicModel,
    strip: &StripModel,
    n: usize,
    n_phases: usize,
    grid_points: usize,
) -> Result<DualityIdsReport> {
    if chain.lambda != strip.lambda || chain.freq.value() != strip.freq.value() {
        return Err(Error::InvalidArgument("models must share lambda and alpha"));
    }
    if grid_points < 2 || n_phases == 0 {
        return Err(Error::InvalidArgument("need at least two grid points and one phase"));
    }
    let lambda = chain.lambda;
    let a = ModelSpec::Scalar(chain.clone());
    let b = ModelSpec::Strip(strip.clone());
    let phases = equidistributed_phases(n_phases);
    let ra: Vec<FiniteRestriction> = phases.iter().map(|&p| build_restriction(&a, p, 2 * n)).collect::<Result<_>>()?;
    let rb: Vec<FiniteRestriction> = phases.iter().map(|&p| build_restriction(&b, p, n)).collect::<Result<_>>()?;

    let range = |rs: &[FiniteRestriction]| -> Result<(f64, f64)> {
        let mut out = (f64::INFINITY, f64::NEG_INFINITY);
        for r in rs {
            let (lo, hi) = extreme_eigenvalues(r)?;
            out = (out.0.min(lo), out.1.max(hi));
        }
        Ok(out)
    };
    let chain_range = range(&ra)?;
    let strip_range = range(&rb)?;
    let lo = chain_range.0.min(strip_range.0);
    let hi = chain_range.1.max(strip_range.1);
    let pad = 0.05 * (hi - lo);
    let grid: Vec<f64> = (0..grid_points).map(|i| lo - pad + (hi - lo + 2.0 * pad) * i as f64 / (grid_points - 1) as f64).collect();

    let staircase = |rs: &[FiniteRestriction]| -> Result<Vec<f64>> {
        grid.iter()
            .map(|&e| {
                let mut total = 0.0;
                for r in rs {
                    total += count_below(r, e)? as f64 / r.dim() as f64;
                }
                Ok(total / rs.len() as f64)
            })
            .collect()
    };
    let ids_chain = staircase(&ra)?;
    let ids_strip = staircase(&rb)?;
    let sup_distance = ids_chain.iter().zip(&ids_strip).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let hits = |rs: &[FiniteRestriction]| -> Result<(bool, bool)> {
        let mut out = (false, false);
        for r in rs {
            out.0 |= has_eigenvalue_near(r, -lambda, 0.01)?;
            out.1 |= has_eigenvalue_near(r, lambda, 0.01)?;
        }
        Ok(out)
    };
    Ok(DualityIdsReport {
        chain_hits_lambda: hits(&ra)?,
        strip_hits_lambda: hits(&rb)?,
        grid,
        ids_chain,
        ids_strip,
        sup_distance,
        chain_range,
        strip_range,
    })
}
