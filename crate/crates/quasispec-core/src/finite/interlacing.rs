//! Interlacing between the spectra of `S|[1,N]` and `S|[1,N−1]` for strips
//! with hopping `J`, checked against the dense eigensolver.

use alloc::vec::Vec;

use super::BlockTridiag;
use crate::dense::jacobi_eigen;
use crate::models::StripModel;
use crate::{Error, Result};

/// Relative tolerance for treating two eigenvalues as equal; the Jacobi
/// oracle resolves eigenvalues to a few ulps of `‖S‖`.
const EIG_TOL: f64 = 3e-14;
/// Separation below which two `V22` samples collide.
const COLLISION_TOL: f64 = 1e-9;
/// `|⟨v, δ_N⟩|²` below this counts as zero.
const OVERLAP_TOL: f64 = 1e-24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterlacingCase {
    /// `V22(N) ∉ σ(S|[1,N])`; `m` is the 1-based index with
    /// `E^{(n_m)} < V22(N) < E^{(n_{m+1})}`.
    Split { m: usize },
    /// `V22(N) ∈ σ(S|[1,N])`.
    Embedded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Fewer than three eigenvalues see `δ_N`.
    TooFewCoupled { k: usize },
    MultiplicityAboveTwo { energy: f64, multiplicity: usize },
    /// `E = V22(N)` but its eigenvector sees `δ_N`, or `V22(N) ∈ σ(S|[1,N−1])`.
    AtV22 { energy: f64 },
    /// Simple, orthogonal to `δ_N`, yet missing from `σ(S|[1,N−1])`.
    DecoupledNotShared { energy: f64 },
    /// Double eigenvalue that is not seen by `δ_N` or is not a simple
    /// eigenvalue of `S|[1,N−1]`.
    DegeneratePair { energy: f64 },
    /// Simple, coupled to `δ_N`, yet also in `σ(S|[1,N−1])`.
    CoupledShared { energy: f64 },
    /// No gap of the coupled eigenvalues contains `V22(N)`.
    NoSplit,
    /// Wrong number of remaining eigenvalues of `S|[1,N−1]`.
    RemainderCount { expected: usize, found: usize },
    /// Gap `j` (1-based) of the coupled eigenvalues does not strictly
    /// contain its partner.
    NotInterlaced { gap: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterlacingReport {
    pub n: usize,
    pub v22_n: f64,
    /// Number of eigenvalues of `S|[1,N]` coupled to `δ_N`.
    pub k: usize,
    /// Which interlacing pattern applies; `None` if it could not be decided.
    pub case: Option<InterlacingCase>,
    pub coupled: Vec<f64>,
    /// Eigenvalues of `S|[1,N−1]` left after removing the shared ones.
    pub remainder: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl InterlacingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Cluster {
    value: f64,
    multiplicity: usize,
    /// Squared norm of the projection of `δ_N` onto the eigenspace.
    weight: f64,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= EIG_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Rejects phases with colliding `V22` samples or vanishing `V12` on `[1, N]`.
pub fn check_omega0(model: &StripModel, omega: f64, n: usize) -> Result<()> {
    let mut v22 = Vec::with_capacity(n);
    for j in 1..=n as i64 {
        let phase = model.site_phase(omega, j);
        let v = model.potential_at(phase);
        if v.a12.norm() < COLLISION_TOL {
            return Err(Error::OutsideOmega0 { omega, reason: "V12 vanishes", site_a: j as usize, site_b: j as usize });
        }
        v22.push(v.a22.re);
    }
    for a in 0..n {
        for b in a + 1..n {
            if (v22[a] - v22[b]).abs() < COLLISION_TOL {
                return Err(Error::OutsideOmega0 {
                    omega,
                    reason: "V22 values collide",
                    site_a: a + 1,
                    site_b: b + 1,
                });
            }
        }
    }
    Ok(())
}

/// Distance of `ω` from the complement of `Ω₀` on `[1, N]`, relative to the
/// coupling: `min(min_j |V12(j)|, min_{i<j} |V22(i) − V22(j)|) / λ`.
///
/// Near-decoupled sites produce eigenvalue pairs of `S|[1,N]` and
/// `S|[1,N−1]` whose separation scales like a high power of this margin.
pub fn omega0_margin(model: &StripModel, omega: f64, n: usize) -> f64 {
    let v: Vec<_> = (1..=n as i64).map(|j| model.potential_at(model.site_phase(omega, j))).collect();
    let mut m = v.iter().map(|x| x.a12.norm()).fold(f64::INFINITY, f64::min);
    for a in 0..n {
        for b in a + 1..n {
            m = m.min((v[a].a22.re - v[b].a22.re).abs());
        }
    }
    m / model.lambda
}

/// Verifies the strict interlacing pattern of `S|[1,N]` against `S|[1,N−1]`
/// and the four possible relations of each eigenvalue to `δ_N`, the first
/// component at block `N`.
pub fn interlacing_verify(model: &StripModel, omega: f64, n: usize) -> Result<InterlacingReport> {
    if !model.is_j_hop() {
        return Err(Error::HopNotJ);
    }
    if !(2..=14).contains(&n) {
        return Err(Error::InvalidArgument("interlacing checks need 2 <= N <= 14"));
    }
    check_omega0(model, omega, n)?;
    let big = jacobi_eigen(&super::FiniteRestriction::Strip(BlockTridiag::interval(model, omega, 1, n as i64)).to_dense());
    let small = jacobi_eigen(&super::FiniteRestriction::Strip(BlockTridiag::interval(model, omega, 1, n as i64 - 1)).to_dense());
    let v22_n = model.v22(model.site_phase(omega, n as i64));
    let delta = 2 * (n - 1);

    let mut clusters: Vec<Cluster> = Vec::new();
    for (value, vec) in big.values.iter().zip(&big.vectors) {
        let w = vec[delta].norm_sqr();
        match clusters.last_mut() {
            Some(c) if same(c.value, *value) => {
                c.multiplicity += 1;
                c.weight += w;
            }
            _ => clusters.push(Cluster { value: *value, multiplicity: 1, weight: w }),
        }
    }
    let in_small = |e: f64| small.values.iter().filter(|&&s| same(s, e)).count();

    let mut violations = Vec::new();
    let mut shared = Vec::new();
    let mut coupled = Vec::new();
    let mut v22_in_spectrum = false;
    for c in &clusters {
        let coupled_here = c.weight > OVERLAP_TOL;
        if c.multiplicity > 2 {
            violations.push(Violation::MultiplicityAboveTwo { energy: c.value, multiplicity: c.multiplicity });
            continue;
        }
        if same(c.value, v22_n) {
            v22_in_spectrum = true;
            if coupled_here || in_small(c.value) > 0 || c.multiplicity != 1 {
                violations.push(Violation::AtV22 { energy: c.value });
            }
            continue;
        }
        if c.multiplicity == 2 {
            if !coupled_here || in_small(c.value) != 1 {
                violations.push(Violation::DegeneratePair { energy: c.value });
            }
            shared.push(c.value);
            coupled.push(c.value);
        } else if coupled_here {
            if in_small(c.value) > 0 {
                violations.push(Violation::CoupledShared { energy: c.value });
            }
            coupled.push(c.value);
        } else {
            if in_small(c.value) == 0 {
                violations.push(Violation::DecoupledNotShared { energy: c.value });
            }
            shared.push(c.value);
        }
    }

    let k = coupled.len();
    if k < 3 {
        violations.push(Violation::TooFewCoupled { k });
    }

    let mut remainder: Vec<f64> = Vec::with_capacity(small.values.len());
    let mut used = alloc::vec![false; shared.len()];
    for &s in &small.values {
        match shared.iter().enumerate().position(|(i, &e)| !used[i] && same(e, s)) {
            Some(i) => used[i] = true,
            None => remainder.push(s),
        }
    }

    let case = if v22_in_spectrum {
        Some(InterlacingCase::Embedded)
    } else {
        (0..k.saturating_sub(1))
            .find(|&j| coupled[j] < v22_n && v22_n < coupled[j + 1])
            .map(|j| InterlacingCase::Split { m: j + 1 })
    };
    match case {
        None => violations.push(Violation::NoSplit),
        Some(case) => {
            // Gaps (1-based) that must each hold exactly one remainder value.
            let gaps: Vec<usize> = match case {
                InterlacingCase::Split { m } => (1..k).filter(|&j| j != m).collect(),
                InterlacingCase::Embedded => (1..k).collect(),
            };
            if remainder.len() != gaps.len() {
                violations.push(Violation::RemainderCount { expected: gaps.len(), found: remainder.len() });
            } else {
                for (r, &j) in remainder.iter().zip(&gaps) {
                    let (lo, hi) = (coupled[j - 1], coupled[j]);
                    if !(lo < *r && *r < hi) || same(lo, *r) || same(hi, *r) {
                        violations.push(Violation::NotInterlaced { gap: j });
                    }
                }
            }
        }
    }

    Ok(InterlacingReport { n, v22_n, k, case, coupled, remainder, violations })
}
