//! Eigenvector diagnostics: inverse participation ratios and fitted
//! exponential decay rates.

use alloc::vec::Vec;

use super::{build_restriction, eigenvalues, eigenvector};
use crate::cocycle::least_squares_slope;
use crate::models::{closed_form_le, ModelSpec, ScalarKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationRecord {
    pub energy: f64,
    /// Site (scalar) or block (strip) of the largest amplitude.
    pub center: usize,
    /// `Σ|u|⁴ / (Σ|u|²)²`.
    pub ipr: f64,
    /// Fitted `−d ln|u| / d|n − center|` per site or block.
    pub decay_rate: f64,
    /// Closed-form Lyapunov exponent, for Type-II chains only.
    pub closed_form_le: Option<f64>,
}

/// One step of a three-term recursion in log-scaled form.
struct Profile {
    /// `ln|u(n)|` at every visited position, in visiting order.
    ln_abs: Vec<f64>,
}

/// Runs `u_next = coeff(i)·u − weight(i)·u_prev` from `(u, u_prev) = (1, 0)`
/// for `steps` steps, recording `ln|u|` before each step.
fn run_profile<F: FnMut(usize) -> Result<(f64, f64)>>(steps: usize, mut step: F) -> Result<Profile> {
    let (mut u, mut prev, mut scale) = (1.0f64, 0.0f64, 0.0f64);
    let mut ln_abs = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        ln_abs.push(libm::log(u.abs()) + scale);
        if i == steps {
            break;
        }
        let (coeff, weight) = step(i)?;
        let next = coeff * u - weight * prev;
        prev = u;
        u = next;
        let m = u.abs().max(prev.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            u /= m;
            prev /= m;
            scale += libm::log(m);
        }
    }
    Ok(Profile { ln_abs })
}

/// Fits the decay of an eigenfunction at energy `e` centered at `center`,
/// using solutions grown from each Dirichlet boundary toward the center.
///
/// Those solutions are increasing toward the center and therefore keep
/// full relative accuracy in the tails, unlike the eigenvector itself.
pub fn decay_rate(model: &ModelSpec, phase: f64, n: usize, e: f64, center: usize) -> Result<f64> {
    if center >= n {
        return Err(Error::InvalidArgument("center must lie inside the restriction"));
    }
    let (left, right) = match model {
        ModelSpec::Scalar(m) => {
            let coeffs = |site: i64| {
                let (v, c) = m.sample(phase, site);
                let (_, c_prev) = m.sample(phase, site - 1);
                (v, c, c_prev)
            };
            // Left: sites 0..=center with u(−1) = 0.
            let left = run_profile(center, |i| {
                let (v, c, c_prev) = coeffs(i as i64);
                Ok(((e - v) / c, c_prev / c))
            })?;
            // Right: sites n−1 down to center with u(n) = 0.
            let right = run_profile(n - 1 - center, |i| {
                let site = (n - 1 - i) as i64;
                let (v, c, c_prev) = coeffs(site);
                Ok(((e - v) / c_prev, c / c_prev))
            })?;
            (left, right)
        }
        ModelSpec::Strip(s) => {
            if !s.is_j_hop() {
                return Err(Error::HopNotJ);
            }
            let z = crate::C64::new(e, 0.0);
            let t_at = |block: i64| s.reduced_entry(z, s.site_phase(phase, block)).map(|(t, _)| t.re);
            // Blocks are 1..=n; local index j ↔ block j+1.
            let left = run_profile(center, |i| Ok((t_at(i as i64 + 1)?, 1.0)))?;
            let right = run_profile(n - 1 - center, |i| Ok((t_at((n - i) as i64)?, 1.0)))?;
            (left, right)
        }
    };
    let mut pts = Vec::new();
    for prof in [&left, &right] {
        let len = prof.ln_abs.len();
        if len < 30 {
            continue;
        }
        let peak = prof.ln_abs[len - 1];
        // Running maximum over an 8-site window tames nodes of the profile.
        for d in 10..len {
            let idx = len - 1 - d;
            let lo = idx.saturating_sub(4);
            let hi = (idx + 4).min(len - 1);
            let env = prof.ln_abs[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if env.is_finite() {
                pts.push((d as f64, env - peak));
            }
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidArgument("restriction too short for a decay fit"));
    }
    Ok(-least_squares_slope(&pts))
}

/// Inverse participation ratio of a vector.
pub fn ipr(v: &[crate::C64]) -> f64 {
    let s2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let s4: f64 = v.iter().map(|x| x.norm_sqr() * x.norm_sqr()).sum();
    s4 / (s2 * s2)
}

/// IPR and decay rate of every eigenpair of the size-`N` restriction with
/// eigenvalue in `window`.
pub fn localization_scan(model: &ModelSpec, phase: f64, n: usize, window: (f64, f64)) -> Result<Vec<LocalizationRecord>> {
    if n < 500 {
        return Err(Error::InvalidArgument("localization scans need N >= 500"));
    }
    let r = build_restriction(model, phase, n)?;
    let eigs = eigenvalues(&r, window.0, window.1, 1e-13)?;
    let mut out = Vec::with_capacity(eigs.len());
    for e in eigs {
        let v = eigenvector(&r, e)?;
        let width = if matches!(model, ModelSpec::Strip(_)) { 2 } else { 1 };
        let peak = (0..v.len()).max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())).unwrap_or(0);
        let center = peak / width;
        let closed = match model {
            ModelSpec::Scalar(m) if m.kind == ScalarKind::TypeII => Some(closed_form_le(e, m.lambda)),
            _ => None,
        };
        out.push(LocalizationRecord { energy: e, center, ipr: ipr(&v), decay_rate: decay_rate(model, phase, n, e, center)?, closed_form_le: closed });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Frequency;
    use crate::models::{ScalarMosaicModel, StripModel};

    fn type2(l: f64) -> ModelSpec {
        ModelSpec::Scalar(ScalarMosaicModel::new(ScalarKind::TypeII, l, Frequency::golden()).unwrap())
    }

    #[test]
    fn decay_matches_lyapunov_exponent() {
        let recs = localization_scan(&type2(1.0), crate::DEFAULT_PHASE, 1000, (2.3, 2.4)).unwrap();
        assert!(!recs.is_empty());
        for r in recs.iter().filter(|r| r.center > 200 && r.center < 800) {
            let l = r.closed_form_le.unwrap();
            assert!((r.decay_rate - l).abs() < 0.15 * l, "E={} rate={} L={}", r.energy, r.decay_rate, l);
            assert!(r.ipr > 0.0 && r.ipr <= 1.0);
        }
    }

    #[test]
    fn critical_states_scale_between_regimes() {
        let mut pts = Vec::new();
        for n in [500usize, 1000, 2000] {
            let recs = localization_scan(&type2(1.0), crate::DEFAULT_PHASE, n, (0.2, 0.5)).unwrap();
            let mean = recs.iter().map(|r| r.ipr).sum::<f64>() / recs.len() as f64;
            pts.push((libm::log(n as f64), libm::log(mean)));
        }
        let slope = least_squares_slope(&pts);
        assert!(slope < -0.05 && slope > -0.95, "slope {slope}");
    }

    #[test]
    fn ipr_bounds() {
        let v = [crate::C64::new(1.0, 0.0), crate::C64::new(0.0, 0.0)];
        assert_eq!(ipr(&v), 1.0);
        let v = [crate::C64::new(0.5, 0.0); 4];
        assert!((ipr(&v) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn strip_profiles_work() {
        let m = ModelSpec::Strip(StripModel::type3(1.0, Frequency::golden()).unwrap());
        let recs = localization_scan(&m, 0.3, 500, (1.2, 1.3)).unwrap();
        for r in recs {
            assert!(r.decay_rate.is_finite());
            assert!(r.closed_form_le.is_none());
        }
    }

    #[test]
    fn rejects_short_restrictions() {
        assert!(localization_scan(&type2(1.0), 0.1, 100, (0.0, 1.0)).is_err());
    }
}
