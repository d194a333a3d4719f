use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency {alpha} is rational at working precision (remainder {remainder:e} at depth {depth})")]
    Rational { alpha: f64, depth: usize, remainder: f64 },

    #[error("degenerate orbit: |sin| underflows at index {index}")]
    DegenerateOrbit { index: usize },

    #[error("cocycle pole at orbit index {index} (distance {distance:e})")]
    Pole { index: i64, distance: f64 },

    #[error("phase {phase} leaves T0: |cos| = {min_cos:e} at site {site}")]
    PhaseNotInT0 { phase: f64, site: i64, min_cos: f64 },

    #[error("pivot breakdown in the inertia count at E = {energy}")]
    PivotBreakdown { energy: f64 },

    #[error("phase {omega} is outside Omega0: {reason} at sites {site_a}, {site_b}")]
    OutsideOmega0 { omega: f64, reason: &'static str, site_a: usize, site_b: usize },

    #[error("eigenvalue collision: determinant underflows on [{n1}, {n2}]")]
    EigenvalueCollision { n1: i64, n2: i64 },

    #[error("coincident interpolation nodes {i} and {j}")]
    CoincidentNodes { i: usize, j: usize },

    #[error("half-line iteration did not contract (Im z = {imag:e})")]
    NoContraction { imag: f64 },

    #[error("Wronskian varies along the window (relative spread {spread:e})")]
    InconsistentWronskian { spread: f64 },

    #[error("no classification edge found in [{lo}, {hi}]")]
    NoEdgeFound { lo: f64, hi: f64 },

    #[error("operation requires the hopping J = [[1,0],[0,0]]")]
    HopNotJ,

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
