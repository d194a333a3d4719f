//! Numerics for quasiperiodic singular Jacobi operators.
//!
//! Transfer-matrix cocycles, finite restrictions, half-line m-functions and
//! Aubry duality for the mosaic, Type-II and Type-III models and for generic
//! singular strip operators. The crate is `no_std` and only needs `alloc`;
//! elementary functions come from `libm` so results do not depend on the
//! platform's math library.

#![no_std]

extern crate alloc;

pub mod arithmetic;
pub mod cocycle;
pub mod dense;
pub mod duality;
mod error;
pub mod finite;
pub mod mat2;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use mat2::{Mat2C, C64};

/// Phase used when the caller does not supply one.
pub const DEFAULT_PHASE: f64 = 0.1371;

pub(crate) fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}
