//! Spectral laboratory for the fifth-order modified KdV equation on the torus.
//!
//! The crate simulates the equation and its renormalized, gauged and normal-form reformulations,
//! and certifies the multiplier identities, cancellations and phase bounds behind the normal form.

pub mod coeffs;
pub mod certify;
pub mod cutoff;
pub mod engine;
pub mod error;
pub mod field;
pub mod multiplier;
pub mod phase;
pub mod scalar;
pub mod solver;
pub mod sym;

pub use num_complex::Complex64 as C64;

pub use coeffs::{check_assumptions, AssumptionFlags, EquationCoefficients, PhaseParams};
pub use error::{Error, Result};
pub use field::{energy, propagate_linear, sobolev_norm, Grid, SpectralField};
pub use multiplier::{MultCtx, MultiplierId};
pub use scalar::Scalar;
