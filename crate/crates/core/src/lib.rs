//! Exact open-system dynamics and entanglement of two parametrically
//! driven, linearly coupled harmonic oscillators dissipating into
//! independent Ohmic baths.
//!
//! The state is Gaussian throughout, so the dynamics is propagated exactly
//! at the level of first and second moments: the normal modes decouple,
//! each normal mode evolves under an influence-functional propagator whose
//! coefficients are built from fundamental solutions of the driven
//! (anti-)damped oscillator equation and the bath noise kernel, and the
//! lab-frame covariance is reassembled for entanglement evaluation.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod gaussian;
pub mod integrate;
pub mod kernel;
pub mod oracles;

pub use config::{DriveKind, Mode, SystemConfig};
pub use error::{Error, Result};
