//! Non-Markovian spontaneous decay of a qubit coupled to a structured reservoir.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//!
//! The crate computes atom–photon bound states from the secular equation,
//! the asymptotic trapped population b⁴, full amplitude trajectories from the
//! memory-kernel integro-differential equation, and the persistence of
//! two-qubit concurrence and discord under the resulting local channel.

pub mod boundstate;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use spectral::{FrequencyConvention, SpectralModel};
