//! Toric-code quantum memory coupled to a three-dimensional bosonic bath.
//!
//! The bath mediates a long-range attraction between stabilizers, which
//! turns into a size-dependent chemical potential for anyons. This crate
//! provides the lattice, the couplings, exact energetics and mean-field
//! theory, bath-side oracles, kinetic Monte Carlo dynamics and a matching
//! decoder.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod couplings;
pub mod decoder;
pub mod dynamics;
pub mod energetics;
pub mod error;
pub mod geometry;
pub mod stats;

pub use couplings::{
    build_kernel, build_pattern_square, CouplingKind, CouplingPattern, InteractionKernel,
    ModelParams,
};
pub use decoder::{
    decode, extract_syndrome, is_logical_failure, Decoder, ErrorSet, MatchingDecoder, Syndrome,
};
pub use dynamics::{RateLawKind, Simulation};
pub use energetics::{config_energy, move_delta, AnyonConfig};
pub use error::{Error, Result};
pub use geometry::{CodeLattice, Flip, Species};

/// Crate version, recorded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
