use thiserror::Error;

use crate::geometry::Species;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice size {0}: must be even and at least 2")]
    InvalidSize(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel evaluated at zero separation; use the self-term instead")]
    ZeroSeparation,

    #[error("bath of linear size {lambda} cannot host a code of size {l} (need lambda >= 2L)")]
    Embedding { lambda: usize, l: usize },

    #[error("single-particle spectrum not positive (min eigenvalue {0:e})")]
    SpectrumNotPositive(f64),

    #[error("root search did not converge in [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },

    #[error("odd number of anyons for species {0:?}")]
    OddSyndrome(Species),

    #[error("error and correction leave a nonempty syndrome")]
    ResidualSyndrome,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
