//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced while building lattices, bases, operators or running
/// the numerical checks.
#[derive(Debug, Error)]
pub enum PamError {
    /// Lattice construction or assumption validation failed.
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// Model parameters violate the standing assumptions (e.g. `V = 0`,
    /// `omega0 <= 0`) or a theorem-regime precondition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A basis lookup or sector bookkeeping error.
    #[error("basis error: {0}")]
    Basis(String),

    /// An operator could not be assembled consistently.
    #[error("operator error: {0}")]
    Operator(String),

    /// A matrix that must be unitary failed its unitarity check.
    #[error("unitarity violation: {0}")]
    Unitarity(String),

    /// A matrix that must be Hermitian failed its Hermiticity check.
    #[error("hermiticity violation: {0}")]
    Hermiticity(String),

    /// Dense or iterative linear algebra failed to converge or errored.
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// The literal configuration-graph path construction could not proceed;
    /// the offending state is reported verbatim instead of being patched.
    #[error("configuration-graph procedure stuck: {0}")]
    GraphStuck(String),

    /// Input/output failure (CSV/JSON export).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
