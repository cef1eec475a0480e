//! Exact diagonalization toolkit for the periodic Anderson model (PAM) with
//! Holstein-type electron–phonon coupling on small bipartite lattices.
//!
//! The crate builds the half-filled, $S^3_{\mathrm{tot}} = 0$ sector of the
//! PAM with either conduction-band ($n^d$) or localized ($n^f$) phonon
//! coupling, applies the Lang–Firsov, phonon-rotation and hole–particle
//! deformations, and numerically certifies the structural facts behind the
//! uniqueness / total-spin / antiferromagnetic-sign theorems for these
//! models:
//!
//! * uniqueness of the ground state and total spin $S = 0$,
//! * the staggered sign structure of transverse spin–spin correlators,
//! * positivity of the heat semigroup $e^{-\beta H}$ with respect to the
//!   fiberwise positive-semidefinite cone in the phonon position frame,
//! * connectivity of the electron configuration graph together with the
//!   small-$\beta$ asymptotics of the projected semigroup elements that
//!   drive the ergodicity argument.
//!
//! Modules follow the pipeline order: [`lattice`] → [`fock`] → [`phonon`] →
//! [`ops`] → [`ham`] → [`transform`] → [`spectral`] → [`graph`] →
//! [`positivity`], with [`acceptance`] bundling the end-to-end checks used
//! by the `pamlab verify` command and the integration test suite.

pub mod acceptance;
pub mod error;
pub mod fock;
pub mod graph;
pub mod ham;
pub mod lattice;
pub mod linalg;
pub mod ops;
pub mod phonon;
pub mod positivity;
pub mod spectral;
pub mod transform;

pub use error::PamError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PamError>;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
