//! Isospectral deformations of bi-invariant metrics on compact classical groups.
//!
//! The toolkit builds the classical matrix algebras `so(n)`, `su(n)`, `sp(n)`,
//! embeds them with a rank-two torus complement, and studies linear maps
//! `j: h -> g_n` through the invariants of their matrix pencils. On top of
//! that sit:
//!
//! - continuation of a seed map through its isospectral variety,
//! - trace-word certificates separating inequivalent maps,
//! - left-invariant metrics `g_j = (Id + j^t)* g_0` with their Laplace
//!   operators on finite-dimensional representation blocks,
//! - conformal potentials on doubled symplectic groups.
//!
//! Everything is deterministic: randomness enters only through explicit
//! seeds, and repeated runs produce byte-identical artifacts.

pub mod jmap;
pub mod liealg;
pub mod linalg;
pub mod metric;
pub mod pipeline;
pub mod potentials;
pub mod report;
pub mod spectra;

use thiserror::Error;

/// Failures surfaced by library operations. Precondition violations carry
/// enough context to be reported without re-deriving inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("group membership violated: residual {0:.3e}")]
    Membership(f64),

    #[error("maps are not isospectral: residual {0:.3e}")]
    NotIsospectral(f64),

    #[error("total multiplicity mismatch: {0} vs {1}")]
    MultiplicityMismatch(usize, usize),

    #[error("representation budget exceeded: {got} > {budget}")]
    BudgetExceeded { got: usize, budget: usize },

    #[error("numerical flag: {0}")]
    Numerical(String),

    #[error("artifact provenance mismatch: {0}")]
    Provenance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
