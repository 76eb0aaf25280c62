//! Exact arithmetic for superelliptic equations `y² = F(x,z)` with `F` an
//! integer binary form of odd degree.
//!
//! The crate is organized in layers:
//!
//! - [`kernel`] — big-integer polynomials, polynomials over `Z/N`, exact
//!   matrices, fraction-free determinants of matrix pencils, Sturm chains,
//!   and factorization over prime fields.
//! - [`forms`] — binary forms: height, monicization, `SL₂(Z)` action,
//!   discriminants, and height-box enumeration.
//! - [`orders`] — the rank-(2n+1) order attached to a binary form, its
//!   ζ-basis multiplication table, the canonical ideals `I_F^j`, fractional
//!   ideals with exact norms, and the two coordinate functionals used by the
//!   orbit construction.
//! - [`orbits`] — the construction taking a primitive solution of
//!   `y² = F(x,z)` to a pair `(I, δ)` and on to a pair of symmetric integer
//!   matrices `(A,B)` with `det(xA+zB) = ±F_mon(x,z)`, plus certificate
//!   verification and the distinguished-orbit test.
//! - [`localsolve`] — p-adic and real solubility of the primitive-solution
//!   equation, p-maximality of the order, and the two sieve conditions at
//!   primes dividing the squarefree part of the leading coefficient.
//! - [`densities`] — closed-form density constants, factor-count statistics,
//!   orthogonal group orders, local volumes, and the explicit upper-bound
//!   assemblies.
//! - [`coverings`] — split 2-covering equations, the map to the projective
//!   line, and finite-field fiber statistics.
//! - [`census`] — height-box family enumeration with local certificates,
//!   solution search, JSONL persistence, and summary statistics.

pub mod census;
pub mod coverings;
pub mod densities;
pub mod forms;
pub mod kernel;
pub mod localsolve;
pub mod orbits;
pub mod orders;

use thiserror::Error;

/// Errors shared across the crate.
///
/// Precondition violations (bad input) are distinguished from internal
/// invariant failures so the CLI can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("form is inseparable (discriminant zero)")]
    Inseparable,
    #[error("solution is not primitive or does not satisfy c² = F(x₀,z₀)")]
    InvalidSolution,
    #[error("modulus must be ≥ 2")]
    BadModulus,
    #[error("modulus is not prime")]
    CompositeModulus,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("values belong to different form contexts")]
    ContextMismatch,
    #[error("element is a zero divisor or not invertible")]
    ZeroDivisor,
    #[error("residue descent exceeded its depth cap (p = {p}, cap = {cap})")]
    DepthExceeded { p: u64, cap: u32 },
    #[error("inadmissible shear parameter K = {0}")]
    InadmissibleK(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error reports a violated precondition (caller error)
    /// rather than an internal failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::Io(_))
    }
}
