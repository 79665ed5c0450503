//! ℓ-adic regulator toolkit for number fields in which the prime ℓ splits
//! completely.
//!
//! The crate provides fixed-precision arithmetic in `Q_ℓ` with the Iwasawa
//! logarithm ([`padic`]), Hensel-lifted embeddings of a number field into
//! `Q_ℓ` ([`field`]), the divisor module over the primes above ℓ with its
//! scalar product and Galois actions ([`lattice`]), the local-universal-norm
//! sublattice `U_{S,2}(K)` realised as a kernel of logarithms together with
//! rank certificates ([`norms`]), the classical, relative and
//! divisor-pairing regulators ([`regulators`]), the effective ζ_m-conjugacy
//! criterion and quadratic-field helpers ([`criteria`]), and a command-line
//! surface ([`cli`]).
//!
//! All of the heavy inner loops (root lifting, logarithm series per
//! embedding, prime surveys, Gram assembly) run data-parallel on rayon when
//! the default `parallel` feature is enabled and fall back to equivalent
//! sequential loops without it.

pub mod criteria;
pub mod field;
pub mod lattice;
pub mod linalg;
pub mod norms;
pub mod padic;
pub mod par;
pub mod poly;
pub mod regulators;

pub mod cli;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precision context mismatch: {0} vs {1}")]
    ContextMismatch(String, String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid precision context: {0}")]
    InvalidContext(String),
    #[error("inverse of a value indistinguishable from zero at precision")]
    InverseOfZero,
    #[error("operand is zero at the working precision")]
    ZeroAtPrecision,
    #[error("operand is not an ℓ-adic unit (valuation {0:?})")]
    NotAUnit(Option<i64>),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("ℓ divides disc(f): ramified or undecidable, choose another ℓ")]
    RamifiedOrUndecidable,
    #[error("f does not split completely modulo {0}")]
    NotCompletelySplit(u64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index sets differ: {0} vs {1}")]
    IndexMismatch(usize, usize),
    #[error("unknown group element label `{0}`")]
    UnknownLabel(String),
    #[error("validation failure: {0}")]
    Validation(String),
    #[error("linear system is singular at precision: {0}")]
    SingularAtPrecision(String),
    #[error("rank condition on the conjugate logarithms fails at precision: {0}")]
    ConjugateRankAtPrecision(String),
    #[error("character group unsupported: exponent {0} does not divide ℓ-1 = {1}")]
    UnsupportedCharacters(u64, u64),
    #[error("no representation with norm ℓ^h for h ≤ {0}: class-number obstruction beyond bound")]
    ClassNumberObstruction(u32),
    #[error("continued fraction period exceeds the configured bound {0}")]
    PeriodOverflow(usize),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
