//! Exact construction and cross-verification of the linear Stokes data
//! attached to the local Laplace transform of an elementary meromorphic
//! connection El(ρ, −φ, (V, T)) with ρ of order p, φ of pole order q,
//! gcd(p, q) = 1.
//!
//! Everything algebraic is exact over the Gaussian rationals Q(i); the
//! annulus geometry (root finding, Morse-theoretic region membership) is
//! the one deliberately floating-point corner and is cross-checked against
//! the exact combinatorics.

pub mod annulus;
pub mod conventions;
pub mod cyclotomic;
pub mod indices;
pub mod laplace;
pub mod linalg;
pub mod report;
pub mod stokes;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type. Usage errors (bad input shape, unsupported
/// parameter range) map to CLI exit code 2; verification failures are not
/// errors — they are reported pass/fail and map to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("p and q must be positive and coprime (got p={p}, q={q})")]
    NotCoprime { p: u64, q: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Validates the standing arithmetic hypothesis gcd(p, q) = 1, p, q ≥ 1.
pub fn check_coprime(p: u64, q: u64) -> Result<()> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    if p == 0 || q == 0 || gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok(())
}
