use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    /// The continued power is undefined because the base vanishes on the ray.
    #[error("branch failure: |f(z)| = {modulus:e} below threshold at z = {at}")]
    BranchFailure { at: Complex64, modulus: f64 },

    #[error("pole: |1 + A z| = {modulus:e} at z = {at}")]
    Pole { at: Complex64, modulus: f64 },

    #[error("degenerate disk: denominator {denominator:e}")]
    DegenerateDisk { denominator: f64 },

    #[error("too many branch failures: {failed} of {total} samples")]
    TooManyFailures { failed: usize, total: usize },

    #[error("invalid Schwarz seed: |u(z)| = {value} exceeds |z| = {bound}")]
    InvalidSeed { value: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
