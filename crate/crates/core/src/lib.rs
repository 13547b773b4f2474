//! Numerics for the Janowski-type function `v(A, B, z) = ((1 + A z) / (1 + B z))^lambda`:
//! truncated series arithmetic, coefficient routes and inequality sweeps,
//! sampled subordination checks, and counterexample search.

pub mod cli;
pub mod error;
pub mod inequalities;
pub mod janowski;
pub mod output;
pub mod plot;
pub mod search;
pub mod series;
pub mod subordination;
pub mod sum;

pub use error::{Error, Result};
pub use janowski::{CoeffMethod, CoeffSequence, JanowskiParams};
pub use num_complex::Complex64;
pub use series::{RayOptions, TruncatedSeries};
