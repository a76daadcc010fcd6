//! Extended-source internal DLA and the divisible sandpile on `(1/m) Z^2`,
//! their fluctuation fields, and the limiting covariance formulas.

pub mod error;
pub mod growth;
pub mod harmonic;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/growth.md")]
    mod growth {}
    #[doc = include_str!("../../../book/src/harmonic.md")]
    mod harmonic {}
    #[doc = include_str!("../../../book/src/fluctuations.md")]
    mod fluctuations {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
