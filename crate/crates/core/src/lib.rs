// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod damping;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod sim;
pub mod validation;
pub mod weight;

pub use damping::{DampingFamily, DampingLaw, OriginBehavior};
pub use envelope::EnvelopeProblem;
pub use error::{Error, Result};
pub use weight::{Monotonicity, TimeWeight, WeightFamily};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/damping.md")]
    mod damping {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/envelope.md")]
    mod envelope {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
