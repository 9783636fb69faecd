//! Decoherence of the chirality qubit of an electrically driven single
//! molecular magnet coupled to a Lorentzian bosonic bath, in the
//! second-order time-convolutionless approximation.
//!
//! Frequencies and times are measured in units of the bath width λ unless a
//! function says otherwise, with ħ = k_B = 1.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod quad;
pub mod scenarios;
pub mod solution;
pub mod verify;

pub use bath::{BathSpec, Channel, KernelSource, OccupationStrategy, OpenSystem, RateSample};
pub use engine::{evolve, EvolveConfig, EvolutionPath, RateSource, Trajectory};
pub use error::{Error, Result};
pub use model::{DressedParams, QubitState, SystemParams};
pub use solution::{bloch_analytic, entropy_of_norm, pointer_angle, InitialAngles};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/bath.md")]
    mod bath {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/solution.md")]
    mod solution {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
