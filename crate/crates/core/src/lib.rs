//! Numerical laboratory for the Hardy–Hénon parabolic equation
//! `u_t + (-Δ)^m u = |x|^{-α} F(u)` on a periodic box.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod evolve;
pub mod harness;
pub mod kernel;
pub mod lorentz;
pub mod params;
pub mod quad;
pub mod spectral;
pub mod weakform;

pub use error::{Error, Result};
pub use params::{FKind, ProblemSpec};
pub use spectral::{Field, Grid, Spectral};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/lorentz.md")]
    mod lorentz {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/evolve.md")]
    mod evolve {}
    #[doc = include_str!("../../../book/src/weakform.md")]
    mod weakform {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
