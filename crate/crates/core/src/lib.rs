//! Abelian and non-Abelian geometric phases of cyclic evolutions, computed
//! both from eigenspace holonomy and from direct propagation.

// `!(x <= tol)` is used on purpose so that NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod action;
pub mod angle;
pub mod error;
pub mod evolution;
pub mod holonomy;
pub mod invariants;
pub mod linalg;
pub mod models;
pub mod ring_state;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/holonomy.md")]
    mod holonomy {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/action.md")]
    mod action {}
    #[doc = include_str!("../../../book/src/ring_state.md")]
    mod ring_state {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
