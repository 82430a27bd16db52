//! Exact local W1 distances between few-qubit states, and simulators for
//! estimating states from Pauli-measurement shadows or two-copy Bell
//! measurements.
//!
//! Start with [`metric::w1loc`] for the distance itself, [`shadows`] and
//! [`bell`] for the two estimators, and [`experiments`] for config-driven
//! campaigns. The guide under `book/` walks through each of them; its code
//! listings are compiled and run as doctests of this crate.

pub mod bell;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod metric;
pub mod operator;
pub mod shadows;
pub mod states;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/local-w1.md")]
    mod local_w1 {}
    #[doc = include_str!("../../../book/src/shadows.md")]
    mod shadows {}
    #[doc = include_str!("../../../book/src/bell.md")]
    mod bell {}
    #[doc = include_str!("../../../book/src/campaigns.md")]
    mod campaigns {}
}
