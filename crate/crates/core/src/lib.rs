//! Numerical subdifferentials, Demyanov differences and continuous
//! codifferentials of Lipschitz functions.
//!
//! Functions are accessed through [`function_models::Objective`]; sets are
//! [`convex_geometry::Polytope`]s. The guide in `book/` walks through each
//! module with runnable examples.

pub mod codifferential;
pub mod convex_geometry;
pub mod error;
pub mod first_order;
pub mod function_models;
pub mod harness;
pub mod montecarlo;
pub mod rng;
pub mod second_order;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod book_geometry {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/first_order.md")]
pub mod book_first_order {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/codifferentials.md")]
pub mod book_codifferentials {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/second_order.md")]
pub mod book_second_order {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
pub mod book_harness {}
