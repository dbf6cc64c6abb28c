//! Verification toolkit for four-dimensional Einstein Walker spacetimes.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod chart;
pub mod classify;
pub mod cli;
pub mod domain;
pub mod dsl;
pub mod error;
pub mod exec;
pub mod expr;
pub mod gauge;
pub mod killing;
pub mod linalg;
pub mod ode;
pub mod walker;

pub use error::{Error, Result};
