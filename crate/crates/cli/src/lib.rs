//! Command line and HTTP front ends over the `accessplan` core.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod service;

pub use commands::{run, Cli};
