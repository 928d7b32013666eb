//! Command-line laboratory for Newton maps: parallel basin rendering,
//! orbit and chart reports, rotation sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod image;
