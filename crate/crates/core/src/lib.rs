//! Numerical core for Newton's method on entire functions.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`expr`]: a formula parser for entire functions and forward-mode
//!   complex jets `(f, f')`.
//! - [`functions`]: the function catalog, Newton maps, fixed-point and
//!   infinity classification, and reconstruction of `f` ratios from `N`.
//! - [`dynamics`]: orbit iteration and fate classification.
//! - [`singularities`]: logarithmic-singularity charts, asymptotic probes,
//!   decay slopes and Baker-domain typing.
//! - [`quotient`]: projection modulo 1, `g_α`/`h_α` analysis and rotation
//!   numbers of the sine family.
//! - [`render`]: per-pixel basin classification and palettes. Scheduling
//!   and image IO live in the `newton-atlas` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod expr;
pub mod functions;
pub mod quotient;
pub mod render;
pub mod singularities;

mod math;

pub use num_complex::Complex64 as C64;

pub use dynamics::{
    classify_orbit, find_roots_in, iterate_orbit, IterationConfig, OrbitOutcome, OrbitRecord, Rect,
    Termination,
};
pub use expr::{eval_jet, parse_function, ExprAst, Jet, Mode, ParseError};
pub use functions::{
    classify_fixed_point, classify_infinity, make_catalog, newton_step, reconstruct_ratio,
    CatalogItem, EntireFunction, Family, InfinityClass, LogJet, NewtonMap, Params,
    ReconstructionResult, RootFixedPoint, Step,
};
pub use render::{BasinImage, OutcomeTag, Palette, PixelOutcome, Renderer, Viewport};
pub use singularities::{
    build_chart, chart_pushforward, classify_baker_type, decay_slope, find_eta0, probe_asymptotic,
    BakerTypeReport, LogChart, Probe, Ray,
};
