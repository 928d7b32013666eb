//! Logarithmic singularities over 0: the chart `w = −log f` and its inverse
//! `ψ`, the pushed-forward Newton map `G(w)`, asymptotic probes, decay
//! slopes along orbits and the type of the virtual basin.

use alloc::string::String;

use crate::expr::{eval_jet, parse_in, ExprAst, Mode, ParseError};
use crate::C64;

mod baker;
mod chart;
mod probe;

pub use baker::{
    classify_baker_type, BakerError, BakerEvidence, BakerLabel, BakerTypeReport, Confidence,
};
pub use chart::{
    build_chart, chart_pushforward, find_eta0, ChartDefect, ChartError, Eta0Report, Eta0Search,
    LogChart,
};
pub use probe::{
    decay_slope, probe_asymptotic, AsymptoticProbe, DecayError, PathKind, Probe, ProbeSample,
    Verdict,
};

/// A path `t ↦ z(t)`, `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ray {
    /// `origin + t·direction`.
    Line { origin: C64, direction: C64 },
    /// A formula in `t`, e.g. `0.25-1i*t`.
    Formula { ast: ExprAst, source: String },
}

impl Ray {
    pub fn line(origin: C64, direction: C64) -> Self {
        Ray::Line { origin, direction }
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let ast = parse_in(source, "t", Mode::Entire)?;
        Ok(Ray::Formula {
            ast,
            source: source.into(),
        })
    }

    pub fn at(&self, t: f64) -> C64 {
        match self {
            Ray::Line { origin, direction } => origin + direction * t,
            Ray::Formula { ast, .. } => eval_jet(ast, C64::new(t, 0.0)).value,
        }
    }
}
