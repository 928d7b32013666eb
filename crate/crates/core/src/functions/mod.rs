//! Entire functions, their Newton maps, and what can be read off them:
//! fixed-point multipliers, the type of the point at infinity, and ratios
//! `f(z1)/f(z0)` recovered from the Newton map alone.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::expr::{eval_jet, eval_log_jet, ExprAst, Jet, Mode};
use crate::C64;

mod catalog;
mod fixed;
mod newton;
pub mod quad;
mod reconstruct;

pub use crate::expr::LogJet;
pub use catalog::{
    make_catalog, CatalogError, CatalogItem, ExpExpFunction, FAlphaFunction, Family, ParamValue,
    Params, SineFunction,
};
pub use fixed::{
    classify_fixed_point, classify_infinity, FixedPointError, InfinityClass, RootFixedPoint,
};
pub use newton::{newton_step, DirectFamily, NewtonMap, PoleCause, Step};
pub use reconstruct::{reconstruct_ratio, ReconstructError, ReconstructionResult, RECONSTRUCT_TOL};

/// An entire function evaluated through first-order jets.
///
/// Implementations must be pure: the same `z` always yields the same bits.
pub trait EntireFunction: Send + Sync + fmt::Debug {
    fn label(&self) -> String;

    /// `(f(z), f'(z))`.
    fn jet(&self, z: C64) -> Jet;

    /// A branch of `log f(z)` and `f'(z)/f(z)`.
    ///
    /// Closed-form families override this so that `log|f|` stays available
    /// far below the underflow threshold of `f` itself.
    fn log_jet(&self, z: C64) -> LogJet {
        LogJet::from_jet(self.jet(z))
    }

    /// `(deg p, deg q)` when the function is known to have the form `p·e^q`.
    fn poly_exp_degrees(&self) -> Option<(u32, u32)> {
        None
    }
}

/// `f` given by a parsed formula.
#[derive(Debug, Clone)]
pub struct ExprFunction {
    ast: ExprAst,
    source: String,
}

impl ExprFunction {
    pub fn new(ast: ExprAst, source: impl Into<String>) -> Self {
        Self {
            ast,
            source: source.into(),
        }
    }

    /// Parses `source` in entire mode.
    pub fn parse(source: &str) -> Result<Self, crate::expr::ParseError> {
        let ast = crate::expr::parse_function(source, Mode::Entire)?;
        Ok(Self::new(ast, source))
    }

    pub fn ast(&self) -> &ExprAst {
        &self.ast
    }
}

impl EntireFunction for ExprFunction {
    fn label(&self) -> String {
        self.source.clone()
    }

    fn jet(&self, z: C64) -> Jet {
        eval_jet(&self.ast, z)
    }

    fn log_jet(&self, z: C64) -> LogJet {
        eval_log_jet(&self.ast, z)
    }

    fn poly_exp_degrees(&self) -> Option<(u32, u32)> {
        self.ast.polynomial_degree().map(|d| (d, 0))
    }
}

/// `f = p·e^q` with polynomial `p` and `q`.
#[derive(Debug, Clone)]
pub struct PolyExpFunction {
    p: ExprAst,
    q: ExprAst,
    deg_p: u32,
    deg_q: u32,
}

impl PolyExpFunction {
    /// Both formulas must be polynomials in `z`.
    pub fn new(p: ExprAst, q: ExprAst) -> Option<Self> {
        let deg_p = p.polynomial_degree()?;
        let deg_q = q.polynomial_degree()?;
        Some(Self { p, q, deg_p, deg_q })
    }
}

impl EntireFunction for PolyExpFunction {
    fn label(&self) -> String {
        alloc::format!("({})*exp({})", self.p, self.q)
    }

    fn jet(&self, z: C64) -> Jet {
        eval_jet(&self.p, z) * eval_jet(&self.q, z).exp()
    }

    fn log_jet(&self, z: C64) -> LogJet {
        let p = LogJet::from_jet(eval_jet(&self.p, z));
        let q = eval_jet(&self.q, z);
        LogJet {
            log_value: p.log_value + q.value,
            log_deriv: p.log_deriv + q.deriv,
        }
    }

    fn poly_exp_degrees(&self) -> Option<(u32, u32)> {
        Some((self.deg_p, self.deg_q))
    }
}

/// Convenience: parse an entire formula into a shareable function.
pub fn expression(source: &str) -> Result<Arc<dyn EntireFunction>, crate::expr::ParseError> {
    Ok(Arc::new(ExprFunction::parse(source)?))
}
