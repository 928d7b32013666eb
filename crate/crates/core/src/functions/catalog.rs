use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::newton::NewtonMap;
use super::quad::{integrate_adaptive, QuadError};
use super::{EntireFunction, ExprFunction, PolyExpFunction};
use crate::expr::{parse_function, Jet, LogJet, Mode, ParseError};
use crate::math::{c, is_finite, periodic_cos, periodic_exp, periodic_sin, TAU};
use crate::quotient::{sine_m_eps, QuotientMap};
use crate::C64;

/// Tolerance of the quadrature behind the exp-exp function.
pub const EXPEXP_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    #[cfg_attr(feature = "serde", serde(rename = "f_alpha"))]
    FAlpha,
    #[cfg_attr(feature = "serde", serde(rename = "n_alpha"))]
    NAlpha,
    #[cfg_attr(feature = "serde", serde(rename = "g_alpha"))]
    GAlpha,
    #[cfg_attr(feature = "serde", serde(rename = "h_alpha"))]
    HAlpha,
    #[cfg_attr(feature = "serde", serde(rename = "sine"))]
    Sine,
    #[cfg_attr(feature = "serde", serde(rename = "expexp"))]
    ExpExp,
    /// `p·e^q`; `poly` is accepted as an alias with `q = 0`.
    #[cfg_attr(feature = "serde", serde(rename = "poly_exp", alias = "poly"))]
    PolyExp,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::FAlpha,
        Family::NAlpha,
        Family::GAlpha,
        Family::HAlpha,
        Family::Sine,
        Family::ExpExp,
        Family::PolyExp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::FAlpha => "f_alpha",
            Family::NAlpha => "n_alpha",
            Family::GAlpha => "g_alpha",
            Family::HAlpha => "h_alpha",
            Family::Sine => "sine",
            Family::ExpExp => "expexp",
            Family::PolyExp => "poly_exp",
        }
    }

    /// Parameter names the family reads.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Sine => &["alpha", "epsilon"],
            Family::PolyExp => &["p", "q"],
            _ => &["alpha"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "poly" {
            return Ok(Family::PolyExp);
        }
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CatalogError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x:?}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// Ordered `name = value` list. Later entries override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(pub Vec<(String, ParamValue)>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.set(name, value);
        self
    }

    pub fn real(self, name: &str, x: f64) -> Self {
        self.with(name, ParamValue::Number(x))
    }

    pub fn text(self, name: &str, s: &str) -> Self {
        self.with(name, ParamValue::Text(s.to_string()))
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        match self.0.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.0.push((name.to_string(), value)),
        }
    }

    /// Parses `name=value`; values that read as decimals become numbers.
    pub fn parse_assignment(s: &str) -> Result<(String, ParamValue), CatalogError> {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CatalogError::BadAssignment(s.to_string()))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CatalogError::BadAssignment(s.to_string()));
        }
        let value = match v.parse::<f64>() {
            Ok(x) => ParamValue::Number(x),
            Err(_) => ParamValue::Text(v.to_string()),
        };
        Ok((k.to_string(), value))
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    fn real_required(&self, name: &'static str) -> Result<f64, CatalogError> {
        match self.get(name) {
            Some(ParamValue::Number(x)) if x.is_finite() => Ok(*x),
            Some(other) => Err(CatalogError::OutOfRange {
                name,
                value: other.to_string(),
                range: "a finite real number",
            }),
            None => Err(CatalogError::MissingParam(name)),
        }
    }

    fn text_or(&self, name: &'static str, default: &str) -> String {
        match self.get(name) {
            Some(v) => v.to_string(),
            None => default.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("expected name=value, got `{0}`")]
    BadAssignment(String),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("formula `{name}`: {error}")]
    Formula {
        name: &'static str,
        error: ParseError,
    },
    #[error("formula `{0}` is not a polynomial in z")]
    NotPolynomial(&'static str),
    #[error("quadrature did not reach {tol:e} at {at} (estimate {est_error:e})")]
    QuadratureNotConverged { at: C64, tol: f64, est_error: f64 },
}

/// What a catalog entry produces.
#[derive(Debug, Clone)]
pub enum CatalogItem {
    Function(Arc<dyn EntireFunction>),
    Newton(NewtonMap),
    Quotient(QuotientMap),
}

impl CatalogItem {
    /// The Newton map of the entry, if it has one.
    pub fn newton_map(&self) -> Option<NewtonMap> {
        match self {
            CatalogItem::Function(f) => Some(NewtonMap::of(f.clone())),
            CatalogItem::Newton(n) => Some(n.clone()),
            CatalogItem::Quotient(_) => None,
        }
    }

    /// The entire function of the entry, if it is known.
    pub fn function(&self) -> Option<Arc<dyn EntireFunction>> {
        match self {
            CatalogItem::Function(f) => Some(f.clone()),
            CatalogItem::Newton(n) => n.function().cloned(),
            CatalogItem::Quotient(_) => None,
        }
    }
}

/// Builds a catalog entry after validating its parameters.
///
/// Ranges: `alpha > 0` everywhere; for `sine` additionally `0 < epsilon < 1`
/// and `alpha ≤ m_ε`. `poly_exp` takes polynomial formulas `p` and `q`
/// (default `q = 0`).
pub fn make_catalog(family: Family, params: &Params) -> Result<CatalogItem, CatalogError> {
    match family {
        Family::PolyExp => {
            let p_src = match params.get("p") {
                Some(v) => v.to_string(),
                None => return Err(CatalogError::MissingParam("p")),
            };
            let q_src = params.text_or("q", "0");
            let p = parse_function(&p_src, Mode::Entire)
                .map_err(|error| CatalogError::Formula { name: "p", error })?;
            let q = parse_function(&q_src, Mode::Entire)
                .map_err(|error| CatalogError::Formula { name: "q", error })?;
            if q.polynomial_degree() == Some(0) && q_src == "0" {
                if p.polynomial_degree().is_none() {
                    return Err(CatalogError::NotPolynomial("p"));
                }
                return Ok(CatalogItem::Function(Arc::new(ExprFunction::new(p, p_src))));
            }
            let p_poly = p.polynomial_degree().is_some();
            let f = PolyExpFunction::new(p, q).ok_or(if p_poly {
                CatalogError::NotPolynomial("q")
            } else {
                CatalogError::NotPolynomial("p")
            })?;
            Ok(CatalogItem::Function(Arc::new(f)))
        }
        _ => {
            let alpha = params.real_required("alpha")?;
            if alpha <= 0.0 {
                return Err(CatalogError::OutOfRange {
                    name: "alpha",
                    value: format!("{alpha:?}"),
                    range: "(0, ∞)",
                });
            }
            Ok(match family {
                Family::FAlpha => CatalogItem::Function(Arc::new(FAlphaFunction::new(alpha))),
                Family::NAlpha => CatalogItem::Newton(NewtonMap::n_alpha(alpha)),
                Family::GAlpha => CatalogItem::Quotient(QuotientMap::GAlpha { alpha }),
                Family::HAlpha => CatalogItem::Quotient(QuotientMap::HAlpha { alpha }),
                Family::Sine => {
                    let eps = params.real_required("epsilon")?;
                    if !(eps > 0.0 && eps < 1.0) {
                        return Err(CatalogError::OutOfRange {
                            name: "epsilon",
                            value: format!("{eps:?}"),
                            range: "(0, 1)",
                        });
                    }
                    let m = sine_m_eps(eps);
                    if alpha > m as f64 {
                        return Err(CatalogError::OutOfRange {
                            name: "alpha",
                            value: format!("{alpha:?}"),
                            range: "(0, m_eps]",
                        });
                    }
                    CatalogItem::Newton(NewtonMap::sine(alpha, eps))
                }
                Family::ExpExp => {
                    let f = ExpExpFunction::new(alpha);
                    // one probe evaluation surfaces a quadrature that cannot converge at all
                    f.try_log_jet(c(1.0, 0.0))?;
                    CatalogItem::Newton(NewtonMap::expexp(alpha))
                }
                Family::PolyExp => unreachable!(),
            })
        }
    }
}

/// `f_α(Z) = exp(−(Z + e^{2πiZ}/(2πi))/α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FAlphaFunction {
    pub alpha: f64,
}

impl FAlphaFunction {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    /// Formula text accepted by the parser.
    pub fn formula(&self) -> String {
        format!("exp(-(1/{:?})*(z + exp(2*pi*i*z)/(2*pi*i)))", self.alpha)
    }
}

impl EntireFunction for FAlphaFunction {
    fn label(&self) -> String {
        format!("f_alpha(alpha={:?})", self.alpha)
    }

    fn jet(&self, z: C64) -> Jet {
        self.log_jet(z).to_jet()
    }

    fn log_jet(&self, z: C64) -> LogJet {
        let e = periodic_exp(z);
        LogJet {
            log_value: -(z + e / c(0.0, TAU)) / self.alpha,
            log_deriv: -(e + 1.0) / self.alpha,
        }
    }
}

/// The function whose Newton map is `Z + α/(1 + ε sin 2πZ)`:
/// `f(Z) = exp(−(Z + ε(1 − cos 2πZ)/(2π))/α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFunction {
    pub alpha: f64,
    pub epsilon: f64,
}

impl EntireFunction for SineFunction {
    fn label(&self) -> String {
        format!("sine(alpha={:?}, epsilon={:?})", self.alpha, self.epsilon)
    }

    fn jet(&self, z: C64) -> Jet {
        self.log_jet(z).to_jet()
    }

    fn log_jet(&self, z: C64) -> LogJet {
        let eps = self.epsilon;
        LogJet {
            log_value: -(z + (c(1.0, 0.0) - periodic_cos(z)) * (eps / TAU)) / self.alpha,
            log_deriv: -(periodic_sin(z) * eps + 1.0) / self.alpha,
        }
    }
}

/// `f_α(Z) = exp(−(1/α)∫₀^Z e^{−e^{2πiW}} dW)` by quadrature along `[0, Z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpExpFunction {
    pub alpha: f64,
}

impl ExpExpFunction {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    fn integrand(w: C64) -> C64 {
        (-periodic_exp(w)).exp()
    }

    /// Log-jet with the quadrature failure surfaced.
    pub fn try_log_jet(&self, z: C64) -> Result<LogJet, CatalogError> {
        let start = (z.norm().ceil() as usize).clamp(1, 64);
        let mut f = |w: C64| -> Result<C64, ()> {
            let v = Self::integrand(w);
            if is_finite(v) {
                Ok(v)
            } else {
                Err(())
            }
        };
        let q = integrate_adaptive(c(0.0, 0.0), z, start, EXPEXP_QUAD_TOL, &mut f).map_err(
            |e| match e {
                QuadError::Integrand { at, .. } => CatalogError::QuadratureNotConverged {
                    at,
                    tol: EXPEXP_QUAD_TOL,
                    est_error: f64::INFINITY,
                },
                QuadError::NotConverged { est_error, .. } => CatalogError::QuadratureNotConverged {
                    at: z,
                    tol: EXPEXP_QUAD_TOL,
                    est_error,
                },
            },
        )?;
        Ok(LogJet {
            log_value: -q.value / self.alpha,
            log_deriv: -Self::integrand(z) / self.alpha,
        })
    }
}

impl EntireFunction for ExpExpFunction {
    fn label(&self) -> String {
        format!("expexp(alpha={:?})", self.alpha)
    }

    fn jet(&self, z: C64) -> Jet {
        self.log_jet(z).to_jet()
    }

    /// Non-convergent quadrature shows up as a NaN log-jet.
    fn log_jet(&self, z: C64) -> LogJet {
        self.try_log_jet(z).unwrap_or(LogJet {
            log_value: c(f64::NAN, f64::NAN),
            log_deriv: c(f64::NAN, f64::NAN),
        })
    }
}
