use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use super::catalog::{ExpExpFunction, FAlphaFunction, SineFunction};
use super::EntireFunction;
use crate::math::{c, is_finite, periodic_exp, periodic_sin};
use crate::C64;

/// Why a Newton step has no finite image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PoleCause {
    /// `f'(z) = 0` with `f(z) ≠ 0`.
    DerivativeVanished,
    /// `f` and `f'` both vanish to working precision.
    Degenerate,
    /// Evaluation overflowed or produced NaN.
    NonFinite,
}

/// Image of one Newton step on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Point(C64),
    Pole(PoleCause),
}

impl Step {
    pub fn point(self) -> Option<C64> {
        match self {
            Step::Point(z) => Some(z),
            Step::Pole(_) => None,
        }
    }
}

/// Maps given directly rather than through `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectFamily {
    /// `Z + α/(1 + e^{2πiZ})`.
    NAlpha { alpha: f64 },
    /// `Z + α/(1 + ε sin 2πZ)`.
    Sine { alpha: f64, epsilon: f64 },
    /// `Z + α e^{e^{2πiZ}}`.
    ExpExp { alpha: f64 },
}

#[derive(Debug, Clone)]
enum Kind {
    Of,
    Direct(DirectFamily),
}

/// `z ↦ z − f(z)/f'(z)` as a map to the Riemann sphere.
#[derive(Debug, Clone)]
pub struct NewtonMap {
    kind: Kind,
    f: Option<Arc<dyn EntireFunction>>,
}

impl NewtonMap {
    pub fn of(f: Arc<dyn EntireFunction>) -> Self {
        Self {
            kind: Kind::Of,
            f: Some(f),
        }
    }

    pub fn n_alpha(alpha: f64) -> Self {
        Self {
            kind: Kind::Direct(DirectFamily::NAlpha { alpha }),
            f: Some(Arc::new(FAlphaFunction::new(alpha))),
        }
    }

    pub fn sine(alpha: f64, epsilon: f64) -> Self {
        Self {
            kind: Kind::Direct(DirectFamily::Sine { alpha, epsilon }),
            f: Some(Arc::new(SineFunction { alpha, epsilon })),
        }
    }

    pub fn expexp(alpha: f64) -> Self {
        Self {
            kind: Kind::Direct(DirectFamily::ExpExp { alpha }),
            f: Some(Arc::new(ExpExpFunction::new(alpha))),
        }
    }

    /// The function whose Newton map this is, when known.
    pub fn function(&self) -> Option<&Arc<dyn EntireFunction>> {
        self.f.as_ref()
    }

    pub fn direct(&self) -> Option<DirectFamily> {
        match self.kind {
            Kind::Direct(d) => Some(d),
            Kind::Of => None,
        }
    }

    pub fn label(&self) -> String {
        match (&self.kind, &self.f) {
            (Kind::Direct(DirectFamily::NAlpha { alpha }), _) => {
                format!("n_alpha(alpha={alpha:?})")
            }
            (Kind::Direct(DirectFamily::Sine { alpha, epsilon }), _) => {
                format!("sine(alpha={alpha:?}, epsilon={epsilon:?})")
            }
            (Kind::Direct(DirectFamily::ExpExp { alpha }), _) => format!("expexp(alpha={alpha:?})"),
            (Kind::Of, Some(f)) => format!("newton({})", f.label()),
            (Kind::Of, None) => String::from("newton(?)"),
        }
    }

    /// The Newton increment `N(z) − z = −f/f'`.
    pub fn increment(&self, z: C64) -> Result<C64, PoleCause> {
        let d = match self.kind {
            Kind::Direct(DirectFamily::NAlpha { alpha }) => {
                let den = periodic_exp(z) + 1.0;
                if den == c(0.0, 0.0) {
                    return Err(PoleCause::DerivativeVanished);
                }
                c(alpha, 0.0) / den
            }
            Kind::Direct(DirectFamily::Sine { alpha, epsilon }) => {
                let den = periodic_sin(z) * epsilon + 1.0;
                if den == c(0.0, 0.0) {
                    return Err(PoleCause::DerivativeVanished);
                }
                c(alpha, 0.0) / den
            }
            Kind::Direct(DirectFamily::ExpExp { alpha }) => periodic_exp(z).exp() * alpha,
            Kind::Of => {
                let f = self.f.as_ref().expect("function-backed map");
                of_function(f.as_ref(), z)?
            }
        };
        if is_finite(d) {
            Ok(d)
        } else {
            Err(PoleCause::NonFinite)
        }
    }

    pub fn step(&self, z: C64) -> Step {
        if !is_finite(z) {
            return Step::Pole(PoleCause::NonFinite);
        }
        match self.increment(z) {
            Ok(d) => {
                let w = z + d;
                if is_finite(w) {
                    Step::Point(w)
                } else {
                    Step::Pole(PoleCause::NonFinite)
                }
            }
            Err(cause) => Step::Pole(cause),
        }
    }
}

fn of_function(f: &dyn EntireFunction, z: C64) -> Result<C64, PoleCause> {
    let j = f.jet(z);
    let zero = c(0.0, 0.0);
    if j.is_finite() && j.value != zero && j.deriv != zero {
        let d = -j.value / j.deriv;
        // subnormal f and f' square to zero inside the division
        if is_finite(d) {
            return Ok(d);
        }
    }
    // f or f' under- or overflowed: f'/f may still be representable
    let l = f.log_jet(z);
    if l.is_finite() {
        if l.log_deriv == zero {
            return Err(PoleCause::DerivativeVanished);
        }
        return Ok(-c(1.0, 0.0) / l.log_deriv);
    }
    if j.is_finite() && j.value == zero {
        return if j.deriv == zero {
            Err(PoleCause::Degenerate)
        } else {
            Ok(zero)
        };
    }
    Err(PoleCause::NonFinite)
}

/// One application of `N`.
pub fn newton_step(n: &NewtonMap, z: C64) -> Step {
    n.step(z)
}
