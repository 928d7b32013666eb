use core::ops::{Add, Div, Mul, Neg, Sub};

use super::ast::{BinOp, Expr, ExprAst, Func, Named, Node};
use crate::math::{c, is_finite};
use crate::C64;

/// First-order jet `(f(z), f'(z))`: a complex dual number.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jet {
    pub value: C64,
    pub deriv: C64,
}

impl Jet {
    pub const fn new(value: C64, deriv: C64) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: C64) -> Self {
        Self::new(value, c(0.0, 0.0))
    }

    pub fn var(z: C64) -> Self {
        Self::new(z, c(1.0, 0.0))
    }

    /// False when either component overflowed or became NaN.
    pub fn is_finite(&self) -> bool {
        is_finite(self.value) && is_finite(self.deriv)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, e * self.deriv)
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.value.cos() * self.deriv)
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.value.sin() * self.deriv)
    }

    /// Principal logarithm.
    pub fn ln(self) -> Self {
        Self::new(self.value.ln(), self.deriv / self.value)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(c(1.0, 0.0)),
            1 => self,
            _ => {
                let lower = self.value.powi(n - 1);
                Self::new(lower * self.value, lower * self.deriv * n as f64)
            }
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.deriv * o.value + self.value * o.deriv,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let q = self.value / o.value;
        Jet::new(q, (self.deriv - q * o.deriv) / o.value)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.deriv)
    }
}

/// A branch of `log f` together with the logarithmic derivative `f'/f`.
///
/// The branch is whatever the evaluator finds natural; callers that need a
/// particular branch shift by multiples of `2πi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJet {
    pub log_value: C64,
    pub log_deriv: C64,
}

impl LogJet {
    pub fn from_jet(j: Jet) -> Self {
        Self {
            log_value: j.value.ln(),
            log_deriv: j.deriv / j.value,
        }
    }

    pub fn is_finite(&self) -> bool {
        is_finite(self.log_value) && is_finite(self.log_deriv)
    }

    /// `log|f|`.
    pub fn log_abs(&self) -> f64 {
        self.log_value.re
    }

    /// Rebuilds `(f, f')`; may underflow where the log-jet does not.
    pub fn to_jet(&self) -> Jet {
        let v = self.log_value.exp();
        Jet::new(v, v * self.log_deriv)
    }
}

/// Evaluates `(f(z), f'(z))` for a parsed formula.
pub fn eval_jet(ast: &ExprAst, z: C64) -> Jet {
    eval_expr_jet(&ast.root, z)
}

/// Evaluates a branch of `log f(z)` and `f'/f` structurally, so that
/// `exp(u)` factors never underflow: `log exp(u) = u`.
pub fn eval_log_jet(ast: &ExprAst, z: C64) -> LogJet {
    eval_expr_log_jet(&ast.root, z)
}

pub(crate) fn eval_expr_jet(e: &Expr, z: C64) -> Jet {
    match &e.node {
        Node::Var => Jet::var(z),
        Node::Real(x) => Jet::constant(c(*x, 0.0)),
        Node::Imag(y) => Jet::constant(c(0.0, *y)),
        Node::Named(Named::Pi) => Jet::constant(c(core::f64::consts::PI, 0.0)),
        Node::Named(Named::E) => Jet::constant(c(core::f64::consts::E, 0.0)),
        Node::Named(Named::I) => Jet::constant(c(0.0, 1.0)),
        Node::Neg(a) => -eval_expr_jet(a, z),
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_expr_jet(a, z), eval_expr_jet(b, z));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
        Node::Pow(a, n) => {
            let a = eval_expr_jet(a, z);
            if *n >= 0 {
                a.powi(*n)
            } else {
                Jet::constant(c(1.0, 0.0)) / a.powi(-*n)
            }
        }
        Node::Call(f, a) => {
            let a = eval_expr_jet(a, z);
            match f {
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Log => a.ln(),
            }
        }
    }
}

fn eval_expr_log_jet(e: &Expr, z: C64) -> LogJet {
    match &e.node {
        Node::Call(Func::Exp, a) => {
            let u = eval_expr_jet(a, z);
            LogJet {
                log_value: u.value,
                log_deriv: u.deriv,
            }
        }
        Node::Binary(BinOp::Mul, a, b) => {
            let (a, b) = (eval_expr_log_jet(a, z), eval_expr_log_jet(b, z));
            LogJet {
                log_value: a.log_value + b.log_value,
                log_deriv: a.log_deriv + b.log_deriv,
            }
        }
        Node::Binary(BinOp::Div, a, b) => {
            let (a, b) = (eval_expr_log_jet(a, z), eval_expr_log_jet(b, z));
            LogJet {
                log_value: a.log_value - b.log_value,
                log_deriv: a.log_deriv - b.log_deriv,
            }
        }
        Node::Neg(a) => {
            let a = eval_expr_log_jet(a, z);
            LogJet {
                log_value: a.log_value + c(0.0, core::f64::consts::PI),
                log_deriv: a.log_deriv,
            }
        }
        Node::Pow(a, n) => {
            let a = eval_expr_log_jet(a, z);
            LogJet {
                log_value: a.log_value * *n as f64,
                log_deriv: a.log_deriv * *n as f64,
            }
        }
        _ => LogJet::from_jet(eval_expr_jet(e, z)),
    }
}
