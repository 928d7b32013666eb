use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Byte range `[start, end)` into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Named {
    Pi,
    E,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    /// Principal logarithm. Only accepted in meromorphic mode.
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Log => "log",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    /// The free variable (`z`, or `t` for ray formulas).
    Var,
    /// Real literal.
    Real(f64),
    /// Imaginary literal such as `2.5i`.
    Imag(f64),
    Named(Named),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant integer exponent.
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// An AST node with its source span. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Var, Node::Var) => true,
            (Node::Real(a), Node::Real(b)) | (Node::Imag(a), Node::Imag(b)) => {
                a.to_bits() == b.to_bits()
            }
            (Node::Named(a), Node::Named(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Binary(o1, l1, r1), Node::Binary(o2, l2, r2)) => {
                o1 == o2 && l1 == l2 && r1 == r2
            }
            (Node::Pow(b1, n1), Node::Pow(b2, n2)) => n1 == n2 && b1 == b2,
            (Node::Call(f1, a1), Node::Call(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl Expr {
    pub(crate) fn new(node: Node, span: Span) -> Self {
        Self { node, span }
    }

    /// Whether the subtree mentions the free variable.
    pub fn depends_on_var(&self) -> bool {
        match &self.node {
            Node::Var => true,
            Node::Real(_) | Node::Imag(_) | Node::Named(_) => false,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.depends_on_var(),
            Node::Binary(_, a, b) => a.depends_on_var() || b.depends_on_var(),
        }
    }

    /// Number of nodes in the subtree.
    pub fn size(&self) -> usize {
        1 + match &self.node {
            Node::Var | Node::Real(_) | Node::Imag(_) | Node::Named(_) => 0,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.size(),
            Node::Binary(_, a, b) => a.size() + b.size(),
        }
    }

    /// Degree in the variable if the subtree is a polynomial, `None` otherwise.
    ///
    /// The degree is syntactic: cancellations such as `z^2 - z^2` are not detected.
    pub fn polynomial_degree(&self) -> Option<u32> {
        match &self.node {
            Node::Var => Some(1),
            Node::Real(_) | Node::Imag(_) | Node::Named(_) => Some(0),
            Node::Neg(a) => a.polynomial_degree(),
            Node::Binary(op, a, b) => {
                let (da, db) = (a.polynomial_degree()?, b.polynomial_degree()?);
                match op {
                    BinOp::Add | BinOp::Sub => Some(da.max(db)),
                    BinOp::Mul => Some(da + db),
                    BinOp::Div => (db == 0).then_some(da),
                }
            }
            Node::Pow(a, n) => {
                let d = a.polynomial_degree()?;
                if *n < 0 {
                    (d == 0).then_some(0)
                } else {
                    Some(d * (*n as u32))
                }
            }
            Node::Call(_, a) => (!a.depends_on_var()).then_some(0),
        }
    }

    fn precedence(&self) -> u8 {
        match &self.node {
            Node::Binary(op, _, _) => op.precedence(),
            Node::Neg(_) => 3,
            Node::Pow(_, _) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        match &self.node {
            Node::Var => f.write_str(var),
            Node::Real(x) => write!(f, "{x}"),
            Node::Imag(x) => write!(f, "{x}i"),
            Node::Named(Named::Pi) => f.write_str("pi"),
            Node::Named(Named::E) => f.write_str("e"),
            Node::Named(Named::I) => f.write_str("i"),
            Node::Neg(a) => {
                f.write_str("-")?;
                a.write_child(f, var, 3)
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, var, p)?;
                write!(f, " {} ", op.symbol())?;
                b.write_child(f, var, p + 1)
            }
            Node::Pow(a, n) => {
                a.write_child(f, var, 5)?;
                write!(f, "^{n}")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, var)?;
                f.write_str(")")
            }
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, var: &str, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.write(f, var)?;
            f.write_str(")")
        } else {
            self.write(f, var)
        }
    }
}

/// Which class of functions a formula is allowed to denote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    /// No division by variable-dependent terms, no `log`.
    Entire,
    Meromorphic,
}

/// A parsed formula, closed over a single free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub root: Expr,
    pub mode: Mode,
    pub var: String,
}

impl ExprAst {
    pub fn polynomial_degree(&self) -> Option<u32> {
        self.root.polynomial_degree()
    }

    /// Number of operator (non-leaf) nodes.
    pub fn operator_count(&self) -> usize {
        fn ops(e: &Expr) -> usize {
            match &e.node {
                Node::Var | Node::Real(_) | Node::Imag(_) | Node::Named(_) => 0,
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + ops(a),
                Node::Binary(_, a, b) => 1 + ops(a) + ops(b),
            }
        }
        ops(&self.root)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &self.var)
    }
}
