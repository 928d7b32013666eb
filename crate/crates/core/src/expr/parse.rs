//! Recursive-descent parser.
//!
//! Grammar (EBNF), loosest binding first:
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | "+" unary | power ;
//! power    = atom [ "^" unary ] ;            (* exponent: constant integer *)
//! atom     = number [ "i" ] | ident | call | "(" expr ")" ;
//! call     = ( "exp" | "sin" | "cos" | "log" ) "(" expr ")" ;
//! ident    = var | "pi" | "e" | "i" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::ast::{BinOp, Expr, ExprAst, Func, Mode, Named, Node, Span};
use super::jet::eval_expr_jet;
use crate::C64;

const MAX_DEPTH: usize = 200;
const MAX_EXPONENT: i32 = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("empty formula")]
    Empty,
    #[error("invalid UTF-8")]
    InvalidUtf8,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("malformed number")]
    BadNumber,
    #[error("exponent must be a constant integer")]
    NonIntegerExponent,
    #[error("nesting deeper than {MAX_DEPTH}")]
    TooDeep,
    #[error("z-dependent denominator")]
    VarDependentDenominator,
    #[error("log is not entire")]
    LogNotEntire,
}

/// A parse failure located at a byte offset of the source.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    /// End of the offending node for semantic errors; equals `offset` otherwise.
    pub end: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(offset: usize, kind: ParseErrorKind) -> Self {
        Self {
            offset,
            end: offset,
            kind,
        }
    }

    fn spanning(span: Span, kind: ParseErrorKind) -> Self {
        Self {
            offset: span.start,
            end: span.end,
            kind,
        }
    }
}

/// Parses a formula in the variable `z`.
pub fn parse_function(source: &str, mode: Mode) -> Result<ExprAst, ParseError> {
    parse_in(source, "z", mode)
}

/// Parses raw bytes; invalid UTF-8 is reported at the first bad byte.
pub fn parse_bytes(source: &[u8], mode: Mode) -> Result<ExprAst, ParseError> {
    match core::str::from_utf8(source) {
        Ok(s) => parse_function(s, mode),
        Err(e) => Err(ParseError::at(e.valid_up_to(), ParseErrorKind::InvalidUtf8)),
    }
}

/// Parses a formula whose free variable is named `var` (e.g. `t` for rays).
pub fn parse_in(source: &str, var: &str, mode: Mode) -> Result<ExprAst, ParseError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        depth: 0,
        var,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(ParseError::at(0, ParseErrorKind::Empty));
    }
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.unexpected());
    }
    if mode == Mode::Entire {
        check_entire(&root)?;
    }
    Ok(ExprAst {
        root,
        mode,
        var: var.to_string(),
    })
}

/// Replaces whole-identifier occurrences of each parameter name with a
/// parenthesized numeric literal, so that the result parses as a closed formula.
pub fn substitute(source: &str, params: &[(&str, C64)]) -> String {
    let bytes = source.as_bytes();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let ident = &source[start..i];
            match params.iter().find(|(name, _)| *name == ident) {
                Some((_, v)) => write_literal(&mut out, *v),
                None => out.push_str(ident),
            }
        } else if b.is_ascii_digit() || b == b'.' {
            // keep numbers (including an exponent or `i` suffix) intact
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.') {
                let prev_is_exp = matches!(bytes[i], b'e' | b'E');
                i += 1;
                if prev_is_exp && i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
                    i += 1;
                }
            }
            out.push_str(&source[start..i]);
        } else {
            let ch = source[i..].chars().next().unwrap_or('\u{fffd}');
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

fn write_literal(out: &mut String, v: C64) {
    if v.im == 0.0 {
        let _ = write!(out, "({:?})", v.re);
    } else {
        let _ = write!(out, "({:?} + {:?}i)", v.re, v.im);
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> ParseError {
        match core::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
        {
            Some(c) => ParseError::at(self.pos, ParseErrorKind::UnexpectedChar(c)),
            None if self.pos >= self.src.len() => {
                ParseError::at(self.pos, ParseErrorKind::UnexpectedEnd)
            }
            None => ParseError::at(self.pos, ParseErrorKind::InvalidUtf8),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::at(self.pos, ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = match self.peek() {
            Some(b'-') => {
                let start = self.pos;
                self.pos += 1;
                let inner = self.unary()?;
                let span = Span::new(start, inner.span.end);
                Expr::new(Node::Neg(Box::new(inner)), span)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = self.unary()?;
        let n = constant_integer(&exponent)?;
        let span = base.span.join(exponent.span);
        Ok(Expr::new(Node::Pow(Box::new(base), n), span))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(ParseError::at(self.pos, ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                let start = self.pos;
                self.pos += 1;
                let mut inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(ParseError::at(self.pos, ParseErrorKind::Expected("`)`")));
                }
                self.pos += 1;
                inner.span = Span::new(start, self.pos);
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.ident(),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < s.len() && matches!(s[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < s.len() && matches!(s[j], b'+' | b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        // the slice is ASCII by construction
        let text = core::str::from_utf8(&s[start..i])
            .map_err(|_| ParseError::at(start, ParseErrorKind::BadNumber))?;
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::at(start, ParseErrorKind::BadNumber))?;
        let imaginary = i < s.len()
            && s[i] == b'i'
            && !s
                .get(i + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if imaginary {
            i += 1;
        }
        self.pos = i;
        let node = if imaginary {
            Node::Imag(value)
        } else {
            Node::Real(value)
        };
        Ok(Expr::new(node, Span::new(start, i)))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = start;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
            i += 1;
        }
        let name = core::str::from_utf8(&s[start..i]).unwrap_or("");
        self.pos = i;
        let span = Span::new(start, i);
        if name == self.var {
            return Ok(Expr::new(Node::Var, span));
        }
        let named = match name {
            "pi" => Some(Named::Pi),
            "e" => Some(Named::E),
            "i" => Some(Named::I),
            _ => None,
        };
        if let Some(n) = named {
            return Ok(Expr::new(Node::Named(n), span));
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ParseError::spanning(
                span,
                ParseErrorKind::UnknownIdentifier(name.to_string()),
            ));
        };
        if self.peek() != Some(b'(') {
            return Err(ParseError::at(
                self.pos,
                ParseErrorKind::Expected("`(` after function name"),
            ));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(ParseError::at(self.pos, ParseErrorKind::Expected("`)`")));
        }
        self.pos += 1;
        Ok(Expr::new(
            Node::Call(func, Box::new(arg)),
            Span::new(start, self.pos),
        ))
    }
}

fn constant_integer(e: &Expr) -> Result<i32, ParseError> {
    let err = || ParseError::spanning(e.span, ParseErrorKind::NonIntegerExponent);
    if e.depends_on_var() {
        return Err(err());
    }
    let v = eval_expr_jet(e, C64::new(0.0, 0.0)).value;
    if v.im != 0.0 || v.re != v.re.round() || v.re.abs() > MAX_EXPONENT as f64 {
        return Err(err());
    }
    Ok(v.re as i32)
}

fn check_entire(e: &Expr) -> Result<(), ParseError> {
    let mut stack: Vec<&Expr> = alloc::vec![e];
    while let Some(e) = stack.pop() {
        match &e.node {
            Node::Var | Node::Real(_) | Node::Imag(_) | Node::Named(_) => {}
            Node::Neg(a) => stack.push(a),
            Node::Binary(op, a, b) => {
                if *op == BinOp::Div && b.depends_on_var() {
                    return Err(ParseError::spanning(
                        b.span,
                        ParseErrorKind::VarDependentDenominator,
                    ));
                }
                stack.push(a);
                stack.push(b);
            }
            Node::Pow(a, n) => {
                if *n < 0 && a.depends_on_var() {
                    return Err(ParseError::spanning(
                        e.span,
                        ParseErrorKind::VarDependentDenominator,
                    ));
                }
                stack.push(a);
            }
            Node::Call(Func::Log, _) => {
                return Err(ParseError::spanning(e.span, ParseErrorKind::LogNotEntire));
            }
            Node::Call(_, a) => stack.push(a),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn entire(s: &str) -> ExprAst {
        parse_function(s, Mode::Entire).unwrap()
    }

    #[test]
    fn polynomial_structure() {
        let ast = entire("z^2 - 1");
        // Sub(Pow(z, 2), 1): the integer exponent is folded into the Pow node
        assert_eq!(ast.operator_count(), 2);
        assert_eq!(ast.root.size(), 4);
        assert!(matches!(ast.root.node, Node::Binary(BinOp::Sub, _, _)));
        let Node::Binary(_, lhs, _) = &ast.root.node else {
            unreachable!()
        };
        assert!(matches!(lhs.node, Node::Pow(_, 2)));
    }

    #[test]
    fn exp_of_negation() {
        let ast = entire("exp(-z)");
        let Node::Call(Func::Exp, arg) = &ast.root.node else {
            panic!("{:?}", ast.root)
        };
        assert!(matches!(&arg.node, Node::Neg(inner) if matches!(inner.node, Node::Var)));
    }

    #[test]
    fn reciprocal_rejected_in_entire_mode() {
        let err = parse_function("1/z", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VarDependentDenominator);
        assert_eq!(format!("{}", err.kind), "z-dependent denominator");
        assert_eq!((err.offset, err.end), (2, 3));
        assert!(parse_function("1/z", Mode::Meromorphic).is_ok());
    }

    #[test]
    fn constant_division_allowed() {
        entire("exp(2*pi*i*z)/(2*pi*i)");
        entire("z/2");
    }

    #[test]
    fn log_rejected_in_entire_mode() {
        let err = parse_function("z + log(z)", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::LogNotEntire);
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn negative_power_of_z_rejected() {
        let err = parse_function("z^-2", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VarDependentDenominator);
        assert!(parse_function("2^-2", Mode::Entire).is_ok());
    }

    #[test]
    fn precedence_power_over_negation() {
        let ast = entire("-z^2");
        assert!(matches!(&ast.root.node, Node::Neg(a) if matches!(a.node, Node::Pow(_, 2))));
        let ast = entire("2*z^3 + 1");
        assert!(matches!(ast.root.node, Node::Binary(BinOp::Add, _, _)));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let err = parse_function("z + * 2", Mode::Entire).unwrap_err();
        assert_eq!(err.offset, 4);
        let err = parse_function("exp(z", Mode::Entire).unwrap_err();
        assert_eq!(err.offset, 5);
        let err = parse_function("foo(z)", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        let err = parse_function("z^z", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonIntegerExponent);
        let err = parse_function("z^0.5", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonIntegerExponent);
        assert_eq!(
            parse_function("   ", Mode::Entire).unwrap_err().kind,
            ParseErrorKind::Empty
        );
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = parse_bytes(b"z + \xff", Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::InvalidUtf8);
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let s = "(".repeat(10_000) + "z" + &")".repeat(10_000);
        let err = parse_function(&s, Mode::Entire).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TooDeep);
    }

    #[test]
    fn imaginary_literals() {
        let ast = parse_in("0.25-1i*t", "t", Mode::Entire).unwrap();
        let Node::Binary(BinOp::Sub, _, rhs) = &ast.root.node else {
            panic!()
        };
        assert!(
            matches!(&rhs.node, Node::Binary(BinOp::Mul, l, _) if matches!(l.node, Node::Imag(v) if v == 1.0))
        );
    }

    #[test]
    fn substitution_replaces_whole_identifiers() {
        let s = substitute(
            "exp(-(1/a)*(z + exp(2*pi*i*z)/(2*pi*i)))",
            &[("a", C64::new(0.5, 0.0))],
        );
        assert_eq!(s, "exp(-(1/(0.5))*(z + exp(2*pi*i*z)/(2*pi*i)))");
        // numbers with exponents are left alone
        assert_eq!(
            substitute("1e-3*a", &[("a", C64::new(2.0, 0.0))]),
            "1e-3*(2.0)"
        );
        // `alpha` is not a match for `a`
        assert_eq!(substitute("alpha", &[("a", C64::new(2.0, 0.0))]), "alpha");
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "z^2 - 1",
            "-(z + 1)*exp(-z^2)",
            "(-z)^3",
            "(z^2)^3",
            "z - (z - 1)",
            "z/2/3",
            "cos(z)*sin(2.5i*z) + e*pi",
            "--z",
        ] {
            let ast = entire(src);
            let printed = format!("{ast}");
            let again = entire(&printed);
            assert_eq!(ast, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn polynomial_degrees() {
        assert_eq!(entire("z^3 - 1").polynomial_degree(), Some(3));
        assert_eq!(entire("(z+1)*(z-1)*z").polynomial_degree(), Some(3));
        assert_eq!(entire("exp(z)").polynomial_degree(), None);
        assert_eq!(entire("exp(2)*z/4").polynomial_degree(), Some(1));
    }
}
