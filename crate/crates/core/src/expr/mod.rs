//! Formula parsing and first-order complex jets.
//!
//! Formulas are closed over one variable; parameters are substituted as
//! literals with [`substitute`] before parsing. The grammar is documented
//! in [`parse`].

mod ast;
mod jet;
pub mod parse;

pub use ast::{BinOp, Expr, ExprAst, Func, Mode, Named, Node, Span};
pub use jet::{eval_jet, eval_log_jet, Jet, LogJet};
pub use parse::{parse_bytes, parse_function, parse_in, substitute, ParseError, ParseErrorKind};
