//! Symbolic expressions: parsing, canonical simplification, exact
//! differentiation, substitution and numeric evaluation.

mod diff;
mod eval;
mod expr;
mod number;
mod parse;
mod simplify;
mod symbol;
mod zero;

pub use eval::{Binding, Compiled};
pub use expr::{Expr, Func};
pub use number::{parse_decimal, Number, Rational};
pub use parse::parse;
pub use symbol::{
    momentum_name, velocity_name, DuplicateSymbol, Symbol, SymbolKind, SymbolTable, TIME_NAME,
};
pub use zero::{is_zero, Sampler, ZeroVerdict};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Central difference `(f(x+h) - f(x-h)) / 2h` in the direction of `s`.
pub fn central_difference(e: &Expr, s: &Symbol, at: &Binding, h: f64) -> Result<f64, ExprError> {
    let x = at.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.name().to_string()))?;
    let plus = e.evaluate(&at.clone().with(s, x + h))?;
    let minus = e.evaluate(&at.clone().with(s, x - h))?;
    Ok((plus - minus) / (2.0 * h))
}
