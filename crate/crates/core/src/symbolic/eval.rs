use std::collections::BTreeMap;

use super::expr::{Expr, Func};
use super::symbol::Symbol;
use super::ExprError;

/// Assignment of real values to symbols.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    values: BTreeMap<Symbol, f64>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, s: &Symbol, value: f64) -> &mut Self {
        self.values.insert(s.clone(), value);
        self
    }

    pub fn with(mut self, s: &Symbol, value: f64) -> Self {
        self.values.insert(s.clone(), value);
        self
    }

    pub fn get(&self, s: &Symbol) -> Option<f64> {
        self.values.get(s).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, f64)> {
        self.values.iter().map(|(s, v)| (s, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(Symbol, f64)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Symbol, f64)>>(iter: I) -> Self {
        Binding { values: iter.into_iter().collect() }
    }
}

fn apply_func(f: Func, x: f64) -> Result<f64, ExprError> {
    match f {
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Exp => Ok(x.exp()),
        Func::Log if x <= 0.0 => Err(ExprError::Domain(format!("log of non-positive value {x}"))),
        Func::Log => Ok(x.ln()),
    }
}

fn checked_powi(base: f64, n: i64) -> Result<f64, ExprError> {
    if n < 0 && base == 0.0 {
        return Err(ExprError::Domain("division by zero".into()));
    }
    Ok(match i32::try_from(n) {
        Ok(k) => base.powi(k),
        Err(_) => base.powf(n as f64),
    })
}

impl Expr {
    /// Double-precision value under `b`.
    pub fn evaluate(&self, b: &Binding) -> Result<f64, ExprError> {
        match self {
            Expr::Num(n) => Ok(n.to_f64()),
            Expr::Sym(s) => b.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.name().to_string())),
            Expr::Add(xs) => xs.iter().try_fold(0.0, |acc, x| Ok(acc + x.evaluate(b)?)),
            Expr::Mul(xs) => xs.iter().try_fold(1.0, |acc, x| Ok(acc * x.evaluate(b)?)),
            Expr::Pow(base, n) => checked_powi(base.evaluate(b)?, *n),
            Expr::Div(num, den) => {
                let d = den.evaluate(b)?;
                if d == 0.0 {
                    return Err(ExprError::Domain("division by zero".into()));
                }
                Ok(num.evaluate(b)? / d)
            }
            Expr::Neg(a) => Ok(-a.evaluate(b)?),
            Expr::Func(f, a) => apply_func(*f, a.evaluate(b)?),
        }
    }

    /// Compiles against a fixed variable order for repeated evaluation.
    pub fn compile(&self, variables: &[Symbol]) -> Result<Compiled, ExprError> {
        let mut ops = Vec::new();
        emit(self, variables, &mut ops)?;
        Ok(Compiled { ops, arity: variables.len() })
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize),
    Mul(usize),
    Pow(i64),
    Div,
    Neg,
    Func(Func),
}

/// Stack-machine form of an expression over an ordered variable slice.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    arity: usize,
}

fn emit(e: &Expr, vars: &[Symbol], ops: &mut Vec<Op>) -> Result<(), ExprError> {
    match e {
        Expr::Num(n) => ops.push(Op::Const(n.to_f64())),
        Expr::Sym(s) => {
            let idx = vars
                .iter()
                .position(|v| v == s)
                .ok_or_else(|| ExprError::UnboundSymbol(s.name().to_string()))?;
            ops.push(Op::Var(idx));
        }
        Expr::Add(xs) => {
            for x in xs {
                emit(x, vars, ops)?;
            }
            ops.push(Op::Add(xs.len()));
        }
        Expr::Mul(xs) => {
            for x in xs {
                emit(x, vars, ops)?;
            }
            ops.push(Op::Mul(xs.len()));
        }
        Expr::Pow(b, n) => {
            emit(b, vars, ops)?;
            ops.push(Op::Pow(*n));
        }
        Expr::Div(a, b) => {
            emit(a, vars, ops)?;
            emit(b, vars, ops)?;
            ops.push(Op::Div);
        }
        Expr::Neg(a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Func(f, a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Func(*f));
        }
    }
    Ok(())
}

impl Compiled {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        debug_assert_eq!(values.len(), self.arity);
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(values[i]),
                Op::Add(k) => {
                    let at = stack.len() - k;
                    let s = stack[at..].iter().sum();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Mul(k) => {
                    let at = stack.len() - k;
                    let s = stack[at..].iter().product();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Pow(n) => {
                    let b = stack.pop().unwrap();
                    stack.push(checked_powi(b, n)?);
                }
                Op::Div => {
                    let d = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    if d == 0.0 {
                        return Err(ExprError::Domain("division by zero".into()));
                    }
                    stack.push(a / d);
                }
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    stack.push(-a);
                }
                Op::Func(f) => {
                    let a = stack.pop().unwrap();
                    stack.push(apply_func(f, a)?);
                }
            }
        }
        Ok(stack.pop().unwrap_or(0.0))
    }
}
