use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use super::number::Number;
use super::symbol::{Symbol, SymbolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Immutable expression tree.
///
/// `Neg` and `Div` are produced by the parser; simplification rewrites them
/// into `Mul` with a `-1` coefficient and `Pow` with a negative exponent, so
/// simplified trees only contain the remaining variants.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(Number),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(Number::ZERO)
    }

    pub fn one() -> Expr {
        Expr::Num(Number::ONE)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Number::int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Num(Number::ratio(num, den))
    }

    pub fn sym(s: &Symbol) -> Expr {
        Expr::Sym(s.clone())
    }

    pub fn as_number(&self) -> Option<Number> {
        match self {
            Expr::Num(n) => Some(*n),
            _ => None,
        }
    }

    /// True for the exact constant zero only; use `is_zero` in the
    /// `zero` module for semantic checks.
    pub fn is_zero_constant(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_zero())
    }

    pub fn is_one_constant(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_one())
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => b.collect_symbols(out),
            Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(x) => x == s,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.contains(s)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => b.contains(s),
            Expr::Div(a, b) => a.contains(s) || b.contains(s),
        }
    }

    pub fn contains_kind(&self, kind: SymbolKind) -> bool {
        self.free_symbols().iter().any(|s| s.kind() == kind)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Sym(_) => 1,
            Expr::Add(xs) | Expr::Mul(xs) => 1 + xs.iter().map(Expr::node_count).sum::<usize>(),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => 1 + b.node_count(),
            Expr::Div(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Num(_) => 0,
            Expr::Sym(_) => 1,
            Expr::Pow(..) => 2,
            Expr::Mul(_) => 3,
            Expr::Add(_) => 4,
            Expr::Func(..) => 5,
            Expr::Neg(_) => 6,
            Expr::Div(..) => 7,
        }
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expr::Num(a), Expr::Num(b)) => a.total_cmp(b),
            (Expr::Sym(a), Expr::Sym(b)) => a.cmp(b),
            (Expr::Add(a), Expr::Add(b)) | (Expr::Mul(a), Expr::Mul(b)) => a.cmp(b),
            (Expr::Pow(a, m), Expr::Pow(b, n)) => a.cmp(b).then(m.cmp(n)),
            (Expr::Neg(a), Expr::Neg(b)) => a.cmp(b),
            (Expr::Div(a1, a2), Expr::Div(b1, b2)) => a1.cmp(b1).then_with(|| a2.cmp(b2)),
            (Expr::Func(f, a), Expr::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Self {
        Expr::Sym(s.clone())
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Number> for Expr {
    fn from(n: Number) -> Self {
        Expr::Num(n)
    }
}

// Rendering. Output is accepted by `parse` under the same symbol table.

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(n) if n.is_negative() => PREC_NEG,
            Expr::Num(Number::Rational(r)) if !r.is_integer() => PREC_MUL,
            Expr::Num(Number::Real(x)) if x.abs() < 1e-4 || x.abs() >= 1e16 => PREC_MUL,
            Expr::Num(_) | Expr::Sym(_) | Expr::Func(..) => PREC_ATOM,
            Expr::Add(_) => PREC_ADD,
            Expr::Mul(fs) => {
                if leading_negative(fs) {
                    PREC_NEG
                } else {
                    PREC_MUL
                }
            }
            Expr::Pow(_, n) if *n < 0 => PREC_MUL,
            Expr::Pow(..) => PREC_POW,
            Expr::Div(..) => PREC_MUL,
            Expr::Neg(_) => PREC_NEG,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_bare(f)?;
            write!(f, ")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Func(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_bare(f)?;
                write!(f, ")")
            }
            Expr::Add(terms) => {
                for (i, term) in terms.iter().enumerate() {
                    if i == 0 {
                        term.fmt_at(f, PREC_ADD)?;
                    } else if let Some(pos) = negated_term(term) {
                        write!(f, " - ")?;
                        pos.fmt_at(f, PREC_MUL)?;
                    } else {
                        write!(f, " + ")?;
                        term.fmt_at(f, PREC_MUL)?;
                    }
                }
                Ok(())
            }
            Expr::Mul(factors) => fmt_product(f, factors),
            Expr::Pow(base, n) if *n < 0 => {
                write!(f, "1/")?;
                Expr::Pow(base.clone(), -n).fmt_at(f, PREC_ATOM)
            }
            Expr::Pow(base, n) => {
                base.fmt_at(f, PREC_ATOM)?;
                write!(f, "^{n}")
            }
            Expr::Div(a, b) => {
                a.fmt_at(f, PREC_MUL)?;
                write!(f, "/")?;
                b.fmt_at(f, PREC_POW)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, PREC_POW)
            }
        }
    }
}

fn leading_negative(factors: &[Expr]) -> bool {
    matches!(factors.first(), Some(Expr::Num(n)) if n.is_negative())
}

/// For a term printed after a binary minus: the term with its sign flipped.
fn negated_term(term: &Expr) -> Option<Expr> {
    match term {
        Expr::Num(n) if n.is_negative() => Some(Expr::Num(n.neg())),
        Expr::Mul(fs) if leading_negative(fs) => {
            let Expr::Num(c) = &fs[0] else { unreachable!() };
            let c = c.neg();
            let mut rest: Vec<Expr> = fs[1..].to_vec();
            if !c.is_one() {
                rest.insert(0, Expr::Num(c));
            }
            Some(if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) })
        }
        _ => None,
    }
}

fn fmt_product(f: &mut fmt::Formatter<'_>, factors: &[Expr]) -> fmt::Result {
    let mut coeff = Number::ONE;
    let mut numer: Vec<Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for factor in factors {
        match factor {
            Expr::Num(n) => coeff = coeff.mul(*n),
            Expr::Pow(b, k) if *k < 0 => denom.push(if *k == -1 {
                (**b).clone()
            } else {
                Expr::Pow(b.clone(), -k)
            }),
            other => numer.push(other.clone()),
        }
    }
    if coeff.is_negative() {
        write!(f, "-")?;
        coeff = coeff.neg();
    }
    let (num_coeff, den_coeff) = match coeff {
        Number::Rational(r) => (Number::int(*r.numer()), Number::int(*r.denom())),
        real => (real, Number::ONE),
    };
    let mut first = true;
    if !num_coeff.is_one() || numer.is_empty() {
        Expr::Num(num_coeff).fmt_at(f, PREC_POW)?;
        first = false;
    }
    for factor in &numer {
        if !first {
            write!(f, "*")?;
        }
        factor.fmt_at(f, PREC_MUL + 1)?;
        first = false;
    }
    if !den_coeff.is_one() {
        denom.insert(0, Expr::Num(den_coeff));
    }
    match denom.len() {
        0 => Ok(()),
        1 => {
            write!(f, "/")?;
            denom[0].fmt_at(f, PREC_POW)
        }
        _ => {
            write!(f, "/(")?;
            for (i, d) in denom.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                d.fmt_at(f, PREC_MUL + 1)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}
