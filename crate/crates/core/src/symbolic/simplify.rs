//! Canonical-form construction.
//!
//! The normal form is a flattened polynomial-like tree: sums of terms, each a
//! numeric coefficient times a sorted product of `base^k` factors. Products
//! are expanded over sums with positive exponents; sums raised to negative
//! powers are kept as opaque denominators. Like terms are merged by
//! structural key. Trig and log identities are not applied.

use std::collections::BTreeMap;
use std::ops;

use super::expr::{Expr, Func};
use super::number::Number;

/// Largest positive power of a sum that is expanded term by term.
const MAX_EXPANDED_POWER: i64 = 8;

impl Expr {
    /// Returns the canonical form. Idempotent.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(terms) => Expr::sum(terms.iter().map(Expr::simplify)),
            Expr::Mul(factors) => Expr::product(factors.iter().map(Expr::simplify)),
            Expr::Pow(base, n) => simplify_power(base, *n),
            Expr::Div(a, b) => Expr::product([a.simplify(), simplify_power(b, -1)]),
            Expr::Neg(a) => Expr::product([Expr::int(-1), a.simplify()]),
            Expr::Func(f, a) => Expr::apply(*f, a.simplify()),
        }
    }

    /// Sum of already simplified terms.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = Number::ZERO;
        let mut like: BTreeMap<Expr, Number> = BTreeMap::new();
        let mut push = |term: Expr, constant: &mut Number| match term {
            Expr::Num(n) => *constant = constant.add(n),
            other => {
                let (coeff, monomial) = split_coefficient(other);
                let slot = like.entry(monomial).or_insert(Number::ZERO);
                *slot = slot.add(coeff);
            }
        };
        for term in terms {
            match term {
                Expr::Add(inner) => inner.into_iter().for_each(|t| push(t, &mut constant)),
                other => push(other, &mut constant),
            }
        }
        let mut out: Vec<Expr> = like
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| with_coefficient(c, m))
            .collect();
        if !constant.is_zero() {
            out.insert(0, Expr::Num(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    /// Product of already simplified factors, expanded over sums.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coeff = Number::ONE;
        let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
        let mut push = |factor: Expr, coeff: &mut Number| match factor {
            Expr::Num(n) => *coeff = coeff.mul(n),
            Expr::Pow(base, k) => *powers.entry(*base).or_insert(0) += k,
            other => *powers.entry(other).or_insert(0) += 1,
        };
        for factor in factors {
            match factor {
                Expr::Mul(inner) => inner.into_iter().for_each(|f| push(f, &mut coeff)),
                other => push(other, &mut coeff),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut rest: Vec<Expr> = Vec::new();
        for (base, k) in powers {
            if matches!(base, Expr::Add(_)) && k > 0 && k <= MAX_EXPANDED_POWER {
                rest.extend(std::iter::repeat_n(base, k as usize));
                continue;
            }
            match base.powi(k) {
                Expr::Num(n) => coeff = coeff.mul(n),
                Expr::Mul(inner) => {
                    for f in inner {
                        match f {
                            Expr::Num(n) => coeff = coeff.mul(n),
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if let Some(idx) = rest.iter().position(|f| matches!(f, Expr::Add(_))) {
            let Expr::Add(terms) = rest.swap_remove(idx) else { unreachable!() };
            let others: Vec<Expr> = std::iter::once(Expr::Num(coeff)).chain(rest).collect();
            return Expr::sum(terms.into_iter().map(|t| {
                Expr::product(others.iter().cloned().chain(std::iter::once(t)))
            }));
        }
        rest.sort();
        if rest.is_empty() {
            return Expr::Num(coeff);
        }
        if coeff.is_one() && rest.len() == 1 {
            return rest.pop().unwrap();
        }
        if !coeff.is_one() {
            rest.insert(0, Expr::Num(coeff));
        }
        Expr::Mul(rest)
    }

    /// Integer power of an already simplified base.
    pub fn powi(&self, n: i64) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        match self {
            Expr::Num(c) => match c.powi(n) {
                Some(v) => Expr::Num(v),
                None => Expr::Pow(Box::new(self.clone()), n),
            },
            Expr::Pow(base, k) => match k.checked_mul(n) {
                Some(m) => base.powi(m),
                None => Expr::Pow(Box::new(self.clone()), n),
            },
            Expr::Mul(factors) => Expr::product(factors.iter().map(|f| f.powi(n))),
            Expr::Add(terms) if n > 0 && n <= MAX_EXPANDED_POWER => {
                let mut acc = self.clone();
                for _ in 1..n {
                    let lhs = match acc {
                        Expr::Add(ts) => ts,
                        other => vec![other],
                    };
                    acc = Expr::sum(lhs.iter().flat_map(|a| {
                        terms.iter().map(move |b| Expr::product([a.clone(), b.clone()]))
                    }));
                }
                acc
            }
            _ => Expr::Pow(Box::new(self.clone()), n),
        }
    }

    /// Function application with exact folding at 0 and 1.
    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Expr::Num(n) = &arg {
            match f {
                Func::Sin if n.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if n.is_zero() => return Expr::one(),
                Func::Log if n.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        Expr::Func(f, Box::new(arg))
    }

    pub fn sin(self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::apply(Func::Log, self)
    }
}

/// Negative powers are pushed through products before the base is
/// simplified, so a factored denominator is not first expanded into one
/// opaque sum.
fn simplify_power(base: &Expr, n: i64) -> Expr {
    if n >= 0 {
        return base.simplify().powi(n);
    }
    match base {
        Expr::Mul(factors) => Expr::product(factors.iter().map(|f| simplify_power(f, n))),
        Expr::Div(a, b) => Expr::product([simplify_power(a, n), simplify_power(b, -n)]),
        Expr::Neg(a) => Expr::product([Expr::int(-1).powi(n), simplify_power(a, n)]),
        Expr::Pow(b, k) => match k.checked_mul(n) {
            Some(m) => simplify_power(b, m),
            None => base.simplify().powi(n),
        },
        _ => base.simplify().powi(n),
    }
}

fn split_coefficient(term: Expr) -> (Number, Expr) {
    match term {
        Expr::Mul(mut factors) => match factors.first() {
            Some(Expr::Num(c)) => {
                let c = *c;
                factors.remove(0);
                let monomial =
                    if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) };
                (c, monomial)
            }
            _ => (Number::ONE, Expr::Mul(factors)),
        },
        other => (Number::ONE, other),
    }
}

fn with_coefficient(c: Number, monomial: Expr) -> Expr {
    if c.is_one() {
        return monomial;
    }
    match monomial {
        Expr::Mul(mut factors) => {
            factors.insert(0, Expr::Num(c));
            Expr::Mul(factors)
        }
        other => Expr::Mul(vec![Expr::Num(c), other]),
    }
}

// Operator sugar over canonical forms. Operands are assumed simplified.

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs.powi(-1)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter)
    }
}
