use std::collections::BTreeMap;

use super::expr::{Expr, Func};
use super::symbol::Symbol;

impl Expr {
    /// Exact partial derivative with respect to `s`, all other symbols held
    /// fixed. The result is simplified.
    pub fn diff(&self, s: &Symbol) -> Expr {
        if !self.contains(s) {
            return Expr::zero();
        }
        match self {
            Expr::Num(_) => Expr::zero(),
            Expr::Sym(x) => {
                if x == s {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(terms) => Expr::sum(terms.iter().map(|t| t.diff(s))),
            Expr::Mul(factors) => {
                let simplified: Vec<Expr> = factors.iter().map(Expr::simplify).collect();
                Expr::sum((0..factors.len()).map(|i| {
                    let d = factors[i].diff(s);
                    if d.is_zero_constant() {
                        return Expr::zero();
                    }
                    Expr::product(
                        simplified
                            .iter()
                            .enumerate()
                            .map(|(j, f)| if i == j { d.clone() } else { f.clone() }),
                    )
                }))
            }
            Expr::Pow(base, n) => {
                let b = base.simplify();
                Expr::product([Expr::int(*n), b.powi(n - 1), base.diff(s)])
            }
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                let (sa, sb) = (a.simplify(), b.simplify());
                let numer = a.diff(s) * sb.clone() - sa * b.diff(s);
                numer * sb.powi(-2)
            }
            Expr::Neg(a) => -a.diff(s),
            Expr::Func(f, arg) => {
                let inner = arg.diff(s);
                let a = arg.simplify();
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => a.exp(),
                    Func::Log => a.powi(-1),
                };
                outer * inner
            }
        }
    }

    /// Simultaneous substitution of symbols by expressions, followed by
    /// simplification. Replacement expressions are not themselves rewritten.
    pub fn substitute(&self, replacements: &BTreeMap<Symbol, Expr>) -> Expr {
        if replacements.is_empty() {
            return self.simplify();
        }
        self.replace(replacements).simplify()
    }

    fn replace(&self, m: &BTreeMap<Symbol, Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => m.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.replace(m)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.replace(m)).collect()),
            Expr::Pow(b, n) => Expr::Pow(Box::new(b.replace(m)), *n),
            Expr::Div(a, b) => Expr::Div(Box::new(a.replace(m)), Box::new(b.replace(m))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.replace(m))),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.replace(m))),
        }
    }

    /// Convenience for a single replacement.
    pub fn substitute_one(&self, s: &Symbol, with: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(s.clone(), with.clone());
        self.substitute(&m)
    }
}
