use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::Binding;
use super::expr::Expr;
use super::symbol::Symbol;

/// Seeded generator of random bindings.
///
/// Components are uniform in `[-range, range]`, redrawn while
/// `|x| < exclusion`.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub seed: u64,
    pub samples: usize,
    pub range: f64,
    pub exclusion: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler { seed: 42, samples: 100, range: 2.0, exclusion: 1e-3 }
    }
}

impl Sampler {
    pub fn new(seed: u64, samples: usize) -> Self {
        Sampler { seed, samples, ..Default::default() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        loop {
            let x = rng.gen_range(-self.range..=self.range);
            if x.abs() >= self.exclusion {
                return x;
            }
        }
    }

    pub fn draw_binding(&self, rng: &mut impl Rng, symbols: &[Symbol]) -> Binding {
        symbols.iter().map(|s| (s.clone(), self.draw(rng))).collect()
    }

    /// `self.samples` bindings over `symbols`, reproducible from the seed.
    pub fn bindings(&self, symbols: &[Symbol]) -> Vec<Binding> {
        let mut rng = self.rng();
        (0..self.samples).map(|_| self.draw_binding(&mut rng, symbols)).collect()
    }
}

/// Outcome of a zero test.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// Simplifies to the constant 0.
    SymbolicZero,
    /// Every sampled value is below the tolerance.
    NumericZero,
    /// A sample where the value is at or above tolerance (or undefined).
    NonZero { witness: Binding, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }
}

/// Bounded attempts to find a point where the expression is defined.
const MAX_REDRAWS: usize = 20;

/// Decides whether `e` vanishes identically: symbolically when the
/// simplifier reduces it to 0, otherwise by sampling `sampler.samples`
/// random points.
pub fn is_zero(e: &Expr, sampler: &Sampler, tol: f64) -> ZeroVerdict {
    let e = e.simplify();
    if e.is_zero_constant() {
        return ZeroVerdict::SymbolicZero;
    }
    if let Some(n) = e.as_number() {
        return ZeroVerdict::NonZero { witness: Binding::new(), value: n.to_f64() };
    }
    let symbols: Vec<Symbol> = e.free_symbols().into_iter().collect();
    let compiled = e.compile(&symbols).expect("all free symbols are bound");
    // The all-ones point is probed first so that simple witnesses stay simple.
    let ones: Binding = symbols.iter().map(|s| (s.clone(), 1.0)).collect();
    if let Ok(v) = compiled.eval(&vec![1.0; symbols.len()]) {
        if v.is_finite() && v.abs() >= tol {
            return ZeroVerdict::NonZero { witness: ones, value: v };
        }
    }
    let mut rng = sampler.rng();
    for _ in 0..sampler.samples {
        let mut attempt = 0;
        loop {
            let binding = sampler.draw_binding(&mut rng, &symbols);
            let values: Vec<f64> = symbols.iter().map(|s| binding.get(s).unwrap()).collect();
            match compiled.eval(&values) {
                Ok(v) if v.is_finite() && v.abs() < tol => break,
                Ok(v) if v.is_finite() => return ZeroVerdict::NonZero { witness: binding, value: v },
                _ if attempt + 1 < MAX_REDRAWS => attempt += 1,
                Ok(v) => return ZeroVerdict::NonZero { witness: binding, value: v },
                Err(_) => return ZeroVerdict::NonZero { witness: binding, value: f64::NAN },
            }
        }
    }
    ZeroVerdict::NumericZero
}
