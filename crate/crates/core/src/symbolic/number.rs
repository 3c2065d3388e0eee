use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, One, Signed, Zero};

pub type Rational = Ratio<i64>;

/// Numeric constant: exact rational while arithmetic stays in `i64` range,
/// IEEE double otherwise.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Rational(Rational),
    Real(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rational(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rational(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Number {
        Number::Rational(Rational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Number {
        Number::Rational(Rational::new(num, den))
    }

    /// Exact rational for finite doubles whose shortest decimal form fits,
    /// a `Real` otherwise.
    pub fn from_f64(x: f64) -> Number {
        if !x.is_finite() {
            return Number::Real(x);
        }
        parse_decimal(&format!("{x:e}")).unwrap_or(Number::Real(x))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Real(x) => x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Real(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Real(x) => *x == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Real(x) => *x < 0.0,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a
                .checked_add(&b)
                .map(Number::Rational)
                .unwrap_or_else(|| Number::Real(self.to_f64() + other.to_f64())),
            _ => Number::Real(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a
                .checked_mul(&b)
                .map(Number::Rational)
                .unwrap_or_else(|| Number::Real(self.to_f64() * other.to_f64())),
            _ => Number::Real(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => r
                .numer()
                .checked_neg()
                .map(|n| Number::Rational(Rational::new_raw(n, *r.denom())))
                .unwrap_or(Number::Real(-self.to_f64())),
            Number::Real(x) => Number::Real(-x),
        }
    }

    /// `None` when dividing by an exact zero.
    pub fn recip(self) -> Option<Number> {
        match self {
            Number::Rational(r) if r.is_zero() => None,
            Number::Rational(r) => Some(
                Rational::one()
                    .checked_div(&r)
                    .map(Number::Rational)
                    .unwrap_or(Number::Real(1.0 / self.to_f64())),
            ),
            Number::Real(x) => Some(Number::Real(1.0 / x)),
        }
    }

    /// Integer power; `None` for a negative power of exact zero.
    pub fn powi(self, n: i64) -> Option<Number> {
        if n < 0 {
            return self.recip()?.powi(n.checked_neg()?);
        }
        match self {
            Number::Rational(r) => {
                let mut acc = Some(Rational::one());
                for _ in 0..n {
                    acc = acc.and_then(|a| a.checked_mul(&r));
                }
                Some(match acc {
                    Some(v) => Number::Rational(v),
                    None => Number::Real(self.to_f64().powi(n as i32)),
                })
            }
            Number::Real(x) => Some(Number::Real(x.powi(n.min(i32::MAX as i64) as i32))),
        }
    }

    pub fn abs(self) -> Number {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Number) -> Ordering {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            (Number::Rational(_), Number::Real(_)) => Ordering::Less,
            (Number::Real(_), Number::Rational(_)) => Ordering::Greater,
            (Number::Real(a), Number::Real(b)) => a.total_cmp(b),
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Real(x) => write!(f, "{x:?}"),
        }
    }
}

/// Parses an unsigned decimal literal (`12`, `0.5`, `1e-3`, `2.5E+2`) into an
/// exact rational when it fits in `i64`, a `Real` when it does not.
pub fn parse_decimal(text: &str) -> Option<Number> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(idx) => (&text[..idx], text[idx + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(idx) => (&mantissa[..idx], &mantissa[idx + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let real = || text.parse::<f64>().ok().map(Number::Real);
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let scale = exponent - frac_part.len() as i64;
    let exact = (|| {
        let mut value: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        if negative {
            value = -value;
        }
        if value == 0 {
            return Some(Number::ZERO);
        }
        let pow10 = 10i64.checked_pow(scale.unsigned_abs().try_into().ok()?)?;
        if scale >= 0 {
            Some(Number::int(value.checked_mul(pow10)?))
        } else {
            Some(Number::Rational(Rational::new(value, pow10)))
        }
    })();
    exact.or_else(real)
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::int(n)
    }
}
