//! Laurent polynomials in `v` with `v² = q` and arbitrary-precision integer coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Dense storage: `coeffs[i]` is the coefficient of `v^(low + i)`.
/// Invariant: no leading or trailing zeros; the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    low: i32,
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly::default()
    }

    pub fn one() -> QPoly {
        QPoly::constant(1)
    }

    pub fn constant(c: i64) -> QPoly {
        QPoly::monomial_v(0, BigInt::from(c))
    }

    /// `c · v^e`.
    pub fn monomial_v(e: i32, c: BigInt) -> QPoly {
        QPoly { low: e, coeffs: vec![c] }.trimmed()
    }

    /// `c · q^d`.
    pub fn monomial_q(d: i32, c: i64) -> QPoly {
        QPoly::monomial_v(2 * d, BigInt::from(c))
    }

    /// Polynomial in `q` from coefficients of `1, q, q², ...`.
    pub fn from_q_coeffs(cs: &[i64]) -> QPoly {
        let mut coeffs = Vec::with_capacity(2 * cs.len());
        for (i, &c) in cs.iter().enumerate() {
            if i > 0 {
                coeffs.push(BigInt::zero());
            }
            coeffs.push(BigInt::from(c));
        }
        QPoly { low: 0, coeffs }.trimmed()
    }

    fn trimmed(mut self) -> QPoly {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            return QPoly::zero();
        }
        self.coeffs.drain(..lead);
        self.low += lead as i32;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Coefficient of `v^e`.
    pub fn coeff_v(&self, e: i32) -> BigInt {
        let i = e - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Coefficient of `q^d`.
    pub fn coeff_q(&self, d: i32) -> BigInt {
        self.coeff_v(2 * d)
    }

    /// `(exponent of v, coefficient)` pairs with non-zero coefficient, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i32, c))
    }

    /// Highest power of `v`, or `None` for zero.
    pub fn degree_v(&self) -> Option<i32> {
        (!self.is_zero()).then(|| self.low + self.coeffs.len() as i32 - 1)
    }

    pub fn lowest_v(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.low)
    }

    /// True when only even powers of `v` occur.
    pub fn is_integral_in_q(&self) -> bool {
        self.terms().all(|(e, _)| e % 2 == 0)
    }

    /// Multiply by `v^k`.
    pub fn shift_v(&self, k: i32) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        QPoly { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// Multiply by `q^k`.
    pub fn shift_q(&self, k: i32) -> QPoly {
        self.shift_v(2 * k)
    }

    /// `v ↦ v^{-1}`.
    pub fn bar(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        QPoly { low: -self.degree_v().expect("non-zero"), coeffs }
    }

    pub fn scale(&self, c: &BigInt) -> QPoly {
        QPoly { low: self.low, coeffs: self.coeffs.iter().map(|x| x * c).collect() }.trimmed()
    }

    /// Value at `v = 1`, i.e. at `q = 1`.
    pub fn eval_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn eval_one_i64(&self) -> i64 {
        self.eval_one().to_i64().expect("value fits in i64")
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    fn add_impl(&self, other: &QPoly, sign: bool) -> QPoly {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if sign { other.clone() } else { -other };
        }
        let low = self.low.min(other.low);
        let high = self.degree_v().unwrap().max(other.degree_v().unwrap());
        let mut coeffs = vec![BigInt::zero(); (high - low + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.low - low) as usize + i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            let slot = &mut coeffs[(other.low - low) as usize + i];
            if sign {
                *slot += c;
            } else {
                *slot -= c;
            }
        }
        QPoly { low, coeffs }.trimmed()
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, other: &QPoly) -> QPoly {
        self.add_impl(other, true)
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, other: &QPoly) -> QPoly {
        self.add_impl(other, false)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly { low: self.low + other.low, coeffs }.trimmed()
    }
}

impl Add for QPoly {
    type Output = QPoly;
    fn add(self, other: QPoly) -> QPoly {
        &self + &other
    }
}

impl Sub for QPoly {
    type Output = QPoly;
    fn sub(self, other: QPoly) -> QPoly {
        &self - &other
    }
}

impl Mul for QPoly {
    type Output = QPoly;
    fn mul(self, other: QPoly) -> QPoly {
        &self * &other
    }
}

/// Text form in `q`: `1 + q + 2*q^2`; odd powers of `v` print as `q^(1/2)`, `q^(-3/2)`.
impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let power = if e == 0 {
                None
            } else if e == 2 {
                Some("q".to_string())
            } else if e % 2 == 0 {
                Some(format!("q^{}", e / 2))
            } else {
                Some(format!("q^({e}/2)"))
            };
            match power {
                None => write!(f, "{mag}")?,
                Some(p) if mag.is_one() => write!(f, "{p}")?,
                Some(p) => write!(f, "{mag}*{p}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
