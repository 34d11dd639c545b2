//! Exact scalars of a real quadratic field ℚ(√d).
//!
//! A [`Coefficient`] stores `a + b·√d` with `a`, `b` arbitrary-precision
//! rationals and `d` a square-free non-negative integer.  Every bundled
//! scheme lives either in ℚ (integers and dyadic/decimal fractions) or in
//! ℚ(√3), so a single quadratic extension is enough to keep all the
//! coefficient manipulations (validation, sparsification, straight-line
//! program synthesis) exact.
//!
//! Canonical form: rationals are reduced with a positive denominator, and
//! whenever the irrational part vanishes `d` is reset to `0`.  Structural
//! equality is therefore value equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Number of fractional bits used when projecting `√d` to a double.
const SQRT_BITS: u32 = 256;

/// An exact element `a + b·√d` of ℚ(√d).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coefficient {
    a: BigRational,
    b: BigRational,
    d: u32,
}

/// Splits `d` into `s²·f` with `f` square-free; returns `(s, f)`.
fn square_free_part(d: u32) -> (u32, u32) {
    let mut s = 1u32;
    let mut f = d;
    let mut p = 2u32;
    while p.saturating_mul(p) <= f {
        while f.is_multiple_of(p * p) {
            f /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, f)
}

impl Coefficient {
    /// Builds `a + b·√d`, canonicalizing `d` to its square-free part.
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Self {
        if d == 0 || b.is_zero() {
            return Coefficient { a, b: BigRational::zero(), d: 0 };
        }
        let (s, f) = square_free_part(d);
        let b = b * BigRational::from_integer(BigInt::from(s));
        if f == 1 {
            return Coefficient { a: a + b, b: BigRational::zero(), d: 0 };
        }
        Coefficient { a, b, d: f }
    }

    /// The additive identity.
    pub fn zero() -> Self {
        Coefficient { a: BigRational::zero(), b: BigRational::zero(), d: 0 }
    }

    /// The multiplicative identity.
    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// An integer coefficient.
    pub fn from_int(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// The rational `p/q`.  Panics if `q == 0`.
    pub fn from_frac(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// A purely rational coefficient.
    pub fn rational(a: BigRational) -> Self {
        Coefficient { a, b: BigRational::zero(), d: 0 }
    }

    /// The surd `√d`.
    pub fn sqrt(d: u32) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    /// Rational part `a`.
    pub fn a(&self) -> &BigRational {
        &self.a
    }

    /// Irrational part `b` (coefficient of `√d`).
    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Radicand; `0` for rational values.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// True for the exact value zero.
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the value lies in ℚ.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// True for `1`.
    pub fn is_one(&self) -> bool {
        self.b.is_zero() && self.a.is_one()
    }

    /// True for `±1` (multiplication by which is free in an SLP).
    pub fn is_unit(&self) -> bool {
        self.b.is_zero() && self.a.abs().is_one()
    }

    /// True when `|self| = 2^t` for some integer `t ≠ 0`: a scaling that is
    /// exact in binary floating point.
    pub fn is_power_of_two_scale(&self) -> bool {
        if !self.b.is_zero() || self.a.is_zero() {
            return false;
        }
        let n = self.a.numer().abs();
        let q = self.a.denom().clone();
        let pow2 = |x: &BigInt| {
            let u = x.magnitude();
            u.count_ones() == 1
        };
        let unit = |x: &BigInt| x.is_one();
        (pow2(&n) && unit(&q) && !unit(&n)) || (unit(&n) && pow2(&q) && !unit(&q))
    }

    /// Exact sign: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sgn = |x: &BigRational| -> i32 {
            if x.is_zero() {
                0
            } else if x.is_positive() {
                1
            } else {
                -1
            }
        };
        let (sa, sb) = (sgn(&self.a), sgn(&self.b));
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    /// Absolute value.
    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.b.is_zero() {
            return Some(Self::rational(self.a.recip()));
        }
        // (a + b√d)⁻¹ = (a − b√d) / (a² − d b²)
        let dd = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - &self.b * &self.b * dd;
        Some(Coefficient::new(&self.a / &norm, -(&self.b / &norm), self.d))
    }

    /// Round-to-nearest double projection of `a + b·√d`.
    ///
    /// `√d` is first enclosed to 256 fractional bits with an integer square
    /// root, so the only rounding that matters is the final rational→double
    /// conversion.
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        let scaled = BigUint::from(self.d) << (2 * SQRT_BITS);
        let s = scaled.sqrt();
        let root = BigRational::new(BigInt::from(s), BigInt::one() << SQRT_BITS);
        (&self.a + &self.b * root).to_f64().unwrap_or(f64::NAN)
    }

    fn field_of(&self, other: &Self) -> u32 {
        match (self.d, other.d) {
            (0, e) | (e, 0) => e,
            (d, e) if d == e => d,
            (d, e) => panic!("coefficients live in different fields: sqrt{d} vs sqrt{e}"),
        }
    }

    fn add_ref(&self, o: &Self) -> Self {
        let d = self.field_of(o);
        Coefficient::new(&self.a + &o.a, &self.b + &o.b, d)
    }

    fn sub_ref(&self, o: &Self) -> Self {
        let d = self.field_of(o);
        Coefficient::new(&self.a - &o.a, &self.b - &o.b, d)
    }

    fn mul_ref(&self, o: &Self) -> Self {
        let d = self.field_of(o);
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Coefficient::new(a, b, d)
    }

    fn div_ref(&self, o: &Self) -> Self {
        let inv = o.recip().expect("division by zero coefficient");
        self.mul_ref(&inv)
    }

    fn fmt_rational(x: &BigRational) -> String {
        if x.denom().is_one() {
            x.numer().to_string()
        } else {
            format!("{}/{}", x.numer(), x.denom())
        }
    }
}

impl Default for Coefficient {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for Coefficient {
    /// Canonical text: `p/q`, `sqrt3*p/q` or `p/q+sqrt3*r/s` (signs folded in).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", Self::fmt_rational(&self.a));
        }
        let babs = self.b.abs();
        let surd = if babs.is_one() {
            format!("sqrt{}", self.d)
        } else {
            format!("sqrt{}*{}", self.d, Self::fmt_rational(&babs))
        };
        let neg = self.b.is_negative();
        if self.a.is_zero() {
            write!(f, "{}{}", if neg { "-" } else { "" }, surd)
        } else {
            write!(f, "{}{}{}", Self::fmt_rational(&self.a), if neg { "-" } else { "+" }, surd)
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses an integer or `p/q` literal (no sign).
fn parse_unsigned_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    if !p.bytes().all(|c| c.is_ascii_digit()) || !q.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

/// Parses one unsigned term: `r`, `sqrtD`, `sqrtD*r` or `r*sqrtD`.
fn parse_term(t: &str) -> Option<Coefficient> {
    let t = t.trim();
    let factors: Vec<&str> = t.split('*').map(str::trim).collect();
    let mut value = Coefficient::one();
    for fac in factors {
        if let Some(rad) = fac.strip_prefix("sqrt") {
            let rad = rad.trim_start_matches('(').trim_end_matches(')');
            let d: u32 = rad.parse().ok()?;
            value = value * Coefficient::sqrt(d);
        } else {
            value = value * Coefficient::rational(parse_unsigned_rational(fac)?);
        }
    }
    Some(value)
}

impl FromStr for Coefficient {
    type Err = Error;

    /// Accepts the [`Display`](fmt::Display) grammar: a sum of signed terms,
    /// each a rational, a surd `sqrtD`, or their product.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Coefficient(s.to_string());
        let s = s.trim();
        if s.is_empty() {
            return Err(err());
        }
        let mut total = Coefficient::zero();
        let mut start = 0usize;
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'*' && bytes[i - 1] != b'/' {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let term = term.trim();
            let (neg, body) = match term.as_bytes().first() {
                Some(b'-') => (true, &term[1..]),
                Some(b'+') => (false, &term[1..]),
                _ => (false, term),
            };
            let v = parse_term(body).ok_or_else(err)?;
            total = if neg { total - v } else { total + v };
        }
        Ok(total)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Coefficient> for &Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                self.$inner(rhs)
            }
        }
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                self.$inner(&rhs)
            }
        }
        impl $tr<&Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                self.$inner(rhs)
            }
        }
        impl $tr<Coefficient> for &Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient { a: -&self.a, b: -&self.b, d: self.d }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient { a: -self.a, b: -self.b, d: self.d }
    }
}

impl From<i64> for Coefficient {
    fn from(v: i64) -> Self {
        Coefficient::from_int(v)
    }
}

impl std::iter::Sum for Coefficient {
    fn sum<I: Iterator<Item = Coefficient>>(iter: I) -> Self {
        iter.fold(Coefficient::zero(), |acc, x| acc + x)
    }
}
