//! Edge-weight arithmetic.
//!
//! Everything that touches edge weights is generic over [`Weight`]. Two
//! implementations are provided: `f64` (the default, compared with an
//! absolute tolerance) and [`BigRational`] (exact, compared by equality).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Scalar type usable as an edge weight.
pub trait Weight:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// Whether comparisons are exact (tolerance is ignored at zero).
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_count(n: usize) -> Self;

    /// Parses an integer, decimal, scientific or `p/q` literal.
    fn parse_weight(s: &str) -> Option<Self>;

    fn is_finite(&self) -> bool;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// `|self - other| <= tol`, exact when `tol == 0`.
    fn within(&self, other: &Self, tol: f64) -> bool;

    fn total_cmp(&self, other: &Self) -> std::cmp::Ordering;
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn parse_weight(s: &str) -> Option<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                return None;
            }
            return Some(p / q);
        }
        s.parse().ok()
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        f64::total_cmp(self, other)
    }
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn parse_weight(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        if tol == 0.0 {
            self == other
        } else {
            ToPrimitive::to_f64(&(self - other).abs()).unwrap_or(f64::INFINITY) <= tol
        }
    }

    fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp(other)
    }
}

/// Exact parse of `p/q`, `-12`, `0.25`, `1.5e-3`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Converts a finite `f64` to the rational it denotes exactly.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
