//! Scalar abstraction shared by the float engine and the exact certifier.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Real scalar used by every multiplier and phase evaluation.
///
/// Implemented for `f32`, `f64` (engine) and `BigRational` (exact mode).
pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn from_i128(v: i128) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    /// `p / q` with `q != 0`.
    fn from_ratio(p: i64, q: i64) -> Self;
    fn as_f64(&self) -> f64;
    /// True when values of this type are computed without rounding.
    fn is_exact() -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    #[inline]
    fn from_i128(v: i128) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    #[inline]
    fn as_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    #[inline]
    fn from_i128(v: i128) -> Self {
        v as f32
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f32().unwrap_or(f32::NAN)
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        (p as f64 / q as f64) as f32
    }
    #[inline]
    fn as_f64(&self) -> f64 {
        *self as f64
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_i128(v: i128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
}

/// Parse a decimal or fraction string ("5/6", "-0.25", "3") into an exact rational.
/// Nearest double to `x`, even when numerator or denominator alone overflow `f64`.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    // keep 64 significant bits of each part and restore the scale as a power of two
    let top = |b: &BigInt| {
        let shift = (b.bits() as i64 - 64).max(0);
        let m = if b.is_negative() { -((-b) >> shift as usize) } else { b >> shift as usize };
        (m.to_f64().unwrap_or(f64::NAN), shift)
    };
    let (n, sn) = top(x.numer());
    let (d, sd) = top(x.denom());
    let e = (sn - sd).clamp(-4000, 4000) as i32;
    // split the exponent so intermediate powers stay finite
    (n / d) * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Exact rational from a finite double (binary expansion, no rounding).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("5/6"), Some(BigRational::from_ratio(5, 6)));
        assert_eq!(parse_rational("-0.25"), Some(BigRational::from_ratio(-1, 4)));
        assert_eq!(parse_rational("3"), Some(BigRational::from_i64(3)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let big = BigInt::from(10).pow(400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((r.as_f64() - 3.0).abs() < 1e-12);
        // tiny ratio with an overflowing denominator
        let r = BigRational::new(BigInt::from(10).pow(30) * -7, BigInt::from(10).pow(330));
        assert!((r.as_f64() / -7e-300 - 1.0).abs() < 1e-12);
        let r = BigRational::new(BigInt::from(10).pow(320) * -5, BigInt::from(10).pow(330));
        assert!((r.as_f64() / -5e-10 - 1.0).abs() < 1e-12);
    }
}
