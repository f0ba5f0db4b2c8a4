//! Dispersion symbol and the phase mismatch of N-fold interactions.
//!
//! With `phi(k) = i P(k)`, `P(k) = -k^5 + g k^3` and `g = 2 gamma e1`, every function here returns
//! the imaginary coefficient: `Phi(k_1..k_N) = i * phase_mismatch(...)`.
//! The integer parts are formed exactly (i128, with a BigInt fallback) before `g` is applied,
//! so the float backend does not suffer from cancellation between `S^5` and `sum k_j^5`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::coeffs::PhaseParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `P(k) = -k^5 + g k^3` in double precision.
#[inline]
pub fn symbol_f64(k: i64, g: f64) -> f64 {
    let k = k as f64;
    let k3 = k * k * k;
    -k3 * k * k + g * k3
}

/// `P(k)` for the given phase parameters.
pub fn phase_coeff<T: Scalar>(k: i64, p: &PhaseParams<T>) -> T {
    if k.unsigned_abs() < 1 << 25 {
        let k = k as i128;
        let five = T::from_i128(-(k * k * k * k * k));
        return five + p.cubic() * T::from_i128(k * k * k);
    }
    let k3 = BigInt::from(k).pow(3);
    let five = -(&k3 * k * k);
    T::from_bigint(&five) + p.cubic() * T::from_bigint(&k3)
}

/// Exact integer in one of two representations.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactInt {
    Small(i128),
    Big(BigInt),
}

impl ExactInt {
    pub fn to_scalar<T: Scalar>(&self) -> T {
        match self {
            ExactInt::Small(v) => T::from_i128(*v),
            ExactInt::Big(v) => T::from_bigint(v),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            ExactInt::Small(v) => BigInt::from(*v),
            ExactInt::Big(v) => v.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExactInt::Small(v) => *v == 0,
            ExactInt::Big(v) => v.is_zero(),
        }
    }
}

/// Tuples whose `N * max|k|` stays below this bound are handled in i128.
const SMALL_BOUND: i64 = 1 << 24;

#[inline]
fn fits_small(ks: &[i64]) -> bool {
    let m = ks.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    (m as u128) * (ks.len() as u128 + 1) < SMALL_BOUND as u128
}

/// `(A, B)` with `A = -S^5 + sum k^5`, `B = S^3 - sum k^3`, `S = sum k`, in i128.
///
/// Caller guarantees the tuple is small enough.
#[inline]
pub fn parts_i128(ks: &[i64]) -> (i128, i128) {
    let mut s: i128 = 0;
    let mut a: i128 = 0;
    let mut b: i128 = 0;
    for &k in ks {
        let k = k as i128;
        let k3 = k * k * k;
        s += k;
        a += k3 * k * k;
        b -= k3;
    }
    let s3 = s * s * s;
    (a - s3 * s * s, b + s3)
}

fn parts_big(ks: &[i64]) -> (BigInt, BigInt) {
    let mut s = BigInt::zero();
    let mut a = BigInt::zero();
    let mut b = BigInt::zero();
    for &k in ks {
        let k = BigInt::from(k);
        let k3 = &k * &k * &k;
        a += &k3 * &k * &k;
        b -= &k3;
        s += k;
    }
    let s3 = &s * &s * &s;
    a -= &s3 * &s * &s;
    b += s3;
    (a, b)
}

/// Exact quintic and cubic parts of the phase mismatch.
pub fn mismatch_parts(ks: &[i64]) -> (ExactInt, ExactInt) {
    if fits_small(ks) {
        let (a, b) = parts_i128(ks);
        (ExactInt::Small(a), ExactInt::Small(b))
    } else {
        let (a, b) = parts_big(ks);
        (ExactInt::Big(a), ExactInt::Big(b))
    }
}

/// `P(sum k) - sum P(k_j)` with cubic coefficient `g = 2 gamma e1`.
#[inline]
pub fn mismatch_g<T: Scalar>(ks: &[i64], g: &T) -> T {
    if fits_small(ks) {
        let (a, b) = parts_i128(ks);
        if b == 0 || g.is_zero() {
            T::from_i128(a)
        } else {
            T::from_i128(a) + g.clone() * T::from_i128(b)
        }
    } else {
        let (a, b) = parts_big(ks);
        T::from_bigint(&a) + g.clone() * T::from_bigint(&b)
    }
}

/// Phase mismatch with no cubic term (`Phi_0`).
#[inline]
pub fn mismatch0<T: Scalar>(ks: &[i64]) -> T {
    mismatch_g(ks, &T::zero())
}

/// Imaginary coefficient of `Phi^{(N)}(k_1..k_N) = phi(sum k) - sum phi(k_j)`.
pub fn phase_mismatch<T: Scalar>(ks: &[i64], p: &PhaseParams<T>) -> T {
    mismatch_g(ks, &p.cubic())
}

/// Factored evaluation for N = 2 or 3:
/// `-(5/2) k1 k2 k12 (k1^2 + k2^2 + k12^2 - (12/5) gamma e1)` and
/// `-(5/2) k12 k23 k13 (k12^2 + k23^2 + k13^2 - (12/5) gamma e1)`.
pub fn phase_mismatch_factored<T: Scalar>(ks: &[i64], p: &PhaseParams<T>) -> Result<T> {
    let ge = p.gamma.clone() * p.e1.clone();
    let (x, y, z) = match ks {
        [k1, k2] => (*k1 as i128, *k2 as i128, (*k1 + *k2) as i128),
        [k1, k2, k3] => ((*k1 + *k2) as i128, (*k2 + *k3) as i128, (*k1 + *k3) as i128),
        _ => return Err(Error::ArityMismatch { expected: 3, got: ks.len() }),
    };
    let prod = T::from_i128(x * y * z);
    let sq = T::from_i128(x * x + y * y + z * z) - T::from_ratio(12, 5) * ge;
    Ok(T::from_ratio(-5, 2) * prod * sq)
}

/// Polynomial remainders appearing in the phase decompositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RemainderKind {
    /// `6 (k1234 k1235 k45 + k12 k23 k13)`: the gamma e1 coefficient in
    /// `Phi^{(5)} = Phi_0^{(3)}(k123, k4, k5) + Phi_0^{(3)}(k1, k2, k3) + gamma e1 R`.
    R5,
    /// Seven-point analogue `6 (k123456 k123457 k67 + k1234 k1235 k45 + k12 k23 k13)`.
    R7,
    /// `Phi_0^{(5)} + 5 i k1234 k5^4`, a degree five polynomial.
    R0,
}

/// Imaginary coefficient of the requested remainder polynomial.
pub fn phase_remainder<T: Scalar>(kind: RemainderKind, ks: &[i64]) -> Result<T> {
    let want = match kind {
        RemainderKind::R5 | RemainderKind::R0 => 5,
        RemainderKind::R7 => 7,
    };
    if ks.len() != want {
        return Err(Error::ArityMismatch { expected: want, got: ks.len() });
    }
    let b = |v: i64| BigInt::from(v);
    let k = |i: usize| ks[i - 1];
    let v = match kind {
        RemainderKind::R5 => {
            let s4 = k(1) + k(2) + k(3) + k(4);
            let t = b(s4) * b(k(1) + k(2) + k(3) + k(5)) * b(k(4) + k(5))
                + b(k(1) + k(2)) * b(k(2) + k(3)) * b(k(1) + k(3));
            t * 6
        }
        RemainderKind::R7 => {
            let s6: i64 = ks[..6].iter().sum();
            let s5: i64 = ks[..5].iter().sum();
            let t = b(s6) * b(s5 + k(7)) * b(k(6) + k(7))
                + b(k(1) + k(2) + k(3) + k(4)) * b(k(1) + k(2) + k(3) + k(5)) * b(k(4) + k(5))
                + b(k(1) + k(2)) * b(k(2) + k(3)) * b(k(1) + k(3));
            t * 6
        }
        RemainderKind::R0 => {
            let (a, _) = mismatch_parts(ks);
            let s4 = b(k(1) + k(2) + k(3) + k(4));
            let k5 = b(k(5));
            a.to_bigint() + s4 * k5.pow(4) * 5
        }
    };
    Ok(T::from_bigint(&v))
}

/// `|x|^(p/q) <= c * |y|` decided exactly as `|x|^p <= (c |y|)^q` (`c >= 0`).
pub fn pow_le(x: i64, p: u32, q: u32, c: i64, y: i64) -> bool {
    let base_l = x.unsigned_abs() as u128;
    let base_r = (c.unsigned_abs() as u128).checked_mul(y.unsigned_abs() as u128);
    if let Some(br) = base_r {
        if let (Some(l), Some(r)) = (base_l.checked_pow(p), br.checked_pow(q)) {
            return l <= r;
        }
    }
    let lhs = BigInt::from(x.unsigned_abs()).pow(p);
    let rhs = (BigInt::from(c.unsigned_abs()) * BigInt::from(y.unsigned_abs())).pow(q);
    lhs <= rhs
}

/// `gq * Phi` for a rational cubic coefficient `g = gp / gq`, as an exact integer.
pub fn mismatch_bigint_scaled(ks: &[i64], gp: i64, gq: i64) -> BigInt {
    let (a, b) = mismatch_parts(ks);
    a.to_bigint() * BigInt::from(gq) + b.to_bigint() * BigInt::from(gp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::from_ratio(p, d)
    }

    #[test]
    fn symbol_values() {
        let p0 = PhaseParams::<f64>::free();
        assert_eq!(phase_coeff(0, &p0), 0.0);
        assert_eq!(phase_coeff(2, &p0), -32.0);
        let p = PhaseParams::new(5.0, 2.0);
        assert_eq!(phase_coeff(1, &p), 19.0);
    }

    #[test]
    fn mismatch_examples() {
        let p0 = PhaseParams::<f64>::free();
        assert_eq!(phase_mismatch(&[7], &p0), 0.0);
        assert_eq!(phase_mismatch(&[1, 1], &p0), -30.0);
        assert_eq!(phase_mismatch(&[1, 2, 3], &p0), -7500.0);
        assert_eq!(phase_mismatch_factored(&[1, 2, 3], &p0).unwrap(), -7500.0);
        assert_eq!(phase_mismatch_factored(&[5, -5], &p0).unwrap(), 0.0);
    }

    #[test]
    fn factored_matches_definition_with_cubic_term() {
        let p = PhaseParams { gamma: q(5, 6), e1: q(1, 1) };
        for t in [[1i64, 1].to_vec(), vec![3, -7], vec![1, 2, 3], vec![-4, 9, 2]] {
            assert_eq!(phase_mismatch(&t, &p), phase_mismatch_factored(&t, &p).unwrap());
        }
        assert!(phase_mismatch_factored(&[1, 2, 3, 4], &p).is_err());
    }

    #[test]
    fn big_path_matches_small_path() {
        let t = [123_456i64, -654_321, 99_999];
        let (a, b) = parts_i128(&t);
        let (ab, bb) = parts_big(&t);
        assert_eq!(BigInt::from(a), ab);
        assert_eq!(BigInt::from(b), bb);
    }

    #[test]
    fn remainder_examples() {
        let r: BigRational = phase_remainder(RemainderKind::R5, &[1, -1, 2, -2, 0]).unwrap();
        assert!(r.is_zero());
        assert!(phase_remainder::<f64>(RemainderKind::R7, &[1, 2, 3]).is_err());
        // R0 is Phi_0 + 5 k1234 k5^4 by definition.
        let t = [1, 2, -3, 4, 100];
        let r0: BigRational = phase_remainder(RemainderKind::R0, &t).unwrap();
        let phi0: BigRational = mismatch0(&t);
        assert_eq!(r0, phi0 + BigRational::from_i64(5 * 4 * 100i64.pow(4)));
    }

    #[test]
    fn pow_le_decides_fractional_powers() {
        // 1000^(4/5) = 251.18..
        assert!(pow_le(1000, 4, 5, 1, 252));
        assert!(!pow_le(1000, 4, 5, 1, 251));
    }
}
