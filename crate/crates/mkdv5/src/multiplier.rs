//! Cubic, quintic and normal-form multipliers as pure evaluation rules.
//!
//! Every multiplier here is either purely imaginary (the `q`/`Q` families and all `M`s) or real
//! (all `L`s). Internally a value is carried as a single scalar: the imaginary coefficient for the
//! former, the value itself for the latter. The public `*_value` functions wrap it into a complex.
//! A rational multiplier is set to zero wherever its denominator vanishes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff as cf;
use crate::error::{Error, Result};
use crate::phase::mismatch_g;
use crate::scalar::Scalar;
use crate::sym::{for_each_arrangement, symmetrize_value};

/// Identifier of a table multiplier.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultiplierId {
    q1_3,
    q2_3,
    q3_3,
    /// `Q = gamma q1 + beta q2 + alpha q3`
    Q3,
    q1_5,
    Q1_5,
    q2_5,
    Q2_5,
    L(usize, usize),
    M(usize, usize),
}

/// Table sizes: `(order, count)`.
pub const L_TABLE: [(usize, usize); 3] = [(3, 4), (5, 8), (7, 2)];
pub const M_TABLE: [(usize, usize); 5] = [(3, 1), (5, 23), (7, 15), (9, 3), (11, 1)];

/// Whether a multiplier value is real or purely imaginary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Imag,
}

impl MultiplierId {
    pub fn arity(&self) -> usize {
        use MultiplierId::*;
        match *self {
            q1_3 | q2_3 | q3_3 | Q3 => 3,
            q1_5 | Q1_5 | q2_5 | Q2_5 => 5,
            L(n, _) | M(n, _) => n,
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            MultiplierId::L(..) => ValueKind::Real,
            _ => ValueKind::Imag,
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            MultiplierId::L(n, i) => L_TABLE.iter().any(|&(m, c)| m == n && (1..=c).contains(&i)),
            MultiplierId::M(n, i) => M_TABLE.iter().any(|&(m, c)| m == n && (1..=c).contains(&i)),
            _ => true,
        }
    }

    /// Every `L` and `M` in table order.
    pub fn table() -> Vec<MultiplierId> {
        let mut v = Vec::new();
        for (n, c) in L_TABLE {
            v.extend((1..=c).map(|i| MultiplierId::L(n, i)));
        }
        for (n, c) in M_TABLE {
            v.extend((1..=c).map(|i| MultiplierId::M(n, i)));
        }
        v
    }
}

impl fmt::Display for MultiplierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplierId::L(n, i) => write!(f, "L{n}_{i}"),
            MultiplierId::M(n, i) => write!(f, "M{n}_{i}"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for MultiplierId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use MultiplierId::*;
        let id = match s {
            "q1_3" => q1_3,
            "q2_3" => q2_3,
            "q3_3" => q3_3,
            "Q3" => Q3,
            "q1_5" => q1_5,
            "Q1_5" => Q1_5,
            "q2_5" => q2_5,
            "Q2_5" => Q2_5,
            _ => {
                let bad = || Error::UnknownMultiplier(s.to_string());
                let (head, rest) = s.split_at(1);
                let (n, i) = rest.split_once('_').ok_or_else(bad)?;
                let (n, i): (usize, usize) = (n.parse().map_err(|_| bad())?, i.parse().map_err(|_| bad())?);
                let id = match head {
                    "L" => L(n, i),
                    "M" => M(n, i),
                    _ => return Err(bad()),
                };
                if !id.is_valid() {
                    return Err(bad());
                }
                id
            }
        };
        Ok(id)
    }
}

/// Evaluation context: coefficients, the cubic phase coefficient `2 gamma e1` and the threshold `L`.
#[derive(Clone, Debug)]
pub struct MultCtx<T: Scalar> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    /// `2 gamma e1`
    pub g: T,
    pub threshold: i64,
    /// Test-only corruption of the table (flips the sign of `M5_5`); used as a negative control.
    pub perturb: bool,
}

impl<T: Scalar> MultCtx<T> {
    pub fn new(c: &EquationCoefficients<T>, p: &PhaseParams<T>, threshold: i64) -> Self {
        Self {
            alpha: c.alpha.clone(),
            beta: c.beta.clone(),
            gamma: c.gamma.clone(),
            delta: c.delta.clone(),
            g: p.cubic(),
            threshold,
            perturb: false,
        }
    }

    pub fn perturbed(mut self, on: bool) -> Self {
        self.perturb = on;
        self
    }

    /// Imaginary coefficient of `Phi^{(N)}`.
    #[inline]
    pub fn phi(&self, ks: &[i64]) -> T {
        mismatch_g(ks, &self.g)
    }

    #[inline]
    pub fn phi0(&self, ks: &[i64]) -> T {
        mismatch_g(ks, &T::zero())
    }

    #[inline]
    fn gt(&self, ks: &[i64]) -> bool {
        cf::max_abs(ks) > self.threshold
    }
}

/// Which combination of the cubic symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QSel {
    Q1,
    Q2,
    Q3,
    Q23,
    Q,
}

/// Entries below this keep every cubic product inside i128.
const CUBIC_SMALL: u64 = 1 << 40;

#[inline]
fn cubic_small(k1: i64, k2: i64, k3: i64) -> bool {
    k1.unsigned_abs().max(k2.unsigned_abs()).max(k3.unsigned_abs()) < CUBIC_SMALL
}

fn big3(k1: i64, k2: i64, k3: i64) -> (BigInt, BigInt, BigInt) {
    (BigInt::from(k1), BigInt::from(k2), BigInt::from(k3))
}

#[inline]
fn q1_num<T: Scalar>(k1: i64, k2: i64, k3: i64) -> T {
    if cubic_small(k1, k2, k3) {
        let (a, b, c) = ((k1 + k2) as i128, (k2 + k3) as i128, (k1 + k3) as i128);
        return T::from_i128(-((k1 + k2 + k3) as i128) * (a * a + b * b + c * c));
    }
    let (x, y, z) = big3(k1, k2, k3);
    let (a, b, c) = (&x + &y, &y + &z, &x + &z);
    T::from_bigint(&(-(x + y + z) * (&a * &a + &b * &b + &c * &c)))
}

#[inline]
fn q2_num<T: Scalar>(k1: i64, k2: i64, k3: i64) -> T {
    if cubic_small(k1, k2, k3) {
        let (a, b, c) = (k1 as i128, k2 as i128, k3 as i128);
        return T::from_i128(-(a + b + c) * (a * b + b * c + a * c));
    }
    let (a, b, c) = big3(k1, k2, k3);
    T::from_bigint(&(-(&a + &b + &c) * (&a * &b + &b * &c + &a * &c)))
}

#[inline]
fn q3_int<T: Scalar>(k1: i64, k2: i64, k3: i64) -> T {
    if cubic_small(k1, k2, k3) {
        return T::from_i128(-(k1 as i128) * (k2 as i128) * (k3 as i128));
    }
    let (a, b, c) = big3(k1, k2, k3);
    T::from_bigint(&(-(a * b * c)))
}

impl<T: Scalar> MultCtx<T> {
    /// Imaginary coefficient of `Q_sel(k1, k2, k3)`.
    pub fn q(&self, s: QSel, k1: i64, k2: i64, k3: i64) -> T {
        let three = T::from_i64(3);
        let t1 = || self.gamma.clone() * q1_num::<T>(k1, k2, k3) / three.clone();
        let t2 = || self.beta.clone() * q2_num::<T>(k1, k2, k3) / three.clone();
        let t3 = || self.alpha.clone() * q3_int::<T>(k1, k2, k3);
        match s {
            QSel::Q1 => t1(),
            QSel::Q2 => t2(),
            QSel::Q3 => t3(),
            QSel::Q23 => t2() + t3(),
            QSel::Q => t1() + t2() + t3(),
        }
    }

    /// `Q_sel chi_NR1` on a triple.
    #[inline]
    pub fn q_nr(&self, s: QSel, k1: i64, k2: i64, k3: i64) -> T {
        if cf::nr1(k1, k2, k3) {
            self.q(s, k1, k2, k3)
        } else {
            T::zero()
        }
    }

    /// `(Q_sel / Phi_0) chi_NR1`, real.
    pub fn ratio0(&self, s: QSel, k1: i64, k2: i64, k3: i64) -> T {
        if !cf::nr1(k1, k2, k3) {
            return T::zero();
        }
        let d = self.phi0(&[k1, k2, k3]);
        if d.is_zero() {
            return T::zero();
        }
        self.q(s, k1, k2, k3) / d
    }

    /// `(Q_sel / Phi) chi_NR1`, real.
    pub fn ratio_phi(&self, s: QSel, k1: i64, k2: i64, k3: i64) -> T {
        if !cf::nr1(k1, k2, k3) {
            return T::zero();
        }
        let d = self.phi(&[k1, k2, k3]);
        if d.is_zero() {
            return T::zero();
        }
        self.q(s, k1, k2, k3) / d
    }

    /// `Q [3 chi_R3]_sym`: nonzero only on `{a, a, -a}` multisets.
    pub fn q_r3sym(&self, k1: i64, k2: i64, k3: i64) -> T {
        let c = r3_sym_count(k1, k2, k3);
        if c == 0 {
            return T::zero();
        }
        self.q(QSel::Q, k1, k2, k3) * T::from_ratio(c as i64, 2)
    }

    /// `-Q chi_NR1 ([3 chi_H2,2]_sym + chi_H3)`
    pub fn q_nr_h22h3(&self, k1: i64, k2: i64, k3: i64) -> T {
        let w = cf::sym3_h22(k1, k2, k3) + cf::h3_value(k1, k2, k3);
        if w == 0 || !cf::nr1(k1, k2, k3) {
            return T::zero();
        }
        -self.q(QSel::Q, k1, k2, k3) * T::from_i64(w as i64)
    }

    /// `q1^{(5)} = k_{12345}`
    #[inline]
    pub fn q1_5(&self, ks: &[i64]) -> T {
        T::from_i64(ks.iter().sum())
    }

    /// `Q1^{(5)} = 6 delta q1 (1 - [5 R1]_sym) + (4/5) gamma^2 q1 [R1 (1 - R2)]_sym`.
    pub fn big_q1_5(&self, ks: &[i64]) -> T {
        let s: i64 = ks.iter().sum();
        let (hits, pairs) = r1_sym_parts(ks);
        let q1 = T::from_i64(s);
        let a = self.delta.clone() * T::from_i64(6) * (T::one() - T::from_i64(hits));
        let b = self.gamma.clone() * self.gamma.clone() * T::from_ratio(4, 5) * T::from_ratio(pairs, 15);
        q1 * (a + b)
    }

    /// `q2^{(5)}` from its definition as a sum of two cubic compositions.
    pub fn q2_5(&self, ks: &[i64]) -> T {
        let [k1, k2, k3, k4, k5] = five(ks);
        let a = self.ratio0_any(QSel::Q1, k1, k2, k3 + k4 + k5);
        let a = if a.is_zero() { a } else { a * self.q(QSel::Q1, k3, k4, k5) };
        let b = self.ratio0_any(QSel::Q1, k3, k4, k1 + k2 + k5);
        let b = if b.is_zero() { b } else { b * self.q(QSel::Q1, k1, k2, k5) };
        T::from_ratio(9, 2) * (a + b)
    }

    /// `Q_sel / Phi_0` without the non-resonance cutoff (zero where `Phi_0 = 0`).
    fn ratio0_any(&self, s: QSel, k1: i64, k2: i64, k3: i64) -> T {
        let d = self.phi0(&[k1, k2, k3]);
        if d.is_zero() {
            return T::zero();
        }
        self.q(s, k1, k2, k3) / d
    }

    /// `q2^{(5)}` through the closed form with the polynomials `p_1..p_7`.
    pub fn q2_5_closed(&self, ks: &[i64]) -> T {
        let [k1, k2, k3, k4, k5] = five(ks);
        let den = [k1 + k2, k3 + k4, k1 + k2 + k3 + k5, k1 + k2 + k4 + k5, k1 + k3 + k4 + k5, k2 + k3 + k4 + k5];
        if den.contains(&0) {
            return T::zero();
        }
        let mut den_t = T::one();
        for d in den {
            den_t = den_t * T::from_i64(d);
        }
        let k5t = T::from_i64(k5);
        let mut num = T::zero();
        let p = p_polys::<T>(k1, k2, k3, k4);
        for (l, pl) in p.iter().enumerate() {
            // p_{l+1} k5^{6-l}
            let mut term = pl.clone();
            for _ in 0..(6 - l) {
                term = term * k5t.clone();
            }
            num = num + term;
        }
        T::from_ratio(-2, 5) * self.gamma.clone() * self.gamma.clone() * num / den_t
    }

    /// `Q2^{(5)}`: average of `q2 chi_NR2 (1 - chi_R4)` over the three pairings of the first four slots.
    pub fn big_q2_5(&self, ks: &[i64]) -> T {
        let [k1, k2, k3, k4, k5] = five(ks);
        let mut acc = T::zero();
        for t in [[k1, k2, k3, k4, k5], [k1, k3, k2, k4, k5], [k1, k4, k2, k3, k5]] {
            if cf::nr2(&t) && !cf::r4(&t) {
                acc = acc + self.q2_5(&t);
            }
        }
        acc / T::from_i64(3)
    }

    /// `Q2^{(5)} / Phi_0^{(5)}` (real).
    pub fn q2big_over_phi0(&self, ks: &[i64]) -> T {
        let n = self.big_q2_5(ks);
        if n.is_zero() {
            return n;
        }
        let d = self.phi0(ks);
        if d.is_zero() {
            T::zero()
        } else {
            n / d
        }
    }

    /// `Q2^{(5)} / Phi^{(5)}` (real).
    pub fn q2big_over_phi(&self, ks: &[i64]) -> T {
        let n = self.big_q2_5(ks);
        if n.is_zero() {
            return n;
        }
        let d = self.phi(ks);
        if d.is_zero() {
            T::zero()
        } else {
            n / d
        }
    }
}

#[inline]
fn five(ks: &[i64]) -> [i64; 5] {
    [ks[0], ks[1], ks[2], ks[3], ks[4]]
}

/// Number of the six orderings of a triple that satisfy `k1 = -k2 = k3`.
pub fn r3_sym_count(k1: i64, k2: i64, k3: i64) -> i32 {
    let t = [k1, k2, k3];
    let mut c = 0;
    for (a, b, d) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
        if cf::r3(t[a], t[b], t[d]) {
            c += 1;
        }
    }
    c
}

/// `([5 R1]_sym, 15 [R1 (1 - R2)]_sym)` for a 5-tuple.
pub fn r1_sym_parts(ks: &[i64]) -> (i64, i64) {
    let s: i64 = ks.iter().sum();
    let mut hits = 0;
    let mut pairs = 0;
    for j in 0..5 {
        if ks[j] != s {
            continue;
        }
        hits += 1;
        let o: Vec<i64> = (0..5).filter(|&i| i != j).map(|i| ks[i]).collect();
        for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
            if o[a] + o[b] != 0 && o[c] + o[d] != 0 {
                pairs += 1;
            }
        }
    }
    (hits, pairs)
}

/// The polynomials `p_1, .., p_7` of the closed form of `q2^{(5)}`.
pub fn p_polys<T: Scalar>(k1: i64, k2: i64, k3: i64, k4: i64) -> [T; 7] {
    let i = |v: i64| T::from_i64(v);
    let s = i(k1 + k2 + k3 + k4);
    let a = i(k1 + k2);
    let b = i(k3 + k4);
    let (x1, x2, x3, x4) = (i(k1), i(k2), i(k3), i(k4));
    let p12 = x1.clone() * x2.clone();
    let p34 = x3.clone() * x4.clone();
    let ab = a.clone() * b.clone();
    let pw = |x: &T, n: u32| (0..n).fold(T::one(), |acc, _| acc * x.clone());
    // sums of the form k1 k2 k12^m + k3 k4 k34^m and k1^2 k2^2 k12^m + k3^2 k4^2 k34^m
    let u = |m: u32| p12.clone() * pw(&a, m) + p34.clone() * pw(&b, m);
    let w = |m: u32| p12.clone() * p12.clone() * pw(&a, m) + p34.clone() * p34.clone() * pw(&b, m);
    let c = |v: i64| T::from_i64(v);
    let p1 = s.clone();
    let p2 = c(4) * pw(&s, 2) - c(2) * ab.clone();
    let p3 = c(7) * pw(&s, 3) - c(8) * ab.clone() * s.clone();
    let p4 = c(7) * pw(&s, 4) - c(12) * ab.clone() * pw(&s, 2) - c(2) * pw(&ab, 2) - c(2) * u(1) * s.clone()
        + c(2) * u(2);
    let p5 = c(4) * pw(&s, 5) - c(7) * ab.clone() * pw(&s, 3) - c(7) * pw(&ab, 2) * s.clone()
        - c(3) * u(1) * pw(&s, 2)
        + u(2) * s.clone()
        + c(3) * u(3)
        - w(1);
    let p6 = pw(&s, 6) - c(8) * pw(&ab, 2) * pw(&s, 2) - u(1) * pw(&s, 3) - c(2) * u(2) * pw(&s, 2)
        + c(4) * u(3) * s.clone()
        - w(1) * s.clone()
        + u(4)
        - w(2);
    let p7 = ab.clone() * pw(&s, 5) - c(3) * pw(&ab, 2) * pw(&s, 3) - u(2) * pw(&s, 3) + u(3) * pw(&s, 2)
        + u(4) * s.clone()
        - w(2) * s.clone();
    [p1, p2, p3, p4, p5, p6, p7]
}

/// Sum of `[L_i]_sym` over a set of cubic indices (bitmask over `1..=4`), without the `chi_{>L}` factor.
pub fn l3_tilde<T: Scalar>(ctx: &MultCtx<T>, mask: u8, k1: i64, k2: i64, k3: i64) -> T {
    let mut w = 0i32;
    if mask & 1 != 0 {
        w += cf::sym3_h1(k1, k2, k3);
    }
    if mask & 2 != 0 {
        w += cf::sym3_h21(k1, k2, k3);
    }
    if mask & 4 != 0 {
        w += cf::sym3_h22(k1, k2, k3);
    }
    if mask & 8 != 0 {
        w += cf::h3_value(k1, k2, k3);
    }
    if w == 0 {
        return T::zero();
    }
    -ctx.ratio_phi(QSel::Q, k1, k2, k3) * T::from_i64(w as i64)
}

/// Imaginary coefficient of the numerator of `L_i^{(N)}` (the multiplier times `Phi`).
pub fn l_numer<T: Scalar>(ctx: &MultCtx<T>, n: usize, i: usize, ks: &[i64]) -> Result<T> {
    check_arity(n, ks)?;
    let z = T::zero;
    Ok(match (n, i) {
        (3, _) if (1..=4).contains(&i) => {
            let (k1, k2, k3) = (ks[0], ks[1], ks[2]);
            let w = match i {
                1 => 3 * cf::h1_3(k1, k2, k3) as i64,
                2 => 3 * cf::h21(k1, k2, k3) as i64,
                3 => 3 * cf::h22(k1, k2, k3) as i64,
                _ => cf::h3(k1, k2, k3) as i64,
            };
            if w == 0 {
                z()
            } else {
                -ctx.q_nr(QSel::Q, k1, k2, k3) * T::from_i64(w)
            }
        }
        (5, 1) => {
            if cf::h1(ks) && !cf::r1(ks) && !cf::r5(ks) {
                T::from_i64(-30) * ctx.delta.clone() * ctx.q1_5(ks)
            } else {
                z()
            }
        }
        (5, 2) => {
            if cf::h1(ks) && cf::nr2(ks) && !cf::r4(ks) {
                ctx.q2_5(ks)
            } else {
                z()
            }
        }
        (5, 3..=6) => {
            if !cf::h1(ks) {
                return Ok(z());
            }
            let (outer, inner, ok) = match i {
                3 => (QSel::Q1, QSel::Q2, !cf::r1(ks) && !cf::r4(ks)),
                4 => (QSel::Q2, QSel::Q1, !cf::r1(ks) && !cf::r4(ks)),
                5 => (QSel::Q2, QSel::Q23, cf::a1(ks)),
                _ => (QSel::Q1, QSel::Q3, cf::a2(ks)),
            };
            if ok {
                grouped5(ctx, ks, outer, false, inner)
            } else {
                z()
            }
        }
        (5, 7) => {
            if cf::nr_ij(ks, 1, 1) && !cf::h1(ks) && cf::a1(ks) {
                grouped5(ctx, ks, QSel::Q, false, QSel::Q)
            } else {
                z()
            }
        }
        (5, 8) => {
            if cf::nr_ij(ks, 2, 1) && cf::a3(ks) && ctx.gt(&[ks[0], ks[1], ks[2] + ks[3] + ks[4]]) {
                grouped5(ctx, ks, QSel::Q, true, QSel::Q)
            } else {
                z()
            }
        }
        (7, 1) | (7, 2) => {
            if !cf::h1(ks) {
                return Ok(z());
            }
            let (ok, inner) = if i == 1 {
                (!cf::r1(ks) && !cf::r5(ks), QSel::Q1)
            } else {
                (cf::a1(ks), QSel::Q23)
            };
            if ok {
                grouped7(ctx, ks, inner, Den5::Zero)
            } else {
                z()
            }
        }
        _ => return Err(Error::UnknownMultiplier(format!("L{n}_{i}"))),
    })
}

/// Real value of `L_i^{(N)}`.
pub fn l_raw<T: Scalar>(ctx: &MultCtx<T>, n: usize, i: usize, ks: &[i64]) -> Result<T> {
    let num = l_numer(ctx, n, i, ks)?;
    if num.is_zero() {
        return Ok(num);
    }
    let d = ctx.phi(ks);
    Ok(if d.is_zero() { T::zero() } else { num / d })
}

fn check_arity(n: usize, ks: &[i64]) -> Result<()> {
    if ks.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: ks.len() });
    }
    Ok(())
}

/// `9 [outer/Phi_* chi_NR1]_ext1 [inner chi_NR1]_ext2` at arity five (cutoffs applied by the caller).
fn grouped5<T: Scalar>(ctx: &MultCtx<T>, ks: &[i64], outer: QSel, phi_den: bool, inner: QSel) -> T {
    let [k1, k2, k3, k4, k5] = five(ks);
    let b = ctx.q_nr(inner, k3, k4, k5);
    if b.is_zero() {
        return b;
    }
    let big = k3 + k4 + k5;
    let a = if phi_den { ctx.ratio_phi(outer, k1, k2, big) } else { ctx.ratio0(outer, k1, k2, big) };
    T::from_i64(9) * a * b
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Den5 {
    Zero,
    Phi,
    /// `Q2/Phi - Q2/Phi_0`
    Diff,
}

/// `-3 [Q2^{(5)}/Phi_*]_ext1 [inner chi_NR1]_ext2` at arity seven (cutoffs applied by the caller).
fn grouped7<T: Scalar>(ctx: &MultCtx<T>, ks: &[i64], inner: QSel, den: Den5) -> T {
    let b = ctx.q_nr(inner, ks[4], ks[5], ks[6]);
    if b.is_zero() {
        return b;
    }
    let head = [ks[0], ks[1], ks[2], ks[3], ks[4] + ks[5] + ks[6]];
    let a = match den {
        Den5::Zero => ctx.q2big_over_phi0(&head),
        Den5::Phi => ctx.q2big_over_phi(&head),
        Den5::Diff => ctx.q2big_over_phi(&head) - ctx.q2big_over_phi0(&head),
    };
    T::from_i64(-3) * a * b
}

/// Sum of `[L_i^{(N)}]_sym` (real) over the indices in `set`, for `N = 5, 7`.
pub fn l_tilde_sum<T: Scalar>(ctx: &MultCtx<T>, n: usize, set: &[usize], ks: &[i64]) -> Result<T> {
    check_arity(n, ks)?;
    if n == 3 {
        let mask = set.iter().fold(0u8, |m, &i| m | (1 << (i - 1)));
        return Ok(l3_tilde(ctx, mask, ks[0], ks[1], ks[2]));
    }
    let mut err = None;
    let v = symmetrize_value(
        |p| {
            let mut acc = T::zero();
            for &i in set {
                match l_raw(ctx, n, i, p) {
                    Ok(x) => acc = acc + x,
                    Err(e) => err = Some(e),
                }
            }
            acc
        },
        ks,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `[5 (Q2^{(5)}/Phi) chi_{>L} chi_H1]_sym`: sum over the slot placed last.
fn sym5_q2_over_phi_h1<T: Scalar>(ctx: &MultCtx<T>, ks: &[i64]) -> T {
    if !ctx.gt(ks) {
        return T::zero();
    }
    let mut acc = T::zero();
    let mut t = [0i64; 5];
    for j in 0..5 {
        let mut p = 0;
        for (i, &k) in ks.iter().enumerate() {
            if i != j {
                t[p] = k;
                p += 1;
            }
        }
        t[4] = ks[j];
        if cf::h1(&t) {
            acc = acc + ctx.q2big_over_phi(&t);
        }
    }
    acc
}

/// Inner factor of the composite multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InnerKind {
    /// `Q [3 chi_R3]_sym` (arity 3)
    R3Sym,
    /// `-Q chi_NR1` (arity 3)
    NegQNr1,
    /// `-Q chi_NR1 ([3 chi_H2,2]_sym + chi_H3)` (arity 3)
    NegQNr1H22H3,
    /// `-Q1^{(5)}` (arity 5)
    NegQ1_5,
}

impl InnerKind {
    pub fn arity(&self) -> usize {
        match self {
            InnerKind::NegQ1_5 => 5,
            _ => 3,
        }
    }

    /// Imaginary coefficient of the inner multiplier.
    pub fn eval<T: Scalar>(&self, ctx: &MultCtx<T>, ks: &[i64]) -> T {
        match self {
            InnerKind::R3Sym => ctx.q_r3sym(ks[0], ks[1], ks[2]),
            InnerKind::NegQNr1 => -ctx.q_nr(QSel::Q, ks[0], ks[1], ks[2]),
            InnerKind::NegQNr1H22H3 => ctx.q_nr_h22h3(ks[0], ks[1], ks[2]),
            InnerKind::NegQ1_5 => -ctx.big_q1_5(ks),
        }
    }
}

/// Shape `[w [sum_{i in set} L~_i^{(n)}] chi_{>L}]_ext1 [inner]_ext2` of a composite multiplier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeShape {
    pub outer_order: usize,
    pub outer_set: Vec<usize>,
    pub inner: InnerKind,
}

impl CompositeShape {
    pub fn arity(&self) -> usize {
        self.outer_order + self.inner.arity() - 1
    }

    /// The weight `w = outer_order` in front of the symmetrized outer factor.
    pub fn weight(&self) -> i64 {
        self.outer_order as i64
    }
}

/// The composite shape of `M_i^{(N)}`, if it has one.
pub fn composite_shape(id: MultiplierId) -> Option<CompositeShape> {
    use InnerKind::*;
    let s = |o: usize, set: &[usize], inner: InnerKind| {
        Some(CompositeShape { outer_order: o, outer_set: set.to_vec(), inner })
    };
    let all5: &[usize] = &[1, 2, 3, 4, 5, 6, 7, 8];
    match id {
        MultiplierId::M(5, 6) => s(3, &[1, 2, 3, 4], R3Sym),
        MultiplierId::M(5, 7) => s(3, &[2, 3, 4], NegQNr1),
        MultiplierId::M(5, 8) => s(3, &[1], NegQNr1H22H3),
        MultiplierId::M(7, 1) => s(3, &[1, 2, 3, 4], NegQ1_5),
        MultiplierId::M(7, 2) => s(5, all5, R3Sym),
        MultiplierId::M(7, 3) => s(5, &[1, 7, 8], NegQNr1),
        MultiplierId::M(7, 4) => s(5, &[3, 4, 5, 6], NegQNr1),
        MultiplierId::M(7, 5) => s(5, &[2], NegQNr1H22H3),
        MultiplierId::M(9, 1) => s(5, all5, NegQ1_5),
        MultiplierId::M(9, 2) => s(7, &[1, 2], R3Sym),
        MultiplierId::M(9, 3) => s(7, &[1, 2], NegQNr1),
        MultiplierId::M(11, 1) => s(7, &[1, 2], NegQ1_5),
        _ => None,
    }
}

/// Pointwise value of a composite multiplier.
pub fn composite_value<T: Scalar>(ctx: &MultCtx<T>, shape: &CompositeShape, ks: &[i64]) -> Result<T> {
    let n = shape.outer_order;
    let total = shape.arity();
    check_arity(total, ks)?;
    let inner_ks = &ks[n - 1..];
    let b = shape.inner.eval(ctx, inner_ks);
    if b.is_zero() {
        return Ok(b);
    }
    let mut outer_ks = ks[..n].to_vec();
    outer_ks[n - 1] = inner_ks.iter().sum();
    if !ctx.gt(&outer_ks) {
        return Ok(T::zero());
    }
    let a = l_tilde_sum(ctx, n, &shape.outer_set, &outer_ks)?;
    Ok(T::from_i64(shape.weight()) * a * b)
}

/// Imaginary coefficient of `M_i^{(N)}`.
pub fn m_raw<T: Scalar>(ctx: &MultCtx<T>, n: usize, i: usize, ks: &[i64]) -> Result<T> {
    check_arity(n, ks)?;
    let id = MultiplierId::M(n, i);
    if !id.is_valid() {
        return Err(Error::UnknownMultiplier(id.to_string()));
    }
    if let Some(shape) = composite_shape(id) {
        return composite_value(ctx, &shape, ks);
    }
    let z = T::zero;
    let c = |v: i64| T::from_i64(v);
    Ok(match (n, i) {
        (3, 1) => {
            // Q 3 chi_R3, not symmetrized
            if cf::r3(ks[0], ks[1], ks[2]) {
                c(3) * ctx.q(QSel::Q, ks[0], ks[1], ks[2])
            } else {
                z()
            }
        }
        (5, 1) | (5, 2) => {
            let h = cf::h1(ks);
            if cf::r1(ks) && !cf::r2(ks) && (h == (i == 1)) {
                T::from_ratio(-4, 5) * ctx.gamma.clone() * ctx.gamma.clone() * ctx.q1_5(ks)
            } else {
                z()
            }
        }
        (5, 3) => {
            let w = 1 - cf::sym5_h1(ks) as i64;
            if w == 0 {
                z()
            } else {
                c(-6) * ctx.delta.clone() * ctx.q1_5(ks) * c(w)
            }
        }
        (5, 4) => {
            if cf::h1(ks) && !cf::r1(ks) && cf::r5(ks) {
                c(-30) * ctx.delta.clone() * ctx.q1_5(ks)
            } else {
                z()
            }
        }
        (5, 5) => {
            if cf::r1(ks) && !cf::h1(ks) {
                let sign = if ctx.perturb { -30 } else { 30 };
                c(sign) * ctx.delta.clone() * ctx.q1_5(ks)
            } else {
                z()
            }
        }
        (5, 9) => {
            if cf::h1(ks) && cf::r1(ks) && !cf::r2(ks) {
                ctx.q2_5(ks)
            } else {
                z()
            }
        }
        (5, 10) => {
            if cf::h1(ks) && cf::nr2(ks) && cf::r4(ks) {
                ctx.q2_5(ks)
            } else {
                z()
            }
        }
        (5, 11..=17) => {
            if !cf::h1(ks) {
                return Ok(z());
            }
            let (outer, inner, ok) = match i {
                11 => (QSel::Q1, QSel::Q2, cf::r1(ks)),
                12 => (QSel::Q1, QSel::Q2, !cf::r1(ks) && cf::r4(ks)),
                13 => (QSel::Q2, QSel::Q1, cf::r1(ks)),
                14 => (QSel::Q2, QSel::Q1, !cf::r1(ks) && cf::r4(ks)),
                15 => (QSel::Q2, QSel::Q23, !cf::a1(ks)),
                16 => (QSel::Q1, QSel::Q3, !cf::a2(ks)),
                _ => (QSel::Q3, QSel::Q, true),
            };
            if ok {
                grouped5(ctx, ks, outer, false, inner)
            } else {
                z()
            }
        }
        (5, 18) => {
            if cf::nr_ij(ks, 1, 1) && !cf::h1(ks) && !cf::a1(ks) {
                grouped5(ctx, ks, QSel::Q, false, QSel::Q)
            } else {
                z()
            }
        }
        (5, 19) | (5, 20) => {
            if !cf::nr_ij(ks, 1, 1) {
                return Ok(z());
            }
            let big = ks[2] + ks[3] + ks[4];
            let gt = ctx.gt(&[ks[0], ks[1], big]);
            if (i == 19) != gt {
                return Ok(z());
            }
            let b = ctx.q_nr(QSel::Q, ks[2], ks[3], ks[4]);
            let a = if i == 19 {
                ctx.ratio_phi(QSel::Q, ks[0], ks[1], big) - ctx.ratio0(QSel::Q, ks[0], ks[1], big)
            } else {
                -ctx.ratio0(QSel::Q, ks[0], ks[1], big)
            };
            c(9) * a * b
        }
        (5, 21..=23) => {
            let (ok, w) = match i {
                21 => (cf::nr_ij(ks, 1, 2), 18),
                22 => (cf::nr_ij(ks, 2, 1) && !cf::a3(ks), 9),
                _ => (cf::nr_ij(ks, 2, 2), 18),
            };
            let big = ks[2] + ks[3] + ks[4];
            if !ok || !ctx.gt(&[ks[0], ks[1], big]) {
                return Ok(z());
            }
            // The inner factor is +Q chi_NR1, as produced by regrouping the L~_1 boundary term.
            let a = ctx.ratio_phi(QSel::Q, ks[0], ks[1], big);
            c(w) * a * ctx.q_nr(QSel::Q, ks[2], ks[3], ks[4])
        }
        (7, 6..=9) => {
            if !cf::h1(ks) {
                return Ok(z());
            }
            let (ok, inner) = match i {
                6 => (cf::r1(ks) && cf::a4(ks), QSel::Q1),
                7 => (cf::r1(ks) && !cf::a4(ks), QSel::Q1),
                8 => (!cf::r1(ks) && cf::r5(ks), QSel::Q1),
                _ => (!cf::a1(ks), QSel::Q23),
            };
            if ok {
                grouped7(ctx, ks, inner, Den5::Zero)
            } else {
                z()
            }
        }
        (7, 10..=12) | (7, 14) => {
            let (ok, den, gate) = match i {
                10 => (cf::nr_ij(ks, 1, 1) && !cf::h1(ks), Den5::Zero, None),
                11 => (cf::nr_ij(ks, 1, 1), Den5::Diff, Some(true)),
                12 => (cf::nr_ij(ks, 1, 1), Den5::Zero, Some(false)),
                _ => (cf::nr_ij(ks, 2, 1), Den5::Phi, Some(true)),
            };
            if !ok {
                return Ok(z());
            }
            if let Some(want_gt) = gate {
                let head = [ks[0], ks[1], ks[2], ks[3], ks[4] + ks[5] + ks[6]];
                if ctx.gt(&head) != want_gt {
                    return Ok(z());
                }
            }
            let v = grouped7(ctx, ks, QSel::Q, den);
            if i == 12 {
                -v
            } else {
                v
            }
        }
        (7, 13) | (7, 15) => {
            let ok = if i == 13 { cf::nr_ij(ks, 1, 2) } else { cf::nr_ij(ks, 2, 2) };
            if !ok {
                return Ok(z());
            }
            let b = ctx.q_nr(QSel::Q, ks[4], ks[5], ks[6]);
            if b.is_zero() {
                return Ok(b);
            }
            let head = [ks[0], ks[1], ks[2], ks[3], ks[4] + ks[5] + ks[6]];
            c(-12) * sym5_q2_over_phi_h1(ctx, &head) * b
        }
        _ => return Err(Error::UnknownMultiplier(id.to_string())),
    })
}

/// Raw scalar of any multiplier (imaginary coefficient, or the real value for `L`s).
pub fn raw_value<T: Scalar>(ctx: &MultCtx<T>, id: MultiplierId, ks: &[i64]) -> Result<T> {
    check_arity(id.arity(), ks)?;
    use MultiplierId::*;
    Ok(match id {
        q1_3 => q1_num::<T>(ks[0], ks[1], ks[2]) / T::from_i64(3),
        q2_3 => q2_num::<T>(ks[0], ks[1], ks[2]) / T::from_i64(3),
        q3_3 => q3_int::<T>(ks[0], ks[1], ks[2]),
        Q3 => ctx.q(QSel::Q, ks[0], ks[1], ks[2]),
        q1_5 => ctx.q1_5(ks),
        Q1_5 => ctx.big_q1_5(ks),
        q2_5 => ctx.q2_5(ks),
        Q2_5 => ctx.big_q2_5(ks),
        L(n, i) => l_raw(ctx, n, i, ks)?,
        M(n, i) => m_raw(ctx, n, i, ks)?,
    })
}

fn wrap<T: Scalar>(kind: ValueKind, v: T) -> Complex<T> {
    match kind {
        ValueKind::Real => Complex::new(v, T::zero()),
        ValueKind::Imag => Complex::new(T::zero(), v),
    }
}

/// Complex value of a cubic or quintic symbol (`q`/`Q` families).
pub fn q_value<T: Scalar>(id: MultiplierId, ks: &[i64], coeffs: &EquationCoefficients<T>) -> Result<Complex<T>> {
    if matches!(id, MultiplierId::L(..) | MultiplierId::M(..)) {
        return Err(Error::UnknownMultiplier(format!("{id} is not a q/Q symbol")));
    }
    let ctx = MultCtx::new(coeffs, &PhaseParams::free(), 0);
    Ok(wrap(ValueKind::Imag, raw_value(&ctx, id, ks)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Q25Route {
    Definition,
    ClosedForm,
}

pub fn q2_5_value<T: Scalar>(ks: &[i64], gamma: &T, route: Q25Route) -> Result<Complex<T>> {
    check_arity(5, ks)?;
    let c = EquationCoefficients { alpha: T::zero(), beta: T::zero(), gamma: gamma.clone(), delta: T::zero() };
    let ctx = MultCtx::new(&c, &PhaseParams::free(), 0);
    let v = match route {
        Q25Route::Definition => ctx.q2_5(ks),
        Q25Route::ClosedForm => ctx.q2_5_closed(ks),
    };
    Ok(wrap(ValueKind::Imag, v))
}

#[allow(non_snake_case)]
pub fn L_value<T: Scalar>(
    n: usize,
    i: usize,
    ks: &[i64],
    params: &PhaseParams<T>,
    threshold: i64,
    coeffs: &EquationCoefficients<T>,
) -> Result<Complex<T>> {
    let ctx = MultCtx::new(coeffs, params, threshold);
    Ok(wrap(ValueKind::Real, l_raw(&ctx, n, i, ks)?))
}

#[allow(non_snake_case)]
pub fn M_value<T: Scalar>(
    n: usize,
    i: usize,
    ks: &[i64],
    params: &PhaseParams<T>,
    threshold: i64,
    coeffs: &EquationCoefficients<T>,
) -> Result<Complex<T>> {
    let ctx = MultCtx::new(coeffs, params, threshold);
    Ok(wrap(ValueKind::Imag, m_raw(&ctx, n, i, ks)?))
}

/// Sum of `f` over the distinct arrangements of `ks`; equals `(#arrangements) [f]_sym`.
pub fn arrangement_sum<T: Scalar>(ks: &[i64], mut f: impl FnMut(&[i64]) -> T) -> T {
    let mut acc = T::zero();
    for_each_arrangement(ks, |p| acc = acc.clone() + f(p));
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn rq(p: i64, q: i64) -> Q {
        Q::from_ratio(p, q)
    }

    fn exact(a: i64, b: i64, g: i64, d: i64) -> EquationCoefficients<Q> {
        EquationCoefficients::from_ints(a, b, g, d)
    }

    #[test]
    fn cubic_symbols() {
        let c = exact(0, 0, 5, 1);
        assert_eq!(q_value(MultiplierId::q1_3, &[1, 2, 3], &c).unwrap().im, rq(-100, 1));
        assert_eq!(q_value(MultiplierId::Q3, &[1, 2, 3], &c).unwrap().im, rq(-500, 1));
        assert_eq!(q_value(MultiplierId::q1_5, &[1, 1, 1, 1, 1], &c).unwrap().im, rq(5, 1));
    }

    #[test]
    fn l1_cubic_example() {
        let c = exact(0, 0, 5, 1);
        let v = L_value(3, 1, &[1, 1, 9], &PhaseParams::<Q>::free(), 8, &c).unwrap();
        assert_eq!(v.re, rq(-11, 100));
        assert!(v.im.is_zero());
    }

    #[test]
    fn m_examples() {
        let c = exact(0, 0, 5, 1);
        let p = PhaseParams::<Q>::free();
        assert_eq!(M_value(3, 1, &[1, -1, 1], &p, 8, &c).unwrap().im, rq(-20, 1));
        assert!(M_value(5, 9, &[1, -1, 2, -2, 64], &p, 8, &c).unwrap().im.is_zero());
        assert_eq!(M_value(5, 3, &[1, 1, 1, 1, 1], &p, 8, &c).unwrap().im, rq(-30, 1));
    }

    #[test]
    fn q2_routes_agree() {
        let g = rq(5, 1);
        let a = q2_5_value(&[1, 2, 3, 4, 5], &g, Q25Route::Definition).unwrap();
        let b = q2_5_value(&[1, 2, 3, 4, 5], &g, Q25Route::ClosedForm).unwrap();
        assert_eq!(a, b);
        let p: [Q; 7] = p_polys(1, 2, 3, 4);
        assert_eq!(p[0], rq(10, 1));
        let z = q2_5_value(&[1, -1, 3, 4, 5], &g, Q25Route::ClosedForm).unwrap();
        assert!(z.im.is_zero());
    }

    #[test]
    fn parse_ids() {
        assert_eq!("L5_3".parse::<MultiplierId>().unwrap(), MultiplierId::L(5, 3));
        assert_eq!("M11_1".parse::<MultiplierId>().unwrap(), MultiplierId::M(11, 1));
        assert!("M5_24".parse::<MultiplierId>().is_err());
        assert!("X3_1".parse::<MultiplierId>().is_err());
        assert_eq!(MultiplierId::table().len(), 4 + 8 + 2 + 1 + 23 + 15 + 3 + 1);
    }
}
