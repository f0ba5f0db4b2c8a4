//! Indicator functions that carve the wavenumber lattice into interaction regimes.
//!
//! Every cutoff is an exact 0/1 decision on integers; fractional powers are compared
//! after raising both sides to integer powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::pow_le;

/// Cutoff tags. The arity is taken from the tuple; each tag accepts only the arities it is defined for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutoffKind {
    /// `max |k_j| <= L`
    Le(i64),
    /// `max |k_j| > L`
    Gt(i64),
    /// Last entry dominates: `8^{N-2} max_{j<N} |k_j| < |k_N|`.
    H1,
    H21,
    H22,
    /// Comparable frequencies: the complement of the three symmetrized high-low regimes.
    H3,
    /// Non-resonant triple (`k12 k23 k13 != 0`); at arity five the product of both groupings.
    NR1,
    /// `k12 k34 k1234 != 0`
    NR2,
    /// The first `N-1` entries sum to zero.
    R1,
    /// `k12 k34 = 0`
    R2,
    /// `k1 = -k2 = k3`
    R3,
    R4,
    R5,
    /// `k1 = k2 = k3 = 0`
    R6,
    R7,
    A1,
    A2,
    A3,
    A4,
    NR11,
    NR12,
    NR21,
    NR22,
}

impl CutoffKind {
    /// Arities for which the cutoff is defined (`None` means any arity).
    pub fn arities(&self) -> Option<&'static [usize]> {
        use CutoffKind::*;
        Some(match self {
            Le(_) | Gt(_) => return None,
            H1 | R1 => &[3, 5, 7],
            H21 | H22 | H3 | R3 | R6 => &[3],
            NR1 => &[3, 5],
            NR2 | R2 | R4 | A2 | A3 => &[5],
            R5 | A1 | NR11 | NR12 | NR21 | NR22 => &[5, 7],
            R7 | A4 => &[7],
        })
    }
}

/// Evaluate a cutoff on a tuple.
pub fn cutoff(kind: CutoffKind, ks: &[i64]) -> Result<bool> {
    if let Some(ar) = kind.arities() {
        if !ar.contains(&ks.len()) {
            return Err(Error::ArityMismatch { expected: ar[0], got: ks.len() });
        }
    }
    use CutoffKind::*;
    Ok(match kind {
        Le(l) => max_abs(ks) <= l,
        Gt(l) => max_abs(ks) > l,
        H1 => h1(ks),
        H21 => h21(ks[0], ks[1], ks[2]),
        H22 => h22(ks[0], ks[1], ks[2]),
        H3 => h3(ks[0], ks[1], ks[2]),
        NR1 => {
            if ks.len() == 3 {
                nr1(ks[0], ks[1], ks[2])
            } else {
                nr1_5(ks)
            }
        }
        NR2 => nr2(ks),
        R1 => r1(ks),
        R2 => r2(ks),
        R3 => r3(ks[0], ks[1], ks[2]),
        R4 => r4(ks),
        R5 => r5(ks),
        R6 => ks.iter().all(|&k| k == 0),
        R7 => r7(ks),
        A1 => a1(ks),
        A2 => a2(ks),
        A3 => a3(ks),
        A4 => a4(ks),
        NR11 => nr_ij(ks, 1, 1),
        NR12 => nr_ij(ks, 1, 2),
        NR21 => nr_ij(ks, 2, 1),
        NR22 => nr_ij(ks, 2, 2),
    })
}

#[inline]
pub fn max_abs(ks: &[i64]) -> i64 {
    ks.iter().map(|k| k.abs()).max().unwrap_or(0)
}

/// Largest and second-largest `|k_j|` (with multiplicity).
#[inline]
pub fn max_sec(ks: &[i64]) -> (i64, i64) {
    let (mut m, mut s) = (0i64, 0i64);
    for &k in ks {
        let a = k.abs();
        if a > m {
            s = m;
            m = a;
        } else if a > s {
            s = a;
        }
    }
    (m, s)
}

/// `8^{N-2}`, the separation used by the arity-`N` high-low cutoffs.
#[inline]
pub fn separation(n: usize) -> i64 {
    8i64.pow(n as u32 - 2)
}

#[inline]
pub fn h1(ks: &[i64]) -> bool {
    let n = ks.len();
    let m = max_abs(&ks[..n - 1]) as i128;
    (separation(n) as i128) * m < ks[n - 1].abs() as i128
}

#[inline]
pub fn h1_3(k1: i64, k2: i64, k3: i64) -> bool {
    8 * k1.abs().max(k2.abs()) < k3.abs()
}

#[inline]
fn comparable(a: i64, b: i64) -> bool {
    let (a, b) = (a.abs(), b.abs());
    a <= 8 * b && b <= 8 * a
}

#[inline]
pub fn h21(k1: i64, k2: i64, k3: i64) -> bool {
    let m = (k2 + k3).abs().min(k2.abs()).min(k3.abs());
    16 * k1.abs() < m && comparable(k2, k3)
}

#[inline]
pub fn h22(k1: i64, k2: i64, k3: i64) -> bool {
    let s = 16 * k1.abs();
    (k2 + k3).abs() <= s && s < k2.abs().min(k3.abs()) && comparable(k2, k3)
}

/// `[3 chi_H1]_sym`: number of slots that dominate the other two.
#[inline]
pub fn sym3_h1(k1: i64, k2: i64, k3: i64) -> i32 {
    h1_3(k2, k3, k1) as i32 + h1_3(k1, k3, k2) as i32 + h1_3(k1, k2, k3) as i32
}

/// `[3 chi_H2,1]_sym`: the small slot placed first.
#[inline]
pub fn sym3_h21(k1: i64, k2: i64, k3: i64) -> i32 {
    h21(k1, k2, k3) as i32 + h21(k2, k1, k3) as i32 + h21(k3, k1, k2) as i32
}

#[inline]
pub fn sym3_h22(k1: i64, k2: i64, k3: i64) -> i32 {
    h22(k1, k2, k3) as i32 + h22(k2, k1, k3) as i32 + h22(k3, k1, k2) as i32
}

/// `1 - [3 H1]_sym - [3 H21]_sym - [3 H22]_sym` as an integer (0 or 1 on every tuple).
#[inline]
pub fn h3_value(k1: i64, k2: i64, k3: i64) -> i32 {
    1 - sym3_h1(k1, k2, k3) - sym3_h21(k1, k2, k3) - sym3_h22(k1, k2, k3)
}

#[inline]
pub fn h3(k1: i64, k2: i64, k3: i64) -> bool {
    h3_value(k1, k2, k3) == 1
}

/// `[5 chi_H1^{(5)}]_sym`: number of slots that dominate the other four by `8^3`.
pub fn sym5_h1(ks: &[i64]) -> i32 {
    let mut c = 0;
    for j in 0..ks.len() {
        let mut m = 0i64;
        for (i, k) in ks.iter().enumerate() {
            if i != j {
                m = m.max(k.abs());
            }
        }
        if (separation(ks.len()) as i128) * (m as i128) < ks[j].abs() as i128 {
            c += 1;
        }
    }
    c
}

#[inline]
pub fn nr1(k1: i64, k2: i64, k3: i64) -> bool {
    (k1 + k2) != 0 && (k2 + k3) != 0 && (k1 + k3) != 0
}

#[inline]
pub fn nr1_5(ks: &[i64]) -> bool {
    nr1(ks[0], ks[1], ks[2] + ks[3] + ks[4]) && nr1(ks[2], ks[3], ks[4])
}

#[inline]
pub fn nr2(ks: &[i64]) -> bool {
    let (a, b) = (ks[0] + ks[1], ks[2] + ks[3]);
    a != 0 && b != 0 && a + b != 0
}

#[inline]
pub fn r1(ks: &[i64]) -> bool {
    ks[..ks.len() - 1].iter().sum::<i64>() == 0
}

#[inline]
pub fn r2(ks: &[i64]) -> bool {
    ks[0] + ks[1] == 0 || ks[2] + ks[3] == 0
}

#[inline]
pub fn r3(k1: i64, k2: i64, k3: i64) -> bool {
    k1 == -k2 && k1 == k3
}

pub fn r4(ks: &[i64]) -> bool {
    let (m, s) = max_sec(&ks[..4]);
    let (a, b) = ((ks[0] + ks[1]).abs(), (ks[2] + ks[3]).abs());
    m <= 16 * s && a <= 16 * b && b <= 16 * a && pow_le(ks[4], 4, 5, 512, m)
}

pub fn r5(ks: &[i64]) -> bool {
    let n = ks.len();
    let (m, s) = max_sec(&ks[..n - 1]);
    m <= 16 * s && pow_le(ks[n - 1], 4, 5, separation(n), m)
}

pub fn r7(ks: &[i64]) -> bool {
    let s6: i64 = ks[..6].iter().sum();
    if s6 != 0 {
        return false;
    }
    let p = (ks[0] + ks[1] + ks[2] + ks[3]) as i128
        * (ks[2] + ks[3] + ks[4] + ks[5]) as i128
        * (ks[0] + ks[1] + ks[4] + ks[5]) as i128;
    p != 0 && a4(ks)
}

#[inline]
pub fn a1(ks: &[i64]) -> bool {
    let (m, s) = max_sec(&ks[..ks.len() - 1]);
    16 * s < m
}

#[inline]
pub fn a2(ks: &[i64]) -> bool {
    16 * (ks[0] + ks[1]).abs() < (ks[2] + ks[3]).abs()
}

#[inline]
pub fn a3(ks: &[i64]) -> bool {
    512 * ks[0].abs().max(ks[1].abs()) < (ks[2] + ks[3] + ks[4]).abs()
}

/// `8^5 max_{j<=6} |k_j| < |k_7|^{3/5}`.
#[inline]
pub fn a4(ks: &[i64]) -> bool {
    !pow_le(ks[6], 3, 5, 32768, max_abs(&ks[..6]))
}

/// Grouped high-low cutoffs `chi_NR(i,j)` at arity five or seven.
///
/// The outer factor is `H1` of arity `N-2` on `(k1..k_{N-3}, K)` (`j = 1`) or on
/// `(K, k2..k_{N-3}, k1)` (`j = 2`), where `K` is the sum of the last three entries;
/// the inner factor is `H1` (`i = 1`) or `H2,1` (`i = 2`) on the last three entries.
pub fn nr_ij(ks: &[i64], i: u8, j: u8) -> bool {
    let n = ks.len();
    let (x, y, z) = (ks[n - 3], ks[n - 2], ks[n - 1]);
    let inner = if i == 1 { h1_3(x, y, z) } else { h21(x, y, z) };
    if !inner {
        return false;
    }
    let big = x + y + z;
    let head = &ks[..n - 3];
    let sep = separation(n - 2) as i128;
    if j == 1 {
        sep * (max_abs(head) as i128) < big.abs() as i128
    } else {
        // (K, k2, .., k_{N-3}, k1): k1 is the dominant slot.
        let m = max_abs(&head[1..]).max(big.abs());
        sep * (m as i128) < head[0].abs() as i128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h1_examples() {
        assert!(cutoff(CutoffKind::H1, &[1, 1, 9]).unwrap());
        assert!(!cutoff(CutoffKind::H1, &[1, 1, 8]).unwrap());
        assert!(cutoff(CutoffKind::H1, &[1, -1, 2, 0, 1025]).unwrap());
        assert!(!cutoff(CutoffKind::H1, &[1, -1, 2, 0, 1024]).unwrap());
    }

    #[test]
    fn r1_example() {
        assert!(cutoff(CutoffKind::R1, &[2, -2, 5]).unwrap());
        assert!(!cutoff(CutoffKind::R1, &[2, -1, 5]).unwrap());
    }

    #[test]
    fn arity_errors() {
        assert!(cutoff(CutoffKind::H21, &[1, 2, 3, 4, 5]).is_err());
        assert!(cutoff(CutoffKind::R7, &[1, 2, 3]).is_err());
        assert!(cutoff(CutoffKind::Gt(3), &[1, 2, 3, 4]).is_ok());
    }

    #[test]
    fn h_family_partitions_unity() {
        let r = 12;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let v = h3_value(a, b, c);
                    assert!(v == 0 || v == 1, "({a},{b},{c}) -> {v}");
                }
            }
        }
    }

    #[test]
    fn fractional_power_cutoffs() {
        // 512 * 1 = 512 and 512^(5/4) = 2435.5.., so |k5| <= 2435 keeps R5 on.
        assert!(cutoff(CutoffKind::R5, &[1, 1, 1, 1, 2435]).unwrap());
        assert!(!cutoff(CutoffKind::R5, &[1, 1, 1, 1, 2436]).unwrap());
        // 32768^(5/3) = 3.5184e7 * ...; A4 flips between k7 = 2^25 and 2^25 + 1.
        assert!(!cutoff(CutoffKind::A4, &[1, 0, 0, 0, 0, 0, 1 << 25]).unwrap());
        assert!(cutoff(CutoffKind::A4, &[1, 0, 0, 0, 0, 0, (1 << 25) + 1]).unwrap());
    }
}
