//! Symmetrization and extension of multipliers given as evaluation rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest arity for which the average over all permutations is computed directly.
pub const MAX_DIRECT_SYM: usize = 7;

/// Calls `f` once for every permutation of `ks` (Heap's algorithm, `N!` calls with repeats).
pub fn for_each_permutation(ks: &[i64], mut f: impl FnMut(&[i64])) {
    let mut a = ks.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Calls `f` once for every distinct rearrangement of the multiset `ks`.
pub fn for_each_arrangement(ks: &[i64], mut f: impl FnMut(&[i64])) {
    let mut a = ks.to_vec();
    a.sort_unstable();
    loop {
        f(&a);
        // next lexicographic permutation
        let n = a.len();
        if n < 2 {
            return;
        }
        let mut i = n - 1;
        while i > 0 && a[i - 1] >= a[i] {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let mut j = n - 1;
        while a[j] <= a[i - 1] {
            j -= 1;
        }
        a.swap(i - 1, j);
        a[i..].reverse();
    }
}

/// `N! / prod(multiplicity!)`: the number of distinct arrangements of `ks`.
pub fn arrangement_count(ks: &[i64]) -> u64 {
    let mut s = ks.to_vec();
    s.sort_unstable();
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let mut denom = 1u64;
    let mut run = 1usize;
    for w in s.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= fact(run);
            run = 1;
        }
    }
    denom *= fact(run);
    fact(ks.len()) / denom
}

/// `[m]_sym(k) = (1/N!) sum_sigma m(k_sigma)`, computed directly for `N <= 7`.
pub fn symmetrize_value<T: Scalar>(mut m: impl FnMut(&[i64]) -> T, ks: &[i64]) -> Result<T> {
    let n = ks.len();
    if n > MAX_DIRECT_SYM {
        return Err(Error::SymmetrizeTooLarge(n));
    }
    // Average over distinct arrangements: each one occurs prod(mult!) times among the N! permutations.
    let mut acc = T::zero();
    for_each_arrangement(ks, |p| acc = acc.clone() + m(p));
    Ok(acc / T::from_i64(arrangement_count(ks) as i64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Extension {
    /// `m(k_1, .., k_{N-1}, k_{N..N+j})`
    Ext1,
    /// `m(k_{j+1}, .., k_{j+N})`
    Ext2,
}

/// Arguments of the `N`-multiplier seen by its `(N+j)`-extension, written into `out`.
pub fn extend_args(which: Extension, n: usize, ks: &[i64], out: &mut [i64]) -> Result<()> {
    let total = ks.len();
    if total <= n || out.len() != n {
        return Err(Error::ArityMismatch { expected: n + 1, got: total });
    }
    let j = total - n;
    match which {
        Extension::Ext1 => {
            out[..n - 1].copy_from_slice(&ks[..n - 1]);
            out[n - 1] = ks[n - 1..].iter().sum();
        }
        Extension::Ext2 => out.copy_from_slice(&ks[j..j + n]),
    }
    Ok(())
}

/// `[m]_ext(k_1..k_{N+j})` for an `N`-multiplier `m`.
pub fn extend_value<T>(which: Extension, m: impl Fn(&[i64]) -> T, n: usize, ks: &[i64]) -> Result<T> {
    let mut args = vec![0i64; n];
    extend_args(which, n, ks, &mut args)?;
    Ok(m(&args))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn linear_symmetrization() {
        let v: BigRational = symmetrize_value(|k| BigRational::from_i64(k[0]), &[3, 8]).unwrap();
        assert_eq!(v, BigRational::from_ratio(11, 2));
        assert!(symmetrize_value(|_| 0.0, &[0; 9]).is_err());
    }

    #[test]
    fn arrangements_match_permutation_average() {
        let ks = [1, 1, 2, 5, 5];
        let m = |k: &[i64]| (k[0] * 7 + k[1] * k[2] - k[4] * k[3] * k[0]) as f64;
        let mut full = 0.0;
        let mut cnt = 0;
        for_each_permutation(&ks, |p| {
            full += m(p);
            cnt += 1;
        });
        assert_eq!(cnt, 120);
        let direct = symmetrize_value(m, &ks).unwrap();
        assert!((full / 120.0 - direct).abs() < 1e-12);
        assert_eq!(arrangement_count(&ks), 30);
    }

    #[test]
    fn three_r3_at_alternating_tuple() {
        // [3 chi_R3]_sym = 3 * (1/6) * #{sigma : k_s1 = -k_s2 = k_s3}
        let r3 = |k: &[i64]| if k[0] == -k[1] && k[0] == k[2] { 1.0 } else { 0.0 };
        let v = 3.0 * symmetrize_value(r3, &[1, -1, 1]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn extensions() {
        let m = |k: &[i64]| k.to_vec();
        assert_eq!(extend_value(Extension::Ext1, m, 3, &[1, 2, 3, 4, 5]).unwrap(), vec![1, 2, 12]);
        assert_eq!(extend_value(Extension::Ext2, m, 3, &[1, 2, 3, 4, 5]).unwrap(), vec![3, 4, 5]);
    }
}
