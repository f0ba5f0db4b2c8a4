//! Deterministic tuple generators shared by the checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CertificationReport;
use crate::scalar::rational_to_f64;

pub(crate) type Q = BigRational;

/// Independent stream per check so adding a check never reshuffles another one's samples.
pub(crate) fn stream(seed: u64, salt: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in salt.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Integer with `log |x|` uniform on `[log lo, log hi]`.
pub(crate) fn log_uniform(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    let (a, b) = ((lo.max(1) as f64).ln(), (hi.max(1) as f64).ln());
    let x = rng.gen_range(a..=b).exp().round() as i64;
    x.clamp(lo, hi)
}

pub(crate) fn sign(rng: &mut ChaCha8Rng) -> i64 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

pub(crate) fn small(rng: &mut ChaCha8Rng, m: i64) -> i64 {
    rng.gen_range(-m..=m)
}

/// Calls `f` on every tuple of `[-r, r]^n`.
pub(crate) fn for_each_box(n: usize, r: i64, mut f: impl FnMut(&[i64])) {
    let mut ks = vec![-r; n];
    loop {
        f(&ks);
        let mut i = 0;
        while i < n {
            ks[i] += 1;
            if ks[i] > r {
                ks[i] = -r;
                i += 1;
            } else {
                break;
            }
        }
        if i == n {
            return;
        }
    }
}

/// Calls `f` on every nondecreasing tuple of `[-r, r]^n`, i.e. once per multiset.
pub(crate) fn for_each_multiset(n: usize, r: i64, mut f: impl FnMut(&[i64])) {
    fn rec(ks: &mut Vec<i64>, n: usize, lo: i64, r: i64, f: &mut dyn FnMut(&[i64])) {
        if ks.len() == n {
            f(ks);
            return;
        }
        for k in lo..=r {
            ks.push(k);
            rec(ks, n, k, r, f);
            ks.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, -r, r, &mut f);
}

pub(crate) fn big_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

pub(crate) fn abs_f64(x: &Q) -> f64 {
    rational_to_f64(&x.abs())
}

/// `<x> = (1 + x^2)^{1/2}`
pub(crate) fn jb(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Dyadic scale index `floor(log2 |x|)` (0 for `|x| <= 1`).
pub(crate) fn dyadic(x: i64) -> u32 {
    let a = x.unsigned_abs();
    if a <= 1 {
        0
    } else {
        63 - a.leading_zeros()
    }
}

/// Allowed spread `max / min` of the worst ratio across the top three scales.
pub(crate) const STABILITY: f64 = 1.10;

#[derive(Default)]
pub(crate) struct ScaleRow {
    pub examined: u64,
    pub worst: f64,
    pub witness: Vec<i64>,
}

pub(crate) fn record(rows: &mut BTreeMap<u32, ScaleRow>, s: u32, ks: &[i64], ratio: f64) {
    let r = rows.entry(s).or_default();
    r.examined += 1;
    if ratio > r.worst {
        r.worst = ratio;
        r.witness = ks.to_vec();
    }
}

/// How the per-scale worst ratios are judged.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rule {
    /// A majorant that is attained: the top three scales agree within 10%.
    Stable,
    /// A constant majorant: the top three scales may not exceed the lower ones by more than 10%.
    NoGrowth,
    /// Either of the above; the outcome is recorded as `attained` (1 or 0).
    Either,
}

/// Reports the per-scale table and applies `rule` to the top three nonempty scales.
pub(crate) fn stability(rep: &mut CertificationReport, rows: &BTreeMap<u32, ScaleRow>, scales: &[u32], rule: Rule) {
    for &s in scales {
        match rows.get(&s) {
            Some(r) if r.examined > 0 => {
                rep.constant(format!("worst_ratio_2^{s:02}"), r.worst);
                rep.witness(&r.witness, format!("scale 2^{s}: worst ratio {:.6}", r.worst));
            }
            _ => rep.note(format!("scale 2^{s}: no tuple meets the cutoffs")),
        }
    }
    let top: Vec<(&u32, &ScaleRow)> = rows.iter().filter(|(_, r)| r.examined > 0).rev().take(3).collect();
    if top.len() < 3 {
        rep.violation(&[], "fewer than three populated scales");
        return;
    }
    let hi = top.iter().map(|(_, r)| r.worst).fold(0.0, f64::max);
    let lo = top.iter().map(|(_, r)| r.worst).fold(f64::INFINITY, f64::min);
    if !(lo > 0.0 && hi.is_finite()) {
        rep.violation(&top[0].1.witness, "worst ratio is zero or not finite");
        return;
    }
    let spread = hi / lo;
    let cut = *top[2].0;
    let below = rows.range(..cut).map(|(_, r)| r.worst).fold(0.0, f64::max);
    let growth = if below > 0.0 { Some(hi / below) } else { None };
    let (s_hi, s_lo) = (*top[0].0 as f64, *top[2].0 as f64);
    let slope = (top[0].1.worst / top[2].1.worst).log2() / (s_hi - s_lo);
    if rule != Rule::NoGrowth {
        rep.constant("top3_spread", spread);
    }
    if rule != Rule::Stable {
        rep.constant("sup_ratio", hi.max(below));
        rep.constant("log2_slope_top3", slope);
        if let Some(g) = growth {
            rep.constant("top3_over_lower", g);
        }
    }
    let stable = spread <= STABILITY;
    // no growth: the top scales neither exceed the lower ones nor rise among themselves
    let flat = growth.map_or(true, |g| g <= STABILITY) && top[0].1.worst <= STABILITY * top[2].1.worst;
    match rule {
        Rule::Stable if !stable => {
            rep.violation(&top[0].1.witness, format!("worst ratio varies by {spread:.4} over the top three scales"));
        }
        Rule::NoGrowth if !flat => {
            let g = growth.unwrap_or(f64::NAN);
            rep.violation(&top[0].1.witness, format!("worst ratio grows by {g:.4} at the top scales"));
        }
        Rule::Either => {
            rep.constant("attained", if stable { 1.0 } else { 0.0 });
            if stable {
                rep.note(format!("attained: worst ratio stable within {spread:.4} over the top three scales"));
            } else if flat {
                rep.note(format!("decaying: worst ratio falls with slope {slope:.3} per octave at the top scales"));
            } else {
                rep.violation(
                    &top[0].1.witness,
                    format!("worst ratio varies by {spread:.4} and grows by {:.4} at the top scales", growth.unwrap_or(f64::NAN)),
                );
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multisets_count() {
        let mut c = 0;
        for_each_multiset(3, 2, |_| c += 1);
        // C(5 + 3 - 1, 3)
        assert_eq!(c, 35);
        let mut b = 0;
        for_each_box(3, 2, |_| b += 1);
        assert_eq!(b, 125);
    }

    #[test]
    fn dyadic_index() {
        assert_eq!(dyadic(1), 0);
        assert_eq!(dyadic(-1024), 10);
        assert_eq!(dyadic(1025), 10);
    }

    #[test]
    fn huge_rationals_convert() {
        let n = BigInt::from(3) << 2000usize;
        let d = BigInt::from(2) << 2000usize;
        assert!((abs_f64(&Q::new(n, d)) - 1.5).abs() < 1e-12);
    }
}
