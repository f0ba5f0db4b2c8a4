//! Resonant pairs whose individual derivative loss cancels.
//!
//! Each check sweeps fixed shapes across dyadic scales of the dominant frequency and records
//! the worst `|combined| / majorant` per scale. A majorant that is attained is certified as
//! scale stability (the worst ratio over the top three scales varies by at most 10%); a constant
//! majorant is certified as absence of growth at the top scales.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::sampling::{abs_f64, for_each_multiset, jb, record, stability, Rule, Q};
use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff as cf;
use crate::error::{Error, Result};
use crate::multiplier::{m_raw, MultCtx};
use crate::scalar::Scalar;
use crate::sym::{arrangement_count, for_each_arrangement};

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    vec![
        (
            "cancellation-quintic-loss",
            "|M_1^(5) + M_9^(5)| <~ (max{|k1 k2|, |k3 k4|} / |k12| + max_{j<=4} |k_j|) chi_H1 chi_R1 (1 - chi_R2), \
             while |M_1^(5)| ~ |M_9^(5)| ~ |k5| individually"
                .into(),
        ),
        (
            "cancellation-quintic-grouped",
            "|M_11^(5) + M_13^(5)| <~ max_{j<=4} |k_j|^2 / |k12| chi_H1 chi_R1 (1 - chi_R2)".into(),
        ),
        (
            "cancellation-septic-symmetrized",
            "|[M_6^(7)]_sym| <~ 1, while |M_6^(7)(1, 1, 1, 1, -2, -2, k7)| ~ |k7|".into(),
        ),
    ]
}

/// The cancelling combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cancellation {
    /// `M_1^(5) + M_9^(5)`
    QuinticLoss,
    /// `M_11^(5) + M_13^(5)`
    QuinticGrouped,
    /// `[M_6^(7)]_sym`
    SepticSymmetrized,
}

impl Cancellation {
    pub fn arity(&self) -> usize {
        match self {
            Cancellation::SepticSymmetrized => 7,
            _ => 5,
        }
    }
}

impl fmt::Display for Cancellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cancellation::QuinticLoss => "m1+m9",
            Cancellation::QuinticGrouped => "m11+m13",
            Cancellation::SepticSymmetrized => "sym-m6",
        })
    }
}

impl FromStr for Cancellation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1+m9" | "quintic-loss" => Ok(Cancellation::QuinticLoss),
            "m11+m13" | "quintic-grouped" => Ok(Cancellation::QuinticGrouped),
            "sym-m6" | "septic-symmetrized" => Ok(Cancellation::SepticSymmetrized),
            _ => Err(Error::InvalidConfig(format!("unknown cancellation `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationValue {
    /// Imaginary coefficient of the combined multiplier, computed exactly and then rounded.
    pub value: f64,
    pub majorant: f64,
    /// `|value| / majorant` (0 off support)
    pub ratio: f64,
}

/// Exact combined value of a cancelling pair at `ks` and its ratio to the majorant.
pub fn cancellation_value(
    which: Cancellation,
    ks: &[i64],
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
) -> Result<CancellationValue> {
    if ks.len() != which.arity() {
        return Err(Error::ArityMismatch { expected: which.arity(), got: ks.len() });
    }
    let ctx = MultCtx::new(&coeffs.to_exact(), &params.to_exact(), 0);
    let v = combined(&ctx, which, ks)?;
    Ok(finish_value(which, ks, &v))
}

fn finish_value(which: Cancellation, ks: &[i64], v: &Q) -> CancellationValue {
    let value = v.as_f64();
    let majorant = majorant(which, ks);
    let ratio = if v.is_zero() { 0.0 } else { abs_f64(v) / majorant };
    CancellationValue { value, majorant, ratio }
}

fn combined(ctx: &MultCtx<Q>, which: Cancellation, ks: &[i64]) -> Result<Q> {
    Ok(match which {
        Cancellation::QuinticLoss => m_raw(ctx, 5, 1, ks)? + m_raw(ctx, 5, 9, ks)?,
        Cancellation::QuinticGrouped => m_raw(ctx, 5, 11, ks)? + m_raw(ctx, 5, 13, ks)?,
        Cancellation::SepticSymmetrized => septic_sym(ctx, ks)?,
    })
}

/// `[M_6^(7)]_sym`. Only arrangements that keep the dominant entry last can meet `chi_H1`, so the
/// sum runs over arrangements of the other six.
fn septic_sym(ctx: &MultCtx<Q>, ks: &[i64]) -> Result<Q> {
    let (imax, _) = ks.iter().enumerate().max_by_key(|(_, k)| k.abs()).expect("arity seven");
    let mut head: Vec<i64> = ks.iter().enumerate().filter(|&(i, _)| i != imax).map(|(_, &k)| k).collect();
    let top = ks[imax];
    if head.iter().any(|&k| k.abs() == top.abs()) {
        // no entry dominates: chi_H1 vanishes on every arrangement
        return Ok(Q::zero());
    }
    let mut acc = Q::zero();
    let mut err = None;
    let mut full = [0i64; 7];
    full[6] = top;
    for_each_arrangement(&head, |p| {
        full[..6].copy_from_slice(p);
        match m_raw(ctx, 7, 6, &full) {
            Ok(v) => acc += v,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    head.push(top);
    Ok(acc / <Q as Scalar>::from_i64(arrangement_count(&head) as i64))
}

fn majorant(which: Cancellation, ks: &[i64]) -> f64 {
    match which {
        Cancellation::QuinticLoss => {
            let p = ((ks[0] as f64) * (ks[1] as f64)).abs().max(((ks[2] as f64) * (ks[3] as f64)).abs());
            p / jb((ks[0] + ks[1]) as f64) + cf::max_abs(&ks[..4]) as f64
        }
        Cancellation::QuinticGrouped => {
            let m = cf::max_abs(&ks[..4]) as f64;
            m * m / jb((ks[0] + ks[1]) as f64)
        }
        Cancellation::SepticSymmetrized => 1.0,
    }
}

pub(crate) fn run(ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut out = Vec::new();
    for &id in ids {
        let a = anchor_of(&cat, id);
        out.push(match id {
            "cancellation-quintic-loss" => quintic(id, &a, Cancellation::QuinticLoss, opts)?,
            "cancellation-quintic-grouped" => quintic(id, &a, Cancellation::QuinticGrouped, opts)?,
            "cancellation-septic-symmetrized" => septic(id, &a, opts)?,
            _ => continue,
        });
    }
    Ok(out)
}

fn quintic_ctx(which: Cancellation, opts: &CertifyOptions) -> MultCtx<Q> {
    let c = match which {
        Cancellation::QuinticGrouped => EquationCoefficients::<Q>::from_ints(1, 1, 2, 1),
        _ => EquationCoefficients::<Q>::from_ints(2, 3, 5, 1),
    };
    let p = PhaseParams { gamma: <Q as Scalar>::from_i64(2), e1: <Q as Scalar>::from_ratio(1, 2) };
    MultCtx::new(&c, &p, 0).perturbed(opts.perturb)
}

/// Heads `(k1..k4)` with `k1234 = 0`, `k12 k34 != 0` and `max |k_j| <= a`: a grid of fixed
/// proportions of `a` plus near-resonant pairs `k12 = d` small.
fn quintic_heads(a: i64, quick: bool) -> Vec<[i64; 4]> {
    let grid: &[(i64, i64)] = if quick {
        &[(-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1)]
    } else {
        &[(-1, 1), (-3, 4), (-1, 2), (-1, 4), (0, 1), (1, 4), (1, 2), (3, 4), (1, 1)]
    };
    let at = |&(p, q): &(i64, i64)| (2 * p * a + q).div_euclid(2 * q);
    let mut out = Vec::new();
    for c1 in grid {
        for c2 in grid {
            for c3 in grid {
                let (k1, k2, k3) = (at(c1), at(c2), at(c3));
                out.push([k1, k2, k3, -(k1 + k2 + k3)]);
            }
            for d in [1, 2, 5] {
                let (k1, k3) = (at(c1), at(c2));
                out.push([k1, d - k1, k3, -d - k3]);
            }
        }
    }
    out.retain(|h| cf::max_abs(h) <= a && h[0] + h[1] != 0 && h[2] + h[3] != 0);
    out.sort_unstable();
    out.dedup();
    out
}

fn quintic(id: &str, anchor: &str, which: Cancellation, opts: &CertifyOptions) -> Result<CertificationReport> {
    let ctx = quintic_ctx(which, opts);
    let scales: Vec<u32> = (8..=16).collect();
    let mut rep = CertificationReport::new(
        id,
        anchor,
        "|k5| in [2^s, 2^{s+1}) for s = 8..16, k1234 = 0, k12 k34 != 0, max_{j<=4} |k_j| <= (|k5| - 1) / 512, \
         heads at fixed proportions of the largest admissible size; exact rationals",
    );
    let mut rows = BTreeMap::new();
    for &s in &scales {
        let base = 1i64 << s;
        for k5 in [base, -base, base + base / 2 + 1, -(base + base / 3)] {
            let heads = quintic_heads((k5.abs() - 1) / 512, opts.quick);
            for h in heads {
                let ks = [h[0], h[1], h[2], h[3], k5];
                if !(cf::h1(&ks) && cf::r1(&ks) && !cf::r2(&ks)) {
                    continue;
                }
                rep.examined += 1;
                let v = combined(&ctx, which, &ks)?;
                let cv = finish_value(which, &ks, &v);
                if !cv.ratio.is_finite() {
                    rep.violation(&ks, "non-finite ratio");
                }
                record(&mut rows, s, &ks, cv.ratio);
            }
        }
    }
    stability(&mut rep, &rows, &scales, Rule::Stable);
    growth_control(&mut rep, &ctx, which)?;
    // the individual terms do lose a derivative
    let (m_lo, m_hi) = if which == Cancellation::QuinticLoss { (1, 9) } else { (11, 13) };
    let mut best: Option<(f64, Vec<i64>)> = None;
    let k5 = 10_007i64;
    for h in quintic_heads(4, false) {
        let ks = [h[0], h[1], h[2], h[3], k5];
        if !cf::h1(&ks) {
            continue;
        }
        let lone = abs_f64(&m_raw(&ctx, 5, m_hi, &ks)?) / jb(k5 as f64);
        if best.as_ref().map_or(true, |b| lone > b.0) {
            best = Some((lone, ks.to_vec()));
        }
    }
    match best {
        Some((r, ks)) if r >= 0.1 => {
            let other = abs_f64(&m_raw(&ctx, 5, m_lo, &ks)?) / jb(k5 as f64);
            rep.constant(format!("single_m{m_hi}_over_k5"), r);
            rep.constant(format!("single_m{m_lo}_over_k5"), other);
            rep.witness(&ks, format!("uncancelled |M_{m_hi}| / <k5> = {r:.4}, |M_{m_lo}| / <k5> = {other:.4}"));
        }
        Some((r, ks)) => rep.violation(&ks, format!("largest |M_{m_hi}| / <k5> found is {r:.4} < 0.1")),
        None => rep.violation(&[], "no loss witness in the search box"),
    }
    Ok(rep.finish())
}

/// The sweep is able to see a derivative loss: on fixed small heads the uncancelled term
/// outgrows the majorant by about a factor 2 per scale.
fn growth_control(rep: &mut CertificationReport, ctx: &MultCtx<Q>, which: Cancellation) -> Result<()> {
    let m = if which == Cancellation::QuinticLoss { 9 } else { 13 };
    let worst = |s: u32| -> Result<f64> {
        let mut w = 0.0f64;
        for h in quintic_heads(2, true) {
            let ks = [h[0], h[1], h[2], h[3], (1i64 << s) + 1];
            if cf::h1(&ks) && cf::r1(&ks) && !cf::r2(&ks) {
                w = w.max(abs_f64(&m_raw(ctx, 5, m, &ks)?) / majorant(which, &ks));
            }
        }
        Ok(w)
    };
    let (a, b) = (worst(12)?, worst(16)?);
    let g = b / a;
    rep.constant(format!("single_m{m}_growth_2^12_to_2^16"), g);
    if !(g > 8.0) {
        rep.violation(&[], format!("M_{m} alone grows only by {g:.3} over four scales; the sweep cannot see a loss"));
    }
    Ok(())
}

fn septic(id: &str, anchor: &str, opts: &CertifyOptions) -> Result<CertificationReport> {
    let c = EquationCoefficients::<Q>::from_ints(2, 3, 5, 1);
    let p = PhaseParams { gamma: <Q as Scalar>::from_i64(2), e1: <Q as Scalar>::from_ratio(1, 2) };
    let ctx = MultCtx::new(&c, &p, 0).perturbed(opts.perturb);
    // A4 needs |k7|^{3/5} > 8^5 max |k_j|, so with heads in [-2, 2] the sweep starts at 2^27
    let scales: Vec<u32> = if opts.quick { vec![27, 30, 33] } else { (27..=40).collect() };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        "k7 in [2^s, 2^{s+1}) for s = 27..40; heads: all multisets in [-2, 2]^6 summing to zero plus fixed \
         proportions of the largest size allowed by chi_A4; symmetrized over every arrangement of the head; \
         exact rationals",
    );
    let mut heads = Vec::new();
    for_each_multiset(6, 2, |h| {
        if h.iter().sum::<i64>() == 0 {
            heads.push(h.to_vec());
        }
    });
    let mut rows = BTreeMap::new();
    for &s in &scales {
        let base = 1i64 << s;
        for k7 in [base + 1, -(base + base / 2 + 7)] {
            let mut all = heads.clone();
            all.extend(septic_scaled_heads(k7));
            for h in &all {
                let mut ks = h.clone();
                ks.push(k7);
                let v = septic_sym(&ctx, &ks)?;
                if v.is_zero() {
                    continue;
                }
                rep.examined += 1;
                record(&mut rows, s, &ks, abs_f64(&v));
            }
        }
    }
    stability(&mut rep, &rows, &scales, Rule::NoGrowth);
    // before symmetrization the same grouping grows like |k7|
    let mut prev: Option<f64> = None;
    for s in [28u32, 32, 36] {
        let ks = [1, 1, 1, 1, -2, -2, (1i64 << s) + 3];
        let r = abs_f64(&m_raw(&ctx, 7, 6, &ks)?) / ks[6] as f64;
        rep.constant(format!("single_m6_over_k7_2^{s}"), r);
        if r < 1e-3 || prev.is_some_and(|p| (r / p - 1.0).abs() > 0.1) {
            rep.violation(&ks, format!("|M_6^(7)| / |k7| = {r:.4e} does not stay comparable to 1"));
        }
        prev = Some(r);
    }
    rep.witness(&[1, 1, 1, 1, -2, -2, (1 << 36) + 3], "unsymmetrized M_6^(7) ~ |k7|");
    Ok(rep.finish())
}

/// Heads at fixed proportions of `H`, the largest entry size allowed by `8^5 H < |k7|^{3/5}`.
fn septic_scaled_heads(k7: i64) -> Vec<Vec<i64>> {
    // the largest H with (32768 H)^5 < |k7|^3
    let mut h = ((k7.unsigned_abs() as f64).powf(0.6) / 32768.0) as i64 + 1;
    while h > 0 && !crate::phase::pow_le(k7, 3, 5, 32768, h) {
        h += 1;
    }
    h -= 1;
    while h > 0 && crate::phase::pow_le(k7, 3, 5, 32768, h) {
        h -= 1;
    }
    if h < 3 {
        return Vec::new();
    }
    const SHAPES: [[i64; 5]; 6] = [
        [4, 4, 4, 4, -4],
        [4, -2, 1, 4, -4],
        [2, 2, 2, 2, -4],
        [4, 3, -2, -1, -4],
        [4, 4, 2, -4, -2],
        [4, 1, -3, 2, -1],
    ];
    SHAPES
        .iter()
        .filter_map(|sh| {
            let mut v: Vec<i64> = sh.iter().map(|c| (c * h).div_euclid(4)).collect();
            v.push(-v.iter().sum::<i64>());
            (cf::max_abs(&v) <= h).then_some(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_support_is_zero() {
        let p = PhaseParams::new(2.0, 0.5);
        let c = EquationCoefficients::new(2.0, 3.0, 5.0, 1.0);
        // k1234 != 0
        let v = cancellation_value(Cancellation::QuinticLoss, &[1, 2, 3, 4, 100_000], &p, &c).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.ratio, 0.0);
        assert!(cancellation_value(Cancellation::QuinticLoss, &[1, 2, 3], &p, &c).is_err());
    }

    #[test]
    fn heads_meet_constraints() {
        for h in quintic_heads(40, false) {
            assert_eq!(h.iter().sum::<i64>(), 0);
            assert!(cf::max_abs(&h) <= 40 && h[0] + h[1] != 0);
        }
    }

    #[test]
    fn names_round_trip() {
        for c in [Cancellation::QuinticLoss, Cancellation::QuinticGrouped, Cancellation::SepticSymmetrized] {
            assert_eq!(c.to_string().parse::<Cancellation>().unwrap(), c);
        }
    }
}
