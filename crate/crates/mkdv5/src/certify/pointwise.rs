//! Pointwise upper bounds for the boundary (`L`) and remainder (`M`) multipliers.
//!
//! Every check sweeps one shared set of structured shapes across dyadic scales of `k_max`.
//! The shapes put the top frequency last, group the last three entries, or make every entry
//! comparable, and they build near-resonant pairs and vanishing partial sums into the heads.
//! Each multiplier only sees the shapes that land in its support. Ratios are screened in
//! `f64`, and the worst few per scale are recomputed exactly. A bound passes when the worst
//! ratio is stable over the top three scales (the bound is attained) or does not grow there
//! (the bound holds with room to spare). Bounds of size `L^2` are swept over the threshold.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sampling::{abs_f64, dyadic, jb, sign, stability, stream, Rule, ScaleRow, Q};
use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff as cf;
use crate::error::Result;
use crate::multiplier::{l_raw, m_raw, MultCtx};
use crate::scalar::Scalar;

/// Sobolev index used in the weighted bounds.
const S: f64 = 2.0;
/// `L = 64 max(1, |gamma| e1)` with `gamma = 2`, `e1 = 1/2`.
const THRESHOLD: i64 = 64;
/// Candidates per scale recomputed exactly.
const REFINE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bound {
    /// `<k_max>^{-1}`
    InvMax,
    /// `<k_{1..N}>^{-1} <k_max>^{-2}`
    Sum1Max2,
    /// `max{<k1 k2>/<k12>, <k3 k4>/<k34>} <k5>^{-3} chi_H1`
    Pair3,
    /// `<k23>^{-1} <k_max>^{-1} chi_H2,1`
    H21,
    /// `<k23>^{-1} <k_max>^{-1} chi_H2,2`
    H22,
    /// `Lambda_1^{-1} chi_H3`
    H3,
    /// `(max{|k1 k2|/<k12>, |k3 k4|/<k34>} + <n1>^{5/8} <n2>^{5/8}) <k5>^s`
    PairPlus,
    /// `min{<k12>^{-1}, <k34>^{-1}} <n1>^{5/4} <n2>^{5/4} <k5>^s`
    MinPair,
    /// `<n1>^{5/6} <n2>^{5/6} <k7>^s`
    Sept56,
    /// `<n1>^{7/6} <n2>^{7/6} <k5>^{s-1/3}`
    Quint76,
    /// `<max(|k1|,|k2|)>^{s-1/3} <k4>^{7/6} <k5>^{7/6}`
    Outer76,
    /// `<n1>^{5/4} <k7>^{s-1/4}`
    Sept54,
    /// `<k6>^{5/4} <k7>^{s-1/4}`
    Last54,
    /// `L^2`, swept over the threshold
    Square,
}

struct Check {
    id: &'static str,
    n: usize,
    j: usize,
    is_l: bool,
    bound: Bound,
}

const fn l(id: &'static str, n: usize, j: usize, bound: Bound) -> Check {
    Check { id, n, j, is_l: true, bound }
}

const fn m(id: &'static str, n: usize, j: usize, bound: Bound) -> Check {
    Check { id, n, j, is_l: false, bound }
}

const CHECKS: [Check; 32] = [
    l("pointwise-l3-1", 3, 1, Bound::InvMax),
    l("pointwise-l5-2", 5, 2, Bound::InvMax),
    l("pointwise-l5-1", 5, 1, Bound::Sum1Max2),
    l("pointwise-l5-7", 5, 7, Bound::Sum1Max2),
    l("pointwise-l5-8", 5, 8, Bound::Sum1Max2),
    l("pointwise-l7-1", 7, 1, Bound::Sum1Max2),
    l("pointwise-l7-2", 7, 2, Bound::Sum1Max2),
    l("pointwise-l5-3", 5, 3, Bound::Pair3),
    l("pointwise-l5-4", 5, 4, Bound::Pair3),
    l("pointwise-l5-5", 5, 5, Bound::Pair3),
    l("pointwise-l5-6", 5, 6, Bound::Pair3),
    l("pointwise-l3-2", 3, 2, Bound::H21),
    l("pointwise-l3-3", 3, 3, Bound::H22),
    l("pointwise-l3-4", 3, 4, Bound::H3),
    m("pointwise-m5-4", 5, 4, Bound::PairPlus),
    m("pointwise-m5-12", 5, 12, Bound::PairPlus),
    m("pointwise-m5-14", 5, 14, Bound::PairPlus),
    m("pointwise-m5-15", 5, 15, Bound::PairPlus),
    m("pointwise-m5-16", 5, 16, Bound::PairPlus),
    m("pointwise-m5-17", 5, 17, Bound::PairPlus),
    m("pointwise-m5-10", 5, 10, Bound::MinPair),
    m("pointwise-m7-7", 7, 7, Bound::Sept56),
    m("pointwise-m7-8", 7, 8, Bound::Sept56),
    m("pointwise-m7-9", 7, 9, Bound::Sept56),
    m("pointwise-m5-18", 5, 18, Bound::Quint76),
    m("pointwise-m5-22", 5, 22, Bound::Outer76),
    m("pointwise-m7-10", 7, 10, Bound::Sept54),
    m("pointwise-m7-14", 7, 14, Bound::Last54),
    m("pointwise-m5-19", 5, 19, Bound::Square),
    m("pointwise-m5-20", 5, 20, Bound::Square),
    m("pointwise-m7-11", 7, 11, Bound::Square),
    m("pointwise-m7-12", 7, 12, Bound::Square),
];

fn statement(c: &Check) -> String {
    let (n, j) = (c.n, c.j);
    let lhs_l = format!("|L_{j}^({n}) chi_>L|");
    let lhs_m = format!("<k_(1..{n})>^s |M_{j}^({n})|");
    match c.bound {
        Bound::InvMax => format!("{lhs_l} <~ <k_max>^-1"),
        Bound::Sum1Max2 => format!("{lhs_l} <~ <k_(1..{n})>^-1 <k_max>^-2"),
        Bound::Pair3 => format!("{lhs_l} <~ max(<k1 k2>/<k12>, <k3 k4>/<k34>) <k5>^-3 chi_H1"),
        Bound::H21 => format!("{lhs_l} <~ <k23>^-1 <k_max>^-1 chi_H2,1"),
        Bound::H22 => format!("{lhs_l} <~ <k23>^-1 <k_max>^-1 chi_H2,2"),
        Bound::H3 => format!(
            "{lhs_l} <~ chi_H3 / min(<k12><k13>, <k12><k23>, <k13><k23>)"
        ),
        Bound::PairPlus => format!(
            "{lhs_m} <~ (max(|k1 k2|/<k12>, |k3 k4|/<k34>) + <n1>^(5/8) <n2>^(5/8)) <k5>^s, \
             n1, n2 the two largest of |k1|..|k4|"
        ),
        Bound::MinPair => format!(
            "{lhs_m} <~ min(<k12>^-1, <k34>^-1) <n1>^(5/4) <n2>^(5/4) <k5>^s, n1, n2 the two largest of |k1|..|k4|"
        ),
        Bound::Sept56 => {
            format!("{lhs_m} <~ <n1>^(5/6) <n2>^(5/6) <k7>^s, n1, n2 the two largest of |k1|..|k6|")
        }
        Bound::Quint76 => format!(
            "{lhs_m} <~ <n1>^(7/6) <n2>^(7/6) <k5>^(s-1/3), n1, n2 the two largest of |k1|..|k4|"
        ),
        Bound::Outer76 => format!("{lhs_m} <~ <max(|k1|,|k2|)>^(s-1/3) <k4>^(7/6) <k5>^(7/6)"),
        Bound::Sept54 => format!("{lhs_m} <~ <max_(j<=6) |k_j|>^(5/4) <k7>^(s-1/4)"),
        Bound::Last54 => format!("{lhs_m} <~ <k6>^(5/4) <k7>^(s-1/4)"),
        Bound::Square => format!("|M_{j}^({n})| <~ L^2 for L >> max(1, |gamma| e1)"),
    }
}

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    CHECKS.iter().map(|c| (c.id, statement(c))).collect()
}

pub(crate) fn run(ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut pools: BTreeMap<usize, Pool> = BTreeMap::new();
    let mut out = Vec::new();
    for &id in ids {
        let Some(c) = CHECKS.iter().find(|c| c.id == id) else { continue };
        let pool = pools.entry(c.n).or_insert_with(|| Pool::build(c.n, opts));
        let a = anchor_of(&cat, id);
        out.push(if c.bound == Bound::Square { square(c, &a, pool, opts)? } else { sweep(c, &a, pool, opts)? });
    }
    Ok(out)
}

fn params<T: Scalar>() -> (EquationCoefficients<T>, PhaseParams<T>) {
    (EquationCoefficients::from_ints(2, 3, 2, 1), PhaseParams { gamma: T::from_i64(2), e1: T::from_ratio(1, 2) })
}

fn ctx<T: Scalar>(threshold: i64, opts: &CertifyOptions) -> MultCtx<T> {
    let (c, p) = params::<T>();
    MultCtx::new(&c, &p, threshold).perturbed(opts.perturb)
}

fn value<T: Scalar>(ctx: &MultCtx<T>, c: &Check, ks: &[i64]) -> Result<T> {
    if c.is_l {
        // chi_>L
        if cf::max_abs(ks) <= ctx.threshold {
            return Ok(T::zero());
        }
        l_raw(ctx, c.n, c.j, ks)
    } else {
        m_raw(ctx, c.n, c.j, ks)
    }
}

/// `(n1, n2)`: largest and second largest `|k_j|` over the first `m` entries.
fn top2(ks: &[i64], m: usize) -> (f64, f64) {
    let (a, b) = cf::max_sec(&ks[..m]);
    (a as f64, b as f64)
}

/// The weight multiplying `|value|` on the left and the bound on the right.
fn sides(c: &Check, ks: &[i64]) -> (f64, f64) {
    let f = |i: usize| ks[i] as f64;
    let n = ks.len();
    let kmax = cf::max_abs(ks) as f64;
    let total: i64 = ks.iter().sum();
    let wl = if c.is_l { 1.0 } else { jb(total as f64).powf(S) };
    let pair = |i: usize, j: usize| (f(i) * f(j)).abs() / jb(f(i) + f(j));
    let rhs = match c.bound {
        Bound::InvMax => 1.0 / jb(kmax),
        Bound::Sum1Max2 => 1.0 / (jb(total as f64) * jb(kmax).powi(2)),
        Bound::Pair3 => {
            if !cf::h1(ks) {
                0.0
            } else {
                let a = jb(f(0) * f(1)) / jb(f(0) + f(1));
                let b = jb(f(2) * f(3)) / jb(f(2) + f(3));
                a.max(b) / jb(f(4)).powi(3)
            }
        }
        Bound::H21 | Bound::H22 => {
            let inside =
                if c.bound == Bound::H21 { cf::h21(ks[0], ks[1], ks[2]) } else { cf::h22(ks[0], ks[1], ks[2]) };
            if inside {
                1.0 / (jb(f(1) + f(2)) * jb(kmax))
            } else {
                0.0
            }
        }
        Bound::H3 => {
            if cf::h3(ks[0], ks[1], ks[2]) {
                let (a, b, d) = (jb(f(0) + f(1)), jb(f(0) + f(2)), jb(f(1) + f(2)));
                1.0 / (a * b).min(a * d).min(b * d)
            } else {
                0.0
            }
        }
        Bound::PairPlus => {
            let (n1, n2) = top2(ks, 4);
            (pair(0, 1).max(pair(2, 3)) + (jb(n1) * jb(n2)).powf(5.0 / 8.0)) * jb(f(4)).powf(S)
        }
        Bound::MinPair => {
            let (n1, n2) = top2(ks, 4);
            let m = (1.0 / jb(f(0) + f(1))).min(1.0 / jb(f(2) + f(3)));
            m * (jb(n1) * jb(n2)).powf(1.25) * jb(f(4)).powf(S)
        }
        Bound::Sept56 => {
            let (n1, n2) = top2(ks, 6);
            (jb(n1) * jb(n2)).powf(5.0 / 6.0) * jb(f(6)).powf(S)
        }
        Bound::Quint76 => {
            let (n1, n2) = top2(ks, 4);
            (jb(n1) * jb(n2)).powf(7.0 / 6.0) * jb(f(4)).powf(S - 1.0 / 3.0)
        }
        Bound::Outer76 => {
            jb(f(0).abs().max(f(1).abs())).powf(S - 1.0 / 3.0) * (jb(f(3)) * jb(f(4))).powf(7.0 / 6.0)
        }
        Bound::Sept54 => {
            let (n1, _) = top2(ks, 6);
            jb(n1).powf(1.25) * jb(f(6)).powf(S - 0.25)
        }
        Bound::Last54 => jb(f(5)).powf(1.25) * jb(f(n - 1)).powf(S - 0.25),
        Bound::Square => 1.0,
    };
    (wl, rhs)
}

/// The bound as printed with `|k12|` in place of `|k1 k2|`; reported next to the certified form.
fn printed_pair_plus(ks: &[i64]) -> f64 {
    let f = |i: usize| ks[i] as f64;
    let (n1, n2) = top2(ks, 4);
    let a = (f(0) + f(1)).abs() / jb(f(0) + f(1));
    let b = (f(2) * f(3)).abs() / jb(f(2) + f(3));
    (a.max(b) + (jb(n1) * jb(n2)).powf(5.0 / 8.0)) * jb(f(4)).powf(S)
}

// ---------------------------------------------------------------------------------------------
// shapes

#[derive(Clone, Copy, Debug)]
enum Rel {
    Free,
    /// minus the previous entry, plus an offset
    Neg,
    /// minus the sum of the previous entries of the group, plus an offset
    Close,
    /// `c` times the previous magnitude
    Tie,
}

/// One entry: `sign * c * base[b]` (rounded, at least 1), or a relation to earlier entries
/// shifted by such a magnitude (`c = 0` gives an exact cancellation).
#[derive(Clone, Copy, Debug)]
struct Draw {
    sign: i64,
    c: f64,
    b: usize,
    rel: Rel,
}

/// Cutoff edges sit at ratios 1 and 1/16, so those are drawn more often.
const COEFS: [f64; 12] = [0.0625, 0.0625, 0.0625, 0.125, 0.25, 0.5, 0.75, 0.9, 1.0, 1.0, 1.5, 2.0];

impl Draw {
    fn sample(rng: &mut ChaCha8Rng, pos: usize, nbases: usize) -> Self {
        let u: f64 = rng.gen();
        let rel = if pos == 0 || u < 0.45 {
            Rel::Free
        } else if u < 0.6 {
            Rel::Tie
        } else if pos == 1 || u < 0.87 {
            Rel::Neg
        } else {
            Rel::Close
        };
        let mut c = COEFS[rng.gen_range(0..COEFS.len())];
        if matches!(rel, Rel::Neg | Rel::Close) && rng.gen_bool(0.35) {
            c = 0.0;
        }
        Draw { sign: sign(rng), c, b: rng.gen_range(0..nbases), rel }
    }

    fn magnitude(&self, bases: &[f64]) -> i64 {
        if self.c == 0.0 {
            return 0;
        }
        // the unit base gives small integers 1..8; rounding up keeps entries built on a
        // lower edge of a cutoff inside it
        let base = if self.b == 0 { 4.0 } else { bases[self.b] };
        ((self.c * base).ceil() as i64).max(1)
    }
}

/// Appends one entry per draw, resolving the relations inside this group.
fn push_group(out: &mut Vec<i64>, draws: &[Draw], bases: &[f64]) {
    let start = out.len();
    for dr in draws {
        let m = dr.sign * dr.magnitude(bases);
        let v = match dr.rel {
            Rel::Free => m.signum() * m.abs().max(1),
            Rel::Neg => -out[out.len() - 1] + m,
            Rel::Close => -out[start..].iter().sum::<i64>() + m,
            Rel::Tie => dr.sign * ((out[out.len() - 1].abs() as f64 * dr.c).ceil() as i64).max(1),
        };
        out.push(v);
    }
}

#[derive(Clone, Copy, Debug)]
struct Top {
    sign: i64,
    frac: f64,
}

impl Top {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Top { sign: sign(rng), frac: [0.0, 0.25, 0.6][rng.gen_range(0..3)] }
    }

    fn at(&self, scale: u32) -> i64 {
        let s = 1i64 << scale;
        self.sign * (s + (s as f64 * self.frac) as i64)
    }
}

/// Magnitudes the head entries are measured against when the last entry is `t`: the unit,
/// `|t|^{1/2}`, the high-low ceiling `|t| / 8^{N-2}`, the comparable-head floor
/// `|t|^{4/5} / 8^{N-2}` and, at arity seven, the ceiling `|t|^{3/5} / 8^5`.
fn top_bases(n: usize, t: i64) -> Vec<f64> {
    let (a, sep) = (t.abs() as f64, cf::separation(n) as f64);
    let mut v = vec![1.0, a.sqrt(), a / sep, a.powf(0.8) / sep];
    if n == 7 {
        v.push(a.powf(0.6) / 32768.0);
    }
    v
}

/// Magnitudes for the head of a grouped tuple with inner sum `k`.
fn outer_bases(k: i64) -> Vec<f64> {
    let a = k.abs() as f64;
    vec![1.0, a.sqrt(), a / 8.0, a / 512.0, a / 32768.0, a.powf(0.8) / 512.0]
}

fn inner_bases(z: i64, h21: bool) -> Vec<f64> {
    let a = z.abs() as f64;
    vec![1.0, a.sqrt(), if h21 { a / 16.0 } else { a / 8.0 }, a / 128.0]
}

fn flat_bases(scale: u32) -> Vec<f64> {
    let a = (1u64 << scale) as f64;
    vec![1.0, a.sqrt(), a / 16.0, a]
}

const NB_TOP: usize = 5;
const NB_OUTER: usize = 6;
const NB_INNER: usize = 4;
const NB_FLAT: usize = 4;

#[derive(Clone, Debug)]
enum Shape {
    /// Dominant last entry.
    TopLast { head: Vec<Draw>, top: Top },
    /// The last three entries form a high-low (or, `inner_h21`, a small-high-high) triple; the
    /// head is placed against their sum `K`, either below it or (`lead`) with `k1` dominating.
    Grouped { outer: Vec<Draw>, lead: Option<(i64, f64)>, inner_h21: bool, x: Draw, y: Draw, top: Top },
    /// Every entry on the same scale, with cancellations.
    Flat { entries: Vec<Draw> },
    /// Dominant last entry and a head of pairs `(a, -a + p)` whose sums are tied to the first
    /// one by fixed ratios, which reaches the edges of the pair-sum cutoffs.
    Paired { anchors: Vec<Draw>, sum: Draw, ratios: Vec<f64>, top: Top },
}

/// Ratios between pair sums: the cutoffs compare them with factors 16 and 512.
const PAIR_RATIOS: [f64; 14] = [1.0, -1.0, 2.0, -2.0, 8.0, 15.0, 16.0, -16.0, 17.0, 0.0625, -0.0625, 512.0, 0.5, 4.0];

impl Shape {
    fn instantiate(&self, n: usize, scale: u32) -> Vec<i64> {
        let mut out = Vec::with_capacity(n);
        match self {
            Shape::TopLast { head, top } => {
                let t = top.at(scale);
                let mut bases = top_bases(n, t);
                bases.resize(NB_TOP, bases[2]);
                push_group(&mut out, head, &bases);
                out.push(t);
            }
            Shape::Grouped { outer, lead, inner_h21, x, y, top } => {
                let z = top.at(scale);
                let ib = inner_bases(z, *inner_h21);
                let mut inner = Vec::with_capacity(3);
                if *inner_h21 {
                    push_group(&mut inner, &[Draw { rel: Rel::Free, ..*x }], &ib);
                    // comparable to z
                    inner.push(y.sign * ((y.c * z.abs() as f64).round() as i64).max(1));
                } else {
                    push_group(&mut inner, &[*x, *y], &ib);
                }
                inner.push(z);
                let big: i64 = inner.iter().sum();
                let ob = outer_bases(big);
                match lead {
                    None => push_group(&mut out, outer, &ob),
                    Some((sg, mult)) => {
                        out.push(0);
                        push_group(&mut out, &outer[1..], &ob);
                        let m = cf::max_abs(&out[1..]).max(big.abs()) as f64;
                        out[0] = sg * (cf::separation(n - 2) as f64 * m * mult).round() as i64;
                    }
                }
                out.extend(inner);
            }
            Shape::Flat { entries } => push_group(&mut out, entries, &flat_bases(scale)),
            Shape::Paired { anchors, sum, ratios, top } => {
                let t = top.at(scale);
                let bases = top_bases(n, t);
                let p = sum.sign * sum.magnitude(&bases);
                for (a, r) in anchors.iter().zip(ratios) {
                    let a = a.sign * a.magnitude(&bases);
                    let q = (p as f64 * r).round() as i64;
                    out.extend([a, -a + q]);
                }
                out.push(t);
            }
        }
        out
    }
}

/// Structured shapes for one arity, instantiated over a range of scales.
struct Pool {
    /// tuples grouped by the scale they were built at
    tuples: Vec<(u32, Vec<i64>)>,
    scales: (u32, u32),
}

impl Pool {
    fn build(n: usize, opts: &CertifyOptions) -> Self {
        let mut rng = stream(opts.seed, &format!("pointwise-shapes-{n}"));
        let per = if opts.quick { 200 } else { 3000 };
        let mut shapes = Vec::new();
        for _ in 0..per {
            let head: Vec<Draw> = (0..n - 1).map(|p| Draw::sample(&mut rng, p, NB_TOP)).collect();
            shapes.push(Shape::TopLast { head, top: Top::sample(&mut rng) });
        }
        if n > 3 {
            for _ in 0..per {
                let outer: Vec<Draw> = (0..n - 3).map(|p| Draw::sample(&mut rng, p, NB_OUTER)).collect();
                let lead = if rng.gen_bool(0.3) { Some((sign(&mut rng), [1.05, 1.5, 3.0][rng.gen_range(0..3)])) } else { None };
                let inner_h21 = rng.gen_bool(0.5);
                let x = Draw::sample(&mut rng, 0, NB_INNER);
                let mut y = Draw::sample(&mut rng, 1, NB_INNER);
                if inner_h21 {
                    y.c = [0.1, 0.17, 0.25, 0.33, 0.5, 1.0][rng.gen_range(0..6)];
                }
                shapes.push(Shape::Grouped { outer, lead, inner_h21, x, y, top: Top::sample(&mut rng) });
            }
        }
        for _ in 0..per {
            let entries = (0..n).map(|p| Draw::sample(&mut rng, p, NB_FLAT)).collect();
            shapes.push(Shape::Flat { entries });
        }
        if n > 3 {
            let nb = top_bases(n, 1).len();
            for _ in 0..per {
                let anchors = (0..(n - 1) / 2).map(|_| Draw::sample(&mut rng, 0, nb)).collect();
                let sum = Draw::sample(&mut rng, 0, nb);
                let mut ratios: Vec<f64> =
                    (0..(n - 1) / 2).map(|_| PAIR_RATIOS[rng.gen_range(0..PAIR_RATIOS.len())]).collect();
                ratios[0] = 1.0;
                shapes.push(Shape::Paired { anchors, sum, ratios, top: Top::sample(&mut rng) });
            }
        }
        let scales = match (n, opts.quick) {
            (3, false) => (4, 24),
            (3, true) => (4, 16),
            (5, false) => (4, 40),
            (5, true) => (4, 20),
            (_, false) => (10, 46),
            (_, true) => (10, 28),
        };
        let mut tuples = Vec::new();
        for s in scales.0..=scales.1 {
            for sh in &shapes {
                let t = sh.instantiate(n, s);
                if t.iter().all(|&k| k.unsigned_abs() < 1 << 50) {
                    tuples.push((s, t));
                }
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        Pool { tuples, scales }
    }
}

// ---------------------------------------------------------------------------------------------
// sweeps

/// Keeps the `REFINE` largest float ratios.
#[derive(Default)]
struct Best {
    examined: u64,
    top: Vec<(f64, Vec<i64>)>,
}

impl Best {
    fn offer(&mut self, r: f64, ks: &[i64]) {
        self.examined += 1;
        if self.top.len() < REFINE || r > self.top[self.top.len() - 1].0 {
            self.top.push((r, ks.to_vec()));
            self.top.sort_by(|a, b| b.0.total_cmp(&a.0));
            self.top.truncate(REFINE);
        }
    }
}

fn sweep(c: &Check, anchor: &str, pool: &Pool, opts: &CertifyOptions) -> Result<CertificationReport> {
    let fctx = ctx::<f64>(THRESHOLD, opts);
    let qctx = ctx::<Q>(THRESHOLD, opts);
    let mut rep = CertificationReport::new(
        c.id,
        anchor,
        format!(
            "structured shapes at k_max ~ 2^{}..2^{}, alpha = 2, beta = 3, gamma = 2, delta = 1, e1 = 1/2, L = {THRESHOLD}, s = {S}",
            pool.scales.0, pool.scales.1
        ),
    );
    let mut best: BTreeMap<u32, Best> = BTreeMap::new();
    let mut printed: BTreeMap<u32, f64> = BTreeMap::new();
    for (_, ks) in &pool.tuples {
        let v = value(&fctx, c, ks)?;
        if v == 0.0 {
            continue;
        }
        let (wl, rhs) = sides(c, ks);
        let lhs = wl * v.abs();
        let s = dyadic(cf::max_abs(ks));
        if rhs <= 0.0 {
            // a nonzero value where the bound vanishes fails at any scale
            rep.examined += 1;
            rep.violation(ks, format!("nonzero value {v:.3e} outside the support of the bound"));
            continue;
        }
        // the edge bins only see part of the shapes
        if s <= pool.scales.0 || s > pool.scales.1 {
            continue;
        }
        best.entry(s).or_default().offer(lhs / rhs, ks);
        if c.bound == Bound::PairPlus {
            let p = printed.entry(s).or_default();
            *p = p.max(lhs / printed_pair_plus(ks));
        }
    }
    let mut rows: BTreeMap<u32, ScaleRow> = BTreeMap::new();
    let mut dev: f64 = 0.0;
    for (&s, b) in &best {
        rep.examined += b.examined;
        let mut row = ScaleRow { examined: b.examined, ..Default::default() };
        for (rf, ks) in &b.top {
            let v = abs_f64(&value(&qctx, c, ks)?);
            let (wl, rhs) = sides(c, ks);
            let r = wl * v / rhs;
            dev = dev.max((r - rf).abs() / r.max(f64::MIN_POSITIVE));
            if r > row.worst {
                row.worst = r;
                row.witness = ks.clone();
            }
        }
        rows.insert(s, row);
    }
    rep.constant("float_exact_max_rel_dev", dev);
    let scales: Vec<u32> = rows.keys().copied().collect();
    stability(&mut rep, &rows, &scales, Rule::Either);
    if c.bound == Bound::PairPlus {
        if let Some((&s, &p)) = printed.iter().next_back() {
            rep.constant("printed_form_worst_top_scale", p);
            rep.constant(format!("printed_form_worst_2^{s:02}"), p);
        }
        let lo = printed.iter().rev().nth(2).map(|(_, &p)| p).unwrap_or(0.0);
        if lo > 0.0 {
            let hi = printed.values().next_back().copied().unwrap_or(0.0);
            rep.constant("printed_form_top3_growth", hi / lo);
            rep.note(format!(
                "with |k12| in place of |k1 k2| the worst ratio changes by a factor {:.3} over the top three scales",
                hi / lo
            ));
        }
    }
    Ok(rep.finish())
}

/// `sup |M| / L^2` over the shapes, for a range of thresholds `L`.
fn square(c: &Check, anchor: &str, pool: &Pool, opts: &CertifyOptions) -> Result<CertificationReport> {
    let (lo, hi) = match (c.n, opts.quick) {
        (5, false) => (5, 16),
        (5, true) => (5, 12),
        (_, false) => (14, 26),
        (_, true) => (14, 20),
    };
    let mut rep = CertificationReport::new(
        c.id,
        anchor,
        format!(
            "L = 2^{lo}..2^{hi}, shapes at k_max ~ 2^{}..2^{}, alpha = 2, beta = 3, gamma = 2, delta = 1, e1 = 1/2",
            pool.scales.0, pool.scales.1
        ),
    );
    let mut rows: BTreeMap<u32, ScaleRow> = BTreeMap::new();
    for e in lo..=hi {
        let big_l = 1i64 << e;
        let fctx = ctx::<f64>(big_l, opts);
        let qctx = ctx::<Q>(big_l, opts);
        let l2 = (big_l as f64).powi(2);
        let mut b = Best::default();
        for (s, ks) in &pool.tuples {
            // far from the threshold the multipliers vanish or decay
            if s + 6 < e || *s > e + 12 {
                continue;
            }
            let v = value(&fctx, c, ks)?;
            if v != 0.0 {
                b.offer(v.abs() / l2, ks);
            }
        }
        let mut row = ScaleRow { examined: b.examined, ..Default::default() };
        for (_, ks) in &b.top {
            let r = abs_f64(&value(&qctx, c, ks)?) / l2;
            if r > row.worst {
                row.worst = r;
                row.witness = ks.clone();
            }
        }
        rep.examined += row.examined;
        if row.examined > 0 {
            rows.insert(e, row);
        }
    }
    let keys: Vec<u32> = (lo..=hi).collect();
    stability(&mut rep, &rows, &keys, Rule::Either);
    if let Some(r) = rows.values().next_back() {
        rep.constant("sup_over_L2_top", r.worst);
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete() {
        assert_eq!(catalog().len(), CHECKS.len());
        let mut ids: Vec<_> = CHECKS.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CHECKS.len());
    }

    #[test]
    fn shapes_keep_their_arity() {
        let opts = CertifyOptions { quick: true, ..Default::default() };
        for n in [3, 5, 7] {
            let pool = Pool::build(n, &opts);
            assert!(pool.tuples.iter().all(|(_, t)| t.len() == n));
        }
    }
}
