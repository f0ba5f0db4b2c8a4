//! Lower bounds on the phase mismatch and bounds on differences of its reciprocals.
//!
//! Strict inequalities with explicit constants are asserted on every sample. Statements with an
//! implicit constant report the empirical constant per dyadic scale of `k_max` and fail only when
//! a sample makes the constant degenerate (zero phase, or an infinite ratio).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sampling::{big_f64, dyadic, log_uniform, sign, stream};
use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::cutoff::max_abs;
use crate::error::Result;
use crate::phase::{mismatch_bigint_scaled, mismatch_parts, pow_le};

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    vec![
        (
            "phase-lower-bound-cubic",
            "k12 k23 k13 != 0, k_max > 8 |gamma| E1: |Phi^(3)| >~ min{|k12||k13|, |k12||k23|, |k13||k23|} k_max^3 \
             when |k1| ~ |k2| ~ |k3|, and |Phi^(3)| >~ min{|k12|, |k13|, |k23|} k_max^4 otherwise"
                .into(),
        ),
        (
            "phase-difference-cubic",
            "|1/Phi_f^(3) - 1/Phi_g^(3)| <~ |gamma| |E1(f) - E1(g)| / k_max^2 min{1/|Phi_f^(3)|, 1/|Phi_g^(3)|}".into(),
        ),
        (
            "phase-lower-bound-quintic-separated",
            "k_max > 16 max{1, |gamma| E1} and |k5| > 6 |k4| > 96 max_{j<=3} |k_j| imply |Phi^(5)| > |k4| |k5|^4".into(),
        ),
        (
            "phase-lower-bound-quintic-fractional",
            "k_max > 16 max{1, |gamma| E1}, |k5|^{4/5} > 8^3 max_{j<=4} |k_j| and k1234 != 0 imply \
             |Phi^(5)| > |k1234| |k5|^4"
                .into(),
        ),
        (
            "phase-lower-bound-quintic-paired",
            "k_max > 16 max{1, |gamma| E1}, |k5| > 8^3 max_{j<=4} |k_j| and 16 |k12| < |k34| (or 16 |k34| < |k12|) \
             imply |Phi^(5)| >~ max{|k12|, |k34|} |k5|^4"
                .into(),
        ),
        (
            "phase-difference-quintic",
            "under any of the three separation hypotheses at N = 5: \
             |1/Phi_f^(5) - 1/Phi_g^(5)| <~ |gamma| |E1(f) - E1(g)| / k_max min{1/|Phi_f^(5)|, 1/|Phi_g^(5)|}"
                .into(),
        ),
        (
            "phase-lower-bound-septic-separated",
            "k_max > 16 max{1, |gamma| E1} and |k7| > 8^5 |k6| > 16 8^5 max_{j<=5} |k_j| imply \
             |Phi^(7)| > |k123456| |k7|^4"
                .into(),
        ),
        (
            "phase-lower-bound-septic-fractional",
            "k_max > 16 max{1, |gamma| E1}, |k7|^{4/5} > 8^5 max_{j<=6} |k_j| and k123456 != 0 imply \
             |Phi^(7)| > |k123456| |k7|^4"
                .into(),
        ),
        (
            "phase-difference-septic",
            "under either separation hypothesis at N = 7: \
             |1/Phi_f^(7) - 1/Phi_g^(7)| <~ |gamma| |E1(f) - E1(g)| / k_max min{1/|Phi_f^(7)|, 1/|Phi_g^(7)|}"
                .into(),
        ),
        (
            "phase-lower-bound-grouped",
            "k_max > 16 max{1, |gamma| E1}, 8^3 max{|k1|, |k2|} <= |k345|, 16 |k3| < min{|k4|, |k45|} and \
             |k4| <= |k5| <= 8 |k4| imply |Phi^(5)| >~ |k12345| |k5|^4"
                .into(),
        ),
    ]
}

pub(crate) fn run(ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut out = Vec::new();
    for &id in ids {
        let a = anchor_of(&cat, id);
        let n = if opts.quick { 2_000 } else { 100_000 };
        out.push(match id {
            "phase-lower-bound-cubic" => cubic_lower(id, &a, n, opts),
            "phase-difference-cubic" => difference(id, &a, n, opts, &[Hyp::Cubic]),
            "phase-lower-bound-quintic-separated" => strict(id, &a, n, opts, Hyp::Rel3),
            "phase-lower-bound-quintic-fractional" => strict(id, &a, n, opts, Hyp::Rel30),
            "phase-lower-bound-quintic-paired" => implicit(id, &a, n, opts, Hyp::Paired),
            "phase-difference-quintic" => difference(id, &a, n, opts, &[Hyp::Rel3, Hyp::Rel30, Hyp::Paired]),
            "phase-lower-bound-septic-separated" => strict(id, &a, n, opts, Hyp::Rel21),
            "phase-lower-bound-septic-fractional" => strict(id, &a, n, opts, Hyp::Rel22),
            "phase-difference-septic" => difference(id, &a, n, opts, &[Hyp::Rel21, Hyp::Rel22]),
            "phase-lower-bound-grouped" => implicit(id, &a, n, opts, Hyp::Grouped),
            _ => continue,
        });
    }
    Ok(out)
}

/// `(gamma, e1)` as fractions `(p, q)`; `g = 2 gamma e1`.
#[derive(Clone, Copy, Debug)]
struct Params {
    gamma: (i64, i64),
    e1: (i64, i64),
}

impl Params {
    /// `g = gp / gq`
    fn g(&self) -> (i64, i64) {
        (2 * self.gamma.0 * self.e1.0, self.gamma.1 * self.e1.1)
    }

    fn gamma_e1(&self) -> f64 {
        (self.gamma.0 * self.e1.0).abs() as f64 / (self.gamma.1 * self.e1.1) as f64
    }

    /// Smallest admissible `k_max` under `k_max > 16 max{1, |gamma| E1}`.
    fn kmin(&self) -> i64 {
        (16.0 * self.gamma_e1().max(1.0)).floor() as i64 + 1
    }

    fn label(&self) -> String {
        format!("gamma = {}/{}, e1 = {}/{}", self.gamma.0, self.gamma.1, self.e1.0, self.e1.1)
    }
}

const PARAMS: [Params; 4] = [
    Params { gamma: (2, 1), e1: (1, 2) },
    Params { gamma: (-3, 1), e1: (5, 2) },
    Params { gamma: (1, 2), e1: (0, 1) },
    Params { gamma: (5, 1), e1: (1, 7) },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Hyp {
    Cubic,
    Rel3,
    Rel30,
    Paired,
    Rel21,
    Rel22,
    Grouped,
}

/// Uniform integer in `[-m, m]`, pushed to the edge `+-m` a third of the time.
fn entry(rng: &mut ChaCha8Rng, m: i64) -> i64 {
    if m == 0 {
        0
    } else if rng.gen_bool(1.0 / 3.0) {
        m * sign(rng)
    } else {
        rng.gen_range(-m..=m)
    }
}

/// Largest `m >= 0` with `|x|^{p/q} > c m` (exact).
fn frac_cap(x: i64, p: u32, q: u32, c: i64) -> i64 {
    let mut m = ((x.abs() as f64).powf(p as f64 / q as f64) / c as f64) as i64 + 2;
    while m > 0 && pow_le(x, p, q, c, m) {
        m -= 1;
    }
    m
}

/// Draws a tuple satisfying the hypothesis exactly (checked again before return).
fn draw(rng: &mut ChaCha8Rng, hyp: Hyp, kmin: i64) -> Vec<i64> {
    loop {
        let ks = match hyp {
            Hyp::Cubic => {
                let k = log_uniform(rng, kmin, 1_000_000);
                let shape = rng.gen_range(0..3);
                let lo = log_uniform(rng, 1, k / 8 + 1);
                let (a, b) = match shape {
                    // comparable
                    0 => (entry(rng, k), entry(rng, k)),
                    // one small entry
                    1 => (entry(rng, lo), entry(rng, k)),
                    // near-cancelling pair
                    _ => (-k + entry(rng, lo), entry(rng, k)),
                };
                vec![a, b, k * sign(rng)]
            }
            Hyp::Rel3 => {
                let k5 = log_uniform(rng, kmin.max(7), 1_000_000);
                let k4max = (k5 - 1) / 6;
                let k4 = if rng.gen_bool(0.3) { k4max } else { log_uniform(rng, 1, k4max) };
                let m = (k4 - 1) / 16;
                vec![entry(rng, m), entry(rng, m), entry(rng, m), k4 * sign(rng), k5 * sign(rng)]
            }
            Hyp::Rel30 => {
                let k5 = log_uniform(rng, kmin.max(2436), 1_000_000);
                let cap = frac_cap(k5, 4, 5, 512);
                let m = if rng.gen_bool(0.3) { cap } else { log_uniform(rng, 1, cap) };
                let mut v: Vec<i64> = (0..4).map(|_| entry(rng, m)).collect();
                if rng.gen_bool(0.5) {
                    // push the sum of the low modes to +-1
                    let want = sign(rng);
                    let v3 = want - v[0] - v[1] - v[2];
                    if v3.abs() <= m {
                        v[3] = v3;
                    }
                }
                v.push(k5 * sign(rng));
                v
            }
            Hyp::Paired => {
                let k5 = log_uniform(rng, kmin.max(513), 1_000_000);
                let m = (k5 - 1) / 512;
                let (a, b) = (entry(rng, m), entry(rng, m));
                // the other pair sums to d with 16 |d| < |a + b|
                let d = entry(rng, ((a + b).abs() - 1).max(0) / 16);
                let c = entry(rng, m);
                let e = (d - c).clamp(-m, m);
                let mut v = if rng.gen_bool(0.5) { vec![a, b, c, e] } else { vec![c, e, a, b] };
                v.push(k5 * sign(rng));
                v
            }
            Hyp::Rel21 => {
                let k7 = log_uniform(rng, (16 * 32768 + 1).max(kmin), 1_000_000_000_000);
                let k6max = (k7 - 1) / 32768;
                let k6 = if rng.gen_bool(0.3) { k6max } else { log_uniform(rng, 1, k6max) };
                let m = (k6 - 1) / 16;
                let mut v: Vec<i64> = (0..5).map(|_| entry(rng, m)).collect();
                v.extend([k6 * sign(rng), k7 * sign(rng)]);
                v
            }
            Hyp::Rel22 => {
                let k7 = log_uniform(rng, 441_500.max(kmin), 1_000_000_000_000);
                let cap = frac_cap(k7, 4, 5, 32768);
                let m = if rng.gen_bool(0.3) { cap } else { log_uniform(rng, 1, cap.max(1)) };
                let mut v: Vec<i64> = (0..6).map(|_| entry(rng, m)).collect();
                if rng.gen_bool(0.5) {
                    let want = sign(rng);
                    let v5 = want - v[..5].iter().sum::<i64>();
                    if v5.abs() <= m {
                        v[5] = v5;
                    }
                }
                v.push(k7 * sign(rng));
                v
            }
            Hyp::Grouped => {
                let k4 = log_uniform(rng, 17, 100_000) * sign(rng);
                let k5 = rng.gen_range(k4.abs()..=8 * k4.abs()) * sign(rng);
                let lim = (k4.abs().min((k4 + k5).abs()) - 1) / 16;
                let k3 = entry(rng, lim);
                let m = (k3 + k4 + k5).abs() / 512;
                vec![entry(rng, m), entry(rng, m), k3, k4, k5]
            }
        };
        if holds(hyp, &ks, kmin) {
            return ks;
        }
    }
}

fn holds(hyp: Hyp, ks: &[i64], kmin: i64) -> bool {
    let a = |i: usize| ks[i].abs() as i128;
    if (max_abs(ks) as i128) < kmin as i128 {
        return false;
    }
    match hyp {
        Hyp::Cubic => (ks[0] + ks[1]) != 0 && (ks[1] + ks[2]) != 0 && (ks[0] + ks[2]) != 0,
        Hyp::Rel3 => a(4) > 6 * a(3) && 6 * a(3) > 96 * max_abs(&ks[..3]) as i128,
        Hyp::Rel30 => !pow_le(ks[4], 4, 5, 512, max_abs(&ks[..4])) && ks[..4].iter().sum::<i64>() != 0,
        Hyp::Paired => {
            let (p, q) = ((ks[0] + ks[1]).abs() as i128, (ks[2] + ks[3]).abs() as i128);
            a(4) > 512 * max_abs(&ks[..4]) as i128 && (16 * p < q || 16 * q < p)
        }
        Hyp::Rel21 => a(6) > 32768 * a(5) && 32768 * a(5) > 16 * 32768 * max_abs(&ks[..5]) as i128,
        Hyp::Rel22 => !pow_le(ks[6], 4, 5, 32768, max_abs(&ks[..6])) && ks[..6].iter().sum::<i64>() != 0,
        Hyp::Grouped => {
            let k345 = (ks[2] + ks[3] + ks[4]).abs() as i128;
            let k45 = (ks[3] + ks[4]).abs() as i128;
            512 * a(0).max(a(1)) <= k345 && 16 * a(2) < a(3).min(k45) && a(3) <= a(4) && a(4) <= 8 * a(3)
        }
    }
}

fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

/// The comparison quantity of a lower bound, as an exact integer.
fn lower_rhs(hyp: Hyp, ks: &[i64]) -> BigInt {
    let n = ks.len();
    let top = bi(ks[n - 1]).abs().pow(4);
    match hyp {
        Hyp::Rel3 => bi(ks[3]).abs() * top,
        Hyp::Rel30 | Hyp::Rel21 | Hyp::Rel22 => bi(ks[..n - 1].iter().sum()).abs() * top,
        Hyp::Paired => bi((ks[0] + ks[1]).abs().max((ks[2] + ks[3]).abs())) * top,
        Hyp::Grouped => bi(ks.iter().sum()).abs() * top,
        Hyp::Cubic => unreachable!("cubic bound depends on the regime"),
    }
}

/// Extremal ratio per dyadic scale, with the tuple attaining it.
struct Sweep {
    best: BTreeMap<u32, (f64, Vec<i64>)>,
    keep_min: bool,
}

impl Sweep {
    fn new(keep_min: bool) -> Self {
        Self { best: BTreeMap::new(), keep_min }
    }

    fn add(&mut self, scale: u32, v: f64, ks: &[i64]) {
        let e = self.best.entry(scale).or_insert((v, ks.to_vec()));
        if (self.keep_min && v < e.0) || (!self.keep_min && v > e.0) {
            *e = (v, ks.to_vec());
        }
    }

    fn write(&self, rep: &mut CertificationReport, prefix: &str) {
        for (s, (v, ks)) in &self.best {
            rep.constant(format!("{prefix}2^{s:02}"), *v);
            rep.witness(ks, format!("{prefix}2^{s:02}: {v:.6e}"));
        }
    }
}

fn scaled_phi(ks: &[i64], p: &Params) -> BigInt {
    let (gp, gq) = p.g();
    mismatch_bigint_scaled(ks, gp, gq)
}

fn strict(id: &str, anchor: &str, n: usize, opts: &CertifyOptions, hyp: Hyp) -> CertificationReport {
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "{n} exact samples of the hypothesis region (k_max up to {}), parameters cycling through {}",
            if matches!(hyp, Hyp::Rel21 | Hyp::Rel22) { "10^12" } else { "10^6" },
            PARAMS.iter().map(|p| p.label()).collect::<Vec<_>>().join("; ")
        ),
    );
    let mut rng = stream(opts.seed, id);
    let mut sweep = Sweep::new(true);
    for i in 0..n {
        let p = PARAMS[i % PARAMS.len()];
        let ks = draw(&mut rng, hyp, p.kmin());
        rep.examined += 1;
        let lhs = scaled_phi(&ks, &p).abs();
        let rhs = lower_rhs(hyp, &ks) * bi(p.g().1);
        if lhs <= rhs {
            rep.violation(&ks, format!("{}: |Phi| = {} <= {}", p.label(), lhs, rhs));
        }
        sweep.add(dyadic(max_abs(&ks)), big_f64(&lhs) / big_f64(&rhs), &ks);
    }
    sweep.write(&mut rep, "min_ratio_");
    rep.finish()
}

fn implicit(id: &str, anchor: &str, n: usize, opts: &CertifyOptions, hyp: Hyp) -> CertificationReport {
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "{n} exact samples of the hypothesis region, parameters cycling through {}; \
             reports min |Phi| / bound per dyadic scale of k_max",
            PARAMS.iter().map(|p| p.label()).collect::<Vec<_>>().join("; ")
        ),
    );
    let mut rng = stream(opts.seed, id);
    let mut sweep = Sweep::new(true);
    for i in 0..n {
        let p = PARAMS[i % PARAMS.len()];
        let ks = draw(&mut rng, hyp, p.kmin());
        let rhs = lower_rhs(hyp, &ks);
        if rhs.is_zero() {
            continue;
        }
        rep.examined += 1;
        let lhs = scaled_phi(&ks, &p).abs();
        let r = big_f64(&lhs) / big_f64(&(rhs * bi(p.g().1)));
        if !(r > 0.0 && r.is_finite()) {
            rep.violation(&ks, format!("{}: degenerate ratio {r}", p.label()));
        }
        sweep.add(dyadic(max_abs(&ks)), r, &ks);
    }
    sweep.write(&mut rep, "min_ratio_");
    let overall = sweep.best.values().map(|v| v.0).fold(f64::INFINITY, f64::min);
    rep.constant("min_ratio", overall);
    rep.finish()
}

fn cubic_lower(id: &str, anchor: &str, n: usize, opts: &CertifyOptions) -> CertificationReport {
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "{n} exact samples with k12 k23 k13 != 0 and k_max up to 10^6; comparable means max |k_j| <= 8 min |k_j|; \
             reports min |Phi| / bound per regime and dyadic scale"
        ),
    );
    let mut rng = stream(opts.seed, id);
    let (mut comp, mut sep) = (Sweep::new(true), Sweep::new(true));
    for i in 0..n {
        let p = PARAMS[i % PARAMS.len()];
        let ks = draw(&mut rng, Hyp::Cubic, p.kmin());
        rep.examined += 1;
        let lhs = big_f64(&scaled_phi(&ks, &p).abs()) / p.g().1 as f64;
        let (x, y, z) = (((ks[0] + ks[1]).abs()) as f64, ((ks[1] + ks[2]).abs()) as f64, ((ks[0] + ks[2]).abs()) as f64);
        let km = max_abs(&ks) as f64;
        let mn = ks.iter().map(|k| k.abs()).min().unwrap_or(0) as f64;
        let comparable = km <= 8.0 * mn;
        let r = if comparable {
            lhs / ((x * z).min(x * y).min(z * y) * km.powi(3))
        } else {
            lhs / (x.min(y).min(z) * km.powi(4))
        };
        if !(r > 0.0 && r.is_finite()) {
            rep.violation(&ks, format!("{}: degenerate ratio {r}", p.label()));
        }
        let s = dyadic(max_abs(&ks));
        if comparable {
            comp.add(s, r, &ks);
        } else {
            sep.add(s, r, &ks);
        }
    }
    comp.write(&mut rep, "comparable_min_ratio_");
    sep.write(&mut rep, "separated_min_ratio_");
    rep.finish()
}

/// `C = |Phi_f - Phi_g| k_max^p / (|gamma| |E1(f) - E1(g)| min{|Phi_f|, |Phi_g|})`, which is
/// `|1/Phi_f - 1/Phi_g| k_max^p / (|gamma| |dE1| min{1/|Phi_f|, 1/|Phi_g|})`.
fn difference(id: &str, anchor: &str, n: usize, opts: &CertifyOptions, hyps: &[Hyp]) -> CertificationReport {
    let p = if hyps == [Hyp::Cubic] { 2 } else { 1 };
    // pairs of energies for gamma = 2; both satisfy the hypotheses once k_max > 16 * 2 * 4
    let gamma = 2i64;
    let pairs = [((1i64, 2i64), (3i64, 1i64)), ((0, 1), (4, 1)), ((7, 4), (1, 3))];
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "{n} exact samples over the hypotheses {hyps:?}, gamma = {gamma}, (E1(f), E1(g)) in {pairs:?}; \
             reports the largest constant per dyadic scale of k_max"
        ),
    );
    let mut rng = stream(opts.seed, id);
    let mut sweep = Sweep::new(false);
    let kmin = 16 * gamma * 4 + 1;
    for i in 0..n {
        let hyp = hyps[i % hyps.len()];
        let ks = draw(&mut rng, hyp, kmin);
        let (ef, eg) = pairs[i % pairs.len()];
        let pf = Params { gamma: (gamma, 1), e1: ef };
        let pg = Params { gamma: (gamma, 1), e1: eg };
        let phf = big_f64(&scaled_phi(&ks, &pf).abs()) / pf.g().1 as f64;
        let phg = big_f64(&scaled_phi(&ks, &pg).abs()) / pg.g().1 as f64;
        rep.examined += 1;
        // Phi_f - Phi_g = 2 gamma (E1(f) - E1(g)) B with B the cubic part
        let b = big_f64(&mismatch_parts(&ks).1.to_bigint().abs());
        let km = max_abs(&ks) as f64;
        let c = 2.0 * b * km.powi(p) / phf.min(phg);
        if !c.is_finite() {
            rep.violation(&ks, format!("vanishing phase: |Phi_f| = {phf}, |Phi_g| = {phg}"));
            continue;
        }
        sweep.add(dyadic(max_abs(&ks)), c, &ks);
    }
    sweep.write(&mut rep, "max_constant_");
    let overall = sweep.best.values().map(|v| v.0).fold(0.0, f64::max);
    rep.constant("max_constant", overall);
    rep.finish()
}
