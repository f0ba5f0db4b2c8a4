//! Exact identities: phase algebra, cutoff partitions, grouping identities and regroupings.
//!
//! Everything here is evaluated in rational arithmetic. Symmetric identities `[A]_sym = [B]_sym`
//! are checked per multiset as `sum over arrangements (A - B) = 0`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sampling::{for_each_box, for_each_multiset, log_uniform, sign, small, stream, Q};
use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff::{self as cf, CutoffKind};
use crate::error::Result;
use crate::multiplier::{composite_value, l_numer, m_raw, CompositeShape, InnerKind, MultCtx, QSel};
use crate::phase::{mismatch_parts, parts_i128, phase_mismatch, phase_mismatch_factored, phase_remainder, RemainderKind};
use crate::scalar::Scalar;
use crate::sym::{arrangement_count, for_each_arrangement, for_each_permutation};

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    vec![
        (
            "phase-factorization",
            "Phi^(2) = -(5/2) i k1 k2 k12 (k1^2 + k2^2 + k12^2 - (12/5) gamma E1) and \
             Phi^(3) = -(5/2) i k12 k23 k13 (k12^2 + k23^2 + k13^2 - (12/5) gamma E1)"
                .into(),
        ),
        (
            "phase-telescoping",
            "Phi^(N+j)(k) = Phi^(N)(k1..k_{N-1}, k_{N..N+j}) + Phi^(j+1)(k_N..k_{N+j}); \
             Phi^(N) = Phi^(2)(k_{1..N-1}, k_N) + Phi^(3)(k_{1..N-3}, k_{N-2}, k_{N-1}) + Phi^(N-3)(k1..k_{N-3})"
                .into(),
        ),
        (
            "phase-remainder",
            "Phi^(5) = Phi_0^(3)(k123, k4, k5) + Phi_0^(3)(k1, k2, k3) + gamma E1 R^(5) with \
             R^(5) = 6i (k1234 k1235 k45 + k12 k23 k13), and the seven-point analogue with \
             R^(7) = 6i (k123456 k123457 k67 + k1234 k1235 k45 + k12 k23 k13)"
                .into(),
        ),
        (
            "cutoff-algebra",
            "1 = chi_NR1 + [3 chi_R1]_sym - [3 chi_R3]_sym + chi_R6 (N = 3); \
             [3 chi_H1]_sym + [3 chi_H21]_sym + [3 chi_H22]_sym + chi_H3 = 1 with chi_H3 in {0, 1}; \
             chi_NR2 = (1 - chi_R1)(1 - chi_R2); [N chi_H1]_sym in {0, 1} (N = 5, 7)"
                .into(),
        ),
        (
            "grouping-quintic",
            "[[m1 [3 chi_H1]_sym]_ext1 [m2 ([3 chi_H1]_sym + [3 chi_H21]_sym)]_ext2]_sym = \
             3 [m1 m2 chi_NR11]_sym + 6 [m1 m2 chi_NR12]_sym + 3 [m1 m2 chi_NR21]_sym + 6 [m1 m2 chi_NR22]_sym \
             for symmetric m1 = Q chi_NR1 chi_>L / Phi, m2 = Q chi_NR1"
                .into(),
        ),
        (
            "grouping-septic",
            "[[m1 [5 m3 chi_H1]_sym]_ext1 [m2 ([3 chi_H1]_sym + [3 chi_H21]_sym)]_ext2]_sym = \
             3 [[m1 m3]_ext1 [m2]_ext2 chi_NR11]_sym + 12 [[[5 m1 m3 chi_H1]_sym]_ext1 [m2]_ext2 chi_NR12]_sym \
             + 3 [[m1 m3]_ext1 [m2]_ext2 chi_NR21]_sym + 12 [[[5 m1 m3 chi_H1]_sym]_ext1 [m2]_ext2 chi_NR22]_sym \
             for m1 = chi_>L / Phi^(5), m3 = Q2^(5), m2 = Q chi_NR1"
                .into(),
        ),
        (
            "pairing-symmetrization",
            "9 [[Q1 chi_NR1 / Phi_0]_ext1 [Q1 chi_NR1]_ext2 chi_H1 m]_sym = [q2 chi_H1 (1 - chi_R2) m]_sym \
             for m in {chi_R1, (1 - chi_R1) chi_R4, (1 - chi_R1)(1 - chi_R4)}"
                .into(),
        ),
        (
            "regroup-cubic-boundary",
            "[3 L~_1 chi_>L]_ext1 [-Q chi_NR1]_ext2 = sum_{i=2..8} [L_i^(5) Phi^(5)]_sym + sum_{i=8..23} [M_i^(5)]_sym \
             after symmetrization"
                .into(),
        ),
        (
            "regroup-quintic-boundary",
            "[5 L~_2^(5) chi_>L]_ext1 [-Q chi_NR1]_ext2 = sum_{i=1,2} [L_i^(7) Phi^(7)]_sym + sum_{i=5..15} [M_i^(7)]_sym \
             after symmetrization"
                .into(),
        ),
        (
            "source-decomposition",
            "-Q chi_NR1 = sum_{i=1..4} [L_i^(3) Phi^(3)]_sym; \
             -6 delta q1 (1 - [5 chi_R1]_sym) = [L_1^(5) Phi^(5) + M_3 + M_4 + M_5]_sym; \
             [M_1 + M_2]_sym = -(4/5) gamma^2 q1 [chi_R1 (1 - chi_R2)]_sym; \
             -Q1^(5) = [L_1^(5) Phi^(5) + M_1 + .. + M_5]_sym"
                .into(),
        ),
        (
            "q2-closed-form",
            "q2^(5) = -(2/5) gamma^2 (sum_{l=1..7} p_l k5^{7-l}) / (k12 k34 k1235 k1245 k1345 k2345) \
             where all six factors are nonzero"
                .into(),
        ),
    ]
}

pub(crate) fn run(ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut out = Vec::new();
    for &id in ids {
        let a = anchor_of(&cat, id);
        out.push(match id {
            "phase-factorization" => phase_factorization(id, &a, opts),
            "phase-telescoping" => phase_telescoping(id, &a, opts),
            "phase-remainder" => phase_remainder_check(id, &a, opts),
            "cutoff-algebra" => cutoff_algebra(id, &a, opts),
            "grouping-quintic" => grouping_quintic(id, &a, opts),
            "grouping-septic" => grouping_septic(id, &a, opts),
            "pairing-symmetrization" => pairing_symmetrization(id, &a, opts),
            "regroup-cubic-boundary" => regroup_cubic(id, &a, opts),
            "regroup-quintic-boundary" => regroup_quintic(id, &a, opts),
            "source-decomposition" => source_decomposition(id, &a, opts),
            "q2-closed-form" => q2_closed_form(id, &a, opts),
            _ => continue,
        });
    }
    Ok(out)
}

fn qi(v: i64) -> Q {
    <Q as Scalar>::from_i64(v)
}

fn qr(p: i64, d: i64) -> Q {
    <Q as Scalar>::from_ratio(p, d)
}

/// Coefficients `(alpha, beta, gamma, delta) = (2, 3, 5, 1)`, `e1 = 1/7`: every term of every
/// table entry is switched on and `gamma e1` is not an integer.
fn params() -> PhaseParams<Q> {
    PhaseParams { gamma: qi(5), e1: qr(1, 7) }
}

fn ctx(threshold: i64, opts: &CertifyOptions) -> MultCtx<Q> {
    let c = EquationCoefficients::<Q>::from_ints(2, 3, 5, 1);
    MultCtx::new(&c, &params(), threshold).perturbed(opts.perturb)
}

/// Multisets used by the regrouping checks: a dominant entry, groups near cancellation and
/// comparable pairs, at mixed scales.
fn structured_multiset(rng: &mut ChaCha8Rng, n: usize, it: usize) -> Vec<i64> {
    let big = log_uniform(rng, 20, 4000) * sign(rng);
    let mut ks: Vec<i64> = match (n, it % 4) {
        (5, 0) => vec![small(rng, 3), small(rng, 3), small(rng, 3), small(rng, 3), big],
        (5, 1) => {
            let x = small(rng, 2);
            vec![big, small(rng, 2), x, small(rng, 200), -x + small(rng, 2)]
        }
        (5, 2) => {
            let a = small(rng, 300);
            vec![big, small(rng, 3), a, -a + small(rng, 1), small(rng, 30)]
        }
        (5, _) => (0..5).map(|_| small(rng, 400)).collect(),
        (_, k) => {
            let mut v: Vec<i64> = (0..4).map(|_| small(rng, 3)).collect();
            let s = rng.gen_range(1700..6000) * sign(rng);
            match k % 3 {
                0 => {
                    let (x, y) = (small(rng, 3), small(rng, 3));
                    v.extend([s - x - y, x, y]);
                }
                1 => {
                    let x = small(rng, 3);
                    let b = rng.gen_range(100..3000);
                    v.extend([x, b, s - x - b]);
                }
                _ => {
                    let x = small(rng, 40);
                    let b = rng.gen_range(-3000..3000);
                    v.extend([x, b, s - x - b]);
                }
            }
            v
        }
    };
    ks.sort_unstable();
    ks
}

fn phase_factorization(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let r = if opts.quick { 12 } else { 64 };
    let r2 = r / 4;
    let p2 = PhaseParams { gamma: qi(-2), e1: qr(3, 2) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "all tuples with |k_j| <= {r}, N = 2, 3, (gamma, e1) = (5, 1/7); |k_j| <= {r2} with (gamma, e1) = (-2, 3/2)"
        ),
    );
    for (p, rad) in [(params(), r), (p2, r2)] {
        for n in [2, 3] {
            for_each_box(n, rad, |ks| {
                rep.examined += 1;
                let direct = phase_mismatch(ks, &p);
                let fact = phase_mismatch_factored(ks, &p).expect("arity 2 or 3");
                if direct != fact {
                    rep.violation(ks, format!("direct {direct} vs factored {fact}"));
                }
            });
        }
    }
    rep.finish()
}

/// `(A, B)` with `Phi = i (A + 2 gamma e1 B)`; an identity linear in `gamma e1` holds for every
/// `gamma e1` iff it holds for both parts.
fn parts(ks: &[i64]) -> (i128, i128) {
    parts_i128(ks)
}

fn add(a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
    (a.0 + b.0, a.1 + b.1)
}

fn phase_telescoping(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let radii: [(usize, i64); 6] = if opts.quick {
        [(2, 16), (3, 16), (4, 6), (5, 4), (6, 3), (7, 2)]
    } else {
        [(2, 64), (3, 64), (4, 16), (5, 8), (6, 6), (7, 6)]
    };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "all tuples in boxes (N, radius) {:?}, every split N = M + j; exact quintic and cubic parts separately",
            radii
        ),
    );
    let mut head = [0i64; 7];
    for (n, r) in radii {
        for_each_box(n, r, |ks| {
            rep.examined += 1;
            let full = parts(ks);
            for m in 2..n {
                // Phi^(n) = Phi^(m)(k1..k_{m-1}, k_{m..n}) + Phi^(n-m+1)(k_m..k_n)
                head[..m - 1].copy_from_slice(&ks[..m - 1]);
                head[m - 1] = ks[m - 1..].iter().sum();
                let split = add(parts(&head[..m]), parts(&ks[m - 1..]));
                if split != full {
                    rep.violation(ks, format!("split at {m}: {split:?} vs {full:?}"));
                }
            }
            if n == 4 || n == 5 {
                head[..n - 2].copy_from_slice(&ks[..n - 2]);
                let mut tail = [0i64; 3];
                tail[0] = ks[..n - 3].iter().sum();
                tail[1] = ks[n - 3];
                tail[2] = ks[n - 2];
                let two = [ks[..n - 1].iter().sum(), ks[n - 1]];
                let split = add(add(parts(&two), parts(&tail)), parts(&ks[..n - 3]));
                if split != full {
                    rep.violation(ks, format!("three-block decomposition: {split:?} vs {full:?}"));
                }
            }
        });
    }
    rep.finish()
}

fn phase_remainder_check(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r5, r7, nrand) = if opts.quick { (4, 2, 500) } else { (8, 4, 20_000) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "all tuples with |k_j| <= {r5} (N = 5) and |k_j| <= {r7} (N = 7); {nrand} random tuples per arity with |k_j| <= 10^6"
        ),
    );
    let check = |rep: &mut CertificationReport, ks: &[i64]| {
        rep.examined += 1;
        let n = ks.len();
        let (a, b) = mismatch_parts(ks);
        let (a, b) = (a.to_bigint(), b.to_bigint());
        // quintic part telescopes through the groupings (k1, k2, k3), (k123, k4, k5), (k12345, k6, k7)
        let mut a_sum = num_bigint::BigInt::zero();
        let mut s = ks[0];
        let mut j = 1;
        while j + 1 < n {
            a_sum += mismatch_parts(&[s, ks[j], ks[j + 1]]).0.to_bigint();
            s += ks[j] + ks[j + 1];
            j += 2;
        }
        let kind = if n == 5 { RemainderKind::R5 } else { RemainderKind::R7 };
        let rem: Q = phase_remainder(kind, ks).expect("arity 5 or 7");
        // gamma e1 R = g B with g = 2 gamma e1
        let two_b = Q::from_integer(b * 2);
        if a_sum != a || rem != two_b {
            rep.violation(ks, format!("remainder {rem} vs 2B {two_b}"));
        }
    };
    for (n, r) in [(5usize, r5), (7, r7)] {
        for_each_box(n, r, |ks| check(&mut rep, ks));
    }
    let mut rng = stream(opts.seed, id);
    for n in [5usize, 7] {
        for _ in 0..nrand {
            let ks: Vec<i64> = (0..n).map(|_| log_uniform(&mut rng, 1, 1_000_000) * sign(&mut rng)).collect();
            check(&mut rep, &ks);
        }
    }
    rep.finish()
}

fn cutoff_algebra(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r3, rh, r5) = if opts.quick { (16, 12, 5) } else { (64, 12, 8) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "resonance partition on |k_j| <= {r3} (N = 3); high-low partition on |k_j| <= {rh} (N = 3); \
             pair cutoffs on |k_j| <= {r5} (N = 5); dominance on |k_j| <= {r5} (N = 5) and structured septic tuples"
        ),
    );
    let c = |k: CutoffKind, ks: &[i64]| cf::cutoff(k, ks).expect("arity checked") as i64;
    // permutation sums: [3 chi]_sym = (1/2) sum_sigma chi(k_sigma)
    for_each_box(3, r3, |ks| {
        rep.examined += 1;
        let (mut r1, mut r3c) = (0, 0);
        for_each_permutation(ks, |p| {
            r1 += c(CutoffKind::R1, p);
            r3c += c(CutoffKind::R3, p);
        });
        let twice = 2 * c(CutoffKind::NR1, ks) + r1 - r3c + 2 * c(CutoffKind::R6, ks);
        if twice != 2 {
            rep.violation(ks, format!("2 (NR1 + [3R1] - [3R3] + R6) = {twice}"));
        }
    });
    for_each_box(3, rh, |ks| {
        rep.examined += 1;
        let mut w = 0;
        for_each_permutation(ks, |p| w += c(CutoffKind::H1, p) + c(CutoffKind::H21, p) + c(CutoffKind::H22, p));
        let h3 = c(CutoffKind::H3, ks);
        let lib = cf::sym3_h1(ks[0], ks[1], ks[2]) + cf::sym3_h21(ks[0], ks[1], ks[2]) + cf::sym3_h22(ks[0], ks[1], ks[2]);
        if w + 2 * h3 != 2 || w != 2 * lib as i64 {
            rep.violation(ks, format!("2 [3 H1 + 3 H21 + 3 H22]_sym = {w}, H3 = {h3}"));
        }
    });
    for_each_box(5, r5, |ks| {
        rep.examined += 1;
        let nr2 = c(CutoffKind::NR2, ks);
        let rhs = (1 - c(CutoffKind::R1, ks)) * (1 - c(CutoffKind::R2, ks));
        let dom = cf::sym5_h1(ks);
        if nr2 != rhs || dom > 1 {
            rep.violation(ks, format!("NR2 = {nr2}, (1-R1)(1-R2) = {rhs}, [5 H1]_sym = {dom}"));
        }
    });
    let mut rng = stream(opts.seed, id);
    for _ in 0..if opts.quick { 200 } else { 20_000 } {
        let mut ks: Vec<i64> = (0..7).map(|_| small(&mut rng, 4)).collect();
        let j = rng.gen_range(0..7);
        ks[j] = log_uniform(&mut rng, 1, 1 << 20) * sign(&mut rng);
        rep.examined += 1;
        if cf::sym5_h1(&ks) > 1 {
            rep.violation(&ks, "two dominant slots");
        }
    }
    rep.finish()
}

/// `[3 chi_H1]_sym + [3 chi_H21]_sym` on a triple.
fn inner_weight(x: i64, y: i64, z: i64) -> i64 {
    (cf::sym3_h1(x, y, z) + cf::sym3_h21(x, y, z)) as i64
}

fn grouping_quintic(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r, ns) = if opts.quick { (4, 40) } else { (8, 1500) };
    let l = 2;
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("every multiset with |k_j| <= {r} and {ns} structured multisets, L = {l}"),
    );
    let cx = ctx(l, opts);
    let mut nonzero = 0u64;
    let mut eval = |rep: &mut CertificationReport, ks: &[i64]| {
        rep.examined += 1;
        let mut acc = Q::zero();
        let mut hit = false;
        for_each_arrangement(ks, |p| {
            let big = p[2] + p[3] + p[4];
            let lhs_w = cf::sym3_h1(p[0], p[1], big) as i64 * inner_weight(p[2], p[3], p[4]);
            let rhs_w = 3 * cf::nr_ij(p, 1, 1) as i64
                + 6 * cf::nr_ij(p, 1, 2) as i64
                + 3 * cf::nr_ij(p, 2, 1) as i64
                + 6 * cf::nr_ij(p, 2, 2) as i64;
            if lhs_w == 0 && rhs_w == 0 {
                return;
            }
            let m2 = cx.q_nr(QSel::Q, p[2], p[3], p[4]);
            if m2.is_zero() || cf::max_abs(&[p[0], p[1], big]) <= l {
                return;
            }
            let m1 = cx.ratio_phi(QSel::Q, p[0], p[1], big);
            if m1.is_zero() {
                return;
            }
            hit = true;
            acc = acc.clone() + m1 * m2 * qi(lhs_w - rhs_w);
        });
        if hit {
            nonzero += 1;
        }
        if !acc.is_zero() {
            rep.violation(ks, format!("residual {acc}"));
        }
    };
    for_each_multiset(5, r, |ks| eval(&mut rep, ks));
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let ks = quintic_grouping_sample(&mut rng, it);
        eval(&mut rep, &ks);
    }
    rep.constant("nonzero_multisets", nonzero as f64);
    rep.finish()
}

/// Multisets populating the four grouped regions at arity five.
fn quintic_grouping_sample(rng: &mut ChaCha8Rng, it: usize) -> Vec<i64> {
    let mut ks = match it % 5 {
        0 => vec![small(rng, 5), small(rng, 5), small(rng, 5), small(rng, 5), rng.gen_range(100..5000) * sign(rng)],
        1 => {
            let b = rng.gen_range(50..2000);
            let c = (b as f64 * rng.gen_range(0.15..6.0)) as i64 * if rng.gen_bool(0.8) { 1 } else { -1 };
            vec![small(rng, 4), small(rng, 4), small(rng, 3), b, c]
        }
        2 => vec![rng.gen_range(2000..100_000) * sign(rng), small(rng, 3), small(rng, 3), small(rng, 3), rng.gen_range(30..200)],
        3 => {
            let b = rng.gen_range(30..200);
            let c = (b as f64 * rng.gen_range(0.15..6.0)) as i64;
            vec![rng.gen_range(10_000..200_000) * sign(rng), small(rng, 3), small(rng, 1), b, c * sign(rng)]
        }
        _ => (0..5).map(|_| small(rng, 300)).collect(),
    };
    ks.sort_unstable();
    ks
}

fn grouping_septic(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r, ns) = if opts.quick { (1, 10) } else { (3, 150) };
    let l = 2;
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("every multiset with |k_j| <= {r} and {ns} structured multisets, L = {l}"),
    );
    let cx = ctx(l, opts);
    // m3 = Q2^(5) is symmetric in its first four slots: memoize on (sorted first four, last)
    let mut memo: HashMap<[i64; 5], Q> = HashMap::new();
    let mut m3 = |t: &[i64]| -> Q {
        let mut key = [t[0], t[1], t[2], t[3], t[4]];
        key[..4].sort_unstable();
        memo.entry(key).or_insert_with(|| cx.big_q2_5(&key)).clone()
    };
    let m1 = |t: &[i64]| -> Q {
        if cf::max_abs(t) <= l {
            return Q::zero();
        }
        let d = cx.phi(t);
        if d.is_zero() {
            Q::zero()
        } else {
            Q::one() / d
        }
    };
    let mut nonzero = 0u64;
    let mut eval = |rep: &mut CertificationReport, ks: &[i64]| {
        rep.examined += 1;
        let mut acc = Q::zero();
        let mut hit = false;
        for_each_arrangement(ks, |p| {
            let w_in = inner_weight(p[4], p[5], p[6]);
            let (n11, n12, n21, n22) =
                (cf::nr_ij(p, 1, 1), cf::nr_ij(p, 1, 2), cf::nr_ij(p, 2, 1), cf::nr_ij(p, 2, 2));
            let head = [p[0], p[1], p[2], p[3], p[4] + p[5] + p[6]];
            let dominant = cf::sym5_h1(&head) > 0;
            if !(w_in > 0 && dominant) && !(n11 || n12 || n21 || n22) {
                return;
            }
            let m2 = cx.q_nr(QSel::Q, p[4], p[5], p[6]);
            if m2.is_zero() {
                return;
            }
            // rotations of the head: slot j moved last
            let mut s5 = Q::zero();
            let mut s5_13 = Q::zero();
            for j in 0..5 {
                let mut t = [0i64; 5];
                let mut q = 0;
                for (i, &k) in head.iter().enumerate() {
                    if i != j {
                        t[q] = k;
                        q += 1;
                    }
                }
                t[4] = head[j];
                if cf::h1(&t) {
                    let v = m3(&t);
                    s5_13 += m1(&t) * v.clone();
                    s5 += v;
                }
            }
            let lhs = m1(&head) * s5 * qi(w_in);
            let r1 = if n11 || n21 { m1(&head) * m3(&head) * qi(3 * (n11 as i64 + n21 as i64)) } else { Q::zero() };
            let r2 = s5_13 * qi(12 * (n12 as i64 + n22 as i64));
            hit |= !lhs.is_zero() || !(r1.is_zero() && r2.is_zero());
            acc = acc.clone() + (lhs - r1 - r2) * m2;
        });
        if hit {
            nonzero += 1;
        }
        if !acc.is_zero() {
            rep.violation(ks, format!("residual {acc}"));
        }
    };
    for_each_multiset(7, r, |ks| eval(&mut rep, ks));
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let ks = septic_grouping_sample(&mut rng, it);
        eval(&mut rep, &ks);
    }
    rep.constant("nonzero_multisets", nonzero as f64);
    rep.finish()
}

/// Multisets populating the four grouped regions at arity seven.
fn septic_grouping_sample(rng: &mut ChaCha8Rng, it: usize) -> Vec<i64> {
    let mut v: Vec<i64> = (0..4).map(|_| small(rng, 3)).collect();
    match it % 4 {
        0 => v.extend([small(rng, 3), small(rng, 3), rng.gen_range(2000..50_000) * sign(rng)]),
        1 => {
            let b = rng.gen_range(1000..30_000);
            let c = (b as f64 * rng.gen_range(0.15..6.0)) as i64;
            let s = sign(rng);
            v.extend([small(rng, 2), b * s, c * s]);
        }
        2 => {
            v[0] = rng.gen_range(25_000..200_000) * sign(rng);
            v.extend([small(rng, 2), small(rng, 2), rng.gen_range(20..36) * sign(rng)]);
        }
        _ => {
            v[0] = rng.gen_range(45_000..300_000) * sign(rng);
            let b = rng.gen_range(20..40);
            let c = (b as f64 * rng.gen_range(0.3..3.0)) as i64;
            let s = sign(rng);
            v.extend([small(rng, 1), b * s, c * s]);
        }
    }
    v.sort_unstable();
    v
}

fn pairing_symmetrization(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r, ns) = if opts.quick { (3, 100) } else { (6, 3000) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("every multiset with |k_j| <= {r} and {ns} structured multisets with a dominant entry, three choices of m"),
    );
    let cx = ctx(0, opts);
    let weights: [fn(&[i64]) -> bool; 3] =
        [|p| cf::r1(p), |p| !cf::r1(p) && cf::r4(p), |p| !cf::r1(p) && !cf::r4(p)];
    let mut nonzero = [0u64; 3];
    let mut eval = |rep: &mut CertificationReport, ks: &[i64]| {
        rep.examined += 1;
        for (w, m) in weights.iter().enumerate() {
            let mut acc = Q::zero();
            let mut hit = false;
            for_each_arrangement(ks, |p| {
                if !cf::h1(p) || !m(p) {
                    return;
                }
                let a = cx.ratio0(QSel::Q1, p[0], p[1], p[2] + p[3] + p[4]);
                let lhs = if a.is_zero() { a } else { qi(9) * a * cx.q_nr(QSel::Q1, p[2], p[3], p[4]) };
                let rhs = if cf::r2(p) { Q::zero() } else { cx.q2_5(p) };
                hit |= !lhs.is_zero() || !rhs.is_zero();
                acc = acc.clone() + lhs - rhs;
            });
            if hit {
                nonzero[w] += 1;
            }
            if !acc.is_zero() {
                rep.violation(ks, format!("choice {w} of m: residual {acc}"));
            }
        }
    };
    for_each_multiset(5, r, |ks| eval(&mut rep, ks));
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let m = [3i64, 8, 20][it % 3];
        let mut ks: Vec<i64> = (0..4).map(|_| small(&mut rng, m)).collect();
        if it % 4 == 1 {
            ks[3] = -ks[0] - ks[1] - ks[2];
        }
        let mx = cf::max_abs(&ks).max(1);
        let lo = 512 * mx + 1;
        // up to well past the chi_R4 threshold |k5|^{4/5} <= 512 max
        let hi = ((512.0 * mx as f64).powf(1.25) * 2.0) as i64;
        ks.push(rng.gen_range(lo..=hi.max(lo)) * sign(&mut rng));
        ks.sort_unstable();
        eval(&mut rep, &ks);
    }
    for (w, c) in nonzero.iter().enumerate() {
        rep.constant(format!("nonzero_multisets_m{w}"), *c as f64);
    }
    rep.finish()
}

/// Residual of a regrouping identity `sum_arr (lhs - rhs)` for one multiset.
fn regroup_residual(
    cx: &MultCtx<Q>,
    shape: &CompositeShape,
    n: usize,
    ls: &[usize],
    ms: &[usize],
    ks: &[i64],
) -> (Q, bool) {
    let mut acc = Q::zero();
    let mut nz = false;
    for_each_arrangement(ks, |p| {
        let lhs = composite_value(cx, shape, p).expect("arity");
        nz |= !lhs.is_zero();
        let mut rhs = Q::zero();
        for &i in ls {
            rhs += l_numer(cx, n, i, p).expect("table entry");
        }
        for &i in ms {
            rhs += m_raw(cx, n, i, p).expect("table entry");
        }
        acc = acc.clone() + lhs - rhs;
    });
    (acc, nz)
}

fn regroup_cubic(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r, ns) = if opts.quick { (3, 60) } else { (6, 3000) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("every multiset with |k_j| <= {r} for L in {{0, 2}}; {ns} structured multisets with L = 4"),
    );
    let shape = CompositeShape { outer_order: 3, outer_set: vec![1], inner: InnerKind::NegQNr1 };
    let ls: Vec<usize> = (2..=8).collect();
    let ms: Vec<usize> = (8..=23).collect();
    let mut nonzero = 0u64;
    let mut eval = |rep: &mut CertificationReport, cx: &MultCtx<Q>, ks: &[i64]| {
        rep.examined += 1;
        let (res, nz) = regroup_residual(cx, &shape, 5, &ls, &ms, ks);
        nonzero += nz as u64;
        if !res.is_zero() {
            rep.violation(ks, format!("L = {}: residual {res}", cx.threshold));
        }
    };
    for l in [0, 2] {
        let cx = ctx(l, opts);
        for_each_multiset(5, r, |ks| eval(&mut rep, &cx, ks));
    }
    let cx = ctx(4, opts);
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let ks = structured_multiset(&mut rng, 5, it);
        eval(&mut rep, &cx, &ks);
    }
    rep.constant("nonzero_multisets", nonzero as f64);
    rep.finish()
}

fn regroup_quintic(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r, ns) = if opts.quick { (1, 6) } else { (2, 240) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("every multiset with |k_j| <= {r} for L = 0; {ns} structured multisets with L = 4"),
    );
    let shape = CompositeShape { outer_order: 5, outer_set: vec![2], inner: InnerKind::NegQNr1 };
    let ls = [1usize, 2];
    let ms: Vec<usize> = (5..=15).collect();
    let mut nonzero = 0u64;
    let mut eval = |rep: &mut CertificationReport, cx: &MultCtx<Q>, ks: &[i64]| {
        rep.examined += 1;
        let (res, nz) = regroup_residual(cx, &shape, 7, &ls, &ms, ks);
        nonzero += nz as u64;
        if !res.is_zero() {
            rep.violation(ks, format!("L = {}: residual {res}", cx.threshold));
        }
    };
    let cx = ctx(0, opts);
    for_each_multiset(7, r, |ks| eval(&mut rep, &cx, ks));
    let cx = ctx(4, opts);
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let ks = structured_multiset(&mut rng, 7, it);
        eval(&mut rep, &cx, &ks);
    }
    rep.constant("nonzero_multisets", nonzero as f64);
    rep.finish()
}

fn source_decomposition(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let (r3, r5, ns) = if opts.quick { (12, 3, 100) } else { (64, 8, 5000) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "every multiset with |k_j| <= {r3} (N = 3); every multiset with |k_j| <= {r5} and {ns} structured multisets (N = 5)"
        ),
    );
    let cx = ctx(2, opts);
    for_each_multiset(3, r3, |ks| {
        rep.examined += 1;
        let mut acc = Q::zero();
        for_each_arrangement(ks, |p| {
            for i in 1..=4 {
                acc = acc.clone() + l_numer(&cx, 3, i, p).expect("table entry");
            }
        });
        let want = -cx.q_nr(QSel::Q, ks[0], ks[1], ks[2]) * qi(arrangement_count(ks) as i64);
        if acc != want {
            rep.violation(ks, format!("cubic: {acc} vs {want}"));
        }
    });
    let g2 = cx.gamma.clone() * cx.gamma.clone() * qr(4, 5);
    let quintic = |rep: &mut CertificationReport, ks: &[i64]| {
        rep.examined += 1;
        let q1 = qi(ks.iter().sum());
        let (mut a, mut b, mut r1, mut r1r2) = (Q::zero(), Q::zero(), 0i64, 0i64);
        for_each_arrangement(ks, |p| {
            a = a.clone()
                + l_numer(&cx, 5, 1, p).expect("L5_1")
                + m_raw(&cx, 5, 3, p).expect("M5_3")
                + m_raw(&cx, 5, 4, p).expect("M5_4")
                + m_raw(&cx, 5, 5, p).expect("M5_5");
            b = b.clone() + m_raw(&cx, 5, 1, p).expect("M5_1") + m_raw(&cx, 5, 2, p).expect("M5_2");
            if cf::r1(p) {
                r1 += 1;
                if !cf::r2(p) {
                    r1r2 += 1;
                }
            }
        });
        let cnt = arrangement_count(ks) as i64;
        // [5 R1]_sym = 5 (sum over arrangements) / count
        let want_a = qi(-6) * cx.delta.clone() * q1.clone() * qi(cnt - 5 * r1);
        let want_b = -g2.clone() * q1.clone() * qi(r1r2);
        let want_c = -cx.big_q1_5(ks) * qi(cnt);
        if a != want_a {
            rep.violation(ks, format!("delta part: {a} vs {want_a}"));
        }
        if b != want_b {
            rep.violation(ks, format!("gamma^2 part: {b} vs {want_b}"));
        }
        if a.clone() + b.clone() != want_c {
            rep.violation(ks, format!("Q1^(5): {} vs {want_c}", a + b));
        }
    };
    for_each_multiset(5, r5, |ks| quintic(&mut rep, ks));
    let mut rng = stream(opts.seed, id);
    for it in 0..ns {
        let m = [2i64, 5, 30][it % 3];
        let mut ks: Vec<i64> = (0..4).map(|_| small(&mut rng, m)).collect();
        if it % 2 == 0 {
            ks[3] = -ks[0] - ks[1] - ks[2];
        }
        let mx = cf::max_abs(&ks).max(1);
        let k5 = match it % 4 {
            0 | 1 => rng.gen_range(512 * mx + 1..=2048 * mx + 8),
            2 => rng.gen_range(1..=16 * mx),
            _ => log_uniform(&mut rng, 1, 1 << 22),
        };
        ks.push(k5 * sign(&mut rng));
        ks.sort_unstable();
        quintic(&mut rep, &ks);
    }
    rep.finish()
}

fn q2_closed_form(id: &str, anchor: &str, opts: &CertifyOptions) -> CertificationReport {
    let n = if opts.quick { 500 } else { 10_000 };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("{n} random tuples with |k_j| <= 50 plus {n} with |k_j| <= 10^5, gamma = 5; tuples with a vanishing factor are skipped"),
    );
    let cx = ctx(0, opts);
    let mut rng = stream(opts.seed, id);
    let mut skipped = 0u64;
    for bound in [50i64, 100_000] {
        for _ in 0..n {
            let ks: Vec<i64> = (0..5).map(|_| small(&mut rng, bound)).collect();
            let den = [
                ks[0] + ks[1],
                ks[2] + ks[3],
                ks[0] + ks[1] + ks[2] + ks[4],
                ks[0] + ks[1] + ks[3] + ks[4],
                ks[0] + ks[2] + ks[3] + ks[4],
                ks[1] + ks[2] + ks[3] + ks[4],
            ];
            if den.contains(&0) {
                skipped += 1;
                continue;
            }
            rep.examined += 1;
            let a = cx.q2_5(&ks);
            let b = cx.q2_5_closed(&ks);
            if a != b {
                rep.violation(&ks, format!("definition {a} vs closed form {b}"));
            }
        }
    }
    rep.constant("skipped_vanishing_factor", skipped as f64);
    rep.finish()
}
