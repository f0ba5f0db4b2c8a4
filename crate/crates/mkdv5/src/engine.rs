//! N-linear functionals `Lambda^{(N)}` and the normal-form maps `F` and `G`.
//!
//! A sum `Lambda(m)(k) = sum_{k1+..+kN = k} e^{-t Phi} m(k) prod v_l(k_l)` is evaluated with the
//! separable phase `e^{-t Phi} = e^{-t phi(k)} prod e^{t phi(k_l)}`: every slot is first rotated to
//! `u_l = e^{t phi} v_l`, the weighted products are summed, and the output is rotated back.
//!
//! Tuples are enumerated only over a superset of the multiplier support (dense box, top-separated
//! tuples, or the grouped high-low regions), and only over nonzero slot coefficients. Work is split
//! over the root coordinate of the enumerator and the per-root partial sums are added in root order,
//! so serial and parallel runs give bit-identical results.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff::{self as cf, separation};
use crate::error::{Error, Result};
use crate::field::{convolve, SpectralField};
use crate::multiplier::{
    composite_shape, l_numer, l_raw, m_raw, CompositeShape, InnerKind, MultCtx, MultiplierId,
};
use crate::phase::symbol_f64;

/// Tuple-count limit and parallelism for one `Lambda` evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaBudget {
    pub max_tuples: u128,
    pub parallel: bool,
}

impl Default for LambdaBudget {
    fn default() -> Self {
        Self { max_tuples: 2_000_000_000, parallel: true }
    }
}

/// Superset of a multiplier's support used to enumerate tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// Every tuple in the box.
    Dense,
    /// `8^{N-2} max_{j<N} |k_j| < |k_N|`.
    Top,
    /// `chi_NR(i,j)` at arity five or seven.
    Nr(u8, u8),
    /// `(a, -a, a)`.
    Diag3,
}

/// Radii and threshold shared by `F`, `G` and their building blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfConfig {
    /// Output (Galerkin) radius; also the radius of every cubic sum.
    pub radius: usize,
    pub threshold: i64,
    pub quintic_radius: usize,
    pub septic_radius: usize,
    pub budget: LambdaBudget,
    /// Test-only corruption of the multiplier table.
    #[serde(default)]
    pub perturb: bool,
}

impl NfConfig {
    pub fn new(radius: usize, threshold: i64) -> Self {
        Self {
            radius,
            threshold,
            quintic_radius: radius.min(16),
            septic_radius: radius.min(8),
            budget: LambdaBudget::default(),
            perturb: false,
        }
    }

    fn slot_radius(&self, n: usize) -> usize {
        match n {
            1..=3 => self.radius,
            4 | 5 => self.quintic_radius,
            _ => self.septic_radius,
        }
    }

    fn ctx(&self, p: &PhaseParams, c: &EquationCoefficients) -> MultCtx<f64> {
        MultCtx::new(c, p, self.threshold).perturbed(self.perturb)
    }
}

/// Phase-rotated nonzero coefficients of one slot, sorted by `|k|`.
struct Slot {
    list: Vec<(i64, C64)>,
    dense: Vec<C64>,
    radius: i64,
}

impl Slot {
    fn new(f: &SpectralField, radius: usize, t: f64, g: f64) -> Self {
        let r = radius.min(f.radius()) as i64;
        let mut dense = vec![C64::new(0.0, 0.0); (2 * r + 1) as usize];
        let mut list = Vec::new();
        for k in -r..=r {
            let c = f.coeff(k);
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let u = c * C64::from_polar(1.0, t * symbol_f64(k, g));
            dense[(k + r) as usize] = u;
            list.push((k, u));
        }
        list.sort_by_key(|&(k, _)| (k.abs(), k));
        Self { list, dense, radius: r }
    }

    /// Entries with `|k| <= b`.
    fn upto(&self, b: i64) -> &[(i64, C64)] {
        if b < 0 {
            return &[];
        }
        let n = self.list.partition_point(|&(k, _)| k.abs() <= b);
        &self.list[..n]
    }

    fn at(&self, k: i64) -> C64 {
        if k.abs() > self.radius {
            C64::new(0.0, 0.0)
        } else {
            self.dense[(k + self.radius) as usize]
        }
    }
}

/// Accumulates `m(k) * prod` into the output band.
struct Acc<'a, M> {
    out: Vec<C64>,
    r: i64,
    ks: [i64; 11],
    m: &'a M,
}

impl<'a, M: Fn(&[i64]) -> C64> Acc<'a, M> {
    #[inline]
    fn visit(&mut self, n: usize, prod: C64) {
        let k: i64 = self.ks[..n].iter().sum();
        if k.abs() > self.r {
            return;
        }
        let w = (self.m)(&self.ks[..n]);
        if w.re != 0.0 || w.im != 0.0 {
            self.out[(k + self.r) as usize] += w * prod;
        }
    }

    /// Cartesian product over `lists[i]` written into positions `pos[i]`.
    fn cart(&mut self, n: usize, lists: &[&[(i64, C64)]], pos: &[usize], prod: C64) {
        match lists.split_first() {
            None => self.visit(n, prod),
            Some((first, rest)) => {
                for &(k, u) in first.iter() {
                    self.ks[pos[0]] = k;
                    self.cart(n, rest, &pos[1..], prod * u);
                }
            }
        }
    }
}

fn tuple_estimate(support: Support, slots: &[Slot]) -> u128 {
    let n = slots.len();
    let len = |s: &Slot| s.list.len() as u128;
    match support {
        Support::Dense => slots.iter().map(len).product(),
        Support::Diag3 => len(&slots[0]),
        Support::Top => {
            let sep = separation(n);
            slots[n - 1]
                .list
                .iter()
                .map(|&(k, _)| {
                    let b = (k.abs() - 1) / sep;
                    slots[..n - 1].iter().map(|s| s.upto(b).len() as u128).product::<u128>()
                })
                .sum()
        }
        Support::Nr(..) => {
            // inner triple bound times the full head
            let inner: u128 = slots[n - 3..].iter().map(len).product();
            let head: u128 = slots[..n - 3].iter().map(len).product();
            inner.saturating_mul(head.max(1))
        }
    }
}

/// `Lambda^{(N)}(m; f_1, .., f_N)` at time `t`, each slot truncated to `radii[l]`, output clamped to `out_radius`.
///
/// The caller guarantees that `support` contains the support of `m`.
pub fn lambda<M>(
    support: Support,
    m: &M,
    fields: &[&SpectralField],
    radii: &[usize],
    t: f64,
    params: &PhaseParams,
    out_radius: usize,
    budget: &LambdaBudget,
) -> Result<SpectralField>
where
    M: Fn(&[i64]) -> C64 + Sync,
{
    let n = fields.len();
    if radii.len() != n || n == 0 || n > 11 {
        return Err(Error::ArityMismatch { expected: n, got: radii.len() });
    }
    let valid = match support {
        Support::Dense => true,
        Support::Top => n >= 2,
        Support::Diag3 => n == 3,
        Support::Nr(..) => n == 5 || n == 7,
    };
    if !valid {
        return Err(Error::InvalidConfig(format!("support {support:?} at arity {n}")));
    }
    let g = params.cubic();
    let slots: Vec<Slot> = fields.iter().zip(radii).map(|(f, &r)| Slot::new(f, r, t, g)).collect();
    let est = tuple_estimate(support, &slots);
    if est > budget.max_tuples {
        return Err(Error::BudgetExceeded { estimated: est, limit: budget.max_tuples });
    }
    let r = out_radius as i64;
    let roots = &slots[root_slot(support, n)].list;
    let run = |root: &(i64, C64)| -> Vec<C64> {
        let mut acc = Acc { out: vec![C64::new(0.0, 0.0); (2 * r + 1) as usize], r, ks: [0; 11], m };
        enumerate_root(support, &slots, *root, &mut acc);
        acc.out
    };
    let parts: Vec<Vec<C64>> = if budget.parallel {
        roots.par_iter().map(run).collect()
    } else {
        roots.iter().map(run).collect()
    };
    let mut out = vec![C64::new(0.0, 0.0); (2 * r + 1) as usize];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as i64 - r;
        *o *= C64::from_polar(1.0, -t * symbol_f64(k, g));
    }
    let real = fields.iter().all(|f| f.is_real_valued());
    Ok(SpectralField::from_coeffs(out_radius, out, real))
}

fn root_slot(support: Support, n: usize) -> usize {
    match support {
        Support::Dense | Support::Diag3 => 0,
        Support::Top | Support::Nr(..) => n - 1,
    }
}

fn enumerate_root<M: Fn(&[i64]) -> C64>(support: Support, slots: &[Slot], root: (i64, C64), acc: &mut Acc<'_, M>) {
    let n = slots.len();
    let (k0, u0) = root;
    match support {
        Support::Dense => {
            acc.ks[0] = k0;
            let lists: Vec<&[(i64, C64)]> = slots[1..].iter().map(|s| s.list.as_slice()).collect();
            let pos: Vec<usize> = (1..n).collect();
            acc.cart(n, &lists, &pos, u0);
        }
        Support::Diag3 => {
            let p = u0 * slots[1].at(-k0) * slots[2].at(k0);
            if p.re != 0.0 || p.im != 0.0 {
                acc.ks[..3].copy_from_slice(&[k0, -k0, k0]);
                acc.visit(3, p);
            }
        }
        Support::Top => {
            if k0 == 0 {
                return;
            }
            acc.ks[n - 1] = k0;
            let b = (k0.abs() - 1) / separation(n);
            let lists: Vec<&[(i64, C64)]> = slots[..n - 1].iter().map(|s| s.upto(b)).collect();
            let pos: Vec<usize> = (0..n - 1).collect();
            acc.cart(n, &lists, &pos, u0);
        }
        Support::Nr(i, j) => {
            let c = k0;
            if c == 0 {
                return;
            }
            let (sa, sb) = (&slots[n - 3], &slots[n - 2]);
            let inner = |a: i64, ua: C64, b: i64, ub: C64, acc: &mut Acc<'_, M>| {
                acc.ks[n - 3] = a;
                acc.ks[n - 2] = b;
                acc.ks[n - 1] = c;
                let big = a + b + c;
                let prod = u0 * ua * ub;
                let sep = separation(n - 2);
                if j == 1 {
                    if big == 0 {
                        return;
                    }
                    let bound = (big.abs() - 1) / sep;
                    let lists: Vec<&[(i64, C64)]> = slots[..n - 3].iter().map(|s| s.upto(bound)).collect();
                    let pos: Vec<usize> = (0..n - 3).collect();
                    acc.cart(n, &lists, &pos, prod);
                } else {
                    for &(k1, u1) in slots[0].list.iter().rev() {
                        if k1.abs() as i128 <= sep as i128 * big.abs() as i128 {
                            break;
                        }
                        acc.ks[0] = k1;
                        let bound = (k1.abs() - 1) / sep;
                        let lists: Vec<&[(i64, C64)]> = slots[1..n - 3].iter().map(|s| s.upto(bound)).collect();
                        let pos: Vec<usize> = (1..n - 3).collect();
                        acc.cart(n, &lists, &pos, prod * u1);
                    }
                }
            };
            if i == 1 {
                let bound = (c.abs() - 1) / 8;
                for &(a, ua) in sa.upto(bound) {
                    for &(b, ub) in sb.upto(bound) {
                        inner(a, ua, b, ub, acc);
                    }
                }
            } else {
                for &(b, ub) in sb.list.iter() {
                    if b == 0 || b.abs() > 8 * c.abs() || c.abs() > 8 * b.abs() {
                        continue;
                    }
                    let lim = (b + c).abs().min(b.abs()).min(c.abs());
                    if lim == 0 {
                        continue;
                    }
                    for &(a, ua) in sa.upto((lim - 1) / 16) {
                        inner(a, ua, b, ub, acc);
                    }
                }
            }
        }
    }
}

/// `Lambda` with every slot equal to `v`.
pub fn lambda_equal<M>(
    support: Support,
    m: &M,
    n: usize,
    v: &SpectralField,
    radius: usize,
    t: f64,
    params: &PhaseParams,
    out_radius: usize,
    budget: &LambdaBudget,
) -> Result<SpectralField>
where
    M: Fn(&[i64]) -> C64 + Sync,
{
    let fields = vec![v; n];
    let radii = vec![radius; n];
    lambda(support, m, &fields, &radii, t, params, out_radius, budget)
}

/// `N Lambda(m~; v, .., v, w)` for the symmetrization `m~` of `m`, as `sum_j Lambda(m; w in slot j)`.
pub fn lambda_slot_sum<M>(
    support: Support,
    m: &M,
    n: usize,
    v: &SpectralField,
    v_radius: usize,
    w: &SpectralField,
    t: f64,
    params: &PhaseParams,
    out_radius: usize,
    budget: &LambdaBudget,
) -> Result<SpectralField>
where
    M: Fn(&[i64]) -> C64 + Sync,
{
    let mut total = SpectralField::zeros(out_radius, v.is_real_valued() && w.is_real_valued());
    if w.is_zero() {
        return Ok(total);
    }
    for j in 0..n {
        let mut fields = vec![v; n];
        let mut radii = vec![v_radius; n];
        fields[j] = w;
        radii[j] = w.radius();
        let part = lambda(support, m, &fields, &radii, t, params, out_radius, budget)?;
        total = total.add(&part);
    }
    Ok(total)
}

#[inline]
fn imag(v: f64) -> C64 {
    C64::new(0.0, v)
}

#[inline]
fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Output-only quintic convolutions at radius `r`: `ik (u*u*u*u*u)(k)`, `ik C4 v(k)` and `ik (C4 - C2^2) v(k)`,
/// where `C4 = sum_{k1+..+k4=0} prod u`, `C2 = sum u(k)u(-k)` and `u = e^{t phi} v`.
pub struct QuinticConv {
    pub q1: SpectralField,
    pub q1_r1: SpectralField,
    pub q1_r1_nr2: SpectralField,
}

pub fn quintic_convolutions(v: &SpectralField, r: usize, t: f64, params: &PhaseParams, out_radius: usize) -> QuinticConv {
    let g = params.cubic();
    let rot = |f: &SpectralField, sign: f64| f.map_modes(|k, c| c * C64::from_polar(1.0, sign * t * symbol_f64(k, g)));
    let u = rot(&v.with_radius(r), 1.0);
    let u2 = convolve(&u, &u);
    let u4 = convolve(&u2, &u2);
    let u5 = convolve(&u4, &u);
    let c4 = u4.coeff(0);
    let c2 = u2.coeff(0);
    let real = v.is_real_valued();
    let ik = |k: i64| imag(k as f64);
    let q1 = rot(&u5.with_radius(out_radius), -1.0).map_modes(|k, c| ik(k) * c).mark_real(real);
    let vr = v.with_radius(r).with_radius(out_radius);
    let q1_r1 = vr.map_modes(|k, c| ik(k) * c4 * c).mark_real(real);
    let q1_r1_nr2 = vr.map_modes(|k, c| ik(k) * (c4 - c2 * c2) * c).mark_real(real);
    QuinticConv { q1, q1_r1, q1_r1_nr2 }
}

/// `Lambda^{(5)}(-Q1^{(5)}, v)` at radius `r`.
pub fn lambda_neg_q1_5(
    v: &SpectralField,
    r: usize,
    t: f64,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
    out_radius: usize,
) -> SpectralField {
    let qc = quintic_convolutions(v, r, t, params, out_radius);
    let (d, g2) = (coeffs.delta, coeffs.gamma * coeffs.gamma);
    // -6 delta (q1 - 5 q1 R1) - (4/5) gamma^2 q1 (R1 (1 - R2))
    qc.q1
        .scale(-6.0 * d)
        .axpy(30.0 * d, &qc.q1_r1)
        .axpy(-0.8 * g2, &qc.q1_r1_nr2)
}

/// Right-hand side of the interaction-picture equation:
/// `Lambda3(-Q chi_NR1) + Lambda3(Q [3 chi_R3]_sym) + Lambda5(-Q1^{(5)})`.
pub fn eval_rhs_fourier(
    v: &SpectralField,
    t: f64,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
    budget: &LambdaBudget,
) -> Result<SpectralField> {
    let r = v.radius();
    let ctx = MultCtx::new(coeffs, params, 0);
    let cubic = lambda_equal(Support::Dense, &cubic_rhs_mult(&ctx), 3, v, r, t, params, r, budget)?;
    Ok(cubic.add(&lambda_neg_q1_5(v, r, t, params, coeffs, r)).mark_real(v.is_real_valued()))
}

fn cubic_rhs_mult(ctx: &MultCtx<f64>) -> impl Fn(&[i64]) -> C64 + Sync + '_ {
    move |k: &[i64]| {
        use crate::multiplier::QSel;
        let nr = if cf::nr1(k[0], k[1], k[2]) { -1.0 } else { 0.0 };
        let r3 = crate::multiplier::r3_sym_count(k[0], k[1], k[2]) as f64 / 2.0;
        if nr == 0.0 && r3 == 0.0 {
            return C64::new(0.0, 0.0);
        }
        imag(ctx.q(QSel::Q, k[0], k[1], k[2]) * (nr + r3))
    }
}

/// Evaluates the inner field of a composite multiplier, clamped to `clamp`.
pub fn inner_field(
    kind: InnerKind,
    v: &SpectralField,
    t: f64,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
    cfg: &NfConfig,
    clamp: usize,
) -> Result<SpectralField> {
    let ctx = cfg.ctx(params, coeffs);
    let r = cfg.radius;
    match kind {
        InnerKind::NegQ1_5 => Ok(lambda_neg_q1_5(v, cfg.quintic_radius, t, params, coeffs, clamp)),
        InnerKind::R3Sym => {
            // equal slots: the raw 3 Q chi_R3 on (a, -a, a) carries the whole symmetrized sum
            let m = |k: &[i64]| imag(m_raw(&ctx, 3, 1, k).unwrap_or(0.0));
            lambda_equal(Support::Diag3, &m, 3, v, r, t, params, clamp, &cfg.budget)
        }
        _ => {
            let m = |k: &[i64]| imag(kind.eval(&ctx, k));
            lambda_equal(Support::Dense, &m, 3, v, r, t, params, clamp, &cfg.budget)
        }
    }
}

/// Support superset of the raw `L_i^{(N)}`.
pub fn l_support(n: usize, i: usize) -> Support {
    match (n, i) {
        (3, _) => Support::Dense,
        (5, 7) => Support::Nr(1, 1),
        (5, 8) => Support::Nr(2, 1),
        _ => Support::Top,
    }
}

/// Support superset of the non-composite raw `M_i^{(N)}` (the quintic `M1, M2, M3, M5` use convolutions).
pub fn m_support(n: usize, i: usize) -> Support {
    match (n, i) {
        (3, 1) => Support::Diag3,
        (5, 18..=20) | (7, 10..=12) => Support::Nr(1, 1),
        (5, 21) | (7, 13) => Support::Nr(1, 2),
        (5, 22) | (7, 14) => Support::Nr(2, 1),
        (5, 23) | (7, 15) => Support::Nr(2, 2),
        _ => Support::Top,
    }
}

/// `Lambda(m, v)` for a composite table multiplier `m = [w sum L~ chi_{>L}]_ext1 [inner]_ext2`.
///
/// The inner field is clamped to `clamp` (the Galerkin radius) unless `clamp` is large enough to hold it.
pub fn lambda_composite(
    shape: &CompositeShape,
    v: &SpectralField,
    t: f64,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
    cfg: &NfConfig,
    clamp: usize,
) -> Result<SpectralField> {
    let n = shape.outer_order;
    let out = cfg.radius;
    let v_r = cfg.slot_radius(n);
    let zero = SpectralField::zeros(out, v.is_real_valued());
    // chi_{>L} on the outer tuple needs some entry above L.
    if (v_r.max(clamp) as i64) <= cfg.threshold || v.is_zero() {
        return Ok(zero);
    }
    let w = inner_field(shape.inner, v, t, params, coeffs, cfg, clamp)?;
    if w.is_zero() {
        return Ok(zero);
    }
    let ctx = cfg.ctx(params, coeffs);
    let mut total = zero;
    // Group the outer L's by enumerator support.
    let mut groups: Vec<(Support, Vec<usize>)> = Vec::new();
    for &i in &shape.outer_set {
        let s = l_support(n, i);
        match groups.iter_mut().find(|(g, _)| *g == s) {
            Some((_, v)) => v.push(i),
            None => groups.push((s, vec![i])),
        }
    }
    for (s, set) in groups {
        let m = |k: &[i64]| {
            if cf::max_abs(k) <= ctx.threshold {
                return C64::new(0.0, 0.0);
            }
            real(set.iter().map(|&i| l_raw(&ctx, n, i, k).unwrap_or(0.0)).sum())
        };
        total = total.add(&lambda_slot_sum(s, &m, n, v, v_r, &w, t, params, out, &cfg.budget)?);
    }
    Ok(total)
}

/// `F_{phi,L}(v)`.
pub fn eval_f(
    v: &SpectralField,
    t: f64,
    cfg: &NfConfig,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
) -> Result<SpectralField> {
    let ctx = cfg.ctx(params, coeffs);
    let out = cfg.radius;
    let mut total = SpectralField::zeros(out, v.is_real_valued());
    for (n, count) in crate::multiplier::L_TABLE {
        let r = cfg.slot_radius(n);
        if (r as i64) <= cfg.threshold {
            continue;
        }
        for (s, set) in grouped(n, count, l_support) {
            let m = |k: &[i64]| {
                if cf::max_abs(k) <= ctx.threshold {
                    return C64::new(0.0, 0.0);
                }
                real(set.iter().map(|&i| l_raw(&ctx, n, i, k).unwrap_or(0.0)).sum())
            };
            total = total.add(&lambda_equal(s, &m, n, v, r, t, params, out, &cfg.budget)?);
        }
    }
    Ok(total.mark_real(v.is_real_valued()))
}

fn grouped(n: usize, count: usize, sup: fn(usize, usize) -> Support) -> Vec<(Support, Vec<usize>)> {
    let mut groups: Vec<(Support, Vec<usize>)> = Vec::new();
    for i in 1..=count {
        let s = sup(n, i);
        match groups.iter_mut().find(|(g, _)| *g == s) {
            Some((_, v)) => v.push(i),
            None => groups.push((s, vec![i])),
        }
    }
    groups
}

/// `G_{phi,L}(v)`.
///
/// Non-composite terms sharing an enumerator are summed pointwise before weighting the products,
/// so the cancelling pairs `M1 + M9` and `M11 + M13` are combined before any rounding of the sum.
/// `M1 + M2 = -(4/5) gamma^2 q1 R1 (1 - R2)`, `M3` and `M5` reduce to output-only convolutions
/// minus their top-separated parts.
pub fn eval_g(
    v: &SpectralField,
    t: f64,
    cfg: &NfConfig,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
) -> Result<SpectralField> {
    let ctx = cfg.ctx(params, coeffs);
    let out = cfg.radius;
    let real_in = v.is_real_valued();
    let mut total = SpectralField::zeros(out, real_in);
    let le = |k: &[i64]| cf::max_abs(k) <= ctx.threshold;
    let zero = C64::new(0.0, 0.0);

    // cubic: sum_i L~_i Phi chi_{<=L} + M^{(3)}_1
    {
        let m = |k: &[i64]| {
            let mut acc = 0.0;
            if le(k) {
                for i in 1..=4 {
                    acc += l_numer(&ctx, 3, i, k).unwrap_or(0.0);
                }
            }
            imag(acc)
        };
        total = total.add(&lambda_equal(Support::Dense, &m, 3, v, out, t, params, out, &cfg.budget)?);
        let m1 = |k: &[i64]| imag(m_raw(&ctx, 3, 1, k).unwrap_or(0.0));
        total = total.add(&lambda_equal(Support::Diag3, &m1, 3, v, out, t, params, out, &cfg.budget)?);
    }

    // quintic and septic direct terms grouped by support
    for n in [5usize, 7] {
        let r = cfg.slot_radius(n);
        let l_count = if n == 5 { 8 } else { 2 };
        let m_ids: Vec<usize> = if n == 5 {
            vec![4, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23]
        } else {
            (6..=15).collect()
        };
        let mut groups: Vec<(Support, Vec<usize>, Vec<usize>)> = Vec::new();
        for i in 1..=l_count {
            push_group(&mut groups, l_support(n, i), Some(i), None);
        }
        for &i in &m_ids {
            push_group(&mut groups, m_support(n, i), None, Some(i));
        }
        for (s, ls, ms) in groups {
            let top_fix = n == 5 && s == Support::Top;
            let m = |k: &[i64]| {
                let mut acc = 0.0;
                if le(k) {
                    for &i in &ls {
                        acc += l_numer(&ctx, n, i, k).unwrap_or(0.0);
                    }
                }
                for &i in &ms {
                    acc += m_raw(&ctx, n, i, k).unwrap_or(0.0);
                }
                if top_fix && cf::h1(k) {
                    // top-separated parts of M3 (+30 delta q1 H1) and M5 (-30 delta q1 R1 H1)
                    let s5: i64 = k.iter().sum();
                    let r1 = if cf::r1(k) { 1.0 } else { 0.0 };
                    acc += 30.0 * ctx.delta * s5 as f64 * (1.0 - r1);
                }
                if acc == 0.0 {
                    zero
                } else {
                    imag(acc)
                }
            };
            total = total.add(&lambda_equal(s, &m, n, v, r, t, params, out, &cfg.budget)?);
        }
    }

    // output-only quintic convolutions: M1 + M2, M3 (non-top part), M5 (non-top part)
    {
        let qc = quintic_convolutions(v, cfg.quintic_radius, t, params, out);
        let (d, g2) = (coeffs.delta, coeffs.gamma * coeffs.gamma);
        let m5_sign = if cfg.perturb { -1.0 } else { 1.0 };
        let conv = qc.q1.scale(-6.0 * d).axpy(-0.8 * g2, &qc.q1_r1_nr2).axpy(30.0 * d * m5_sign, &qc.q1_r1);
        total = total.add(&conv);
        if cfg.perturb {
            // the top-separated correction of M5 was added with the unperturbed sign
            let fix = |k: &[i64]| {
                if cf::h1(k) && cf::r1(k) {
                    imag(60.0 * ctx.delta * k.iter().sum::<i64>() as f64)
                } else {
                    zero
                }
            };
            let r = cfg.quintic_radius;
            total = total.add(&lambda_equal(Support::Top, &fix, 5, v, r, t, params, out, &cfg.budget)?);
        }
    }

    // composites
    for id in MultiplierId::table() {
        if let Some(shape) = composite_shape(id) {
            total = total.add(&lambda_composite(&shape, v, t, params, coeffs, cfg, out)?);
        }
    }
    Ok(total.mark_real(real_in))
}

fn push_group(groups: &mut Vec<(Support, Vec<usize>, Vec<usize>)>, s: Support, l: Option<usize>, m: Option<usize>) {
    let idx = match groups.iter().position(|(g, _, _)| *g == s) {
        Some(i) => i,
        None => {
            groups.push((s, Vec::new(), Vec::new()));
            groups.len() - 1
        }
    };
    if let Some(i) = l {
        groups[idx].1.push(i);
    }
    if let Some(i) = m {
        groups[idx].2.push(i);
    }
}

/// `Lambda(m, v)` for a single table multiplier (any arity, composites included), with all slots equal to `v`.
pub fn lambda_table(
    id: MultiplierId,
    v: &SpectralField,
    t: f64,
    params: &PhaseParams,
    coeffs: &EquationCoefficients,
    cfg: &NfConfig,
) -> Result<SpectralField> {
    let ctx = cfg.ctx(params, coeffs);
    let out = cfg.radius;
    if let Some(shape) = composite_shape(id) {
        return lambda_composite(&shape, v, t, params, coeffs, cfg, out);
    }
    let n = id.arity();
    let r = cfg.slot_radius(n);
    let (support, m): (Support, Box<dyn Fn(&[i64]) -> C64 + Sync + '_>) = match id {
        MultiplierId::L(n, i) => (l_support(n, i), Box::new(move |k: &[i64]| real(l_raw(&ctx, n, i, k).unwrap_or(0.0)))),
        MultiplierId::M(5, i) if matches!(i, 1 | 2 | 3 | 5) => {
            (Support::Dense, Box::new(move |k: &[i64]| imag(m_raw(&ctx, 5, i, k).unwrap_or(0.0))))
        }
        MultiplierId::M(n, i) => (m_support(n, i), Box::new(move |k: &[i64]| imag(m_raw(&ctx, n, i, k).unwrap_or(0.0)))),
        other => {
            let c = ctx.clone();
            (Support::Dense, Box::new(move |k: &[i64]| imag(crate::multiplier::raw_value(&c, other, k).unwrap_or(0.0))))
        }
    };
    lambda_equal(support, &m, n, v, r, t, params, out, &cfg.budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_pm1() -> SpectralField {
        let mut f = SpectralField::zeros(3, true);
        f.set(1, C64::new(1.0, 0.0));
        f.set(-1, C64::new(1.0, 0.0));
        f
    }

    #[test]
    fn cube_of_delta_pm1() {
        let f = unit_pm1();
        let one = |_: &[i64]| C64::new(1.0, 0.0);
        let p = PhaseParams::free();
        let out = lambda_equal(Support::Dense, &one, 3, &f, 3, 0.0, &p, 3, &LambdaBudget::default()).unwrap();
        let want = [(3, 1.0), (1, 3.0), (-1, 3.0), (-3, 1.0), (0, 0.0), (2, 0.0)];
        for (k, w) in want {
            assert!((out.coeff(k) - C64::new(w, 0.0)).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn single_slot_is_identity() {
        let f = unit_pm1();
        let one = |_: &[i64]| C64::new(1.0, 0.0);
        let p = PhaseParams::new(5.0, 0.3);
        let out = lambda_equal(Support::Dense, &one, 1, &f, 3, 0.7, &p, 3, &LambdaBudget::default()).unwrap();
        assert!(out.sub(&f).is_zero() || out.sub(&f).coeffs().iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn budget_is_enforced() {
        let f = unit_pm1();
        let one = |_: &[i64]| C64::new(1.0, 0.0);
        let b = LambdaBudget { max_tuples: 4, parallel: false };
        let e = lambda_equal(Support::Dense, &one, 3, &f, 3, 0.0, &PhaseParams::free(), 3, &b).unwrap_err();
        assert_eq!(e, Error::BudgetExceeded { estimated: 8, limit: 4 });
    }
}
