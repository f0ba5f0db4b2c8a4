//! Structural invariants of phases, multipliers and the multilinear engine.

use mkdv5::engine::{eval_f, eval_g, NfConfig};
use mkdv5::multiplier::{raw_value, ValueKind};
use mkdv5::phase::{mismatch_parts, phase_coeff, phase_mismatch};
use mkdv5::sym::for_each_permutation;
use mkdv5::{EquationCoefficients, MultCtx, MultiplierId, PhaseParams, SpectralField};
use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn exact_ctx(threshold: i64) -> MultCtx<Q> {
    let c = EquationCoefficients::<Q>::from_ints(2, 3, 2, 1);
    let p = PhaseParams { gamma: Q::from_integer(2.into()), e1: Q::new(1.into(), 2.into()) };
    MultCtx::new(&c, &p, threshold)
}

fn float_ctx(threshold: i64) -> MultCtx<f64> {
    MultCtx::new(&EquationCoefficients::new(2.0, 3.0, 2.0, 1.0), &PhaseParams::new(2.0, 0.5), threshold)
}

/// Table multipliers of arity at most seven (the higher ones are products of these).
fn ids() -> Vec<MultiplierId> {
    MultiplierId::table().into_iter().filter(|id| id.arity() <= 7).collect()
}

/// A tuple of the given arity mixing small entries with one large one, so cutoffs on both sides are hit.
fn tuple(n: usize) -> impl Strategy<Value = Vec<i64>> {
    (prop::collection::vec(-6i64..=6, n - 1), -3000i64..=3000, 0..n).prop_map(move |(mut v, big, at)| {
        v.insert(at, big);
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    // real L's are even in k, imaginary coefficients odd: real data gives Hermitian sums
    #[test]
    fn multipliers_have_conjugation_parity(ks in tuple(7), which in 0usize..64) {
        let ctx = exact_ctx(4);
        let list = ids();
        let id = list[which % list.len()];
        let ks = &ks[..id.arity()];
        let neg: Vec<i64> = ks.iter().map(|k| -k).collect();
        let a = raw_value(&ctx, id, ks).unwrap();
        let b = raw_value(&ctx, id, &neg).unwrap();
        match id.kind() {
            ValueKind::Real => prop_assert_eq!(a, b, "{} at {:?}", id, ks),
            ValueKind::Imag => prop_assert_eq!(a, -b, "{} at {:?}", id, ks),
        }
    }

    #[test]
    fn float_multipliers_agree_with_exact(ks in tuple(5), which in 0usize..64) {
        let list: Vec<MultiplierId> = ids().into_iter().filter(|id| id.arity() <= 5).collect();
        let id = list[which % list.len()];
        let ks = &ks[..id.arity()];
        let e = raw_value(&exact_ctx(4), id, ks).unwrap();
        let f = raw_value(&float_ctx(4), id, ks).unwrap();
        let e = e.to_f64().unwrap();
        prop_assert!((f - e).abs() <= 1e-9 * e.abs().max(1.0), "{}: {} vs {} at {:?}", id, f, e, ks);
    }

    #[test]
    fn phase_is_odd_and_permutation_invariant(ks in prop::collection::vec(-200i64..=200, 2..=6)) {
        let p = PhaseParams { gamma: Q::from_integer(3.into()), e1: Q::new(2.into(), 7.into()) };
        let phi = phase_mismatch(&ks, &p);
        let neg: Vec<i64> = ks.iter().map(|k| -k).collect();
        prop_assert_eq!(phase_mismatch(&neg, &p), -phi.clone());
        let mut ok = true;
        for_each_permutation(&ks, |q| ok &= phase_mismatch(q, &p) == phi);
        prop_assert!(ok);
        let f = phase_mismatch(&ks, &PhaseParams::new(3.0, 2.0 / 7.0));
        let e = phi.to_f64().unwrap();
        prop_assert!((f - e).abs() <= 1e-9 * e.abs().max(1.0));
    }
}

// i128 cannot hold k^5 near 2^40; the exact path must agree with plain BigInt arithmetic.
#[test]
fn huge_wavenumbers_stay_exact() {
    let g = Q::new(7.into(), 3.into());
    let p = PhaseParams { gamma: Q::new(7.into(), 6.into()), e1: Q::from_integer(1.into()) };
    for k in [(1i64 << 40) + 3, -(1i64 << 45) - 1, 3_037_000_499] {
        let b = BigInt::from(k);
        let want = Q::from_integer(-b.pow(5)) + g.clone() * Q::from_integer(b.pow(3));
        assert_eq!(phase_coeff(k, &p), want, "k = {k}");
    }
    let ks = [(1i64 << 38) + 5, -(1i64 << 38), 12_345, -7];
    let total: i64 = ks.iter().sum();
    let sym = |k: i64| {
        let b = BigInt::from(k);
        Q::from_integer(-b.pow(5)) + g.clone() * Q::from_integer(b.pow(3))
    };
    let want = sym(total) - ks.iter().map(|&k| sym(k)).fold(Q::zero(), |a, b| a + b);
    assert_eq!(phase_mismatch(&ks, &p), want);
    let (five, three) = mismatch_parts(&ks);
    assert_eq!(Q::from_integer(five.to_bigint()) + g * Q::from_integer(three.to_bigint()), want);
}

fn small_real(seed: u64) -> SpectralField {
    let a = 0.01 * (1.0 + (seed % 5) as f64);
    SpectralField::from_cosines(6, &[(0, a / 3.0, 0.0), (1, a, 0.1 * seed as f64), (2, a / 2.0, 1.0), (3, a / 4.0, 2.0)])
}

#[test]
fn normal_form_terms_keep_real_data_real() {
    let c = EquationCoefficients::new(1.0, 1.0, 2.0, 1.0);
    let p = PhaseParams::new(2.0, 0.3);
    let mut cfg = NfConfig::new(6, 1);
    cfg.quintic_radius = 6;
    cfg.septic_radius = 3;
    for seed in 0..3 {
        let v = small_real(seed);
        let f = eval_f(&v, 0.37, &cfg, &p, &c).unwrap();
        let g = eval_g(&v, 0.37, &cfg, &p, &c).unwrap();
        for (name, out) in [("F", &f), ("G", &g)] {
            let size = mkdv5::sobolev_norm(out, 0.0);
            assert!(size > 0.0, "{name} vanished");
            assert!(out.hermitian_defect() <= 1e-12 * size, "{name}: defect {}", out.hermitian_defect());
        }
    }
}
