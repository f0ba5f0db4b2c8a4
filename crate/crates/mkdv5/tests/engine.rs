use mkdv5::engine::{
    eval_rhs_fourier, lambda, lambda_composite, lambda_equal, lambda_table, LambdaBudget, NfConfig, Support,
};
use mkdv5::multiplier::{composite_shape, raw_value, MultCtx, MultiplierId, ValueKind};
use mkdv5::{EquationCoefficients, PhaseParams, SpectralField, C64};

fn sparse(radius: usize, modes: &[(i64, f64, f64)]) -> SpectralField {
    SpectralField::from_cosines(radius, modes)
}

const SCALES: [(i64, f64, f64); 8] = [
    (1, 0.9, 0.1),
    (2, 0.5, 0.7),
    (3, 0.3, 0.2),
    (11, 0.4, 1.1),
    (13, 0.2, -0.4),
    (100, 0.3, 0.3),
    (340, 0.2, 0.9),
    (3900, 0.1, 0.5),
];

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn max_abs(a: &SpectralField) -> f64 {
    a.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn wrap(id: MultiplierId, v: f64) -> C64 {
    match id.kind() {
        ValueKind::Real => C64::new(v, 0.0),
        ValueKind::Imag => C64::new(0.0, v),
    }
}

fn cfg(radius: usize, threshold: i64) -> NfConfig {
    let mut c = NfConfig::new(radius, threshold);
    c.quintic_radius = radius;
    c.septic_radius = radius;
    c
}

/// Restricted enumeration must agree with the brute-force dense sum of the same multiplier.
fn check_against_dense(ids: &[MultiplierId], v: &SpectralField, threshold: i64, t: f64) {
    let coeffs = EquationCoefficients::new(1.5, -0.5, 2.0, 0.7);
    let params = PhaseParams::new(2.0, 0.3);
    let c = cfg(v.radius(), threshold);
    let ctx = MultCtx::new(&coeffs, &params, threshold);
    for &id in ids {
        let n = id.arity();
        let m = |k: &[i64]| wrap(id, raw_value(&ctx, id, k).unwrap());
        let dense = lambda_equal(Support::Dense, &m, n, v, v.radius(), t, &params, v.radius(), &LambdaBudget::default())
            .unwrap();
        let fast = lambda_table(id, v, t, &params, &coeffs, &c).unwrap();
        let scale = max_abs(&dense).max(1e-300);
        assert!(max_diff(&dense, &fast) <= 1e-12 * scale, "{id}: dense {scale:e} vs fast differ");
    }
}

#[test]
fn quintic_enumerators_match_dense() {
    // modes spread over several scales so every separated region is populated
    let v = sparse(4000, &SCALES);
    let mut ids = Vec::new();
    for i in 1..=8 {
        ids.push(MultiplierId::L(5, i));
    }
    for i in [4, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23] {
        ids.push(MultiplierId::M(5, i));
    }
    check_against_dense(&ids, &v, 2, 0.013);
}

#[test]
fn regions_are_populated() {
    // guard against a vacuous comparison: the grouped-region multipliers see nonzero tuples
    let v = sparse(4000, &SCALES);
    let coeffs = EquationCoefficients::new(1.5, -0.5, 2.0, 0.7);
    let params = PhaseParams::new(2.0, 0.3);
    let c = cfg(4000, 2);
    for id in [MultiplierId::M(5, 18), MultiplierId::M(5, 21), MultiplierId::M(5, 22), MultiplierId::M(5, 23)] {
        let f = lambda_table(id, &v, 0.0, &params, &coeffs, &c).unwrap();
        assert!(max_abs(&f) > 0.0, "{id} vanished");
    }
}

#[test]
fn septic_enumerators_match_dense() {
    let v = sparse(1300, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (11, 0.4, 1.1), (1000, 0.3, 0.3)]);
    let mut ids = vec![MultiplierId::L(7, 1), MultiplierId::L(7, 2)];
    for i in 6..=15 {
        ids.push(MultiplierId::M(7, i));
    }
    check_against_dense(&ids, &v, 2, 0.0);
}

fn check_composites(ids: &[MultiplierId], must_hit: usize, v: &SpectralField, big: usize) {
    let coeffs = EquationCoefficients::new(1.5, -0.5, 2.0, 0.7);
    let params = PhaseParams::new(2.0, 0.3);
    let r = v.radius();
    // output radius large enough that the inner field is never clamped
    let mut c = cfg(r, 1);
    c.radius = big;
    let ctx = MultCtx::new(&coeffs, &params, 1);
    let vb = v.with_radius(big);
    for (j, &id) in ids.iter().enumerate() {
        let shape = composite_shape(id).unwrap();
        let n = shape.arity();
        let m = |k: &[i64]| C64::new(0.0, raw_value(&ctx, id, k).unwrap());
        let fields = vec![v; n];
        let radii = vec![r; n];
        let dense = lambda(Support::Dense, &m, &fields, &radii, 0.02, &params, big, &LambdaBudget::default()).unwrap();
        let fast = lambda_composite(&shape, &vb, 0.02, &params, &coeffs, &c, big).unwrap();
        let scale = max_abs(&dense);
        assert!(j >= must_hit || scale > 0.0, "{id} vanished");
        assert!(max_diff(&dense, &fast) <= 1e-11 * scale, "{id}: {} vs {scale}", max_diff(&dense, &fast));
    }
}

#[test]
fn cubic_outer_composites_match_pointwise_definition() {
    let v = sparse(6, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (5, 0.2, 0.3)]);
    let ids = [MultiplierId::M(5, 6), MultiplierId::M(5, 7), MultiplierId::M(5, 8), MultiplierId::M(7, 1)];
    check_composites(&ids, 4, &v, 60);
}

#[test]
fn quintic_outer_composites_match_pointwise_definition() {
    let v = sparse(700, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (600, 0.2, 0.3)]);
    let ids = [MultiplierId::M(7, 2), MultiplierId::M(7, 3), MultiplierId::M(7, 4), MultiplierId::M(7, 5)];
    check_composites(&ids, 2, &v, 2200);
}

#[test]
fn quintic_convolution_terms_match_dense() {
    let coeffs = EquationCoefficients::new(1.5, -0.5, 2.0, 0.7);
    let params = PhaseParams::new(2.0, 0.3);
    let v = sparse(5, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (4, 0.2, 0.3)]);
    let ctx = MultCtx::new(&coeffs, &params, 0);
    let m = |k: &[i64]| C64::new(0.0, -raw_value(&ctx, MultiplierId::Q1_5, k).unwrap());
    let m3 = |k: &[i64]| C64::new(0.0, -raw_value(&ctx, MultiplierId::Q3, k).unwrap() * if mkdv5::cutoff::nr1(k[0], k[1], k[2]) { 1.0 } else { 0.0 }
        + raw_value(&ctx, MultiplierId::M(3, 1), k).unwrap());
    let b = LambdaBudget::default();
    let dense = lambda_equal(Support::Dense, &m, 5, &v, 5, 0.03, &params, 5, &b)
        .unwrap()
        .add(&lambda_equal(Support::Dense, &m3, 3, &v, 5, 0.03, &params, 5, &b).unwrap());
    let fast = eval_rhs_fourier(&v, 0.03, &params, &coeffs, &b).unwrap();
    assert!(max_diff(&dense, &fast) <= 1e-12 * max_abs(&dense));
}

#[test]
fn serial_and_parallel_agree_bitwise() {
    let v = sparse(16, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (3, 0.3, 0.2), (7, 0.2, 0.4), (15, 0.1, 0.0)]);
    let params = PhaseParams::new(5.0, 0.1);
    let m = |k: &[i64]| C64::new((k[0] * k[1] - k[2]) as f64, k[0] as f64);
    let par = LambdaBudget { parallel: true, ..Default::default() };
    let ser = LambdaBudget { parallel: false, ..Default::default() };
    let a = lambda_equal(Support::Dense, &m, 3, &v, 16, 0.2, &params, 16, &par).unwrap();
    let b = lambda_equal(Support::Dense, &m, 3, &v, 16, 0.2, &params, 16, &ser).unwrap();
    assert_eq!(a, b);
}

#[test]
fn real_inputs_give_hermitian_output() {
    let v = sparse(8, &[(1, 0.9, 0.1), (2, 0.5, 0.7), (3, 0.3, 0.2)]);
    let params = PhaseParams::new(5.0, 0.1);
    // odd symbol times i is the Fourier symbol of a real operator
    let m = |k: &[i64]| C64::new(0.0, (k[0] + k[1] + k[2]) as f64);
    let f = lambda_equal(Support::Dense, &m, 3, &v, 8, 0.3, &params, 8, &LambdaBudget::default()).unwrap();
    assert!(f.hermitian_defect() < 1e-14);
}
