//! The acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that fail for a documented reason are listed in `KNOWN_FAILING`; the test asserts the
//! observed status matches that list in both directions, so a fix or a regression is noticed.

use std::time::Instant;

use mkdv5::certify::{run_suite, CertificationReport, CertifyOptions, Suite};
use mkdv5::engine::{eval_rhs_fourier, LambdaBudget};
use mkdv5::field::integrals;
use mkdv5::solver::{gauge_transform, nonlinearity, run_simulation, GaugeDirection, Method, SolverConfig, TrajectoryRecord, Variant};
use mkdv5::{sobolev_norm, EquationCoefficients, PhaseParams, SpectralField};
use rand::{Rng, SeedableRng};

/// Criterion 8 asks for K = 64 at dt = 1e-5; the explicit integrators are unstable there.
const KNOWN_FAILING: &[usize] = &[8];

struct Line {
    n: usize,
    pass: bool,
    detail: String,
}

fn suite_line(n: usize, suite: Suite, extra: impl Fn(&[CertificationReport]) -> (bool, String)) -> Line {
    let clock = Instant::now();
    let reports = run_suite(suite, &CertifyOptions::default()).expect("suite runs");
    let secs = clock.elapsed().as_secs_f64();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check_id.as_str()).collect();
    let examined: u64 = reports.iter().map(|r| r.examined).sum();
    let (ok, more) = extra(&reports);
    let mut detail = format!("{suite}: {}/{} checks pass, {examined} cases, {secs:.1} s", reports.len() - failed.len(), reports.len());
    if !failed.is_empty() {
        detail += &format!("; failing {failed:?}");
    }
    if !more.is_empty() {
        detail += &format!("; {more}");
    }
    Line { n, pass: failed.is_empty() && !reports.is_empty() && ok, detail }
}

fn report<'a>(reports: &'a [CertificationReport], id: &str) -> &'a CertificationReport {
    reports.iter().find(|r| r.check_id == id).unwrap_or_else(|| panic!("missing report {id}"))
}

fn exact() -> Line {
    let clock = Instant::now();
    let mut line = suite_line(1, Suite::Exact, |_| (true, String::new()));
    let secs = clock.elapsed().as_secs_f64();
    if secs > 300.0 {
        line.pass = false;
        line.detail += &format!("; over the 300 s budget ({secs:.0} s)");
    }
    line
}

fn bounds() -> Line {
    suite_line(2, Suite::Bounds, |rs| {
        let least = rs.iter().map(|r| r.examined).min().unwrap_or(0);
        (least >= 100_000, format!("fewest samples in one lower bound: {least}"))
    })
}

fn counterexample() -> Line {
    suite_line(3, Suite::Counterexample, |rs| {
        let r = report(rs, "counterexample-quartic");
        let at40 = r.constants["scaled_ratio_n040"];
        (true, format!("quartic ratio n^2/10 at n = 40: {at40:.4}"))
    })
}

fn cancellation() -> Line {
    suite_line(4, Suite::Cancellation, |_| (true, String::new()))
}

fn pointwise() -> Line {
    suite_line(5, Suite::Pointwise, |rs| {
        let attained = rs.iter().filter(|r| r.constants.get("attained") == Some(&1.0)).count();
        let square = report(rs, "pointwise-m5-20");
        let c = square.constants.get("sup_over_L2_top").copied().unwrap_or(f64::NAN);
        let grows = square.constants.get("attained") == Some(&1.0);
        (
            grows,
            format!(
                "{attained} bounds attained at a stable constant, the rest decaying; L^2 growth of M5_20 attained with sup |M| / L^2 = {c:.3}"
            ),
        )
    })
}

fn unit_h2_field(k: usize, rng: &mut rand_chacha::ChaCha8Rng) -> SpectralField {
    let modes: Vec<(i64, f64, f64)> =
        (0..=k as i64).map(|j| (j, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    let f = SpectralField::from_cosines(k, &modes);
    f.scale(1.0 / sobolev_norm(&f, 2.0))
}

fn cross_oracle() -> Line {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let c = EquationCoefficients::new(1.5, -0.5, 2.0, 0.7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = unit_h2_field(8, &mut rng);
        let p = PhaseParams::new(c.gamma, integrals(&u).u2);
        let fourier = eval_rhs_fourier(&u, 0.0, &p, &c, &LambdaBudget::default()).expect("fourier side");
        let physical = nonlinearity(&u, &c, Variant::Gauged, 8).expect("physical side");
        worst = worst.max(sobolev_norm(&fourier.sub(&physical), 0.0) / sobolev_norm(&physical, 0.0));
    }
    Line { n: 6, pass: worst <= 1e-10, detail: format!("max relative difference over 20 unit-H^2 fields at K = 8: {worst:.2e}") }
}

fn nf_identity() -> Line {
    suite_line(7, Suite::NfIdentity, |rs| {
        let e = report(rs, "nf-identity-end-to-end");
        let ratios: Vec<String> = rs
            .iter()
            .flat_map(|r| r.constants.iter().filter(|(k, _)| k.starts_with("halving_ratio")).map(|(_, v)| format!("{v:.3}")))
            .collect();
        (true, format!("end-to-end residual {:.2e}, halving ratios {}", e.constants["residual_h2e-5"], ratios.join(" ")))
    })
}

fn drift(rec: &TrajectoryRecord) -> f64 {
    (0..4).map(|j| rec.energy_drift(j)).fold(0.0, f64::max)
}

fn conservation() -> Line {
    let clock = Instant::now();
    let integrable = EquationCoefficients::integrable();
    let u0 = SpectralField::from_cosines(64, &[(1, 0.4, 0.0), (2, 0.2, 0.0)]);
    let cfg = |k: usize, dt: f64| SolverConfig { k, dt, t_final: 0.01, sample_every: 100, ..Default::default() };
    let run = |k: usize, dt: f64, c: &EquationCoefficients| run_simulation(&cfg(k, dt), &u0.with_radius(k), c, Method::Direct(Variant::Original), false);
    let mut notes = Vec::new();
    let headline = match run(64, 1e-5, &integrable) {
        Ok(rec) => {
            let d = drift(&rec);
            notes.push(format!("K = 64, dt = 1e-5: drift {d:.2e}"));
            d <= 1e-7
        }
        Err(e) => {
            notes.push(format!("K = 64, dt = 1e-5: {e}"));
            false
        }
    };
    // the largest step at which K = 64 stays stable up to t = 0.01
    let fine = run(64, 2.5e-7, &integrable).map(|r| drift(&r));
    notes.push(match &fine {
        Ok(d) => format!("K = 64, dt = 2.5e-7: drift {d:.2e}"),
        Err(e) => format!("K = 64, dt = 2.5e-7: {e}"),
    });
    let coarse = run(32, 1e-5, &integrable).map(|r| drift(&r));
    let half = run(32, 5e-6, &integrable).map(|r| drift(&r));
    let order = match (&coarse, &half) {
        (Ok(a), Ok(b)) => (a / b).log2(),
        _ => f64::NAN,
    };
    notes.push(format!(
        "K = 32: drift {:.2e} at dt = 1e-5, {:.2e} at dt = 5e-6, observed order {order:.2}",
        coarse.unwrap_or(f64::NAN),
        half.unwrap_or(f64::NAN)
    ));
    let ab = EquationCoefficients::new(1.0, 1.0, 2.0, 1.0);
    let e1 = run(32, 1e-5, &ab).map(|r| r.energy_drift(1)).unwrap_or(f64::NAN);
    notes.push(format!("alpha = beta: E1 drift {e1:.2e}"));
    let secs = clock.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1} s"));
    let pass = headline && fine.is_ok_and(|d| d <= 1e-7) && order >= 3.5 && e1 <= 1e-8 && secs <= 60.0;
    Line { n: 8, pass, detail: notes.join("; ") }
}

fn sup_h2(a: &TrajectoryRecord, b: &TrajectoryRecord) -> f64 {
    assert_eq!(a.fields.len(), b.fields.len());
    a.fields.iter().zip(&b.fields).map(|(x, y)| sobolev_norm(&x.sub(y), 2.0)).fold(0.0, f64::max)
}

fn equivalence() -> Line {
    let c = EquationCoefficients::new(1.0, 1.0, 2.0, 1.0);
    let u0 = SpectralField::from_cosines(8, &[(1, 0.05, 0.0), (2, 0.025, 0.3)]);
    let cfg = SolverConfig { k: 8, dt: 1e-4, t_final: 0.01, nf_threshold: 16, ..Default::default() };
    let direct = run_simulation(&cfg, &u0, &c, Method::Direct(Variant::Gauged), false).expect("direct run");
    let nf = run_simulation(&cfg, &u0, &c, Method::NormalForm, false).expect("normal form run");
    let d_nf = sup_h2(&direct, &nf);

    let cfg = SolverConfig { k: 16, dt: 1e-5, t_final: 0.01, ..Default::default() };
    let u0 = u0.with_radius(16);
    let transported = run_simulation(&cfg, &u0, &c, Method::Direct(Variant::Transported), false).expect("transported run");
    let gauged = run_simulation(&cfg, &u0, &c, Method::Direct(Variant::Gauged), false).expect("gauged run");
    let back = gauge_transform(&gauged, GaugeDirection::Inverse);
    let d_gauge = sup_h2(&transported, &back);
    let d_round = sup_h2(&gauged, &gauge_transform(&back, GaugeDirection::Forward));
    Line {
        n: 9,
        pass: d_nf <= 1e-4 && d_gauge <= 1e-6 && d_round <= 1e-12,
        detail: format!("normal form vs direct {d_nf:.2e}; gauge link {d_gauge:.2e}; gauge round trip {d_round:.2e}"),
    }
}

fn continuity() -> Line {
    let c = EquationCoefficients::new(1.0, 1.0, 2.0, 1.0);
    let k = 16;
    let u0 = SpectralField::from_cosines(k, &[(1, 0.4, 0.0), (2, 0.2, 0.3)]);
    let dir = SpectralField::from_cosines(k, &[(3, 1.0, 0.0), (5, 0.5, 1.0)]);
    let dir = dir.scale(1.0 / sobolev_norm(&dir, 2.0));
    let cfg = SolverConfig { k, dt: 1e-5, t_final: 0.01, sample_every: 10, ..Default::default() };
    let run = |u: &SpectralField| run_simulation(&cfg, u, &c, Method::Direct(Variant::Original), false).expect("run");
    let base = run(&u0);
    let amp: Vec<f64> = [1e-3, 5e-4]
        .iter()
        .map(|&eps| sup_h2(&base, &run(&u0.axpy(eps, &dir))) / eps)
        .collect();
    let stable = (amp[0] / amp[1] - 1.0).abs() <= 0.1;
    Line {
        n: 10,
        pass: amp[0] <= 10.0 && stable,
        detail: format!("amplification sup_t |du|_H2 / eps = {:.4} (eps = 1e-3), {:.4} (eps = 5e-4)", amp[0], amp[1]),
    }
}

fn main() {
    let lines = vec![
        exact(),
        bounds(),
        counterexample(),
        cancellation(),
        pointwise(),
        cross_oracle(),
        nf_identity(),
        conservation(),
        equivalence(),
        continuity(),
    ];
    for l in &lines {
        let status = if l.pass { "PASS" } else { "FAIL" };
        let known = if !l.pass && KNOWN_FAILING.contains(&l.n) { " (known)" } else { "" };
        println!("criterion {:2}: {status}{known}  {}", l.n, l.detail);
    }
    let changed: Vec<usize> = lines.iter().filter(|l| l.pass == KNOWN_FAILING.contains(&l.n)).map(|l| l.n).collect();
    if !changed.is_empty() {
        eprintln!("criteria {changed:?} differ from their recorded status");
        std::process::exit(1);
    }
}
