//! The normal form identity along Galerkin trajectories.
//!
//! Trajectories come from the direct solver in the gauged frame, whose right-hand side is the
//! interaction-picture right-hand side rotated back. Time derivatives are central differences
//! of step `h`; both checks require the residual to fall by 4x (within [3.5, 4.5]) when `h` halves.

use num_complex::Complex64 as C64;

use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::cutoff::max_abs;
use crate::engine::{eval_f, eval_g, eval_rhs_fourier, l_support, lambda_equal, lambda_slot_sum, LambdaBudget};
use crate::error::{Error, Result};
use crate::field::{integrals, propagate_linear, sobolev_norm, SpectralField};
use crate::multiplier::{l_numer, l_raw, MultCtx};
use crate::solver::{run_simulation, Method, SolverConfig, Variant};

const RATIO_BAND: (f64, f64) = (3.5, 4.5);
const FLOOR: f64 = 1e-6;
const THRESHOLD: i64 = 1;

fn coeffs() -> EquationCoefficients {
    EquationCoefficients::new(1.0, 1.0, 2.0, 1.0)
}


/// A monomial with the data and step ladder it is tested on.
struct Monomial {
    id: &'static str,
    n: usize,
    i: usize,
    /// Data modes `(k, amplitude, phase)` of a sum of cosines.
    modes: &'static [(i64, f64, f64)],
    /// Trajectory step and the `h` ladder; `h` sits well below the inverse of the largest active phase.
    dt: f64,
    hs: [f64; 3],
}

const LOW: &[(i64, f64, f64)] = &[(0, 0.01, 0.0), (1, 0.01, 0.0), (2, 0.005, 0.3)];
// top-separated cubic tuples need |k3| > 8 max(|k1|, |k2|)
const SEPARATED: &[(i64, f64, f64)] = &[(0, 0.01, 0.0), (1, 0.01, 0.0), (9, 0.005, 0.3)];

const MONOMIALS: [Monomial; 3] = [
    Monomial { id: "nf-identity-monomial-l3-1", n: 3, i: 1, modes: SEPARATED, dt: 1e-7, hs: [2e-6, 1e-6, 5e-7] },
    Monomial { id: "nf-identity-monomial-l3-2", n: 3, i: 2, modes: LOW, dt: 5e-6, hs: [2e-4, 1e-4, 5e-5] },
    Monomial { id: "nf-identity-monomial-l3-4", n: 3, i: 4, modes: LOW, dt: 2.5e-6, hs: [1e-4, 5e-5, 2.5e-5] },
];

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    let mut v: Vec<(&'static str, String)> = MONOMIALS
        .iter()
        .map(|mo| {
            let (n, i) = (mo.n, mo.i);
            (
                mo.id,
                format!(
                    "m = L~_{i}^({n}) chi_{{>L}}: d/dt Lambda(m, v) = Lambda(-m Phi, v) + {n} Lambda(m~, v, .., v, dv/dt) \
                     along a trajectory, dv/dt the solver's right-hand side; the central difference residual is O(h^2)"
                ),
            )
        })
        .collect();
    v.push((
        "nf-identity-end-to-end",
        "d/dt (v(t,k) + F(v)(t,k)) = G(v)(t,k) with F = sum L~ chi_{>L} terms of orders 3, 5, 7 and G the full \
         right-hand side of orders 3 to 11; central difference residual <= 1e-6 and O(h^2)"
            .into(),
    ));
    v
}

pub(crate) fn run(ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut out = Vec::new();
    for &id in ids {
        let a = anchor_of(&cat, id);
        if let Some(mo) = MONOMIALS.iter().find(|m| m.id == id) {
            out.push(monomial(mo, &a, opts)?);
        } else if id == "nf-identity-end-to-end" {
            out.push(end_to_end(id, &a, opts)?);
        }
    }
    Ok(out)
}

/// Interaction-picture trajectory `v(t_j)`, `t_j = j dt`, of the gauged Galerkin flow, with its phase parameters.
struct Trajectory {
    v: Vec<SpectralField>,
    dt: f64,
    params: PhaseParams,
}

impl Trajectory {
    fn new(u0: &SpectralField, k: usize, dt: f64, steps: usize, c: &EquationCoefficients) -> Result<Self> {
        let cfg = SolverConfig { k, dt, t_final: dt * steps as f64, nf_threshold: THRESHOLD, ..Default::default() };
        let u0 = u0.with_radius(k);
        let params = PhaseParams::new(c.gamma, integrals(&u0).u2);
        let rec = run_simulation(&cfg, &u0, c, Method::Direct(Variant::Gauged), false)?;
        let v = rec.fields.iter().zip(&rec.samples).map(|(u, s)| propagate_linear(u, -s.t, &params)).collect();
        Ok(Self { v, dt, params })
    }

    /// Index of time `t`, which must be a whole number of steps.
    fn at(&self, t: f64) -> Result<usize> {
        let j = (t / self.dt).round();
        if (j * self.dt - t).abs() > 1e-9 * self.dt || j < 0.0 || j as usize >= self.v.len() {
            return Err(Error::InvalidConfig(format!("time {t} is not on the trajectory grid")));
        }
        Ok(j as usize)
    }

    fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }
}

fn norm(f: &SpectralField) -> f64 {
    sobolev_norm(f, 0.0)
}

/// Records residuals for the `h` ladder and checks the halving ratios.
fn ladder(rep: &mut CertificationReport, hs: &[f64], res: &[f64], tuple: &[i64]) {
    for (h, r) in hs.iter().zip(res) {
        rep.constant(format!("residual_h{h:e}"), *r);
    }
    for (w, h) in res.windows(2).zip(hs) {
        rep.examined += 1;
        let q = w[0] / w[1];
        rep.constant(format!("halving_ratio_h{h:e}"), q);
        if !(RATIO_BAND.0..=RATIO_BAND.1).contains(&q) {
            rep.violation(tuple, format!("residual ratio {q:.4} at h = {h:e} outside [{}, {}]", RATIO_BAND.0, RATIO_BAND.1));
        }
    }
}

fn monomial(mo: &Monomial, anchor: &str, opts: &CertifyOptions) -> Result<CertificationReport> {
    let (n, i, dt, hs) = (mo.n, mo.i, mo.dt, mo.hs);
    let k = 16usize;
    let tc = 2.0 * hs[0];
    let c = coeffs();
    let mut rep = CertificationReport::new(
        mo.id,
        anchor,
        format!(
            "K = {k}, L = {THRESHOLD}, coefficients (1, 1, 2, 1), data sum a cos(kx + p) over (k, a, p) in {:?}, \
             trajectory step {dt:e}, t = {tc:e}, h in {hs:?}",
            mo.modes
        ),
    );
    let u0 = SpectralField::from_cosines(k, mo.modes);
    let traj = Trajectory::new(&u0, k, dt, (2.0 * tc / dt).round() as usize, &c)?;
    let p = &traj.params;
    let ctx = MultCtx::new(&c, p, THRESHOLD).perturbed(opts.perturb);
    let budget = LambdaBudget::default();
    let m = |ks: &[i64]| {
        if max_abs(ks) <= THRESHOLD {
            return C64::new(0.0, 0.0);
        }
        C64::new(l_raw(&ctx, n, i, ks).unwrap_or(0.0), 0.0)
    };
    // -m Phi, with Phi stored as its imaginary coefficient
    let m_phi = |ks: &[i64]| {
        if max_abs(ks) <= THRESHOLD {
            return C64::new(0.0, 0.0);
        }
        C64::new(0.0, -l_numer(&ctx, n, i, ks).unwrap_or(0.0))
    };
    let sup = l_support(n, i);
    let lam = |j: usize| lambda_equal(sup, &m, n, &traj.v[j], k, traj.t(j), p, k, &budget);
    let jc = traj.at(tc)?;
    let v = &traj.v[jc];
    let dv = eval_rhs_fourier(v, tc, p, &c, &budget)?;
    let rhs = lambda_equal(sup, &m_phi, n, v, k, tc, p, k, &budget)?
        .add(&lambda_slot_sum(sup, &m, n, v, k, &dv, tc, p, k, &budget)?);
    let size = norm(&lam(jc)?);
    rep.constant("lambda_norm", size);
    rep.constant("rhs_norm", norm(&rhs));
    if size == 0.0 {
        rep.violation(&[], "the monomial vanishes on this trajectory");
    }
    let mut res = Vec::new();
    for &h in &hs {
        let (a, b) = (traj.at(tc + h)?, traj.at(tc - h)?);
        let diff = lam(a)?.sub(&lam(b)?).scale(1.0 / (2.0 * h));
        res.push(norm(&diff.sub(&rhs)));
    }
    ladder(&mut rep, &hs, &res, &[]);
    Ok(rep.finish())
}

fn end_to_end(id: &str, anchor: &str, opts: &CertifyOptions) -> Result<CertificationReport> {
    let (k, dt, t_final) = (32usize, 1e-6, 1e-4);
    let hs = [2e-5, 1e-5];
    let tc = t_final / 2.0;
    let c = coeffs();
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!(
            "K = {k}, L = {THRESHOLD}, K5 = 16, K7 = 8, coefficients (1, 1, 2, 1), data 0.01 cos x + 0.005 cos(2x + 0.3), \
             T = {t_final:e}, trajectory step {dt:e}, t = T/2, h in {hs:?}"
        ),
    );
    let mut cfg = SolverConfig { k, nf_threshold: THRESHOLD, ..Default::default() }.nf();
    cfg.perturb = opts.perturb;
    let residual = |traj: &Trajectory, tc: f64, h: f64| -> Result<f64> {
        let p = &traj.params;
        let z = |j: usize| -> Result<SpectralField> {
            let v = &traj.v[j];
            Ok(v.add(&eval_f(v, traj.t(j), &cfg, p, &c)?))
        };
        let (a, b, m) = (traj.at(tc + h)?, traj.at(tc - h)?, traj.at(tc)?);
        let dz = z(a)?.sub(&z(b)?).scale(1.0 / (2.0 * h));
        Ok(norm(&dz.sub(&eval_g(&traj.v[m], tc, &cfg, p, &c)?)))
    };
    let traj = Trajectory::new(&SpectralField::from_cosines(2, &[(1, 0.01, 0.0), (2, 0.005, 0.3)]), k, dt, (t_final / dt).round() as usize, &c)?;
    let res: Vec<f64> = hs.iter().map(|&h| residual(&traj, tc, h)).collect::<Result<_>>()?;
    ladder(&mut rep, &hs, &res, &[]);
    let g = eval_g(&traj.v[traj.at(tc)?], tc, &cfg, &traj.params, &c)?;
    rep.constant("G_norm", norm(&g));
    // Richardson estimate of the h-independent part
    let floor = (res[1] - (res[0] - res[1]) / 3.0).abs();
    rep.constant("residual_floor", floor);
    rep.examined += 1;
    if res[0] > FLOOR {
        rep.violation(&[], format!("residual {:e} at h = {:e} exceeds {FLOOR:e}", res[0], hs[0]));
    }
    // zero data stays at zero and so must every term
    let zero = Trajectory::new(&SpectralField::zeros(2, true), k, dt, 4, &c)?;
    let r0 = residual(&zero, 2.0 * dt, dt)?;
    rep.examined += 1;
    rep.constant("zero_data_residual", r0);
    if r0 != 0.0 {
        rep.violation(&[], format!("zero data leaves residual {r0:e}"));
    }
    Ok(rep.finish())
}
