//! Time integration of the direct, transported and normal-form formulations.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::engine::{eval_f, eval_g, LambdaBudget, NfConfig};
use crate::error::{Error, Result};
use crate::field::{derivative, energy_from_integrals, integrals, sobolev_norm, Grid, Integrals, SpectralField};
use crate::phase::symbol_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    IFRK4,
    IFRK2,
}

/// Which evolution equation a direct run integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `u_t + u_xxxxx + a u_x^3 + b (u u_x^2)_x + c (u (u^2)_xx)_x + 6 d (u^5)_x = 0`.
    Original,
    /// Renormalized dispersion with the transport term `K(u) u_x`.
    Transported,
    /// Renormalized dispersion, transport removed by the moving frame.
    Gauged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    #[serde(rename = "L")]
    pub nf_threshold: i64,
    #[serde(rename = "K5")]
    pub quintic_radius: Option<usize>,
    #[serde(rename = "K7")]
    pub septic_radius: Option<usize>,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub pad_factor: usize,
    pub sobolev_s: f64,
    /// Diagnostics are recorded every `sample_every` steps (and at the final time).
    pub sample_every: usize,
    pub budget: LambdaBudget,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 16,
            dt: 1e-5,
            t_final: 1e-3,
            scheme: Scheme::IFRK4,
            nf_threshold: 64,
            quintic_radius: None,
            septic_radius: None,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            pad_factor: 8,
            sobolev_s: 2.0,
            sample_every: 1,
            budget: LambdaBudget::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.k == 0 {
            return bad("K must be positive");
        }
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return bad("dt must be finite and nonzero");
        }
        if !(self.t_final.is_finite() && self.t_final * self.dt >= 0.0) {
            return bad("t_final must be finite with the sign of dt");
        }
        if self.pad_factor < 6 {
            return bad("pad_factor must be at least 6");
        }
        if self.nf_threshold < 1 {
            return bad("L must be a positive integer");
        }
        if self.quintic_radius.is_some_and(|r| r == 0 || r > self.k) || self.septic_radius.is_some_and(|r| r == 0 || r > self.k) {
            return bad("K5 and K7 must lie in 1..=K");
        }
        if self.sobolev_s < 1.5 {
            return bad("sobolev_s must be at least 3/2");
        }
        if self.picard_max_iters == 0 || !(self.picard_tol > 0.0) {
            return bad("picard_tol and picard_max_iters must be positive");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be positive");
        }
        Ok(())
    }

    pub fn nf(&self) -> NfConfig {
        let mut c = NfConfig::new(self.k, self.nf_threshold);
        c.quintic_radius = self.quintic_radius.unwrap_or(self.k.min(16));
        c.septic_radius = self.septic_radius.unwrap_or(self.k.min(8));
        c.budget = self.budget.clone();
        c
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round().max(0.0) as usize
    }
}

/// `K(u) = (3a + b - 2c) int u_x^2 + (4/5) c^2 E1(u)^2 + (30 d - (4/5) c^2) int u^4`.
pub fn k_functional(u: &SpectralField, c: &EquationCoefficients) -> f64 {
    k_from_integrals(&integrals(u), c)
}

fn k_from_integrals(i: &Integrals, c: &EquationCoefficients) -> f64 {
    let g2 = 0.8 * c.gamma * c.gamma;
    (3.0 * c.alpha + c.beta - 2.0 * c.gamma) * i.ux2 + g2 * i.u2 * i.u2 + (30.0 * c.delta - g2) * i.u4
}

/// Nonlinear part of the right-hand side of `variant`, computed from physical-space products.
pub fn nonlinearity(u: &SpectralField, c: &EquationCoefficients, variant: Variant, pad_factor: usize) -> Result<SpectralField> {
    if !u.is_real_valued() {
        return Err(Error::NotReal);
    }
    let k = u.radius();
    let grid = Grid::dealiased(k, 5, pad_factor);
    let ux_hat = derivative(u);
    let uxx_hat = derivative(&ux_hat);
    let phys = |f: &SpectralField| -> Result<Vec<f64>> { Ok(grid.to_physical(f)?.into_iter().map(|z| z.re).collect()) };
    let (p, px, pxx) = (phys(u)?, phys(&ux_hat)?, phys(&uxx_hat)?);
    let back = |v: Vec<f64>| grid.to_fourier(&v.into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>(), k, true);
    let m = p.len();
    let mut ux3 = vec![0.0; m];
    let mut u_ux2 = vec![0.0; m];
    let mut u_d2u2 = vec![0.0; m];
    let mut u4ux = vec![0.0; m];
    let mut u5 = vec![0.0; m];
    for j in 0..m {
        let (a, b, cc) = (p[j], px[j], pxx[j]);
        ux3[j] = b * b * b;
        u_ux2[j] = a * b * b;
        u_d2u2[j] = a * 2.0 * (b * b + a * cc);
        let a4 = a * a * a * a;
        u4ux[j] = a4 * b;
        u5[j] = a4 * a;
    }
    let ux3 = back(ux3)?;
    let u_ux2_x = derivative(&back(u_ux2)?);
    let u_d2u2_x = derivative(&back(u_d2u2)?);
    let out = match variant {
        Variant::Original => {
            let u5_x = derivative(&back(u5)?);
            ux3.scale(-c.alpha).axpy(-c.beta, &u_ux2_x).axpy(-c.gamma, &u_d2u2_x).axpy(-6.0 * c.delta, &u5_x)
        }
        Variant::Transported | Variant::Gauged => {
            let i = integrals(u);
            let u4ux = back(u4ux)?;
            let uxxx = derivative(&uxx_hat);
            // J1 + J2 + J3 + J4, the integral terms as scalar multiples of u_x and u_xxx
            let mut lin_ux = 30.0 * c.delta * i.u4 + (3.0 * c.alpha + c.beta) * i.ux2 - 2.0 * c.gamma * i.ux2
                - 0.8 * c.gamma * c.gamma * (i.u4 - i.u2 * i.u2);
            if variant == Variant::Transported {
                lin_ux -= k_from_integrals(&i, c);
            }
            u4ux.scale(-30.0 * c.delta)
                .axpy(-c.alpha, &ux3)
                .axpy(-c.beta, &u_ux2_x)
                .axpy(-c.gamma, &u_d2u2_x)
                .axpy(2.0 * c.gamma * i.u2, &uxxx)
                .axpy(lin_ux, &ux_hat)
        }
    };
    Ok(out.mark_real(true))
}

fn linear_g(variant: Variant, params: &PhaseParams) -> f64 {
    match variant {
        Variant::Original => 0.0,
        _ => params.cubic(),
    }
}

/// Full right-hand side `i P(k) u + N(u)` of the gauged equation.
pub fn rhs_physical(u: &SpectralField, c: &EquationCoefficients, e1_ref: f64, pad_factor: usize) -> Result<SpectralField> {
    let g = PhaseParams::new(c.gamma, e1_ref).cubic();
    let lin = u.map_modes(|k, z| z * C64::new(0.0, symbol_f64(k, g)));
    Ok(lin.add(&nonlinearity(u, c, Variant::Gauged, pad_factor)?).mark_real(true))
}

/// One integrating-factor Runge-Kutta step; the linear symbol `i P(k)` is applied exactly.
pub fn step_direct(
    u: &SpectralField,
    t: f64,
    dt: f64,
    cfg: &SolverConfig,
    c: &EquationCoefficients,
    e1_ref: f64,
    variant: Variant,
) -> Result<SpectralField> {
    let g = linear_g(variant, &PhaseParams::new(c.gamma, e1_ref));
    let prop = |f: &SpectralField, h: f64| f.map_modes(|k, z| z * C64::from_polar(1.0, h * symbol_f64(k, g)));
    let n = |f: &SpectralField| nonlinearity(f, c, variant, cfg.pad_factor);
    let out = match cfg.scheme {
        Scheme::IFRK4 => {
            let h = 0.5 * dt;
            let a = n(u)?;
            let eu = prop(u, h);
            let ea = prop(&a, h);
            let b = n(&eu.axpy(h, &ea))?;
            let c3 = n(&eu.axpy(h, &b))?;
            let d = n(&prop(&eu, h).axpy(dt, &prop(&c3, h)))?;
            let mid = b.add(&c3).scale(2.0);
            prop(&eu.axpy(dt / 6.0, &ea).axpy(dt / 6.0, &mid), h).axpy(dt / 6.0, &d)
        }
        Scheme::IFRK2 => {
            let a = n(u)?;
            let pred = prop(&u.axpy(dt, &a), dt);
            let b = n(&pred)?;
            prop(&u.axpy(0.5 * dt, &a), dt).axpy(0.5 * dt, &b)
        }
    };
    if !out.is_finite() {
        return Err(Error::StepDiverged { t: t + dt });
    }
    Ok(out.mark_real(true))
}

/// Interaction-picture state of the normal-form integrator.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormState {
    pub v: SpectralField,
    /// `v + F(v)`
    pub z: SpectralField,
    pub t: f64,
    pub picard_iters: usize,
    /// Largest ratio of successive Picard increments seen in the last step.
    pub contraction: f64,
}

impl NormalFormState {
    pub fn new(v: SpectralField, t: f64, cfg: &SolverConfig, p: &PhaseParams, c: &EquationCoefficients) -> Result<Self> {
        let f = eval_f(&v, t, &cfg.nf(), p, c)?;
        Ok(Self { z: v.add(&f).mark_real(v.is_real_valued()), v, t, picard_iters: 0, contraction: 0.0 })
    }

    /// Physical-frame coefficients `U(t) v`.
    pub fn physical(&self, p: &PhaseParams) -> SpectralField {
        crate::field::propagate_linear(&self.v, self.t, p)
    }
}

/// Solves `v = z - F(v)` by fixed-point iteration from `seed`; returns `(v, iterations, contraction)`.
pub fn picard_solve(
    z: &SpectralField,
    seed: &SpectralField,
    t: f64,
    cfg: &SolverConfig,
    p: &PhaseParams,
    c: &EquationCoefficients,
) -> Result<(SpectralField, usize, f64)> {
    let nf = cfg.nf();
    let s = cfg.sobolev_s;
    let mut v = seed.clone();
    let mut last = f64::INFINITY;
    let mut contraction: f64 = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.picard_max_iters {
        let next = z.sub(&eval_f(&v, t, &nf, p, c)?).mark_real(z.is_real_valued());
        let step = sobolev_norm(&next.sub(&v), s);
        if last.is_finite() && last > 0.0 {
            contraction = contraction.max(step / last);
        }
        v = next;
        residual = step;
        if !residual.is_finite() {
            break;
        }
        if residual <= cfg.picard_tol {
            return Ok((v, it, contraction));
        }
        last = step;
    }
    Err(Error::PicardDiverged { t, iters: cfg.picard_max_iters, residual })
}

/// One normal-form step: Heun's method on `z' = G(v)` with `v` recovered from `z` by Picard iteration.
pub fn nf_step(state: &NormalFormState, dt: f64, cfg: &SolverConfig, p: &PhaseParams, c: &EquationCoefficients) -> Result<NormalFormState> {
    let nf = cfg.nf();
    let t1 = state.t + dt;
    let g1 = eval_g(&state.v, state.t, &nf, p, c)?;
    let z_pred = state.z.axpy(dt, &g1);
    let (v_pred, it1, c1) = picard_solve(&z_pred, &state.v, t1, cfg, p, c)?;
    let g2 = eval_g(&v_pred, t1, &nf, p, c)?;
    let z = state.z.axpy(0.5 * dt, &g1).axpy(0.5 * dt, &g2).mark_real(state.z.is_real_valued());
    let (v, it2, c2) = picard_solve(&z, &v_pred, t1, cfg, p, c)?;
    if !v.is_finite() {
        return Err(Error::StepDiverged { t: t1 });
    }
    Ok(NormalFormState { v, z, t: t1, picard_iters: it1 + it2, contraction: c1.max(c2) })
}

/// One recorded sample of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub energies: [f64; 4],
    pub l2: f64,
    pub hs: f64,
    pub mass_drift: f64,
    pub step_ms: f64,
    pub picard_iters: Option<usize>,
    /// Accumulated transport `int_0^t K(u) dt'` (trapezoid rule on the solver steps).
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    /// Physical-frame coefficients at every sample.
    pub fields: Vec<SpectralField>,
}

impl TrajectoryRecord {
    pub fn last_field(&self) -> Option<&SpectralField> {
        self.fields.last()
    }

    /// Largest relative drift of `E_j` over the record (absolute for `E0`, which may vanish).
    pub fn energy_drift(&self, j: usize) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        let e0 = first.energies[j];
        let scale = if j == 0 { 1.0 } else { e0.abs().max(f64::MIN_POSITIVE) };
        self.samples.iter().map(|s| (s.energies[j] - e0).abs() / scale).fold(0.0, f64::max)
    }
}

/// Integrator used by `run_simulation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Direct(Variant),
    NormalForm,
}

fn sample(u: &SpectralField, t: f64, c: &EquationCoefficients, s: f64, mass0: f64, step_ms: f64, picard: Option<usize>, theta: f64) -> Sample {
    let i = integrals(u);
    let e = |j| energy_from_integrals(j, &i, c).expect("energy index in range");
    Sample {
        t,
        energies: [e(0), e(1), e(2), e(3)],
        l2: i.u2.sqrt(),
        hs: sobolev_norm(u, s),
        mass_drift: (i.mean - mass0).abs(),
        step_ms,
        picard_iters: picard,
        theta,
    }
}

/// Integrates from `initial` to `t_final`; the dispersion uses `e1_ref = E1(initial)`.
///
/// With `timing == false` every `step_ms` is recorded as 0 so that reruns are byte-identical.
pub fn run_simulation(
    cfg: &SolverConfig,
    initial: &SpectralField,
    c: &EquationCoefficients,
    method: Method,
    timing: bool,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if !initial.is_real_valued() {
        return Err(Error::NotReal);
    }
    let u0 = initial.with_radius(cfg.k);
    let e1_ref = integrals(&u0).u2;
    let params = PhaseParams::new(c.gamma, e1_ref);
    let mass0 = u0.coeff(0).re;
    let s = cfg.sobolev_s;
    let steps = cfg.steps();
    let mut rec = TrajectoryRecord { samples: Vec::new(), fields: Vec::new() };
    let mut theta = 0.0;
    let mut k_prev = k_functional(&u0, c);
    let push = |rec: &mut TrajectoryRecord, u: &SpectralField, t: f64, ms: f64, pic: Option<usize>, theta: f64| {
        rec.samples.push(sample(u, t, c, s, mass0, ms, pic, theta));
        rec.fields.push(u.clone());
    };
    match method {
        Method::Direct(variant) => {
            let mut u = u0;
            push(&mut rec, &u, 0.0, 0.0, None, 0.0);
            for n in 0..steps {
                let t = n as f64 * cfg.dt;
                let clock = Instant::now();
                u = step_direct(&u, t, cfg.dt, cfg, c, e1_ref, variant)?;
                let ms = if timing { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
                let k_now = k_functional(&u, c);
                theta += 0.5 * cfg.dt * (k_prev + k_now);
                k_prev = k_now;
                if (n + 1) % cfg.sample_every == 0 || n + 1 == steps {
                    push(&mut rec, &u, t + cfg.dt, ms, None, theta);
                }
            }
        }
        Method::NormalForm => {
            let mut st = NormalFormState::new(u0.clone(), 0.0, cfg, &params, c)?;
            push(&mut rec, &u0, 0.0, 0.0, Some(0), 0.0);
            for n in 0..steps {
                let clock = Instant::now();
                st = nf_step(&st, cfg.dt, cfg, &params, c)?;
                let ms = if timing { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
                let u = st.physical(&params);
                let k_now = k_functional(&u, c);
                theta += 0.5 * cfg.dt * (k_prev + k_now);
                k_prev = k_now;
                if (n + 1) % cfg.sample_every == 0 || n + 1 == steps {
                    push(&mut rec, &u, st.t, ms, Some(st.picard_iters), theta);
                }
            }
        }
    }
    Ok(rec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeDirection {
    /// Transported frame to gauged frame: `f(k) -> e^{ik theta} f(k)`.
    Forward,
    Inverse,
}

/// Moves every sample by the accumulated transport `theta(t)` stored in the record.
pub fn gauge_transform(rec: &TrajectoryRecord, dir: GaugeDirection) -> TrajectoryRecord {
    let sign = match dir {
        GaugeDirection::Forward => 1.0,
        GaugeDirection::Inverse => -1.0,
    };
    let fields = rec
        .fields
        .iter()
        .zip(&rec.samples)
        .map(|(f, s)| f.map_modes(|k, z| z * C64::from_polar(1.0, sign * k as f64 * s.theta)).mark_real(f.is_real_valued()))
        .collect();
    TrajectoryRecord { samples: rec.samples.clone(), fields }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_functional_examples() {
        let c = EquationCoefficients::new(0.0, 0.0, 5.0, 1.0);
        let u = SpectralField::from_cosines(4, &[(1, 2.0, 0.0)]);
        assert!((k_functional(&u, &c) - 120.0).abs() < 1e-10);
        let cst = SpectralField::from_cosines(2, &[(0, 0.7, 0.0)]);
        let c2 = EquationCoefficients::new(1.0, 2.0, 3.0, 0.5);
        assert!((k_functional(&cst, &c2) - 30.0 * 0.5 * 0.7f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn linear_symbol_only() {
        let c = EquationCoefficients::new(0.0, 0.0, 0.0, 0.0);
        let u = SpectralField::from_cosines(4, &[(1, 0.3, 0.2), (3, 0.1, 1.0)]);
        let r = rhs_physical(&u, &c, 0.7, 8).unwrap();
        for k in -4..=4 {
            let want = u.coeff(k) * C64::new(0.0, symbol_f64(k, 0.0));
            assert!((r.coeff(k) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { pad_factor: 4, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
