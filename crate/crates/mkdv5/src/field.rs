//! Truncated Fourier fields on the torus, transforms, norms, energies and the linear flow.
//!
//! Integrals use the normalized measure `(1/2pi) dx`, so `f(k) = (1/M) sum_j e^{-i k x_j} f(x_j)`
//! and Parseval reads `int |f|^2 = sum_k |f(k)|^2`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::coeffs::{EquationCoefficients, PhaseParams};
use crate::error::{Error, Result};
use crate::phase::symbol_f64;

/// Fourier coefficients `f(k)` for `|k| <= K`, stored at index `k + K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    radius: usize,
    coeffs: Vec<C64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(radius: usize, real: bool) -> Self {
        Self { radius, coeffs: vec![C64::new(0.0, 0.0); 2 * radius + 1], real }
    }

    /// Build from a coefficient vector of length `2K+1`.
    pub fn from_coeffs(radius: usize, coeffs: Vec<C64>, real: bool) -> Self {
        assert_eq!(coeffs.len(), 2 * radius + 1, "coefficient vector length");
        let mut f = Self { radius, coeffs, real };
        if real {
            f.enforce_hermitian();
        }
        f
    }

    /// Real field `sum a cos(k x + p)` from `(k, a, p)` triples.
    pub fn from_cosines(radius: usize, modes: &[(i64, f64, f64)]) -> Self {
        let mut f = Self::zeros(radius, true);
        for &(k, a, p) in modes {
            let k = k.abs();
            assert!(k as usize <= radius, "mode {k} outside radius {radius}");
            if k == 0 {
                f.coeffs[radius] += C64::new(a * p.cos(), 0.0);
            } else {
                let c = C64::from_polar(a / 2.0, p);
                f.coeffs[radius + k as usize] += c;
                f.coeffs[radius - k as usize] += c.conj();
            }
        }
        f
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_real_valued(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Coefficient at `k`; zero outside the truncation.
    #[inline]
    pub fn coeff(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.radius {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.radius as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, k: i64, v: C64) {
        let i = (k + self.radius as i64) as usize;
        self.coeffs[i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest violation of `f(-k) = conj f(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let r = self.radius as i64;
        (0..=r).map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm()).fold(0.0, f64::max)
    }

    /// Project onto Hermitian-symmetric coefficients and mark the field real.
    pub fn enforce_hermitian(&mut self) {
        let r = self.radius as i64;
        for k in 0..=r {
            let a = 0.5 * (self.coeff(k) + self.coeff(-k).conj());
            self.set(k, a);
            self.set(-k, a.conj());
        }
        self.real = true;
    }

    pub fn mark_real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    /// Same field with truncation radius `r` (zero padding or clamping).
    pub fn with_radius(&self, r: usize) -> Self {
        let mut out = Self::zeros(r, self.real);
        let m = r.min(self.radius) as i64;
        for k in -m..=m {
            out.set(k, self.coeff(k));
        }
        out
    }

    /// Largest `|k|` carrying a nonzero coefficient.
    pub fn support_radius(&self) -> usize {
        let r = self.radius as i64;
        (0..=r).rev().find(|&k| self.coeff(k) != C64::new(0.0, 0.0) || self.coeff(-k) != C64::new(0.0, 0.0)).unwrap_or(0) as usize
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// `self + s * other` on the larger of the two radii.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Self {
        let r = self.radius.max(other.radius);
        let mut out = self.with_radius(r);
        out.real = self.real && other.real;
        let m = other.radius as i64;
        for k in -m..=m {
            let i = (k + r as i64) as usize;
            out.coeffs[i] += other.coeff(k) * s;
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        self.axpy(1.0, other)
    }

    /// Pointwise multiplication by a symbol `g(k)`.
    pub fn map_modes(&self, mut g: impl FnMut(i64, C64) -> C64) -> Self {
        let mut out = self.clone();
        let r = self.radius as i64;
        for k in -r..=r {
            let i = (k + r) as usize;
            out.coeffs[i] = g(k, out.coeffs[i]);
        }
        out
    }

    /// Physical samples on `m` equispaced points.
    pub fn to_samples(&self, m: usize) -> Result<Vec<C64>> {
        Grid::new(m).to_physical(self)
    }
}

/// `<k> = (1 + k^2)^{1/2}`.
#[inline]
pub fn japanese(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

/// FFT plans for a fixed physical grid of `m` points.
#[derive(Clone)]
pub struct Grid {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("m", &self.m).finish()
    }
}

impl Grid {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    /// Smallest power of two grid with at least `pad * k` points on which products of `degree`
    /// fields of radius `k` project onto `|k'| <= k` without aliasing.
    pub fn dealiased(k: usize, degree: usize, pad: usize) -> Self {
        let need = (pad * k).max((degree + 1) * k + 1).max(2);
        Self::new(need.next_power_of_two())
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn to_physical(&self, f: &SpectralField) -> Result<Vec<C64>> {
        let r = f.radius();
        if self.m < 2 * r + 1 {
            return Err(Error::GridTooSmall { m: self.m, k: r, need: 2 * r + 1 });
        }
        let mut buf = vec![C64::new(0.0, 0.0); self.m];
        let ri = r as i64;
        for k in -ri..=ri {
            buf[k.rem_euclid(self.m as i64) as usize] = f.coeff(k);
        }
        self.inv.process(&mut buf);
        Ok(buf)
    }

    /// Coefficients `|k| <= radius` of physical samples (normalized measure).
    pub fn to_fourier(&self, samples: &[C64], radius: usize, real: bool) -> Result<SpectralField> {
        if samples.len() != self.m {
            return Err(Error::InvalidConfig(format!("expected {} samples, got {}", self.m, samples.len())));
        }
        if self.m < 2 * radius + 1 {
            return Err(Error::GridTooSmall { m: self.m, k: radius, need: 2 * radius + 1 });
        }
        let mut buf = samples.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.m as f64;
        let r = radius as i64;
        let coeffs = (-r..=r).map(|k| buf[k.rem_euclid(self.m as i64) as usize] * scale).collect();
        Ok(SpectralField::from_coeffs(radius, coeffs, real))
    }
}

/// Coefficients of radius `radius` from `M` equispaced samples of a function on `[0, 2pi)`.
///
/// The result is flagged real (and made exactly Hermitian) when every sample is real.
pub fn transform_forward(samples: &[C64], radius: usize) -> Result<SpectralField> {
    let m = samples.len();
    if m < 2 * radius + 1 {
        return Err(Error::GridTooSmall { m, k: radius, need: 2 * radius + 1 });
    }
    let real = samples.iter().all(|s| s.im == 0.0);
    Grid::new(m).to_fourier(samples, radius, real)
}

pub fn inverse_transform(f: &SpectralField, m: usize) -> Result<Vec<C64>> {
    f.to_samples(m)
}

/// `(sum <k>^{2s} |f(k)|^2)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let r = f.radius() as i64;
    (-r..=r)
        .map(|k| japanese(k as f64).powf(2.0 * s) * f.coeff(k).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Discrete convolution of coefficient sequences (exact product of trigonometric polynomials).
pub fn convolve(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let (ra, rb) = (a.radius() as i64, b.radius() as i64);
    let r = ra + rb;
    let mut out = SpectralField::zeros(r as usize, a.is_real_valued() && b.is_real_valued());
    let oc = out.coeffs_mut();
    for i in -ra..=ra {
        let ai = a.coeff(i);
        if ai == C64::new(0.0, 0.0) {
            continue;
        }
        for j in -rb..=rb {
            oc[(i + j + r) as usize] += ai * b.coeff(j);
        }
    }
    out
}

/// `d/dx` in Fourier space.
pub fn derivative(f: &SpectralField) -> SpectralField {
    f.map_modes(|k, c| c * C64::new(0.0, k as f64))
}

fn l2_sq(f: &SpectralField) -> f64 {
    f.coeffs().iter().map(|c| c.norm_sqr()).sum()
}

/// Integral invariants used by the energies and the transport speed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integrals {
    pub mean: f64,
    pub u2: f64,
    pub ux2: f64,
    pub uxx2: f64,
    pub u4: f64,
    pub u6: f64,
    pub u2ux2: f64,
}

/// Exact integrals of a real trigonometric polynomial via convolutions and Parseval.
pub fn integrals(f: &SpectralField) -> Integrals {
    let ux = derivative(f);
    let uxx = derivative(&ux);
    let u2 = convolve(f, f);
    let u3 = convolve(&u2, f);
    let uux = convolve(f, &ux);
    Integrals {
        mean: f.coeff(0).re,
        u2: l2_sq(f),
        ux2: l2_sq(&ux),
        uxx2: l2_sq(&uxx),
        u4: l2_sq(&u2),
        u6: l2_sq(&u3),
        u2ux2: l2_sq(&uux),
    }
}

/// Energies `E0..E3` from precomputed integrals.
pub fn energy_from_integrals(j: usize, i: &Integrals, c: &EquationCoefficients) -> Result<f64> {
    Ok(match j {
        0 => i.mean,
        1 => i.u2,
        2 => 0.5 * i.ux2 - (c.beta + 3.0 * c.gamma) / 30.0 * i.u4,
        3 => 0.5 * i.uxx2 - c.gamma * i.u2ux2 + c.delta * i.u6,
        _ => return Err(Error::InvalidEnergyIndex(j)),
    })
}

/// `E_j(f)` for `j = 0..3` with the normalized measure.
pub fn energy(j: usize, f: &SpectralField, c: &EquationCoefficients) -> Result<f64> {
    if j > 3 {
        return Err(Error::InvalidEnergyIndex(j));
    }
    if !f.is_real_valued() {
        return Err(Error::NotReal);
    }
    energy_from_integrals(j, &integrals(f), c)
}

/// `U(t) f`: multiply every mode by `exp(i t P(k))`.
pub fn propagate_linear(f: &SpectralField, t: f64, p: &PhaseParams) -> SpectralField {
    let g = p.cubic();
    f.map_modes(|k, c| c * C64::from_polar(1.0, t * symbol_f64(k, g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_cos() -> SpectralField {
        SpectralField::from_cosines(4, &[(1, 2.0, 0.0)])
    }

    #[test]
    fn constant_transforms_to_mean() {
        let s = vec![C64::new(3.5, 0.0); 16];
        let f = transform_forward(&s, 4).unwrap();
        assert_abs_diff_eq!(f.coeff(0).re, 3.5, epsilon = 1e-14);
        for k in 1..=4 {
            assert!(f.coeff(k).norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_has_unit_coefficients() {
        let m = 16;
        let s: Vec<C64> = (0..m)
            .map(|j| C64::new(2.0 * (2.0 * std::f64::consts::PI * j as f64 / m as f64).cos(), 0.0))
            .collect();
        let f = transform_forward(&s, 4).unwrap();
        assert_abs_diff_eq!(f.coeff(1).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coeff(-1).re, 1.0, epsilon = 1e-14);
        assert!(f.coeff(2).norm() < 1e-14);
    }

    #[test]
    fn grid_too_small_is_rejected() {
        let s = vec![C64::new(1.0, 0.0); 8];
        assert!(matches!(transform_forward(&s, 4), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn sobolev_norms_of_cosine() {
        assert_eq!(sobolev_norm(&SpectralField::zeros(3, true), 2.0), 0.0);
        assert_abs_diff_eq!(sobolev_norm(&two_cos(), 0.0), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(sobolev_norm(&two_cos(), 1.0), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn energies_of_cosine() {
        let c = EquationCoefficients::new(0.0, 0.0, 5.0, 1.0);
        assert_abs_diff_eq!(energy(1, &two_cos(), &c).unwrap(), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(energy(3, &two_cos(), &c).unwrap(), 11.0, epsilon = 1e-12);
        let k = SpectralField::from_cosines(2, &[(0, 1.5, 0.0)]);
        assert_abs_diff_eq!(energy(0, &k, &c).unwrap(), 1.5, epsilon = 1e-14);
        assert!(matches!(energy(4, &k, &c), Err(Error::InvalidEnergyIndex(4))));
    }

    #[test]
    fn linear_flow_of_cosine_is_a_travelling_wave() {
        // u = 2 cos x, P(1) = -1 so the coefficient at k=1 becomes e^{-it}: u = 2 cos(x - t).
        let p = PhaseParams::new(0.0, 0.0);
        let t = 0.37;
        let g = propagate_linear(&two_cos(), t, &p);
        let exact = SpectralField::from_cosines(4, &[(1, 2.0, -t)]);
        assert!(g.sub(&exact).coeffs().iter().all(|c| c.norm() < 1e-14));
    }
}
