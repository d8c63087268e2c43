//! Matter-wave phase shifts, the aperture transmission function and the
//! far-field (Fraunhofer) diffraction pattern of a circular hole.
//!
//! Phases follow `φ = −(1/ħ)∫U dt`, positive for an attractive potential.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::{BeamState, HoleGeometry};
use crate::dynamics::{OutcomeKind, Sample, Trajectory};
use crate::error::{domain, Error, Result};
use crate::numerics::bessel_j0;
use crate::numerics::elliptic::ke_pair;
use crate::numerics::quadrature::integrate_finite_vec;
use crate::numerics::{integrate_adaptive_scaled, QuadratureConfig};
use crate::potential::{FieldPoint, HamakerField, HamakerMode};
use crate::units::HBAR;

/// First positive zero of J1.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

/// `m λdB / (2π ħ²)`, which equals `1/(ħ v)`.
pub fn eikonal_prefactor(beam: &BeamState) -> f64 {
    beam.mass() * beam.wavelength() / (2.0 * PI * HBAR * HBAR)
}

fn check_rho(rho: f64, geom: &HoleGeometry) -> Result<()> {
    if !(rho >= 0.0 && rho < geom.radius()) {
        return domain(format!(
            "radial position {rho:e} m outside the hole [0, {:e})",
            geom.radius()
        ));
    }
    Ok(())
}

/// Closed-form eikonal phase of the 9/π pairwise-summation potential. The
/// elliptic integrals take the modulus `2√λ/(1+λ)` with `λ = ρ/R`.
pub fn phase_eikonal_closed(rho: f64, beam: &BeamState, geom: &HoleGeometry, c3: f64) -> Result<f64> {
    check_rho(rho, geom)?;
    if c3 == 0.0 {
        return Ok(0.0);
    }
    let r = geom.radius();
    let l = rho / r;
    let (k, e) = ke_pair(2.0 * l.sqrt() / (1.0 + l), (1.0 - l) / (1.0 + l));
    let bracket = (l - 1.0).powi(2) * k - (l * l + 7.0) * e;
    let denom = 4.0 * r.powi(3) * (l - 1.0).powi(3) * (l + 1.0).powi(2);
    Ok(eikonal_prefactor(beam) * 3.0 * c3 * geom.thickness() * bracket / denom)
}

/// `∫ U(ρ, z) dz` over the whole axial line, J·m.
pub fn line_integral(field: &HamakerField, rho: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let geom = field.geometry();
    check_rho(rho, geom)?;
    if field.c3() == 0.0 {
        return Ok(0.0);
    }
    let h = geom.half_thickness();
    let u = |z: f64| field.potential(FieldPoint::new(rho, z));
    // mirror symmetry in z
    let inner = integrate_adaptive_scaled(u, 0.0, h, 1.0, cfg)?;
    let scale = h.max(geom.radius() - rho);
    let outer = integrate_adaptive_scaled(u, h, f64::INFINITY, scale, cfg)?;
    Ok(2.0 * (inner.value + outer.value))
}

/// Default accuracy of the eikonal and trajectory phase quadratures.
pub fn phase_quadrature() -> QuadratureConfig {
    QuadratureConfig::new(0.0, 1e-8, 4000)
}

/// Eikonal phase from the numerically integrated potential along a straight
/// line at radius `rho`.
pub fn phase_eikonal_numeric(
    rho: f64,
    beam: &BeamState,
    geom: &HoleGeometry,
    c3: f64,
    mode: HamakerMode,
) -> Result<f64> {
    if c3 == 0.0 {
        check_rho(rho, geom)?;
        return Ok(0.0);
    }
    let field = HamakerField::new(c3, *geom, mode)?;
    Ok(-eikonal_prefactor(beam) * line_integral(&field, rho, &phase_quadrature())?)
}

fn hermite(a: &Sample, b: &Sample, t: f64) -> (f64, f64) {
    let dt = b.t - a.t;
    let s = (t - a.t) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let rho = h00 * a.rho + h10 * dt * a.v_rho + h01 * b.rho + h11 * dt * b.v_rho;
    let z = h00 * a.z + h10 * dt * a.v_z + h01 * b.z + h11 * dt * b.v_z;
    (rho.abs(), z)
}

/// Phase `−(1/ħ)∫U dt` along a computed trajectory. Between samples the path
/// is a cubic Hermite interpolant; before the first and after the last
/// sample it continues as a straight line to infinity.
pub fn phase_along_trajectory(
    traj: &Trajectory,
    c3: f64,
    geom: &HoleGeometry,
    mode: HamakerMode,
) -> Result<f64> {
    if traj.outcome.kind == OutcomeKind::Absorbed {
        return Err(Error::UndefinedPhase);
    }
    if traj.samples.len() < 2 {
        return domain("trajectory needs at least two samples");
    }
    if c3 == 0.0 {
        return Ok(0.0);
    }
    let field = HamakerField::new(c3, *geom, mode)?;
    let cfg = phase_quadrature();
    let u = |rho: f64, z: f64| field.potential(FieldPoint::new(rho, z));
    let scale = geom.thickness().max(geom.radius());

    let mut total = 0.0;
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let seg = integrate_adaptive_scaled(
            |t| {
                let (rho, z) = hermite(a, b, t);
                u(rho, z)
            },
            a.t,
            b.t,
            1.0,
            &cfg,
        )?;
        total += seg.value;
    }

    let first = traj.samples[0];
    let head = integrate_adaptive_scaled(
        |s| u(first.rho, first.z - s),
        0.0,
        f64::INFINITY,
        scale,
        &cfg,
    )?;
    total += head.value / first.v_z;

    let last = *traj.last();
    let slope = last.v_rho / last.v_z;
    let tail = integrate_adaptive_scaled(
        |s| u((last.rho + slope * s).abs(), last.z + s),
        0.0,
        f64::INFINITY,
        scale,
        &cfg,
    )?;
    total += tail.value / last.v_z;

    Ok(-total / HBAR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMethod {
    ClosedForm,
    NumericLineIntegral,
    TrajectoryIntegral,
}

impl PhaseMethod {
    pub fn label(self) -> &'static str {
        match self {
            PhaseMethod::ClosedForm => "closed-form",
            PhaseMethod::NumericLineIntegral => "numeric-line-integral",
            PhaseMethod::TrajectoryIntegral => "trajectory-integral",
        }
    }
}

/// Sampled φ(ρ) on `[0, ρ_max]` with monotone cubic (Fritsch–Carlson)
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    rho: Vec<f64>,
    phi: Vec<f64>,
    slopes: Vec<f64>,
    method: PhaseMethod,
    /// Closed-form profiles evaluate the formula itself instead of the
    /// interpolant.
    exact: Option<(BeamState, HoleGeometry, f64)>,
}

/// Radii on `[0, rho_max]` clustered toward `rho_max`, where φ varies fastest.
pub fn profile_radii(rho_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                rho_max
            } else {
                rho_max * (FRAC_PI_2 * i as f64 / (n - 1) as f64).sin()
            }
        })
        .collect()
}

impl PhaseProfile {
    pub fn from_samples(rho: Vec<f64>, phi: Vec<f64>, method: PhaseMethod) -> Result<Self> {
        if rho.len() != phi.len() || rho.len() < 2 {
            return domain("phase profile needs matching radius and phase samples, at least two");
        }
        if rho[0] != 0.0 || rho.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("phase profile radii must start at 0 and increase strictly");
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return domain("phase profile contains non-finite values");
        }
        let slopes = pchip_slopes(&rho, &phi);
        Ok(Self {
            rho,
            phi,
            slopes,
            method,
            exact: None,
        })
    }

    pub fn closed_form(
        beam: &BeamState,
        geom: &HoleGeometry,
        c3: f64,
        rho_max: f64,
        n: usize,
    ) -> Result<Self> {
        let rho = profile_radii(rho_max, n);
        let phi = rho
            .iter()
            .map(|&r| phase_eikonal_closed(r, beam, geom, c3))
            .collect::<Result<Vec<_>>>()?;
        let mut profile = Self::from_samples(rho, phi, PhaseMethod::ClosedForm)?;
        profile.exact = Some((beam.clone(), *geom, c3));
        Ok(profile)
    }

    pub fn numeric(
        beam: &BeamState,
        geom: &HoleGeometry,
        c3: f64,
        mode: HamakerMode,
        rho_max: f64,
        n: usize,
    ) -> Result<Self> {
        let rho = profile_radii(rho_max, n);
        let phi = rho
            .par_iter()
            .map(|&r| phase_eikonal_numeric(r, beam, geom, c3, mode))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(rho, phi, PhaseMethod::NumericLineIntegral)
    }

    pub fn method(&self) -> PhaseMethod {
        self.method
    }

    pub fn rho_max(&self) -> f64 {
        *self.rho.last().expect("at least two samples")
    }

    pub fn radii(&self) -> &[f64] {
        &self.rho
    }

    pub fn phases(&self) -> &[f64] {
        &self.phi
    }

    /// Interpolated φ(ρ); `rho` must lie in the sampled range.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0 && rho <= self.rho_max()) {
            return domain(format!("ρ = {rho:e} m outside the phase profile"));
        }
        if let Some((beam, geom, c3)) = &self.exact {
            return phase_eikonal_closed(rho, beam, geom, *c3);
        }
        let i = match self.rho.partition_point(|&r| r <= rho) {
            0 => 0,
            k if k >= self.rho.len() => self.rho.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.rho[i], self.rho[i + 1]);
        let h = x1 - x0;
        let s = (rho - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * self.phi[i]
            + (s3 - 2.0 * s2 + s) * h * self.slopes[i]
            + (-2.0 * s3 + 3.0 * s2) * self.phi[i + 1]
            + (s3 - s2) * h * self.slopes[i + 1])
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

/// `t(ρ) = e^{iφ(ρ)}` inside the effective radius `R − ΔR`, zero outside.
/// `phase = None` means φ ≡ 0.
pub fn transmission_function(
    rho: f64,
    radius: f64,
    delta_r: f64,
    phase: Option<&PhaseProfile>,
) -> Result<Complex64> {
    if rho < 0.0 {
        return domain("radial position must be non-negative");
    }
    if rho >= radius - delta_r {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match phase {
        None => Ok(Complex64::new(1.0, 0.0)),
        Some(p) => Ok(Complex64::from_polar(1.0, p.eval(rho)?)),
    }
}

/// A circular aperture of physical radius `R` whose open part is `ρ < R − ΔR`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aperture {
    radius: f64,
    delta_r: f64,
    phase: Option<PhaseProfile>,
    global_phase: f64,
}

impl Aperture {
    pub fn bare(radius: f64) -> Result<Self> {
        Self::hole_only(radius, 0.0)
    }

    pub fn hole_only(radius: f64, delta_r: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain("aperture radius must be positive");
        }
        if !(delta_r >= 0.0 && delta_r < radius) {
            return domain(format!("ΔR = {delta_r:e} m must lie in [0, R)"));
        }
        Ok(Self {
            radius,
            delta_r,
            phase: None,
            global_phase: 0.0,
        })
    }

    /// `phase` must cover `[0, R − ΔR]`.
    pub fn corrected(radius: f64, delta_r: f64, phase: PhaseProfile) -> Result<Self> {
        let base = Self::hole_only(radius, delta_r)?;
        if phase.rho_max() < base.open_radius() * (1.0 - 1e-12) {
            return domain("phase profile does not cover the open aperture");
        }
        Ok(Self {
            phase: Some(phase),
            ..base
        })
    }

    /// Multiply the whole transmission function by `e^{iθ}`.
    pub fn with_global_phase(self, theta: f64) -> Self {
        Self {
            global_phase: theta,
            ..self
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn open_radius(&self) -> f64 {
        self.radius - self.delta_r
    }

    pub fn phase(&self) -> Option<&PhaseProfile> {
        self.phase.as_ref()
    }

    pub fn transmission(&self, rho: f64) -> Result<Complex64> {
        let t = transmission_function(rho, self.radius, self.delta_r, self.phase.as_ref())?;
        Ok(t * Complex64::from_polar(1.0, self.global_phase))
    }
}

/// Source and detector distances, wavenumber and detector radii.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionSetup {
    pub l1: f64,
    pub l2: f64,
    pub k0: f64,
    pub p: Vec<f64>,
}

impl DiffractionSetup {
    pub fn new(l1: f64, l2: f64, wavelength: f64, p: Vec<f64>) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && wavelength > 0.0) {
            return domain("L1, L2 and the wavelength must be positive");
        }
        if p.is_empty() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return domain("detector radii must be finite and non-negative");
        }
        Ok(Self {
            l1,
            l2,
            k0: 2.0 * PI / wavelength,
            p,
        })
    }

    /// `n` equally spaced detector radii on `[0, p_max]`.
    pub fn uniform(l1: f64, l2: f64, wavelength: f64, p_max: f64, n: usize) -> Result<Self> {
        if !(p_max > 0.0) || n < 2 {
            return domain("uniform detector grid needs p_max > 0 and at least two points");
        }
        let p = (0..n).map(|i| p_max * i as f64 / (n - 1) as f64).collect();
        Self::new(l1, l2, wavelength, p)
    }

    /// Detector radius of the first dark ring of a bare hole of radius `r`.
    pub fn first_airy_zero(&self, r: f64) -> f64 {
        J1_FIRST_ZERO * self.l2 / (self.k0 * r)
    }

    /// `k0 R² / L2`; far field requires this to be small.
    pub fn fresnel_number(&self, r: f64) -> f64 {
        self.k0 * r * r / self.l2
    }

    /// Transverse spatial frequency at detector radius `p`.
    pub fn q(&self, p: f64) -> f64 {
        self.k0 * p / self.l2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionPattern {
    pub p: Vec<f64>,
    /// Amplitude divided by the bare-hole forward amplitude `R²/2`.
    pub amplitude: Vec<Complex64>,
    /// `|amplitude|²`, so the bare hole of the same radius has `I(0) = 1`.
    pub intensity: Vec<f64>,
    /// `R²/2`, m².
    pub normalization: f64,
    /// False where the radial quadrature missed its tolerance.
    pub converged: Vec<bool>,
}

impl DiffractionPattern {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// `∫₀^{R−ΔR} ρ t(ρ) J0(qρ) dρ`, m². Panels are no wider than an eighth of
/// the J0 period.
pub fn fraunhofer_amplitude(aperture: &Aperture, q: f64) -> Result<Complex64> {
    let a = aperture.open_radius();
    let r = aperture.radius();
    let mut width = a / 16.0;
    if q > 0.0 {
        width = width.min(PI / (4.0 * q));
    }
    let panels = (a / width).ceil().max(1.0) as usize;
    // absolute target: 1e-12 of the bare forward amplitude R²/2 overall
    let cfg = QuadratureConfig::new(0.5e-12 * r * r / panels as f64, 1e-11, 1000);
    let mut sum = [0.0; 2];
    for i in 0..panels {
        let lo = a * i as f64 / panels as f64;
        let hi = if i + 1 == panels { a } else { a * (i + 1) as f64 / panels as f64 };
        let part = integrate_finite_vec(
            |rho| {
                let t = aperture.transmission(rho)?;
                let w = rho * bessel_j0(q * rho);
                Ok([w * t.re, w * t.im])
            },
            lo,
            hi,
            &cfg,
        )?;
        sum[0] += part.value[0];
        sum[1] += part.value[1];
    }
    Ok(Complex64::new(sum[0], sum[1]))
}

/// Far-field pattern on the detector grid, normalised so the bare hole of
/// the same physical radius has unit forward intensity.
pub fn fraunhofer_pattern(aperture: &Aperture, setup: &DiffractionSetup) -> DiffractionPattern {
    let norm = 0.5 * aperture.radius().powi(2);
    let values: Vec<(Complex64, bool)> = setup
        .p
        .par_iter()
        .map(|&p| match fraunhofer_amplitude(aperture, setup.q(p)) {
            Ok(a) => (a / norm, true),
            Err(_) => (Complex64::new(f64::NAN, f64::NAN), false),
        })
        .collect();
    DiffractionPattern {
        p: setup.p.clone(),
        intensity: values.iter().map(|(a, _)| a.norm_sqr()).collect(),
        amplitude: values.iter().map(|(a, _)| *a).collect(),
        converged: values.iter().map(|(_, c)| *c).collect(),
        normalization: norm,
    }
}

/// `∫₀^{p_max} I p dp` of `pattern` over that of `reference` (trapezoid rule
/// on the shared grid).
pub fn transmission_rate(
    pattern: &DiffractionPattern,
    reference: &DiffractionPattern,
    p_max: f64,
) -> Result<f64> {
    if pattern.p != reference.p {
        return Err(Error::GridMismatch(format!(
            "pattern has {} detector radii, reference {}",
            pattern.p.len(),
            reference.p.len()
        )));
    }
    let p = &pattern.p;
    if p.len() < 2 || !(p_max > p[0] && p_max <= p[p.len() - 1]) {
        return domain(format!("p_max = {p_max:e} m outside the detector grid"));
    }
    Ok(radial_power(p, &pattern.intensity, p_max) / radial_power(p, &reference.intensity, p_max))
}

/// Peak intensity of the first ring beyond the first minimum, relative to
/// the forward intensity. `None` if the grid holds no complete first ring.
pub fn first_sidelobe_ratio(pattern: &DiffractionPattern) -> Option<f64> {
    let i = &pattern.intensity;
    let min = (1..i.len().saturating_sub(1)).find(|&k| i[k] <= i[k - 1] && i[k] < i[k + 1])?;
    let peak = (min + 1..i.len().saturating_sub(1)).find(|&k| i[k] >= i[k - 1] && i[k] > i[k + 1])?;
    Some(i[peak] / i[0])
}

fn radial_power(p: &[f64], intensity: &[f64], p_max: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..p.len() - 1 {
        let (x0, x1) = (p[i], p[i + 1]);
        if x0 >= p_max {
            break;
        }
        let (f0, f1) = (intensity[i] * x0, intensity[i + 1] * x1);
        if x1 <= p_max {
            sum += 0.5 * (f0 + f1) * (x1 - x0);
        } else {
            let fm = f0 + (f1 - f0) * (p_max - x0) / (x1 - x0);
            sum += 0.5 * (f0 + fm) * (p_max - x0);
        }
    }
    sum
}
