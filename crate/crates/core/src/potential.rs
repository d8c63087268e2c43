//! Atom–membrane interaction potentials.
//!
//! Three levels of description:
//!
//! * the planar law `U = −C3/ζ³`,
//! * the in-hole transverse model, which treats the wall as a plane at the
//!   nearest distance `R − ρ`,
//! * the pairwise-summation (Hamaker) volume integral over the whole
//!   membrane, `U = −P·C3 ∭ d³s / |s − r|⁶`, with `P` set by [`HamakerMode`].
//!
//! The Hamaker integral is never done in 3D. The azimuthal integral has a
//! closed form, and because `|x|⁻⁶` is homogeneous of degree −6,
//! `|x|⁻⁶ = −⅓ ∇·(x |x|⁻⁶)`, so the volume integral becomes an integral over
//! the bounding surfaces (the cylinder wall and the two faces). What remains
//! are 1D adaptive integrals. The force follows the same route from
//! `∇_r ∫_V f = −∮ f n dA`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::domain::HoleGeometry;
use crate::error::{domain, Error, Result};
use crate::numerics::quadrature::{integrate_finite_vec, integrate_upper_tail_vec, QuadratureConfig};

/// Wall contact is declared this close to the material surface, metres.
pub const DEFAULT_FORCE_EPSILON: f64 = 0.05e-9;
/// Central finite-difference step for the gradient cross-check, metres.
pub const DEFAULT_FD_STEP: f64 = 0.01e-9;

/// Prefactor convention for the pairwise-summation potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HamakerMode {
    /// `9 C3 / π`: the printed corrected prefactor. Over a half-space this
    /// gives `−(3/2) C3/ζ³`.
    #[default]
    PaperLiteral,
    /// `6 C3 / π`: reproduces `−C3/ζ³` exactly over a half-space.
    PlanarConsistent,
}

impl HamakerMode {
    pub fn prefactor(self) -> f64 {
        match self {
            HamakerMode::PaperLiteral => 9.0 / PI,
            HamakerMode::PlanarConsistent => 6.0 / PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HamakerMode::PaperLiteral => "paper-literal",
            HamakerMode::PlanarConsistent => "planar-consistent",
        }
    }
}

impl fmt::Display for HamakerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HamakerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper-literal" | "paper_literal" | "literal" | "9/pi" => Ok(HamakerMode::PaperLiteral),
            "planar-consistent" | "planar_consistent" | "planar" | "6/pi" => {
                Ok(HamakerMode::PlanarConsistent)
            }
            other => domain(format!("unknown Hamaker mode '{other}'")),
        }
    }
}

/// Coefficient of the transverse in-hole force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ForceModel {
    /// `F = 3 C3 / (R − ρ)⁴`, the exact gradient of the transverse potential.
    #[default]
    Consistent,
    /// The same force scaled by 1/4.
    PaperFactor,
}

impl ForceModel {
    pub fn factor(self) -> f64 {
        match self {
            ForceModel::Consistent => 1.0,
            ForceModel::PaperFactor => 0.25,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ForceModel::Consistent => "consistent",
            ForceModel::PaperFactor => "paper-factor",
        }
    }
}

impl fmt::Display for ForceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ForceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "consistent" => Ok(ForceModel::Consistent),
            "paper-factor" | "paper_factor" | "quarter" => Ok(ForceModel::PaperFactor),
            other => domain(format!("unknown force model '{other}'")),
        }
    }
}

/// A point in the meridional half-plane, metres. The membrane occupies
/// `ρ ≥ R, |z| ≤ d/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub rho: f64,
    pub z: f64,
}

impl FieldPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        Self { rho, z }
    }
}

fn check_c3(c3: f64) -> Result<()> {
    if !(c3 >= 0.0 && c3.is_finite()) {
        return domain(format!("C3 must be non-negative, got {c3}"));
    }
    Ok(())
}

/// `−C3/ζ³` for an atom at distance `zeta` from a half-space.
pub fn planar_potential(c3: f64, zeta: f64) -> Result<f64> {
    check_c3(c3)?;
    if !(zeta > 0.0) {
        return domain(format!("wall distance must be positive, got {zeta}"));
    }
    Ok(-c3 / zeta.powi(3))
}

fn wall_gap(geom: &HoleGeometry, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return domain(format!("radial coordinate must be non-negative, got {rho}"));
    }
    let gap = geom.radius() - rho;
    if !(gap > 0.0) {
        return Err(Error::WallContact(format!(
            "rho = {rho:e} m is at or beyond the wall R = {:e} m",
            geom.radius()
        )));
    }
    Ok(gap)
}

/// `−C3/(R − ρ)³`, valid inside the hole (`|z| ≤ d/2`).
pub fn hole_transverse_potential(c3: f64, geom: &HoleGeometry, rho: f64) -> Result<f64> {
    check_c3(c3)?;
    let gap = wall_gap(geom, rho)?;
    Ok(-c3 / gap.powi(3))
}

/// Radial force of the transverse model. Positive values point toward the
/// wall.
pub fn hole_transverse_force(c3: f64, geom: &HoleGeometry, rho: f64, model: ForceModel) -> Result<f64> {
    check_c3(c3)?;
    let gap = wall_gap(geom, rho)?;
    Ok(model.factor() * 3.0 * c3 / gap.powi(4))
}

/// Distance from `pt` to the nearest membrane point, metres. Negative inside
/// the material.
pub fn material_distance(geom: &HoleGeometry, pt: FieldPoint) -> f64 {
    let r = geom.radius();
    let h = geom.half_thickness();
    let dz = pt.z.abs() - h;
    let dr = r - pt.rho;
    match (dz <= 0.0, dr > 0.0) {
        (true, true) => dr,
        (true, false) => -(-dr).min(-dz),
        (false, true) => dr.hypot(dz),
        (false, false) => dz,
    }
}

/// The pairwise-summation potential and force of the perforated membrane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamakerField {
    c3: f64,
    geom: HoleGeometry,
    mode: HamakerMode,
    quad: QuadratureConfig,
    force_epsilon: f64,
}

fn default_quadrature() -> QuadratureConfig {
    QuadratureConfig::new(0.0, 1e-11, 4000)
}

/// `∫₀^{2π} dφ (A − B cos φ)⁻³` and `∫₀^{2π} cos φ dφ (A − B cos φ)⁻³`, given
/// `A − B` and `A + B` separately to keep the near-wall factor exact.
#[inline]
fn azimuthal(a: f64, b: f64, a_minus_b: f64, a_plus_b: f64) -> (f64, f64) {
    let d = (a_minus_b * a_plus_b).powf(-2.5);
    (PI * (2.0 * a * a + b * b) * d, 3.0 * PI * a * b * d)
}

impl HamakerField {
    pub fn new(c3: f64, geom: HoleGeometry, mode: HamakerMode) -> Result<Self> {
        check_c3(c3)?;
        Ok(Self {
            c3,
            geom,
            mode,
            quad: default_quadrature(),
            force_epsilon: DEFAULT_FORCE_EPSILON,
        })
    }

    pub fn with_quadrature(self, quad: QuadratureConfig) -> Self {
        Self { quad, ..self }
    }

    pub fn with_force_epsilon(self, force_epsilon: f64) -> Self {
        Self { force_epsilon, ..self }
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    pub fn geometry(&self) -> &HoleGeometry {
        &self.geom
    }

    pub fn mode(&self) -> HamakerMode {
        self.mode
    }

    pub fn force_epsilon(&self) -> f64 {
        self.force_epsilon
    }

    fn reduced(&self, pt: FieldPoint) -> Result<(f64, f64, f64)> {
        if !(pt.rho.is_finite() && pt.z.is_finite() && pt.rho >= 0.0) {
            return domain(format!("invalid field point ({:e}, {:e})", pt.rho, pt.z));
        }
        if material_distance(&self.geom, pt) <= 0.0 {
            return domain(format!(
                "field point (rho = {:e} m, z = {:e} m) lies inside the membrane",
                pt.rho, pt.z
            ));
        }
        let r = self.geom.radius();
        Ok((pt.rho / r, pt.z / r, self.geom.half_thickness() / r))
    }

    /// Surface integral of the cylinder wall, lengths in units of R:
    /// returns `[∫ (J3 − ρ C3) dx, ∫ C3 dx]` over `x = z' − z ∈ [−h − z, h − z]`.
    fn cylinder(&self, rho: f64, z: f64, h: f64) -> Result<[f64; 2]> {
        let zeta = 1.0 - rho;
        let b = 2.0 * rho;
        let tail2 = (1.0 + rho) * (1.0 + rho);
        let integrand = |x: f64| -> Result<[f64; 2]> {
            let x2 = x * x;
            let a = 1.0 + rho * rho + x2;
            let amb = zeta * zeta + x2;
            let apb = tail2 + x2;
            let d = (amb * apb).powf(-2.5);
            // 2A² + B² − 6ρ²A with the (1 − ρ²) factor kept explicit
            let numer = 2.0 * zeta * (1.0 + rho) * (1.0 + 2.0 * rho * rho)
                + x2 * (4.0 - 2.0 * rho * rho)
                + 2.0 * x2 * x2;
            Ok([PI * numer * d, 3.0 * PI * a * b * d])
        };
        let (lo, hi) = (-h - z, h - z);
        let mut total = [0.0; 2];
        for (a, b) in split_at_zero(lo, hi) {
            let q = integrate_finite_vec(integrand, a, b, &self.quad)?;
            total[0] += q.value[0];
            total[1] += q.value[1];
        }
        Ok(total)
    }

    /// `∫₁^∞ r' J3 dr'` for a face at axial offset `w` from the point.
    fn face(&self, rho: f64, w: f64) -> Result<f64> {
        if rho == 0.0 {
            // closed form on the axis
            return Ok(PI / (2.0 * (1.0 + w * w).powi(2)));
        }
        let b_over_r = 2.0 * rho;
        let w2 = w * w;
        let integrand = |r: f64| -> Result<[f64; 1]> {
            let a = r * r + rho * rho + w2;
            let amb = (r - rho) * (r - rho) + w2;
            let apb = (r + rho) * (r + rho) + w2;
            let (j3, _) = azimuthal(a, b_over_r * r, amb, apb);
            Ok([r * j3])
        };
        let mut total = 0.0;
        let split = rho.max(1.0);
        if split > 1.0 {
            total += integrate_finite_vec(integrand, 1.0, split, &self.quad)?.value[0];
        }
        let width = if rho < 1.0 {
            ((1.0 - rho).powi(2) + w2).sqrt()
        } else {
            w.abs()
        };
        total += integrate_upper_tail_vec(integrand, split, width.max(1e-3), &self.quad)?.value[0];
        Ok(total)
    }

    /// Dimensionless `R³ ∭ d³s/|s − r|⁶`.
    fn volume_integral(&self, rho: f64, z: f64, h: f64) -> Result<f64> {
        let cyl = self.cylinder(rho, z, h)?[0] / 3.0;
        let top = -(h - z) / 3.0 * self.face(rho, h - z)?;
        let bottom = -(h + z) / 3.0 * self.face(rho, -h - z)?;
        Ok(cyl + top + bottom)
    }

    /// `U(ρ, z)`, joules.
    pub fn potential(&self, pt: FieldPoint) -> Result<f64> {
        let (rho, z, h) = self.reduced(pt)?;
        if self.c3 == 0.0 {
            return Ok(0.0);
        }
        let i = self.volume_integral(rho, z, h)?;
        Ok(-self.mode.prefactor() * self.c3 * i / self.geom.radius().powi(3))
    }

    /// `(F_ρ, F_z) = −∇U`, newtons.
    pub fn force(&self, pt: FieldPoint) -> Result<(f64, f64)> {
        let (rho, z, h) = self.reduced(pt)?;
        let dist = material_distance(&self.geom, pt);
        if dist <= self.force_epsilon {
            return Err(Error::WallContact(format!(
                "field point within {:e} m of the membrane surface",
                dist
            )));
        }
        if self.c3 == 0.0 {
            return Ok((0.0, 0.0));
        }
        let f_rho = if rho == 0.0 {
            0.0
        } else {
            self.cylinder(rho, z, h)?[1]
        };
        let f_z = self.face(rho, -h - z)? - self.face(rho, h - z)?;
        let scale = self.mode.prefactor() * self.c3 / self.geom.radius().powi(4);
        Ok((scale * f_rho, scale * f_z))
    }

    /// Central-difference gradient of [`HamakerField::potential`] with step `step`.
    pub fn force_finite_difference(&self, pt: FieldPoint, step: f64) -> Result<(f64, f64)> {
        let u = |rho: f64, z: f64| self.potential(FieldPoint::new(rho, z));
        let f_rho = if pt.rho < step {
            0.0
        } else {
            -(u(pt.rho + step, pt.z)? - u(pt.rho - step, pt.z)?) / (2.0 * step)
        };
        let f_z = -(u(pt.rho, pt.z + step)? - u(pt.rho, pt.z - step)?) / (2.0 * step);
        Ok((f_rho, f_z))
    }
}

fn split_at_zero(lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let parts = if lo < 0.0 && hi > 0.0 {
        [Some((lo, 0.0)), Some((0.0, hi))]
    } else {
        [Some((lo, hi)), None]
    };
    parts.into_iter().flatten()
}

/// Pairwise-summation potential with the default quadrature settings.
pub fn hamaker_potential(c3: f64, geom: &HoleGeometry, mode: HamakerMode, pt: FieldPoint) -> Result<f64> {
    HamakerField::new(c3, *geom, mode)?.potential(pt)
}

/// Pairwise-summation force with the default quadrature settings.
pub fn hamaker_force(c3: f64, geom: &HoleGeometry, mode: HamakerMode, pt: FieldPoint) -> Result<(f64, f64)> {
    HamakerField::new(c3, *geom, mode)?.force(pt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{HE_STAR_C3_MEV_NM3, HoleGeometry};
    use crate::units::{c3_to_si, MEV, NM};

    fn he_star() -> f64 {
        c3_to_si(HE_STAR_C3_MEV_NM3)
    }

    #[test]
    fn planar_law() {
        let u = planar_potential(he_star(), 1.0 * NM).unwrap();
        assert!((u / MEV + 4.1).abs() < 1e-12);
        let u2 = planar_potential(he_star(), 2.0 * NM).unwrap();
        assert!((u / u2 - 8.0).abs() < 1e-12);
        assert!(planar_potential(he_star(), 1.0).unwrap().abs() < 1e-40);
        assert!(planar_potential(he_star(), 0.0).is_err());
        assert!(planar_potential(he_star(), -1.0).is_err());
    }

    #[test]
    fn transverse_potential_and_force() {
        let g = HoleGeometry::from_nm(50.0, 25.0).unwrap();
        let c3 = he_star();
        let u0 = hole_transverse_potential(c3, &g, 0.0).unwrap();
        assert!((u0 / (-c3 / (25.0 * NM).powi(3)) - 1.0).abs() < 1e-14);
        let u24 = hole_transverse_potential(c3, &g, 24.0 * NM).unwrap();
        assert!((u24 / MEV + 4.1).abs() < 1e-9);
        assert!(hole_transverse_potential(c3, &g, 25.0 * NM).is_err());
        for rho_nm in [0.0, 3.0, 12.5, 24.9] {
            let rho = rho_nm * NM;
            let f = hole_transverse_force(c3, &g, rho, ForceModel::Consistent).unwrap();
            let q = hole_transverse_force(c3, &g, rho, ForceModel::PaperFactor).unwrap();
            assert!(f > 0.0);
            assert!((f * (25.0 * NM - rho).powi(4) / (3.0 * c3) - 1.0).abs() < 1e-12);
            assert!((q / f - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn material_distance_regions() {
        let g = HoleGeometry::from_nm(10.0, 5.0).unwrap();
        let d = |r: f64, z: f64| material_distance(&g, FieldPoint::new(r * NM, z * NM)) / NM;
        assert!((d(4.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((d(8.0, 9.0) - 4.0).abs() < 1e-12);
        assert!((d(2.0, 9.0) - 5.0).abs() < 1e-12);
        assert!(d(6.0, 1.0) < 0.0);
    }

    #[test]
    fn inside_material_is_rejected() {
        let g = HoleGeometry::from_nm(10.0, 5.0).unwrap();
        let field = HamakerField::new(he_star(), g, HamakerMode::PaperLiteral).unwrap();
        assert!(matches!(field.potential(FieldPoint::new(6.0 * NM, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(
            field.force(FieldPoint::new(4.97 * NM, 0.0)),
            Err(Error::WallContact(_))
        ));
    }

    #[test]
    fn on_axis_closed_form() {
        // ∫_V d³s/|s|⁶ at the hole centre = (π/2)[h/(R²(R²+h²)) + atan(h/R)/R³]
        let (d, r) = (5.0, 5.0);
        let g = HoleGeometry::from_nm(d, r).unwrap();
        let h = d / 2.0;
        let integral = (PI / 2.0) * (h / (r * r * (r * r + h * h)) + (h / r).atan() / r.powi(3));
        let field = HamakerField::new(1.0, g, HamakerMode::PaperLiteral).unwrap();
        let u = field.potential(FieldPoint::new(0.0, 0.0)).unwrap();
        let expected = -(9.0 / PI) * integral / NM.powi(3);
        assert!((u / expected - 1.0).abs() < 1e-9, "{u} vs {expected}");
    }

    #[test]
    fn symmetry_zeros() {
        let g = HoleGeometry::from_nm(20.0, 10.0).unwrap();
        let field = HamakerField::new(he_star(), g, HamakerMode::PaperLiteral).unwrap();
        let (fr, fz) = field.force(FieldPoint::new(0.0, 3.0 * NM)).unwrap();
        assert_eq!(fr, 0.0);
        assert!(fz < 0.0 || fz > 0.0);
        let (fr, fz) = field.force(FieldPoint::new(7.0 * NM, 0.0)).unwrap();
        assert!(fr > 0.0);
        assert!(fz.abs() < 1e-9 * fr, "{fz} vs {fr}");
    }

    #[test]
    fn parse_modes() {
        assert_eq!("planar-consistent".parse::<HamakerMode>().unwrap(), HamakerMode::PlanarConsistent);
        assert_eq!("paper-literal".parse::<HamakerMode>().unwrap(), HamakerMode::PaperLiteral);
        assert_eq!("paper-factor".parse::<ForceModel>().unwrap(), ForceModel::PaperFactor);
        assert!("9".parse::<HamakerMode>().is_err());
    }
}
