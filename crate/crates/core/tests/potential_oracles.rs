//! Cross-checks of the surface-reduced pairwise-summation integrals against
//! independent routes: direct volume quadrature, slab closed forms and
//! finite differences.

use std::f64::consts::PI;

use holeflux::numerics::{integrate_adaptive, QuadratureConfig};
use holeflux::potential::{FieldPoint, HamakerField, HamakerMode};
use holeflux::units::{c3_to_si, NM};
use holeflux::HoleGeometry;
use proptest::prelude::*;

/// `∭ d³s/|s − r|⁶` by nested quadrature over (r', z') of the azimuthally
/// integrated kernel, lengths in nm.
fn volume_oracle(r_hole: f64, d: f64, rho: f64, z: f64) -> f64 {
    let cfg = QuadratureConfig::new(0.0, 1e-10, 4000);
    let h = d / 2.0;
    let inner = |rp: f64| {
        integrate_adaptive(
            |zp| {
                let a = rp * rp + rho * rho + (zp - z).powi(2);
                let b = 2.0 * rp * rho;
                rp * PI * (2.0 * a * a + b * b) / (a * a - b * b).powf(2.5)
            },
            -h,
            h,
            &cfg,
        )
        .unwrap()
        .value
    };
    integrate_adaptive(inner, r_hole, f64::INFINITY, &cfg).unwrap().value
}

fn field(d: f64, r: f64, mode: HamakerMode) -> HamakerField {
    HamakerField::new(1.0, HoleGeometry::from_nm(d, r).unwrap(), mode).unwrap()
}

#[test]
fn surface_reduction_matches_volume_quadrature() {
    let cases = [
        (5.0, 5.0, 0.0, 0.0),
        (5.0, 5.0, 2.0, 1.0),
        (5.0, 5.0, 4.5, 0.0),
        (5.0, 5.0, 3.0, 6.0),
        (5.0, 5.0, 8.0, 4.0),
        (50.0, 25.0, 24.0, 20.0),
        (20.0, 10.0, 9.5, -12.0),
    ];
    for (d, r, rho, z) in cases {
        let f = field(d, r, HamakerMode::PaperLiteral);
        let u = f.potential(FieldPoint::new(rho * NM, z * NM)).unwrap();
        let oracle = -(9.0 / PI) * volume_oracle(r, d, rho, z) / NM.powi(3);
        assert!((u / oracle - 1.0).abs() < 1e-6, "({d},{r},{rho},{z}): {u} vs {oracle}");
    }
}

#[test]
fn slab_limit_far_from_hole() {
    let (d, r) = (10.0, 5.0);
    let f = field(d, r, HamakerMode::PlanarConsistent);
    for zeta in [0.5, 1.0, 2.0, 5.0] {
        let u = f.potential(FieldPoint::new(20.0 * r * NM, (d / 2.0 + zeta) * NM)).unwrap();
        let slab = -(1.0 / zeta.powi(3) - 1.0 / (zeta + d).powi(3)) / NM.powi(3);
        assert!((u / slab - 1.0).abs() < 0.01, "zeta = {zeta}: {u} vs {slab}");
    }
}

#[test]
fn half_space_limit() {
    let zeta = 1.0;
    let d = 1e3 * zeta;
    let f = field(d, 5.0, HamakerMode::PlanarConsistent);
    let u = f.potential(FieldPoint::new(100.0 * NM, (d / 2.0 + zeta) * NM)).unwrap();
    let planar = -1.0 / (zeta * NM).powi(3);
    assert!((u / planar - 1.0).abs() < 0.01, "{u} vs {planar}");
}

#[test]
fn force_is_minus_gradient() {
    let c3 = c3_to_si(4.1);
    for (d, r) in [(5.0, 5.0), (50.0, 25.0)] {
        let g = HoleGeometry::from_nm(d, r).unwrap();
        let f = HamakerField::new(c3, g, HamakerMode::PaperLiteral).unwrap();
        for (rho, z) in [(0.5 * r, 0.0), (0.9 * r, 0.0), (0.0, d), (0.7 * r, 0.4 * d), (1.3 * r, 0.8 * d)] {
            let pt = FieldPoint::new(rho * NM, z * NM);
            let (fr, fz) = f.force(pt).unwrap();
            let (gr, gz) = f.force_finite_difference(pt, 0.01 * NM).unwrap();
            let scale = fr.abs().max(fz.abs());
            assert!((fr - gr).abs() <= 5e-3 * scale, "F_rho at ({rho},{z}): {fr} vs {gr}");
            assert!((fz - gz).abs() <= 5e-3 * scale, "F_z at ({rho},{z}): {fz} vs {gz}");
        }
    }
}

#[test]
fn monotone_toward_the_wall_at_midplane() {
    let f = field(20.0, 10.0, HamakerMode::PaperLiteral);
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let rho = 9.9 * i as f64 / 39.0;
        let u = f.potential(FieldPoint::new(rho * NM, 0.0)).unwrap();
        assert!(u < prev, "not decreasing at rho = {rho}");
        prev = u;
    }
}

#[test]
fn decays_far_along_the_axis() {
    let f = field(5.0, 5.0, HamakerMode::PaperLiteral);
    let near = f.potential(FieldPoint::new(0.0, 0.0)).unwrap();
    let far = f.potential(FieldPoint::new(0.0, 1e4 * NM)).unwrap();
    assert!(far.abs() < 1e-12 * near.abs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mirror_symmetry_and_mode_ratio(
        d in 5.0f64..50.0,
        r in 5.0f64..25.0,
        frac in 0.0f64..0.95,
        zf in -3.0f64..3.0,
    ) {
        let rho = frac * r;
        let z = zf * d;
        let lit = field(d, r, HamakerMode::PaperLiteral);
        let pla = field(d, r, HamakerMode::PlanarConsistent);
        let up = lit.potential(FieldPoint::new(rho * NM, z * NM)).unwrap();
        let um = lit.potential(FieldPoint::new(rho * NM, -z * NM)).unwrap();
        let uc = pla.potential(FieldPoint::new(rho * NM, z * NM)).unwrap();
        prop_assert!((up / um - 1.0).abs() < 1e-8);
        prop_assert!((up / uc - 1.5).abs() < 1e-12);
    }
}
