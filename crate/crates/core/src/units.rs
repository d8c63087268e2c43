//! Physical constants and the unit conventions used at the library boundary.
//!
//! Everything inside the library is SI. Files and the command line use
//! nanometres, meV·nm³ for C3, m/s and radians; the helpers here do the
//! conversions.

use std::f64::consts::PI;

/// Planck constant, J·s (exact since the 2019 SI redefinition).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Elementary charge, C. One meV is `1e-3 * ELEMENTARY_CHARGE` joules.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Joules per meV.
pub const MEV: f64 = 1e-3 * ELEMENTARY_CHARGE;
/// Metres per nanometre.
pub const NM: f64 = 1e-9;
/// Mass of helium-4, in atomic mass units.
pub const HELIUM_MASS_U: f64 = 4.002_602;

/// The fixed constant set, bundled for metadata output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRegistry {
    pub h: f64,
    pub hbar: f64,
    pub amu: f64,
    pub mev: f64,
    pub nm: f64,
}

impl UnitRegistry {
    pub const CODATA_2018: UnitRegistry = UnitRegistry {
        h: PLANCK,
        hbar: HBAR,
        amu: ATOMIC_MASS_UNIT,
        mev: MEV,
        nm: NM,
    };

    /// `(key, value)` pairs for metadata sidecars.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("const.h_J_s", self.h),
            ("const.hbar_J_s", self.hbar),
            ("const.amu_kg", self.amu),
            ("const.meV_J", self.mev),
            ("const.nm_m", self.nm),
        ]
    }
}

impl Default for UnitRegistry {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// meV·nm³ → J·m³.
pub fn c3_to_si(mev_nm3: f64) -> f64 {
    mev_nm3 * MEV * NM * NM * NM
}

/// J·m³ → meV·nm³.
pub fn c3_from_si(j_m3: f64) -> f64 {
    j_m3 / (MEV * NM * NM * NM)
}

pub fn nm(x: f64) -> f64 {
    x * NM
}

pub fn to_nm(x: f64) -> f64 {
    x / NM
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_is_h_over_two_pi() {
        assert_eq!(HBAR, PLANCK / (2.0 * PI));
        let reg = UnitRegistry::default();
        assert!((reg.hbar * 2.0 * PI / reg.h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn c3_unit_conversion() {
        assert_eq!(c3_to_si(0.0), 0.0);
        // 1 meV = 1.602176634e-22 J, 1 nm³ = 1e-27 m³.
        let he = c3_to_si(0.1);
        assert!((he / 1.602_176_634e-50 - 1.0).abs() < 1e-12);
        let he_star = c3_to_si(4.1);
        assert!((he_star / 6.568_924_199_4e-49 - 1.0).abs() < 1e-10);
        assert!((c3_from_si(he_star) - 4.1).abs() < 1e-14);
    }
}
