//! Shared domain types: atom species, hole geometry and beam state.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::units::{c3_to_si, ATOMIC_MASS_UNIT, HELIUM_MASS_U, NM, PLANCK};

/// C3 of ground-state helium on silicon nitride, meV·nm³.
pub const HE_C3_MEV_NM3: f64 = 0.1;
/// C3 of metastable helium on silicon nitride, meV·nm³.
pub const HE_STAR_C3_MEV_NM3: f64 = 4.1;

/// An atom together with its C3 coefficient for the membrane material.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies {
    name: String,
    mass: f64,
    c3: f64,
}

impl AtomSpecies {
    /// `mass` in kg, `c3` in J·m³.
    pub fn new(name: impl Into<String>, mass: f64, c3: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return domain(format!("species mass must be positive, got {mass}"));
        }
        if !(c3 > 0.0 && c3.is_finite()) {
            return domain(format!("species C3 must be positive, got {c3}"));
        }
        Ok(Self {
            name: name.into(),
            mass,
            c3,
        })
    }

    /// Ground-state helium on silicon nitride.
    pub fn helium() -> Self {
        Self {
            name: "He".into(),
            mass: HELIUM_MASS_U * ATOMIC_MASS_UNIT,
            c3: c3_to_si(HE_C3_MEV_NM3),
        }
    }

    /// Metastable helium on silicon nitride. Same nucleus, so same mass.
    pub fn metastable_helium() -> Self {
        Self {
            name: "He*".into(),
            mass: HELIUM_MASS_U * ATOMIC_MASS_UNIT,
            c3: c3_to_si(HE_STAR_C3_MEV_NM3),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// kg
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// J·m³
    pub fn c3(&self) -> f64 {
        self.c3
    }
}

/// Tabulated species known by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpeciesKind {
    Helium,
    MetastableHelium,
}

impl SpeciesKind {
    pub fn species(self) -> AtomSpecies {
        match self {
            SpeciesKind::Helium => AtomSpecies::helium(),
            SpeciesKind::MetastableHelium => AtomSpecies::metastable_helium(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpeciesKind::Helium => "He",
            SpeciesKind::MetastableHelium => "He*",
        }
    }
}

impl fmt::Display for SpeciesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SpeciesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "He" | "he" | "helium" => Ok(SpeciesKind::Helium),
            "He*" | "he*" | "He_star" | "he_star" | "metastable" => {
                Ok(SpeciesKind::MetastableHelium)
            }
            other => domain(format!("unknown species '{other}' (expected He or He*)")),
        }
    }
}

/// Membrane thickness and hole radius, stored in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleGeometry {
    thickness: f64,
    radius: f64,
}

impl HoleGeometry {
    pub fn new(thickness: f64, radius: f64) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return domain(format!("membrane thickness must be positive, got {thickness}"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("hole radius must be positive, got {radius}"));
        }
        Ok(Self { thickness, radius })
    }

    pub fn from_nm(thickness_nm: f64, radius_nm: f64) -> Result<Self> {
        Self::new(thickness_nm * NM, radius_nm * NM)
    }

    /// d, metres
    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// R, metres
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn half_thickness(&self) -> f64 {
        0.5 * self.thickness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Primary {
    Wavelength(f64),
    Speed(f64),
}

/// A monochromatic beam of one species. Either the de Broglie wavelength or
/// the speed is stored; the other is derived from `λ m v = h`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamState {
    species: AtomSpecies,
    primary: Primary,
}

impl BeamState {
    pub fn from_wavelength(species: AtomSpecies, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return domain(format!("wavelength must be positive, got {wavelength}"));
        }
        Ok(Self {
            species,
            primary: Primary::Wavelength(wavelength),
        })
    }

    pub fn from_speed(species: AtomSpecies, speed: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return domain(format!("speed must be positive, got {speed}"));
        }
        Ok(Self {
            species,
            primary: Primary::Speed(speed),
        })
    }

    pub fn species(&self) -> &AtomSpecies {
        &self.species
    }

    pub fn mass(&self) -> f64 {
        self.species.mass
    }

    /// λdB, metres
    pub fn wavelength(&self) -> f64 {
        match self.primary {
            Primary::Wavelength(l) => l,
            Primary::Speed(v) => PLANCK / (self.species.mass * v),
        }
    }

    /// Longitudinal speed, m/s
    pub fn speed(&self) -> f64 {
        match self.primary {
            Primary::Speed(v) => v,
            Primary::Wavelength(l) => PLANCK / (self.species.mass * l),
        }
    }

    pub fn momentum(&self) -> f64 {
        PLANCK / self.wavelength()
    }

    /// k0 = 2π/λdB
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }

    pub fn kinetic_energy(&self) -> f64 {
        let v = self.speed();
        0.5 * self.species.mass * v * v
    }
}

pub fn de_broglie_wavelength(species: &AtomSpecies, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return domain(format!("speed must be positive, got {speed}"));
    }
    Ok(PLANCK / (species.mass() * speed))
}

pub fn speed_from_wavelength(species: &AtomSpecies, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return domain(format!("wavelength must be positive, got {wavelength}"));
    }
    Ok(PLANCK / (species.mass() * wavelength))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::HBAR;

    #[test]
    fn helium_wavelengths() {
        let he = AtomSpecies::helium();
        let l = de_broglie_wavelength(&he, 1000.0).unwrap();
        assert!((l / NM - 0.0997).abs() < 5e-4, "{}", l / NM);
        assert_eq!((l / NM * 10.0).round(), 1.0);
        let l2 = de_broglie_wavelength(&he, 2000.0).unwrap();
        assert!((l2 / l - 0.5).abs() < 1e-15);
        // h / (4.002602 u · 2000 m/s)
        let expected = 6.626_070_15e-34 / (4.002_602 * 1.660_539_066_60e-27 * 2000.0);
        assert!((l2 / expected - 1.0).abs() < 1e-15);
        assert!((l2 / NM - 0.04985).abs() < 1e-4);
    }

    #[test]
    fn helium_speeds() {
        let he = AtomSpecies::helium();
        let v = speed_from_wavelength(&he, 0.1 * NM).unwrap();
        assert!((v - 996.9).abs() < 0.5, "{v}");
        let v1 = speed_from_wavelength(&he, 1.0 * NM).unwrap();
        assert!((v1 - 99.69).abs() < 0.05, "{v1}");
        let back = de_broglie_wavelength(&he, v).unwrap();
        assert!((back / (0.1 * NM) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_inputs_are_rejected() {
        let he = AtomSpecies::helium();
        assert!(de_broglie_wavelength(&he, 0.0).is_err());
        assert!(de_broglie_wavelength(&he, -3.0).is_err());
        assert!(speed_from_wavelength(&he, 0.0).is_err());
        assert!(BeamState::from_wavelength(he.clone(), -1e-10).is_err());
        assert!(HoleGeometry::from_nm(0.0, 5.0).is_err());
        assert!(HoleGeometry::from_nm(5.0, -1.0).is_err());
        assert!(AtomSpecies::new("x", 1.0, 0.0).is_err());
    }

    #[test]
    fn tabulated_species() {
        let he = AtomSpecies::helium();
        let hes = AtomSpecies::metastable_helium();
        assert_eq!(he.mass(), hes.mass());
        assert!((hes.c3() / he.c3() - 41.0).abs() < 1e-12);
        assert_eq!("He*".parse::<SpeciesKind>().unwrap(), SpeciesKind::MetastableHelium);
        assert!("Ne".parse::<SpeciesKind>().is_err());
    }

    #[test]
    fn beam_relations() {
        let beam = BeamState::from_speed(AtomSpecies::metastable_helium(), 1234.5).unwrap();
        let lhs = beam.wavelength() * beam.mass() * beam.speed();
        assert!((lhs / PLANCK - 1.0).abs() < 1e-12);
        assert!((beam.wavenumber() * HBAR / beam.momentum() - 1.0).abs() < 1e-12);
    }
}
