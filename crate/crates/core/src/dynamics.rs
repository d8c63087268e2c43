//! Classical trajectories through the hole.
//!
//! Two models share one propagator. The transverse model moves the atom
//! along `z` at constant speed and integrates only the radial equation under
//! the in-hole force. The full model integrates both coordinates under the
//! pairwise-summation force, starting and ending a padding distance outside
//! the membrane.
//!
//! Internally the integrator works in nanometres and nanoseconds, so
//! velocities are in m/s and the state components are all O(1–1000).

use crate::domain::{BeamState, HoleGeometry};
use crate::error::{domain, Error, Result};
use crate::numerics::ode::{solve_ode, Event, OdeConfig};
use crate::numerics::quadrature::QuadratureConfig;
use crate::potential::{
    hole_transverse_force, material_distance, FieldPoint, ForceModel, HamakerField, HamakerMode,
    DEFAULT_FORCE_EPSILON,
};
use crate::units::NM;

const NS: f64 = 1e-9;
/// m/s² → nm/ns²
const ACCEL_SCALE: f64 = NS * NS / NM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Transmitted,
    Absorbed,
    DeflectedBeyondBeta,
}

impl OutcomeKind {
    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::Transmitted => "transmitted",
            OutcomeKind::Absorbed => "absorbed",
            OutcomeKind::DeflectedBeyondBeta => "deflected",
        }
    }
}

/// Position and velocity, SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho: f64,
    pub z: f64,
    pub v_rho: f64,
    pub v_z: f64,
}

impl Sample {
    pub fn point(&self) -> FieldPoint {
        FieldPoint::new(self.rho, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOutcome {
    pub kind: OutcomeKind,
    /// Final state for paths that left the membrane region.
    pub exit_state: Option<Sample>,
    /// Axial position of wall contact.
    pub absorption_z: Option<f64>,
    /// `atan(|v_ρ| / v_z)` at the final state, radians.
    pub deflection_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsModel {
    Transverse,
    FullPotential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub outcome: TrajectoryOutcome,
    pub model: DynamicsModel,
    pub impact_radius: f64,
}

impl Trajectory {
    pub fn is_transmitted(&self) -> bool {
        self.outcome.kind == OutcomeKind::Transmitted
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory holds its initial state")
    }
}

/// Settings shared by both propagation models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub force_model: ForceModel,
    /// Wall contact distance, metres.
    pub force_epsilon: f64,
    /// Full-model window: start and end `z_pad_factor · d` outside the faces.
    pub z_pad_factor: f64,
    /// Tolerances in the integrator's nm / ns units.
    pub ode: OdeConfig,
    pub quadrature: QuadratureConfig,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            force_model: ForceModel::Consistent,
            force_epsilon: DEFAULT_FORCE_EPSILON,
            z_pad_factor: 5.0,
            ode: OdeConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                event_tolerance: 1e-9,
                ..OdeConfig::default()
            },
            quadrature: QuadratureConfig::new(0.0, 1e-11, 4000),
        }
    }
}

impl PropagationConfig {
    pub fn z_pad(&self, geom: &HoleGeometry) -> f64 {
        self.z_pad_factor * geom.thickness()
    }
}

/// Time to cross the membrane at the beam speed, `τ = d / v = d m λ / h`.
pub fn transit_time(geom: &HoleGeometry, beam: &BeamState) -> f64 {
    geom.thickness() / beam.speed()
}

fn deflection(v_rho: f64, v_z: f64) -> f64 {
    (v_rho.abs() / v_z).atan()
}

fn check_impact(geom: &HoleGeometry, rho0: f64) -> Result<()> {
    if !(rho0 >= 0.0 && rho0 < geom.radius()) {
        return domain(format!(
            "impact radius {rho0:e} m outside [0, R = {:e} m)",
            geom.radius()
        ));
    }
    Ok(())
}

/// Radial motion under the transverse in-hole force while `z` advances
/// analytically, `z(t) = v t − d/2`, until `t = τ` or wall contact.
pub fn propagate_transverse(
    beam: &BeamState,
    geom: &HoleGeometry,
    c3: f64,
    rho0: f64,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    check_impact(geom, rho0)?;
    let v = beam.speed();
    let half = geom.half_thickness();
    let tau = transit_time(geom, beam);
    let mass = beam.mass();
    let r_nm = geom.radius() / NM;
    let contact_nm = (geom.radius() - cfg.force_epsilon) / NM;
    let z_of = |t: f64| v * t - half;

    let absorbed_at = |t: f64, rho: f64, v_rho: f64, samples: Vec<Sample>| Trajectory {
        samples,
        outcome: TrajectoryOutcome {
            kind: OutcomeKind::Absorbed,
            exit_state: None,
            absorption_z: Some(z_of(t)),
            deflection_angle: deflection(v_rho, v),
        },
        model: DynamicsModel::Transverse,
        impact_radius: rho,
    };

    if rho0 / NM >= contact_nm {
        let s = Sample { t: 0.0, rho: rho0, z: -half, v_rho: 0.0, v_z: v };
        return Ok(absorbed_at(0.0, rho0, 0.0, vec![s]));
    }

    let rhs = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        if !(y[0] < r_nm) {
            return Err(Error::WallContact("radial stage beyond the wall".into()));
        }
        let f = hole_transverse_force(c3, geom, y[0].max(0.0) * NM, cfg.force_model)?;
        Ok([y[1], f / mass * ACCEL_SCALE])
    };
    let events = [Event::terminal(move |_t, y: &[f64; 2]| contact_nm - y[0])];
    let mut ode = cfg.ode;
    ode.max_step = ode.max_step.min(0.1 * tau / NS);
    let sol = solve_ode(rhs, [rho0 / NM, 0.0], (0.0, tau / NS), &events, &ode)?;

    let samples: Vec<Sample> = sol
        .samples
        .iter()
        .map(|(t, y)| {
            let t = t * NS;
            Sample { t, rho: y[0] * NM, z: z_of(t), v_rho: y[1], v_z: v }
        })
        .collect();
    if sol.event.is_some() {
        let last = *samples.last().expect("event sample");
        return Ok(absorbed_at(last.t, rho0, last.v_rho, samples));
    }
    let mut exit = *samples.last().expect("final sample");
    // exact end of transit
    exit.t = tau;
    exit.z = half;
    let mut samples = samples;
    *samples.last_mut().expect("final sample") = exit;
    Ok(Trajectory {
        samples,
        outcome: TrajectoryOutcome {
            kind: OutcomeKind::Transmitted,
            exit_state: Some(exit),
            absorption_z: None,
            deflection_angle: deflection(exit.v_rho, exit.v_z),
        },
        model: DynamicsModel::Transverse,
        impact_radius: rho0,
    })
}

/// Axisymmetric motion in the full pairwise-summation potential from
/// `(rho0, z_start)` with velocity `(0, v)` until wall contact or `z_end`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_full(
    beam: &BeamState,
    geom: &HoleGeometry,
    c3: f64,
    mode: HamakerMode,
    rho0: f64,
    z_start: f64,
    z_end: f64,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    check_impact(geom, rho0)?;
    let half = geom.half_thickness();
    if !(z_start < -half && z_end > half) {
        return domain(format!(
            "propagation window [{z_start:e}, {z_end:e}] m must enclose the membrane"
        ));
    }
    // The force stays defined somewhat inside the contact distance so that a
    // step ending just past the contact event is still accepted and the event
    // located on its dense output.
    let field = HamakerField::new(c3, *geom, mode)?
        .with_quadrature(cfg.quadrature)
        .with_force_epsilon(0.25 * cfg.force_epsilon);
    let v = beam.speed();
    let mass = beam.mass();
    let eps_nm = cfg.force_epsilon / NM;

    let rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let rho = y[0].abs() * NM;
        let (fr, fz) = field.force(FieldPoint::new(rho, y[1] * NM))?;
        let fr = if y[0] < 0.0 { -fr } else { fr };
        Ok([y[2], y[3], fr / mass * ACCEL_SCALE, fz / mass * ACCEL_SCALE])
    };
    let events = [
        Event::terminal(move |_t, y: &[f64; 4]| {
            material_distance(geom, FieldPoint::new(y[0].abs() * NM, y[1] * NM)) / NM - eps_nm
        }),
        Event::terminal(move |_t, y: &[f64; 4]| z_end / NM - y[1]),
    ];
    let path = (z_end - z_start) / v;
    let mut ode = cfg.ode;
    let feature = geom.thickness().min(geom.radius());
    ode.max_step = ode.max_step.min(0.1 * feature / v / NS);
    let y0 = [rho0 / NM, z_start / NM, 0.0, v];
    let sol = match solve_ode(rhs, y0, (0.0, 20.0 * path / NS), &events, &ode) {
        Ok(sol) => sol,
        Err(Error::StepSizeUnderflow { t, state }) => {
            let gap = material_distance(geom, FieldPoint::new(state[0].abs() * NM, state[1] * NM));
            if gap < 2.0 * cfg.force_epsilon {
                return Ok(underflow_contact(&y0, t, &state, rho0));
            }
            return Err(Error::StepSizeUnderflow { t, state });
        }
        Err(e) => return Err(e),
    };

    let samples: Vec<Sample> = sol
        .samples
        .iter()
        .map(|(t, y)| Sample {
            t: t * NS,
            rho: y[0].abs() * NM,
            z: y[1] * NM,
            v_rho: if y[0] < 0.0 { -y[2] } else { y[2] },
            v_z: y[3],
        })
        .collect();
    let last = *samples.last().expect("final sample");
    let outcome = match sol.event.map(|e| e.index) {
        Some(0) => TrajectoryOutcome {
            kind: OutcomeKind::Absorbed,
            exit_state: None,
            absorption_z: Some(last.z),
            deflection_angle: deflection(last.v_rho, last.v_z),
        },
        Some(_) => TrajectoryOutcome {
            kind: OutcomeKind::Transmitted,
            exit_state: Some(last),
            absorption_z: None,
            deflection_angle: deflection(last.v_rho, last.v_z),
        },
        None => {
            return Err(Error::Domain(format!(
                "trajectory from rho0 = {rho0:e} m did not leave the window"
            )))
        }
    };
    Ok(Trajectory {
        samples,
        outcome,
        model: DynamicsModel::FullPotential,
        impact_radius: rho0,
    })
}

fn underflow_contact(y0: &[f64; 4], t: f64, state: &[f64], rho0: f64) -> Trajectory {
    let start = Sample {
        t: 0.0,
        rho: y0[0] * NM,
        z: y0[1] * NM,
        v_rho: y0[2],
        v_z: y0[3],
    };
    let s = Sample {
        t: t * NS,
        rho: state[0].abs() * NM,
        z: state[1] * NM,
        v_rho: state[2],
        v_z: state[3],
    };
    Trajectory {
        samples: vec![start, s],
        outcome: TrajectoryOutcome {
            kind: OutcomeKind::Absorbed,
            exit_state: None,
            absorption_z: Some(s.z),
            deflection_angle: deflection(s.v_rho, s.v_z),
        },
        model: DynamicsModel::FullPotential,
        impact_radius: rho0,
    }
}

/// [`propagate_full`] over the default symmetric window `±(d/2 + z_pad)`.
pub fn propagate_full_windowed(
    beam: &BeamState,
    geom: &HoleGeometry,
    c3: f64,
    mode: HamakerMode,
    rho0: f64,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    let edge = geom.half_thickness() + cfg.z_pad(geom);
    propagate_full(beam, geom, c3, mode, rho0, -edge, edge, cfg)
}

/// Apply the deflection cutoff to a finished trajectory. Paths with
/// `|v_ρ|/v_z ≤ tan(beta_max)` count as transmitted (the boundary is
/// inclusive).
pub fn classify_outcome(traj: &Trajectory, beta_max: f64) -> TrajectoryOutcome {
    let mut outcome = traj.outcome;
    if outcome.kind == OutcomeKind::Absorbed {
        return outcome;
    }
    let exit = outcome.exit_state.unwrap_or(*traj.last());
    outcome.kind = if exit.v_rho.abs() / exit.v_z <= beta_max.tan() {
        OutcomeKind::Transmitted
    } else {
        OutcomeKind::DeflectedBeyondBeta
    };
    outcome
}

/// Largest relative excursion of total energy (kinetic plus `field`
/// potential) along the stored samples.
pub fn energy_drift(traj: &Trajectory, mass: f64, field: &HamakerField) -> Result<f64> {
    let energy = |s: &Sample| -> Result<f64> {
        Ok(0.5 * mass * (s.v_rho * s.v_rho + s.v_z * s.v_z) + field.potential(s.point())?)
    };
    let e0 = energy(&traj.samples[0])?;
    let mut worst: f64 = 0.0;
    for s in &traj.samples[1..] {
        worst = worst.max(((energy(s)? - e0) / e0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AtomSpecies;

    fn he_star_beam(lambda_nm: f64) -> BeamState {
        BeamState::from_wavelength(AtomSpecies::metastable_helium(), lambda_nm * NM).unwrap()
    }

    #[test]
    fn transit_times() {
        let g = HoleGeometry::from_nm(50.0, 25.0).unwrap();
        let he = BeamState::from_wavelength(AtomSpecies::helium(), 0.1 * NM).unwrap();
        assert!((transit_time(&g, &he) / 5.0155e-11 - 1.0).abs() < 1e-3);
        let v = BeamState::from_speed(AtomSpecies::helium(), 1000.0).unwrap();
        assert!((transit_time(&g, &v) - 5.0e-11).abs() < 1e-24);
        let g2 = HoleGeometry::from_nm(100.0, 25.0).unwrap();
        assert!((transit_time(&g2, &he) / transit_time(&g, &he) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn transverse_axis_and_edge() {
        let g = HoleGeometry::from_nm(50.0, 25.0).unwrap();
        let beam = he_star_beam(0.1);
        let c3 = beam.species().c3();
        let cfg = PropagationConfig::default();
        let centre = propagate_transverse(&beam, &g, c3, 0.0, &cfg).unwrap();
        assert!(centre.is_transmitted());
        let exit = centre.outcome.exit_state.unwrap();
        assert_eq!(exit.z, g.half_thickness());
        assert!(exit.rho > 0.0);
        let edge = propagate_transverse(&beam, &g, c3, 24.9 * NM, &cfg).unwrap();
        assert_eq!(edge.outcome.kind, OutcomeKind::Absorbed);
        let z = edge.outcome.absorption_z.unwrap();
        assert!(z > -g.half_thickness() && z < g.half_thickness());
        assert!(edge.last().rho >= g.radius() - cfg.force_epsilon - 1e-15);
    }

    #[test]
    fn transverse_z_is_analytic() {
        let g = HoleGeometry::from_nm(20.0, 10.0).unwrap();
        let beam = he_star_beam(0.2);
        let cfg = PropagationConfig::default();
        let traj = propagate_transverse(&beam, &g, beam.species().c3(), 3.0 * NM, &cfg).unwrap();
        let v = beam.speed();
        for s in &traj.samples {
            let z = v * s.t - g.half_thickness();
            assert!((s.z - z).abs() <= 1e-12 * g.half_thickness());
        }
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t && w[1].z >= w[0].z));
    }

    #[test]
    fn zero_c3_goes_straight() {
        let g = HoleGeometry::from_nm(20.0, 10.0).unwrap();
        let beam = he_star_beam(0.1);
        let cfg = PropagationConfig::default();
        let traj = propagate_transverse(&beam, &g, 0.0, 9.0 * NM, &cfg).unwrap();
        assert!(traj.is_transmitted());
        assert_eq!(traj.last().rho, 9.0 * NM);
        let full = propagate_full_windowed(&beam, &g, 0.0, HamakerMode::PaperLiteral, 9.0 * NM, &cfg)
            .unwrap();
        assert!(full.is_transmitted());
        assert!((full.last().rho - 9.0 * NM).abs() < 1e-18);
    }

    #[test]
    fn classification_boundary() {
        let g = HoleGeometry::from_nm(20.0, 10.0).unwrap();
        let beam = he_star_beam(0.1);
        let cfg = PropagationConfig::default();
        let mut traj = propagate_transverse(&beam, &g, 0.0, 1.0 * NM, &cfg).unwrap();
        assert_eq!(classify_outcome(&traj, 1e-3).kind, OutcomeKind::Transmitted);
        let beta = 0.01_f64;
        let mut exit = traj.outcome.exit_state.unwrap();
        exit.v_rho = exit.v_z * beta.tan();
        traj.outcome.exit_state = Some(exit);
        assert_eq!(classify_outcome(&traj, beta).kind, OutcomeKind::Transmitted);
        assert_eq!(classify_outcome(&traj, 0.999 * beta).kind, OutcomeKind::DeflectedBeyondBeta);
    }

    #[test]
    fn invalid_impact_radius() {
        let g = HoleGeometry::from_nm(20.0, 10.0).unwrap();
        let beam = he_star_beam(0.1);
        let cfg = PropagationConfig::default();
        assert!(propagate_transverse(&beam, &g, 1e-49, 10.0 * NM, &cfg).is_err());
        assert!(propagate_transverse(&beam, &g, 1e-49, -1.0 * NM, &cfg).is_err());
    }
}
