//! The four subcommands. Each is a pure function of the config returning a
//! [`Report`]; parallel sections collect in input order.

use rayon::prelude::*;

use holeflux::dynamics::{
    classify_outcome, propagate_full_windowed, propagate_transverse, OutcomeKind, Trajectory,
};
use holeflux::holered::{reduce_cell, HoleReductionResult, ReductionModel};
use holeflux::units::NM;
use holeflux::wave::{
    first_sidelobe_ratio, fraunhofer_pattern, phase_eikonal_closed, phase_eikonal_numeric,
    transmission_rate, Aperture, DiffractionSetup, PhaseProfile,
};

use crate::config::{PhaseSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv, num, Report};

/// Total transmission reduction quoted for the Fig. 5 scenario, percent.
pub const QUOTED_TOTAL_REDUCTION_PERCENT: f64 = 3.5;
/// Hole-only figure quoted for the same scenario, percent; whether it means
/// "by" or "to" is ambiguous.
pub const QUOTED_HOLE_ONLY_PERCENT: f64 = 0.8;
/// Phase samples used to interpolate φ(ρ) inside the pattern integral.
pub const PATTERN_PHASE_SAMPLES: usize = 400;

fn reduction(cfg: &RunConfig) -> CliResult<HoleReductionResult> {
    let spec = cfg.sweep()?;
    let beam = cfg.beam()?;
    reduce_cell(
        cfg.species,
        beam.wavelength(),
        cfg.d_nm * NM,
        cfg.r_nm * NM,
        &spec,
        &cfg.reduction(),
    )
    .map_err(CliError::from)
}

fn reduction_results(res: &HoleReductionResult) -> Vec<(String, String)> {
    vec![
        ("delta_r_nm".into(), num(res.delta_r / NM)),
        ("bracket_nm".into(), num(res.bracket_width / NM)),
        ("delta_r_status".into(), status(res).into()),
    ]
}

fn status(res: &HoleReductionResult) -> &'static str {
    if res.closed {
        "closed"
    } else if res.degenerate {
        "degenerate"
    } else {
        "ok"
    }
}

pub fn trajectories(cfg: &RunConfig) -> CliResult<Report> {
    let beam = cfg.beam()?;
    let geom = cfg.geometry()?;
    let c3 = cfg.c3_of(cfg.species);
    let prop = cfg.propagation();
    let n = cfg.n_trajectories.max(1);
    let radii: Vec<f64> = (0..n).map(|i| geom.radius() * i as f64 / n as f64).collect();
    let trajs: Vec<Trajectory> = radii
        .par_iter()
        .map(|&rho0| match cfg.model {
            ReductionModel::Transverse => propagate_transverse(&beam, &geom, c3, rho0, &prop),
            ReductionModel::FullPotential => {
                propagate_full_windowed(&beam, &geom, c3, cfg.hamaker_mode, rho0, &prop)
            }
        })
        .collect::<holeflux::Result<_>>()?;

    let mut rows = Vec::new();
    let mut tally = [0usize; 3];
    for (rho0, traj) in radii.iter().zip(&trajs) {
        let outcome = match cfg.beta() {
            Some(b) => classify_outcome(traj, b).kind,
            None => traj.outcome.kind,
        };
        tally[match outcome {
            OutcomeKind::Transmitted => 0,
            OutcomeKind::Absorbed => 1,
            OutcomeKind::DeflectedBeyondBeta => 2,
        }] += 1;
        for s in &traj.samples {
            rows.push(vec![
                num(rho0 / NM),
                num(s.t),
                num(s.rho / NM),
                num(s.z / NM),
                num(s.v_rho),
                num(s.v_z),
                outcome.label().to_string(),
            ]);
        }
    }
    let res = reduction(cfg)?;
    let mut results = reduction_results(&res);
    results.push(("critical_radius_nm".into(), num((geom.radius() - res.delta_r) / NM)));
    results.push(("trajectories".into(), n.to_string()));
    results.push(("transmitted".into(), tally[0].to_string()));
    results.push(("absorbed".into(), tally[1].to_string()));
    results.push(("deflected".into(), tally[2].to_string()));
    let summary = vec![
        format!("{n} trajectories: {} transmitted, {} absorbed, {} deflected beyond cutoff", tally[0], tally[1], tally[2]),
        format!(
            "critical impact radius {:.4} nm (ΔR = {:.4} nm, {})",
            (geom.radius() - res.delta_r) / NM,
            res.delta_r / NM,
            status(&res)
        ),
    ];
    Ok(Report {
        command: "trajectories",
        stem: "trajectories",
        csv: csv(&["rho0_nm", "t_s", "rho_nm", "z_nm", "v_rho_m_s", "v_z_m_s", "outcome"], rows),
        results,
        summary,
        failed: false,
    })
}

pub fn delta_r(cfg: &RunConfig) -> CliResult<Report> {
    let spec = cfg.sweep()?;
    let table = holeflux::holered::sweep_delta_r(&spec, &cfg.reduction(), None)?;
    let beta = spec.beta_max.map_or_else(|| "none".to_string(), |b| num(b * 1e3));
    let rows = table.rows.iter().map(|row| {
        let (dr, br, st) = match &row.result {
            Ok(r) => (num(r.delta_r / NM), num(r.bracket_width / NM), status(r).to_string()),
            Err(e) => ("nan".into(), "nan".into(), format!("error: {}", e.replace([',', '\n'], ";"))),
        };
        vec![
            row.species.label().to_string(),
            num(row.wavelength / NM),
            num(row.thickness / NM),
            num(row.radius / NM),
            row.model.label().to_string(),
            beta.clone(),
            dr,
            br,
            st,
        ]
    });
    let failures = table.failures();
    let mut results: Vec<(String, String)> = table
        .provenance
        .iter()
        .map(|(k, v)| (format!("provenance.{k}"), v.clone()))
        .collect();
    results.push(("cells".into(), table.rows.len().to_string()));
    results.push(("failures".into(), failures.to_string()));
    Ok(Report {
        command: "delta-r",
        stem: "delta_r",
        csv: csv(
            &["species", "lambda_nm", "d_nm", "R_nm", "model", "beta_mrad", "delta_r_nm", "bracket_nm", "status"],
            rows,
        ),
        results,
        summary: vec![format!("{} cells, {failures} failed", table.rows.len())],
        failed: failures > 0,
    })
}

pub fn pattern(cfg: &RunConfig) -> CliResult<Report> {
    let beam = cfg.beam()?;
    let geom = cfg.geometry()?;
    let r = geom.radius();
    let c3 = cfg.c3_of(cfg.species);
    let mut results = Vec::new();

    let (delta_r, phase) = if cfg.bare_only {
        (0.0, None)
    } else {
        let res = reduction(cfg)?;
        results.extend(reduction_results(&res));
        if res.closed {
            return Err(CliError::Numerical("the effective hole is closed (ΔR = R)".into()));
        }
        let open = r - res.delta_r;
        let profile = match cfg.phase_method {
            PhaseSource::Closed => PhaseProfile::closed_form(&beam, &geom, c3, open, PATTERN_PHASE_SAMPLES)?,
            PhaseSource::Numeric => {
                PhaseProfile::numeric(&beam, &geom, c3, cfg.hamaker_mode, open, PATTERN_PHASE_SAMPLES)?
            }
        };
        (res.delta_r, Some(profile))
    };

    let probe = DiffractionSetup::uniform(cfg.l1_m, cfg.l2_um * 1e-6, beam.wavelength(), 1.0, 2)?;
    let p_max = cfg.p_max_zeros * probe.first_airy_zero(r);
    let setup = DiffractionSetup::uniform(cfg.l1_m, cfg.l2_um * 1e-6, beam.wavelength(), p_max, cfg.p_points)?;

    let bare = fraunhofer_pattern(&Aperture::bare(r)?, &setup);
    let hole = fraunhofer_pattern(&Aperture::hole_only(r, delta_r)?, &setup);
    let corrected = match phase {
        Some(p) => fraunhofer_pattern(&Aperture::corrected(r, delta_r, p)?, &setup),
        None => hole.clone(),
    };
    let failed = !(bare.all_converged() && hole.all_converged() && corrected.all_converged());

    let rate_total = transmission_rate(&corrected, &bare, p_max)?;
    let rate_hole = transmission_rate(&hole, &bare, p_max)?;
    let identity = (1.0 - delta_r / r).powi(2);
    let side = |p| first_sidelobe_ratio(p).map_or_else(|| "none".to_string(), num);
    results.extend([
        ("hole_model".into(), if cfg.bare_only { "none".to_string() } else { cfg.model.label().to_string() }),
        ("phase_method".into(), cfg.phase_method.label().into()),
        ("p_max_um".into(), num(p_max * 1e6)),
        ("first_zero_um".into(), num(probe.first_airy_zero(r) * 1e6)),
        ("fresnel_number".into(), num(setup.fresnel_number(r))),
        ("normalization".into(), "bare-hole forward amplitude R^2/2".into()),
        ("normalization_nm2".into(), num(bare.normalization / (NM * NM))),
        ("rate_total".into(), num(rate_total)),
        ("rate_hole_only".into(), num(rate_hole)),
        ("rate_hole_only_identity".into(), num(identity)),
        ("reduction_total_percent".into(), num(100.0 * (1.0 - rate_total))),
        ("reduction_hole_only_percent".into(), num(100.0 * (1.0 - rate_hole))),
        ("quoted_reduction_total_percent".into(), num(QUOTED_TOTAL_REDUCTION_PERCENT)),
        ("quoted_hole_only_percent".into(), num(QUOTED_HOLE_ONLY_PERCENT)),
        ("sidelobe_ratio_bare".into(), side(&bare)),
        ("sidelobe_ratio_hole_only".into(), side(&hole)),
        ("sidelobe_ratio_corrected".into(), side(&corrected)),
        ("converged".into(), (!failed).to_string()),
    ]);
    let summary = vec![
        format!("ΔR = {:.4} nm, detector window p_max = {:.4} µm", delta_r / NM, p_max * 1e6),
        format!(
            "total transmission reduction:     {:.3} %   (quoted: {} %)",
            100.0 * (1.0 - rate_total),
            QUOTED_TOTAL_REDUCTION_PERCENT
        ),
        format!(
            "hole-only transmission reduction: {:.3} %   (quoted: {} %, 'by' or 'to' unclear)",
            100.0 * (1.0 - rate_hole),
            QUOTED_HOLE_ONLY_PERCENT
        ),
        format!("hole-only area identity (1 - ΔR/R)^2 = {identity:.6}, windowed rate {rate_hole:.6}"),
    ];
    let rows = (0..setup.p.len()).map(|i| {
        vec![
            num(setup.p[i] * 1e6),
            num(corrected.intensity[i]),
            num(bare.intensity[i]),
            num(hole.intensity[i]),
        ]
    });
    Ok(Report {
        command: "pattern",
        stem: "pattern",
        csv: csv(&["p_um", "intensity_corrected", "intensity_bare", "intensity_hole_only"], rows),
        results,
        summary,
        failed,
    })
}

pub fn phase(cfg: &RunConfig) -> CliResult<Report> {
    let beam = cfg.beam()?;
    let geom = cfg.geometry()?;
    let r = geom.radius();
    let c3 = cfg.c3_of(cfg.species);
    let res = reduction(cfg)?;
    if res.closed {
        return Err(CliError::Numerical("the effective hole is closed (ΔR = R)".into()));
    }
    let n = cfg.phase_points;
    // without a reduction the open interval reaches the wall, where φ diverges
    let upper = if res.delta_r > 0.0 { r - res.delta_r } else { r * (1.0 - 1.0 / n as f64) };
    let radii: Vec<f64> = (0..n).map(|i| upper * i as f64 / (n - 1) as f64).collect();
    let values: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&rho| {
            Ok((
                phase_eikonal_closed(rho, &beam, &geom, c3)?,
                phase_eikonal_numeric(rho, &beam, &geom, c3, cfg.hamaker_mode)?,
            ))
        })
        .collect::<holeflux::Result<_>>()?;
    let rel = |a: f64, b: f64| if a == 0.0 && b == 0.0 { 0.0 } else { (b - a).abs() / a.abs() };
    let max_dev = radii
        .iter()
        .zip(&values)
        .filter(|(rho, _)| **rho <= 0.9 * r)
        .map(|(_, &(a, b))| rel(a, b))
        .fold(0.0, f64::max);
    let rows = radii.iter().zip(&values).map(|(rho, &(a, b))| {
        vec![num(rho / NM), num(a), num(b), num(rel(a, b))]
    });
    let mut results = reduction_results(&res);
    results.push(("max_rel_dev_within_0.9R".into(), num(max_dev)));
    Ok(Report {
        command: "phase",
        stem: "phase",
        csv: csv(&["rho_nm", "phi_closed_rad", "phi_numeric_rad", "rel_dev"], rows),
        results,
        summary: vec![
            format!("{n} radii over [0, {:.4}] nm", upper / NM),
            format!("largest |numeric/closed - 1| for ρ ≤ 0.9R: {max_dev:.3e}"),
        ],
        failed: false,
    })
}
