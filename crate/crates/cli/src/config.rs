//! Flat `key = value` run configuration and the built-in figure presets.
//!
//! Lines starting with `#` are comments. Keys under the `result.`, `const.`
//! and `meta.` prefixes are written by the sidecars and ignored on input, so
//! a sidecar can be fed back as a config.

use std::fmt::Write as _;
use std::str::FromStr;

use holeflux::dynamics::PropagationConfig;
use holeflux::holered::{ReductionConfig, ReductionModel, SweepSpec};
use holeflux::potential::{ForceModel, HamakerMode};
use holeflux::units::{c3_to_si, NM};
use holeflux::{AtomSpecies, BeamState, HoleGeometry, SpeciesKind};

use crate::error::{CliError, CliResult};
use crate::output::num as fmt;

const IGNORED_PREFIXES: [&str; 3] = ["result.", "const.", "meta."];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSource {
    Closed,
    Numeric,
}

impl PhaseSource {
    pub fn label(self) -> &'static str {
        match self {
            PhaseSource::Closed => "closed",
            PhaseSource::Numeric => "numeric",
        }
    }
}

/// Every tunable of a run. Lengths carry their unit in the key name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub species: SpeciesKind,
    pub lambda_nm: Option<f64>,
    pub speed_m_s: Option<f64>,
    pub d_nm: f64,
    pub r_nm: f64,
    /// Overrides the species' tabulated C3.
    pub c3_mev_nm3: Option<f64>,
    pub model: ReductionModel,
    pub hamaker_mode: HamakerMode,
    pub force_model: ForceModel,
    pub beta_mrad: Option<f64>,
    pub tol_nm: f64,
    pub force_epsilon_nm: f64,
    pub z_pad_factor: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub n_trajectories: usize,
    pub l1_m: f64,
    pub l2_um: f64,
    /// Detector extent in units of the bare-hole first dark ring.
    pub p_max_zeros: f64,
    pub p_points: usize,
    pub phase_points: usize,
    pub phase_method: PhaseSource,
    pub bare_only: bool,
    pub sweep_species: Vec<SpeciesKind>,
    pub sweep_lambda_nm: Vec<f64>,
    pub sweep_d_nm: Vec<f64>,
    pub sweep_r_nm: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prop = PropagationConfig::default();
        Self {
            species: SpeciesKind::MetastableHelium,
            lambda_nm: Some(0.1),
            speed_m_s: None,
            d_nm: 5.0,
            r_nm: 25.0,
            c3_mev_nm3: None,
            model: ReductionModel::Transverse,
            hamaker_mode: HamakerMode::default(),
            force_model: ForceModel::default(),
            beta_mrad: None,
            tol_nm: 1e-3,
            force_epsilon_nm: 0.05,
            z_pad_factor: prop.z_pad_factor,
            ode_rel_tol: prop.ode.rel_tol,
            ode_abs_tol: prop.ode.abs_tol,
            quad_rel_tol: prop.quadrature.rel_tol,
            n_trajectories: 41,
            l1_m: 1.0,
            l2_um: 50.0,
            p_max_zeros: 20.0,
            p_points: 2001,
            phase_points: 51,
            phase_method: PhaseSource::Closed,
            bare_only: false,
            sweep_species: Vec::new(),
            sweep_lambda_nm: Vec::new(),
            sweep_d_nm: Vec::new(),
            sweep_r_nm: Vec::new(),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn num(key: &str, v: &str) -> CliResult<f64> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => usage(format!("{key}: '{v}' is not a finite number")),
    }
}

fn count(key: &str, v: &str) -> CliResult<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("{key}: '{v}' is not a non-negative integer")))
}

fn optional(key: &str, v: &str) -> CliResult<Option<f64>> {
    if v.trim() == "none" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

/// Comma-separated values, or `linspace(a, b, n)` / `logspace(a, b, n)`
/// with endpoints given directly (not as exponents).
pub fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    for (name, log) in [("linspace", false), ("logspace", true)] {
        if let Some(args) = v.strip_prefix(name) {
            let inner = args
                .trim()
                .strip_prefix('(')
                .and_then(|a| a.strip_suffix(')'))
                .ok_or_else(|| CliError::Usage(format!("{key}: malformed {name}(...)")))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return usage(format!("{key}: {name} takes (start, stop, count)"));
            }
            let (a, b, n) = (num(key, parts[0])?, num(key, parts[1])?, count(key, parts[2])?);
            if n < 2 {
                return usage(format!("{key}: {name} needs at least two points"));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return usage(format!("{key}: logspace endpoints must be positive"));
            }
            return Ok((0..n)
                .map(|i| {
                    let s = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        b
                    } else if log {
                        (a.ln() + s * (b.ln() - a.ln())).exp()
                    } else {
                        a + s * (b - a)
                    }
                })
                .collect());
        }
    }
    v.split(',').map(|x| num(key, x)).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(",")
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt)
}

impl RunConfig {
    /// Builtin presets reproducing the figure scenarios.
    pub fn preset(name: &str) -> CliResult<Self> {
        let base = RunConfig::default();
        let fig_grid = |c: &mut RunConfig| -> CliResult<()> {
            c.sweep_lambda_nm = parse_list("sweep_lambda_nm", "logspace(0.05, 1, 20)")?;
            c.sweep_d_nm = parse_list("sweep_d_nm", "linspace(5, 50, 10)")?;
            Ok(())
        };
        let mut c = base;
        match name {
            "fig2" => {
                c.species = SpeciesKind::Helium;
                c.lambda_nm = None;
                c.speed_m_s = Some(1000.0);
                c.d_nm = 50.0;
                c.r_nm = 25.0;
            }
            "fig3" => {
                c.sweep_species = vec![SpeciesKind::MetastableHelium, SpeciesKind::Helium];
                fig_grid(&mut c)?;
                c.r_nm = 25.0;
            }
            "fig4" => {
                c.model = ReductionModel::FullPotential;
                c.beta_mrad = Some(10.0);
                fig_grid(&mut c)?;
                c.sweep_r_nm = vec![5.0, 10.0, 25.0];
            }
            "fig5" => {
                c.d_nm = 5.0;
                c.r_nm = 5.0;
                c.lambda_nm = Some(0.1);
                c.l1_m = 1.0;
                c.l2_um = 50.0;
            }
            other => return usage(format!("unknown preset '{other}' (fig2, fig3, fig4, fig5)")),
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        let parse_enum = |r: holeflux::Result<()>| r.map_err(|e| CliError::Usage(format!("{key}: {e}")));
        match key {
            "species" => self.species = SpeciesKind::from_str(v).map_err(|e| CliError::Usage(e.to_string()))?,
            "lambda_nm" => self.lambda_nm = optional(key, v)?,
            "speed_m_s" => self.speed_m_s = optional(key, v)?,
            "d_nm" => self.d_nm = num(key, v)?,
            "r_nm" => self.r_nm = num(key, v)?,
            "c3_mev_nm3" => self.c3_mev_nm3 = optional(key, v)?,
            "model" => parse_enum(ReductionModel::from_str(v).map(|m| self.model = m))?,
            "hamaker_mode" => parse_enum(HamakerMode::from_str(v).map(|m| self.hamaker_mode = m))?,
            "force_model" => parse_enum(ForceModel::from_str(v).map(|m| self.force_model = m))?,
            "beta_mrad" => self.beta_mrad = optional(key, v)?,
            "tol_nm" => self.tol_nm = num(key, v)?,
            "force_epsilon_nm" => self.force_epsilon_nm = num(key, v)?,
            "z_pad_factor" => self.z_pad_factor = num(key, v)?,
            "ode_rel_tol" => self.ode_rel_tol = num(key, v)?,
            "ode_abs_tol" => self.ode_abs_tol = num(key, v)?,
            "quad_rel_tol" => self.quad_rel_tol = num(key, v)?,
            "n_trajectories" => self.n_trajectories = count(key, v)?,
            "l1_m" => self.l1_m = num(key, v)?,
            "l2_um" => self.l2_um = num(key, v)?,
            "p_max_zeros" => self.p_max_zeros = num(key, v)?,
            "p_points" => self.p_points = count(key, v)?,
            "phase_points" => self.phase_points = count(key, v)?,
            "phase_method" => {
                self.phase_method = match v {
                    "closed" => PhaseSource::Closed,
                    "numeric" => PhaseSource::Numeric,
                    _ => return usage(format!("{key}: expected closed or numeric, got '{v}'")),
                }
            }
            "bare_only" => {
                self.bare_only = v
                    .parse::<bool>()
                    .map_err(|_| CliError::Usage(format!("{key}: expected true or false")))?
            }
            "sweep_species" => {
                self.sweep_species = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|s| SpeciesKind::from_str(s.trim()).map_err(|e| CliError::Usage(e.to_string())))
                        .collect::<CliResult<_>>()?
                }
            }
            "sweep_lambda_nm" => self.sweep_lambda_nm = parse_list(key, v)?,
            "sweep_d_nm" => self.sweep_d_nm = parse_list(key, v)?,
            "sweep_r_nm" => self.sweep_r_nm = parse_list(key, v)?,
            _ if IGNORED_PREFIXES.iter().any(|p| key.starts_with(p)) => {}
            _ => return usage(format!("unknown config key '{key}'")),
        }
        Ok(())
    }

    /// Apply every `key = value` line of a config text.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Canonical key/value pairs, in a fixed order. Parsing them back with
    /// [`RunConfig::set`] reproduces `self` exactly.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let species = |s: &[SpeciesKind]| s.iter().map(|k| k.label()).collect::<Vec<_>>().join(",");
        vec![
            ("species", self.species.label().to_string()),
            ("lambda_nm", show(self.lambda_nm)),
            ("speed_m_s", show(self.speed_m_s)),
            ("d_nm", fmt(self.d_nm)),
            ("r_nm", fmt(self.r_nm)),
            ("c3_mev_nm3", show(self.c3_mev_nm3)),
            ("model", self.model.label().to_string()),
            ("hamaker_mode", self.hamaker_mode.label().to_string()),
            ("force_model", self.force_model.label().to_string()),
            ("beta_mrad", show(self.beta_mrad)),
            ("tol_nm", fmt(self.tol_nm)),
            ("force_epsilon_nm", fmt(self.force_epsilon_nm)),
            ("z_pad_factor", fmt(self.z_pad_factor)),
            ("ode_rel_tol", fmt(self.ode_rel_tol)),
            ("ode_abs_tol", fmt(self.ode_abs_tol)),
            ("quad_rel_tol", fmt(self.quad_rel_tol)),
            ("n_trajectories", self.n_trajectories.to_string()),
            ("l1_m", fmt(self.l1_m)),
            ("l2_um", fmt(self.l2_um)),
            ("p_max_zeros", fmt(self.p_max_zeros)),
            ("p_points", self.p_points.to_string()),
            ("phase_points", self.phase_points.to_string()),
            ("phase_method", self.phase_method.label().to_string()),
            ("bare_only", self.bare_only.to_string()),
            ("sweep_species", species(&self.sweep_species)),
            ("sweep_lambda_nm", join(&self.sweep_lambda_nm)),
            ("sweep_d_nm", join(&self.sweep_d_nm)),
            ("sweep_r_nm", join(&self.sweep_r_nm)),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> CliResult<()> {
        match (self.lambda_nm, self.speed_m_s) {
            (Some(l), None) if l > 0.0 => {}
            (None, Some(v)) if v > 0.0 => {}
            (Some(_), Some(_)) => return usage("set exactly one of lambda_nm and speed_m_s (the other to none)"),
            _ => return usage("the beam needs a positive lambda_nm or speed_m_s"),
        }
        let positive = [
            ("d_nm", self.d_nm),
            ("r_nm", self.r_nm),
            ("tol_nm", self.tol_nm),
            ("force_epsilon_nm", self.force_epsilon_nm),
            ("z_pad_factor", self.z_pad_factor),
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("quad_rel_tol", self.quad_rel_tol),
            ("l1_m", self.l1_m),
            ("l2_um", self.l2_um),
            ("p_max_zeros", self.p_max_zeros),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return usage(format!("{k} must be positive"));
            }
        }
        if let Some(c) = self.c3_mev_nm3 {
            if c < 0.0 {
                return usage("c3_mev_nm3 must be non-negative");
            }
        }
        if let Some(b) = self.beta_mrad {
            if !(b > 0.0 && b < 1e3 * std::f64::consts::FRAC_PI_2) {
                return usage("beta_mrad must lie in (0, π/2 rad)");
            }
        }
        if self.model == ReductionModel::FullPotential && self.beta_mrad.is_none() {
            return usage("model = full needs beta_mrad");
        }
        if self.p_points < 2 || self.phase_points < 2 {
            return usage("p_points and phase_points must be at least 2");
        }
        for (k, list) in [
            ("sweep_lambda_nm", &self.sweep_lambda_nm),
            ("sweep_d_nm", &self.sweep_d_nm),
            ("sweep_r_nm", &self.sweep_r_nm),
        ] {
            if list.iter().any(|x| !(*x > 0.0)) {
                return usage(format!("{k} values must be positive"));
            }
        }
        Ok(())
    }

    pub fn atom(&self) -> AtomSpecies {
        self.atom_of(self.species)
    }

    pub fn atom_of(&self, kind: SpeciesKind) -> AtomSpecies {
        let base = kind.species();
        match self.c3_mev_nm3 {
            Some(c) => AtomSpecies::new(base.name(), base.mass(), c3_to_si(c).max(0.0))
                .unwrap_or(base),
            None => base,
        }
    }

    /// C3 in J·m³ for `kind`, honouring the override (which may be zero).
    pub fn c3_of(&self, kind: SpeciesKind) -> f64 {
        self.c3_mev_nm3.map_or(kind.species().c3(), c3_to_si)
    }

    pub fn beam(&self) -> CliResult<BeamState> {
        self.beam_of(self.species)
    }

    pub fn beam_of(&self, kind: SpeciesKind) -> CliResult<BeamState> {
        let atom = self.atom_of(kind);
        Ok(match (self.lambda_nm, self.speed_m_s) {
            (Some(l), _) => BeamState::from_wavelength(atom, l * NM)?,
            (None, Some(v)) => BeamState::from_speed(atom, v)?,
            (None, None) => return usage("no beam wavelength or speed"),
        })
    }

    pub fn geometry(&self) -> CliResult<HoleGeometry> {
        Ok(HoleGeometry::from_nm(self.d_nm, self.r_nm)?)
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta_mrad.map(|b| b * 1e-3)
    }

    pub fn propagation(&self) -> PropagationConfig {
        let mut p = PropagationConfig {
            force_model: self.force_model,
            force_epsilon: self.force_epsilon_nm * NM,
            z_pad_factor: self.z_pad_factor,
            ..PropagationConfig::default()
        };
        p.ode.rel_tol = self.ode_rel_tol;
        p.ode.abs_tol = self.ode_abs_tol;
        p.quadrature.rel_tol = self.quad_rel_tol;
        p
    }

    pub fn reduction(&self) -> ReductionConfig {
        ReductionConfig {
            tolerance: self.tol_nm * NM,
            propagation: self.propagation(),
        }
    }

    /// The sweep grid; empty axes fall back to the single-run values.
    pub fn sweep(&self) -> CliResult<SweepSpec> {
        if self.speed_m_s.is_some() && !self.sweep_lambda_nm.is_empty() {
            return usage("sweep_lambda_nm cannot be combined with a fixed speed_m_s");
        }
        let or = |list: &[f64], one: f64| if list.is_empty() { vec![one * NM] } else { list.iter().map(|x| x * NM).collect() };
        let lambda = match (self.sweep_lambda_nm.is_empty(), self.lambda_nm) {
            (false, _) => self.sweep_lambda_nm.iter().map(|x| x * NM).collect(),
            (true, Some(l)) => vec![l * NM],
            (true, None) => vec![self.beam()?.wavelength()],
        };
        Ok(SweepSpec {
            species: if self.sweep_species.is_empty() { vec![self.species] } else { self.sweep_species.clone() },
            wavelengths: lambda,
            thicknesses: or(&self.sweep_d_nm, self.d_nm),
            radii: or(&self.sweep_r_nm, self.r_nm),
            model: self.model,
            beta_max: self.beta(),
            mode: self.hamaker_mode,
            c3_override: self.c3_mev_nm3.map(c3_to_si),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for name in ["fig2", "fig3", "fig4", "fig5"] {
            let c = RunConfig::preset(name).unwrap();
            let mut back = RunConfig::default();
            back.apply_text(&c.to_text()).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("k", "1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_list("k", "linspace(5, 50, 10)").unwrap()[9], 50.0);
        let l = parse_list("k", "logspace(0.05, 1, 20)").unwrap();
        assert_eq!(l.len(), 20);
        assert!((l[0] - 0.05).abs() < 1e-15 && l[19] == 1.0);
        assert!(parse_list("k", "logspace(0, 1, 3)").is_err());
        assert!(parse_list("k", "").unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.set("nonsense", "1").is_err());
        assert!(c.set("d_nm", "abc").is_err());
        c.set("result.delta_r_nm", "3").unwrap();
        c.set("speed_m_s", "1000").unwrap();
        assert!(c.validate().is_err());
        c.set("lambda_nm", "none").unwrap();
        c.validate().unwrap();
        c.set("model", "full").unwrap();
        assert!(c.validate().is_err());
    }
}
