//! Command-line front end: argument handling, config resolution, thread pool
//! set-up and output writing around the [`commands`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Report;

const KEYS_HELP: &str = "\
Any config key can be given as `--key value` (or `--key=value`) after the
subcommand; flags override the config file, which overrides the preset.

Keys (units in the name): species, lambda_nm, speed_m_s, d_nm, r_nm,
c3_mev_nm3, model (transverse|full), hamaker_mode (paper-literal|
planar-consistent), force_model (consistent|paper-factor), beta_mrad,
tol_nm, force_epsilon_nm, z_pad_factor, ode_rel_tol, ode_abs_tol,
quad_rel_tol, n_trajectories, l1_m, l2_um, p_max_zeros, p_points,
phase_points, phase_method (closed|numeric), bare_only, sweep_species,
sweep_lambda_nm, sweep_d_nm, sweep_r_nm. Lists are comma separated or
linspace(a, b, n) / logspace(a, b, n). Unset optional values read `none`.

HOLEFLUX_THREADS caps the worker count.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "holeflux", version, about = "Atom trajectories, phases and diffraction at a nanohole", after_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trajectories for equally spaced impact radii.
    Trajectories(Common),
    /// ΔR over a (species, λ, d, R) grid.
    DeltaR(Common),
    /// Far-field patterns (corrected, bare, hole-only) and transmission rates.
    Pattern(Common),
    /// Closed-form against numerical eikonal phase across the open hole.
    Phase(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value config file (a `.meta` sidecar also works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: fig2, fig3, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

const OWN_FLAGS: [&str; 4] = ["--config", "--preset", "--out", "--threads"];

/// Separates `--key value` config overrides from the flags clap handles.
fn split_overrides(args: &[String]) -> CliResult<(Vec<String>, Vec<(String, String)>)> {
    let mut keep = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.iter().cloned().enumerate().peekable();
    while let Some((i, arg)) = it.next() {
        let name = arg.split('=').next().unwrap_or_default().to_string();
        let passthrough = i < 2
            || !arg.starts_with("--")
            || arg == "--help"
            || arg == "--version"
            || OWN_FLAGS.contains(&name.as_str());
        if passthrough {
            keep.push(arg);
            continue;
        }
        let body = &arg[2..];
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => match it.next() {
                Some((_, v)) => (body.to_string(), v),
                None => return Err(CliError::Usage(format!("--{body} needs a value"))),
            },
        };
        overrides.push((key.replace('-', "_"), value));
    }
    Ok((keep, overrides))
}

/// Outcome of a successful invocation.
#[derive(Debug)]
pub struct Invocation {
    pub report: Report,
    pub config: RunConfig,
    pub files: (PathBuf, PathBuf),
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    let env = match std::env::var("HOLEFLUX_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("HOLEFLUX_THREADS='{v}' is not a count")))?,
        ),
        Err(_) => None,
    };
    Ok(match (flag, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
    .map(|n| n.max(1)))
}

/// Resolve the configuration: defaults, then preset, then file, then flags.
pub fn resolve_config(
    preset: Option<&str>,
    file: Option<&Path>,
    overrides: &[(String, String)],
) -> CliResult<RunConfig> {
    let mut cfg = match preset {
        Some(p) => RunConfig::preset(p)?,
        None => RunConfig::default(),
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run a command line (including the program name) and write its outputs.
pub fn execute(args: &[String]) -> CliResult<Invocation> {
    let (keep, overrides) = split_overrides(args)?;
    let cli = Cli::try_parse_from(&keep).map_err(|e| {
        let text = e.to_string();
        CliError::Usage(text.strip_prefix("error: ").unwrap_or(&text).trim_end().to_string())
    })?;
    let (name, common) = match &cli.command {
        Command::Trajectories(c) => ("trajectories", c),
        Command::DeltaR(c) => ("delta-r", c),
        Command::Pattern(c) => ("pattern", c),
        Command::Phase(c) => ("phase", c),
    };
    let cfg = resolve_config(common.preset.as_deref(), common.config.as_deref(), &overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(common.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let report = pool.install(|| match name {
        "trajectories" => commands::trajectories(&cfg),
        "delta-r" => commands::delta_r(&cfg),
        "pattern" => commands::pattern(&cfg),
        _ => commands::phase(&cfg),
    })?;
    let files = output::write(&common.out, &report, &cfg)?;
    Ok(Invocation {
        report,
        config: cfg,
        files,
    })
}

/// Process entry point; returns the exit code.
pub fn run(args: &[String]) -> i32 {
    // help and version go through clap's own printing
    if let Ok((keep, _)) = split_overrides(args) {
        if let Err(e) = Cli::try_parse_from(&keep) {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
        }
    }
    match execute(args) {
        Ok(inv) => {
            for line in &inv.report.summary {
                println!("{line}");
            }
            println!("wrote {} and {}", inv.files.0.display(), inv.files.1.display());
            if inv.report.failed {
                eprintln!("error: part of the computation failed; see the status fields");
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
