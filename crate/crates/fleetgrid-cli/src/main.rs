//! fleetgrid command line.
//!
//! Exit codes: 0 optimal, 2 validation or input failure, 3 infeasible or
//! unbounded, 4 numerical failure or iteration limit.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fleetgrid::costs::CostCoefficients;
use fleetgrid::lp::{build_program, write_lp_format};
use fleetgrid::oracle::{compare, enumerate_optimum, TinyScenario};
use fleetgrid::report::{run_single, run_sweep, RunError, RunSettings};
use fleetgrid::scenario::{load_scenario, shaev_split, validate_scenario};
use fleetgrid::solver::{certify, solve, SolveSettings, SolveStatus};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fleetgrid",
    version,
    about = "Joint fleet, charger, and grid cost minimisation over scenario directories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Tuning {
    /// Primal/dual feasibility tolerance override.
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Relative duality-gap tolerance override.
    #[arg(long)]
    opt_tol: Option<f64>,
    /// Iteration cap override.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Disable equilibration scaling.
    #[arg(long)]
    no_scaling: bool,
    /// Sweep worker cap (also settable via FLEETGRID_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Version-stamped key=value defaults file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check every scenario invariant and list violations.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Solve one scenario, optionally splitting truck demand first.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// Fraction of truck demand served by the shared fleet, in [0, 1].
        #[arg(long)]
        share_fraction: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Solve a list of share fractions and write the comparison table.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated fractions, each in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        share_fractions: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Write the assembled program in LP interchange text format.
    DumpLp {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        share_fraction: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and re-verify the solution in compensated arithmetic;
    /// `--oracle` additionally cross-checks tiny scenarios against
    /// exhaustive enumeration.
    Certify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        share_fraction: Option<f64>,
        #[arg(long)]
        oracle: bool,
        /// Enumeration grid step in kWh.
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Write a bundled example scenario directory.
    InitExample {
        #[arg(long, value_enum)]
        kind: ExampleKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExampleKind {
    Tiny,
    Sharing,
    Desk,
}

/// Built-in defaults, overridden by the config file, overridden by flags.
fn resolve_settings(tuning: &Tuning) -> Result<RunSettings> {
    let mut solve = SolveSettings::default();
    let mut workers = std::env::var("FLEETGRID_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4usize);

    if let Some(path) = &tuning.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut version_seen = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key = value", ln + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "config_version" => {
                    if value != "1" {
                        bail!("unsupported config_version `{value}` (expected 1)");
                    }
                    version_seen = true;
                }
                "feas_tol" => solve.feas_tol = value.parse()?,
                "opt_tol" => solve.opt_tol = value.parse()?,
                "max_iterations" => solve.max_iterations = value.parse()?,
                "scaling" => solve.scaling = value.parse()?,
                "workers" => workers = value.parse()?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        if !version_seen {
            bail!("config file missing config_version");
        }
    }

    if let Some(v) = tuning.feas_tol {
        solve.feas_tol = v;
    }
    if let Some(v) = tuning.opt_tol {
        solve.opt_tol = v;
    }
    if let Some(v) = tuning.max_iterations {
        solve.max_iterations = v;
    }
    if tuning.no_scaling {
        solve.scaling = false;
    }
    if let Some(v) = tuning.workers {
        workers = v;
    }
    Ok(RunSettings { solve, workers })
}

fn status_exit(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible | SolveStatus::Unbounded => EXIT_INFEASIBLE,
        SolveStatus::IterationLimit | SolveStatus::NumericalFailure => EXIT_NUMERICAL,
    }
}

fn run_error_exit(err: &RunError) -> u8 {
    match err {
        RunError::Validation(_) | RunError::Load(_) | RunError::Split(_) => EXIT_VALIDATION,
        _ => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { scenario } => {
            let spec = load_scenario(&scenario)?;
            let report = validate_scenario(&spec);
            print!("{report}");
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_VALIDATION })
        }

        Command::Solve { scenario, share_fraction, out, tuning } => {
            let settings = resolve_settings(&tuning)?;
            match run_single(&scenario, share_fraction, &settings, Some(&out)) {
                Ok(bundle) => {
                    println!("status: {}", bundle.status.name());
                    println!("objective_usd: {}", bundle.objective);
                    println!("system_peak_kw: {}", bundle.system_peak_kw);
                    println!("tables: {}", out.display());
                    if bundle.status != SolveStatus::Optimal {
                        eprintln!("solver returned {}; most violated row families:", bundle.status.name());
                        for (family, violation) in bundle.diagnostics.family_violations.iter().take(5) {
                            eprintln!("  {:24} {violation:.3e}", family.name());
                        }
                    }
                    Ok(status_exit(bundle.status))
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    Ok(run_error_exit(&err))
                }
            }
        }

        Command::Sweep { scenario, share_fractions, out, tuning } => {
            for s in &share_fractions {
                if !(0.0..=1.0).contains(s) {
                    bail!("share fraction {s} outside [0, 1]");
                }
            }
            let settings = resolve_settings(&tuning)?;
            let report = run_sweep(&scenario, &share_fractions, &settings, Some(&out))?;
            print!("{}", report.summary_csv());
            let worst = report
                .members
                .iter()
                .map(|m| match &m.bundle {
                    Ok(b) => status_exit(b.status),
                    Err(e) => run_error_exit(e),
                })
                .max()
                .unwrap_or(EXIT_OK);
            Ok(worst)
        }

        Command::DumpLp { scenario, share_fraction, out } => {
            let mut spec = load_scenario(&scenario)?;
            if let Some(s) = share_fraction {
                spec = shaev_split(&spec, s)?;
            }
            let report = validate_scenario(&spec);
            if !report.is_valid() {
                eprint!("{report}");
                return Ok(EXIT_VALIDATION);
            }
            let coeffs = CostCoefficients::compute(&spec)?;
            let (program, index) = build_program(&spec, &coeffs)?;
            let text = write_lp_format(&program, &index);
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }

        Command::Certify { scenario, share_fraction, oracle, grid_step, tuning } => {
            let settings = resolve_settings(&tuning)?;
            let mut spec = load_scenario(&scenario)?;
            if let Some(s) = share_fraction {
                spec = shaev_split(&spec, s)?;
            }
            let report = validate_scenario(&spec);
            if !report.is_valid() {
                eprint!("{report}");
                return Ok(EXIT_VALIDATION);
            }
            let coeffs = CostCoefficients::compute(&spec)?;
            let (program, index) = build_program(&spec, &coeffs)?;
            let solution = solve(&program, &settings.solve)?;
            println!("status: {}", solution.status.name());
            if solution.status != SolveStatus::Optimal {
                return Ok(status_exit(solution.status));
            }
            let cert = certify(&program, &solution, &settings.solve);
            print!("{cert}");
            let mut ok = cert.pass;

            if oracle {
                let tiny = TinyScenario::new(spec.clone())?;
                let result = enumerate_optimum(&tiny, grid_step)?;
                let cmp = compare(&result, &program, &solution, 1e-6);
                println!(
                    "oracle: {} (gap {:+.6e}, band {:.3e}, {} points)",
                    if cmp.pass { "pass" } else { "FAIL" },
                    cmp.gap,
                    cmp.band,
                    result.points_evaluated
                );
                ok &= cmp.pass;
            }
            let _ = index;
            Ok(if ok { EXIT_OK } else { EXIT_NUMERICAL })
        }

        Command::InitExample { kind, out } => {
            let spec = match kind {
                ExampleKind::Tiny => fleetgrid::fixtures::tiny_two_hour().to_scenario(),
                ExampleKind::Sharing => fleetgrid::fixtures::sharing_scenario(),
                ExampleKind::Desk => fleetgrid::fixtures::desk_scenario(),
            };
            fleetgrid::scenario::save_scenario(&spec, &out)?;
            println!("wrote {} example to {}", format!("{kind:?}").to_lowercase(), out.display());
            Ok(EXIT_OK)
        }
    }
}
