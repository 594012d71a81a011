//! Share-fraction sweeps.
//!
//! Members run concurrently up to the worker limit; each member owns its
//! output subdirectory and the summary is written once after all members
//! finish, in input order, so reruns produce byte-identical tables.

use super::{run_single_spec, ReportBundle, RunError, RunSettings};
use crate::scenario::{load_scenario, ScenarioSpec};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Outcome of one sweep member.
#[derive(Debug)]
pub struct SweepMember {
    pub share_fraction: f64,
    pub bundle: Result<ReportBundle, RunError>,
}

impl SweepMember {
    pub fn objective(&self) -> Option<f64> {
        self.bundle.as_ref().ok().map(|b| b.objective)
    }
}

#[derive(Debug)]
pub struct SweepReport {
    pub members: Vec<SweepMember>,
}

impl SweepReport {
    pub fn all_optimal(&self) -> bool {
        self.members.iter().all(|m| {
            m.bundle
                .as_ref()
                .map(|b| b.status == crate::solver::SolveStatus::Optimal)
                .unwrap_or(false)
        })
    }

    /// The cross-member table: share fraction, status, total cost, system
    /// peak, fleet size, charger count.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "# fleetgrid sweep_summary v1\nshare_fraction,status,total_cost_usd,system_peak_kw,fleet_vehicles,chargers\n",
        );
        for member in &self.members {
            match &member.bundle {
                Ok(b) => {
                    let fleet: f64 = b.fleet_sizes.iter().map(|r| r.value).sum();
                    let chargers: f64 = b.charger_counts.iter().map(|r| r.value).sum();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{fleet},{chargers}",
                        member.share_fraction,
                        b.status.name(),
                        b.objective,
                        b.system_peak_kw
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "{},error,,,,\n# error at {}: {}",
                        member.share_fraction,
                        member.share_fraction,
                        e.to_string().replace('\n', "; ")
                    );
                }
            }
        }
        out
    }
}

/// Runs one member per share fraction against a scenario directory.
pub fn run_sweep(
    scenario_path: &Path,
    fractions: &[f64],
    settings: &RunSettings,
    out_dir: Option<&Path>,
) -> Result<SweepReport, RunError> {
    let spec = load_scenario(scenario_path)?;
    run_sweep_spec(&spec, fractions, settings, out_dir)
}

/// The in-memory sweep. Members are independent solves of the same base
/// scenario at different fractions; failures are recorded and the sweep
/// continues.
pub fn run_sweep_spec(
    base: &ScenarioSpec,
    fractions: &[f64],
    settings: &RunSettings,
    out_dir: Option<&Path>,
) -> Result<SweepReport, RunError> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let workers = settings.workers.clamp(1, fractions.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<SweepMember>>> = fractions.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= fractions.len() {
                    break;
                }
                let s = fractions[k];
                let bundle = run_single_spec(base, Some(s), settings);
                if let (Some(dir), Ok(b)) = (out_dir, &bundle) {
                    // A write failure is recorded on the member, not fatal.
                    let member_dir = dir.join(format!("s_{s}"));
                    if let Err(e) = super::write_bundle(b, base, &member_dir) {
                        *slots[k].lock().unwrap() =
                            Some(SweepMember { share_fraction: s, bundle: Err(RunError::Io(e)) });
                        continue;
                    }
                }
                *slots[k].lock().unwrap() = Some(SweepMember { share_fraction: s, bundle });
            });
        }
    });

    let members: Vec<SweepMember> = slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
        .collect();
    let report = SweepReport { members };
    if let Some(dir) = out_dir {
        fs::write(dir.join("sweep_summary.csv"), report.summary_csv())?;
    }
    Ok(report)
}
