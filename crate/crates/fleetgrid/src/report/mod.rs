//! Result bundles: reconstruction of the substituted intermediates,
//! derived output tables, cost decomposition, single runs, and
//! share-fraction sweeps.

mod sweep;
mod writer;

pub use sweep::{run_sweep, run_sweep_spec, SweepMember, SweepReport};
pub use writer::write_bundle;

use crate::costs::CostCoefficients;
use crate::dispatch::{extract_dispatch, verify_merit_order, DispatchResult};
use crate::error::{AssemblyError, LoadError, SolveError, SplitError};
use crate::lp::{row_residuals, RowFamily, SparseProgram, VarFamily, VariableIndex};
use crate::scenario::{
    load_scenario, shaev_split, validate_scenario, ScenarioSpec, ValidationReport, VehicleClass,
};
use crate::solver::{certify, solve, SolveSettings, SolveStatus, Solution};
use std::path::Path;

/// Pipeline-level failures. Solver outcomes (infeasible, iteration limit)
/// are carried in the bundle status instead.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("scenario load failed: {0}")]
    Load(#[from] LoadError),
    #[error("scenario validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error("program assembly failed: {0}")]
    Assembly(#[from] AssemblyError),
    #[error("cost computation failed: {0}")]
    Cost(#[from] crate::error::CostError),
    #[error("solver interface error: {0}")]
    Solve(#[from] SolveError),
    #[error("demand split failed: {0}")]
    Split(#[from] SplitError),
    #[error("output write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Settings for a pipeline run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub solve: SolveSettings,
    /// Worker cap for sweep members.
    pub workers: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { solve: SolveSettings::default(), workers: 4 }
    }
}

/// Hourly load by category (kW).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadRow {
    pub t: usize,
    pub region: String,
    pub category: &'static str,
    pub level: String,
    pub kw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub class: VehicleClass,
    pub name: String,
    pub region: String,
    pub value: f64,
}

/// Objective decomposition by cost family; sums to the solver objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub maintenance: f64,
    pub demand_charge: f64,
    pub infrastructure: f64,
    pub fleet: f64,
    pub generation: f64,
    pub transmission: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.maintenance
            + self.demand_charge
            + self.infrastructure
            + self.fleet
            + self.generation
            + self.transmission
    }

    pub fn components(&self) -> [(&'static str, f64); 6] {
        [
            ("maintenance", self.maintenance),
            ("demand_charge", self.demand_charge),
            ("infrastructure", self.infrastructure),
            ("fleet", self.fleet),
            ("generation", self.generation),
            ("transmission", self.transmission),
        ]
    }
}

/// Reconstructed values of the substituted intermediates at the primal
/// point: energy to meet demand, vehicles moving, vehicles charging, plus
/// the idle-vehicle columns read straight from the solution.
#[derive(Debug, Clone, Default)]
pub struct Intermediates {
    /// `(class, battery, bin, t, region, value)`.
    pub energy_kwh: Vec<(VehicleClass, usize, usize, usize, usize, f64)>,
    pub moving: Vec<(VehicleClass, usize, usize, usize, usize, f64)>,
    /// `(class, battery, t, level, region, value)`.
    pub charging: Vec<(VehicleClass, usize, usize, usize, usize, f64)>,
    /// `(class, battery, t, region, value)`.
    pub idle: Vec<(VehicleClass, usize, usize, usize, f64)>,
}

/// Solver diagnostics carried into the output tables. Wall time is kept
/// out of the written files so reruns are byte-identical.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub relative_gap: f64,
    pub certified: bool,
    /// Row families ranked by scaled violation at the reported point;
    /// meaningful for infeasible outcomes.
    pub family_violations: Vec<(RowFamily, f64)>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub share_fraction: Option<f64>,
    pub status: SolveStatus,
    pub objective: f64,
    pub load_profile: Vec<LoadRow>,
    pub charger_counts: Vec<CountRow>,
    pub fleet_sizes: Vec<CountRow>,
    /// Billed peak per mobility region (kW).
    pub billed_peaks: Vec<(String, f64)>,
    /// Load peak per grid region (kW).
    pub grid_peaks: Vec<(String, f64)>,
    /// Peak of the summed grid load (kW).
    pub system_peak_kw: f64,
    pub costs: CostBreakdown,
    pub dispatch: DispatchResult,
    pub intermediates: Intermediates,
    pub diagnostics: Diagnostics,
    pub merit_violations: usize,
}

/// Loads, optionally splits, validates, solves, certifies, extracts, and
/// (when `out_dir` is given) writes the bundle tables.
pub fn run_single(
    scenario_path: &Path,
    share_fraction: Option<f64>,
    settings: &RunSettings,
    out_dir: Option<&Path>,
) -> Result<ReportBundle, RunError> {
    let spec = load_scenario(scenario_path)?;
    let bundle = run_single_spec(&spec, share_fraction, settings)?;
    if let Some(dir) = out_dir {
        write_bundle(&bundle, &spec, dir)?;
    }
    Ok(bundle)
}

/// The in-memory pipeline behind [`run_single`].
pub fn run_single_spec(
    base: &ScenarioSpec,
    share_fraction: Option<f64>,
    settings: &RunSettings,
) -> Result<ReportBundle, RunError> {
    let report = validate_scenario(base);
    if !report.is_valid() {
        return Err(RunError::Validation(report));
    }
    let spec = match share_fraction {
        Some(s) => {
            let split = shaev_split(base, s)?;
            let report = validate_scenario(&split);
            if !report.is_valid() {
                return Err(RunError::Validation(report));
            }
            split
        }
        None => base.clone(),
    };

    let coeffs = CostCoefficients::compute(&spec)?;
    let (program, index) = crate::lp::build_program(&spec, &coeffs)?;
    let solution = solve(&program, &settings.solve)?;
    let certified = solution.status == SolveStatus::Optimal
        && certify(&program, &solution, &settings.solve).pass;
    Ok(build_bundle(&spec, &program, &index, &solution, share_fraction, certified))
}

/// Assembles the output bundle from a solved program.
pub fn build_bundle(
    spec: &ScenarioSpec,
    program: &SparseProgram,
    index: &VariableIndex,
    solution: &Solution,
    share_fraction: Option<f64>,
    certified: bool,
) -> ReportBundle {
    let dims = &spec.dims;
    let dt = dims.dt_hours;
    let x = &solution.primal;

    let mut load_profile = Vec::new();
    for t in 0..dims.n_hours {
        for (r, r_name) in dims.mobility_regions.iter().enumerate() {
            for class in VehicleClass::BOTH {
                let (family, category) = match class {
                    VehicleClass::Ldv => (VarFamily::ChargeLdv, "ldv_fleet"),
                    VehicleClass::Hdv => (VarFamily::ChargeHdv, "hdv_fleet"),
                };
                for (l, l_name) in dims.levels(class).iter().enumerate() {
                    let kw: f64 = (0..dims.batteries(class).len())
                        .map(|b| x[index.col(family, &[b, t, l, r])] / dt)
                        .sum();
                    load_profile.push(LoadRow { t, region: r_name.clone(), category, level: l_name.clone(), kw });
                }
            }
            let k = dims.idx_tr(t, r);
            load_profile.push(LoadRow {
                t,
                region: r_name.clone(),
                category: "hdv_private_auto",
                level: "-".into(),
                kw: x[index.col(VarFamily::PrivAutoCharge, &[t, r])],
            });
            load_profile.push(LoadRow {
                t,
                region: r_name.clone(),
                category: "hdv_private_human",
                level: "-".into(),
                kw: x[index.col(VarFamily::PrivHumanCharge, &[t, r])],
            });
            load_profile.push(LoadRow {
                t,
                region: r_name.clone(),
                category: "ldv_private_fixed",
                level: "-".into(),
                kw: spec.exogenous.private_ldv_kw[k],
            });
        }
    }

    let mut charger_counts = Vec::new();
    let mut fleet_sizes = Vec::new();
    for class in VehicleClass::BOTH {
        let (chargers, fleet) = match class {
            VehicleClass::Ldv => (VarFamily::ChargersLdv, VarFamily::FleetLdv),
            VehicleClass::Hdv => (VarFamily::ChargersHdv, VarFamily::FleetHdv),
        };
        for (l, l_name) in dims.levels(class).iter().enumerate() {
            for (r, r_name) in dims.mobility_regions.iter().enumerate() {
                charger_counts.push(CountRow {
                    class,
                    name: l_name.clone(),
                    region: r_name.clone(),
                    value: x[index.col(chargers, &[l, r])],
                });
            }
        }
        for (b, b_name) in dims.batteries(class).iter().enumerate() {
            for (r, r_name) in dims.mobility_regions.iter().enumerate() {
                fleet_sizes.push(CountRow {
                    class,
                    name: b_name.clone(),
                    region: r_name.clone(),
                    value: x[index.col(fleet, &[b, r])],
                });
            }
        }
    }

    let billed_peaks: Vec<(String, f64)> = dims
        .mobility_regions
        .iter()
        .enumerate()
        .map(|(r, name)| (name.clone(), x[index.col(VarFamily::PeakDemand, &[r])]))
        .collect();

    let dispatch = extract_dispatch(program, solution, index, spec);
    let mut grid_peaks = Vec::new();
    for (i, name) in dims.grid_regions.iter().enumerate() {
        let peak = (0..dims.n_hours)
            .map(|t| dispatch.region_hour(i, t).load_kwh / dt)
            .fold(0.0f64, f64::max);
        grid_peaks.push((name.clone(), peak));
    }
    let system_peak_kw = (0..dims.n_hours)
        .map(|t| {
            (0..dims.n_grid_regions())
                .map(|i| dispatch.region_hour(i, t).load_kwh / dt)
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max);

    let merit_violations = verify_merit_order(&dispatch, spec).len();

    let costs = cost_breakdown(program, index, x);
    let intermediates = reconstruct_intermediates(solution, index, spec);

    let family_violations = row_residuals(program, x)
        .map(|rep| rep.family_maxima())
        .unwrap_or_default();

    ReportBundle {
        share_fraction,
        status: solution.status,
        objective: solution.objective,
        load_profile,
        charger_counts,
        fleet_sizes,
        billed_peaks,
        grid_peaks,
        system_peak_kw,
        costs,
        dispatch,
        intermediates,
        diagnostics: Diagnostics {
            status: solution.status,
            iterations: solution.iterations,
            max_primal_residual: solution.max_primal_residual,
            max_dual_residual: solution.max_dual_residual,
            relative_gap: solution.relative_gap,
            certified,
            family_violations,
        },
        merit_violations,
    }
}

/// Groups the objective inner product by variable family. The grouping is
/// a partition of the columns, so the components sum to the objective.
pub fn cost_breakdown(program: &SparseProgram, index: &VariableIndex, point: &[f64]) -> CostBreakdown {
    let mut out = CostBreakdown::default();
    for (family, range) in index.families() {
        let part: f64 = range.clone().map(|j| program.objective()[j] * point[j]).sum();
        match family {
            VarFamily::TripsLdv | VarFamily::TripsHdv | VarFamily::MovingLdv | VarFamily::MovingHdv => {
                out.maintenance += part;
            }
            VarFamily::FleetLdv | VarFamily::FleetHdv => out.fleet += part,
            VarFamily::ChargersLdv | VarFamily::ChargersHdv => out.infrastructure += part,
            VarFamily::PeakDemand => out.demand_charge += part,
            VarFamily::Generation => out.generation += part,
            VarFamily::Transmission => out.transmission += part,
            _ => {
                debug_assert_eq!(part, 0.0, "{family:?} carries objective weight");
            }
        }
    }
    out
}

/// Evaluates the substituted affine definitions at the primal point.
pub fn reconstruct_intermediates(
    solution: &Solution,
    index: &VariableIndex,
    spec: &ScenarioSpec,
) -> Intermediates {
    use crate::lp::assemble::{charging_per_kwh, energy_per_trip, moving_per_trip};
    let dims = &spec.dims;
    let x = &solution.primal;
    let mut out = Intermediates::default();
    for class in VehicleClass::BOTH {
        let (trips_f, charge_f, idle_f) = match class {
            VehicleClass::Ldv => (VarFamily::TripsLdv, VarFamily::ChargeLdv, VarFamily::IdleLdv),
            VehicleClass::Hdv => (VarFamily::TripsHdv, VarFamily::ChargeHdv, VarFamily::IdleHdv),
        };
        for b in 0..dims.batteries(class).len() {
            for t in 0..dims.n_hours {
                for r in 0..dims.n_regions() {
                    for d in 0..dims.bins(class).len() {
                        let trips = x[index.col(trips_f, &[b, d, t, r])];
                        out.energy_kwh.push((class, b, d, t, r, trips * energy_per_trip(spec, class, b, d, r)));
                        out.moving.push((class, b, d, t, r, trips * moving_per_trip(spec, class, d, t, r)));
                    }
                    for l in 0..dims.levels(class).len() {
                        let charge = x[index.col(charge_f, &[b, t, l, r])];
                        out.charging.push((class, b, t, l, r, charge * charging_per_kwh(spec, class, b, l, r)));
                    }
                    out.idle.push((class, b, t, r, x[index.col(idle_f, &[b, t, r])]));
                }
            }
        }
    }
    out
}

/// Reconstruction of the billed peak from a primal point.
#[derive(Debug, Clone, Copy)]
pub struct BilledPeak {
    /// Max over hours of fleet power net of private charging (kW); the
    /// no-slack property says the solved peak equals this, clamped at the
    /// variable's zero lower bound.
    pub net_max_kw: f64,
    /// Max over hours of the gross term magnitudes feeding the same rows;
    /// the natural scale for comparisons.
    pub gross_max_kw: f64,
}

/// Per mobility region, the hourly maximum net fleet demand the billed
/// peak must cover, with its gross scale.
pub fn reconstruct_billed_peaks(spec: &ScenarioSpec, index: &VariableIndex, point: &[f64]) -> Vec<BilledPeak> {
    let dims = &spec.dims;
    let dt = dims.dt_hours;
    (0..dims.n_regions())
        .map(|r| {
            let mut net_max = 0.0f64;
            let mut gross_max = 0.0f64;
            for t in 0..dims.n_hours {
                let mut fleet = 0.0;
                for class in VehicleClass::BOTH {
                    let family = match class {
                        VehicleClass::Ldv => VarFamily::ChargeLdv,
                        VehicleClass::Hdv => VarFamily::ChargeHdv,
                    };
                    for b in 0..dims.batteries(class).len() {
                        for l in 0..dims.levels(class).len() {
                            fleet += point[index.col(family, &[b, t, l, r])] / dt;
                        }
                    }
                }
                let private = spec.exogenous.private_ldv_kw[dims.idx_tr(t, r)]
                    + point[index.col(VarFamily::PrivAutoCharge, &[t, r])]
                    + point[index.col(VarFamily::PrivHumanCharge, &[t, r])];
                net_max = net_max.max(fleet - private);
                gross_max = gross_max.max(fleet + private);
            }
            BilledPeak { net_max_kw: net_max, gross_max_kw: gross_max }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn intermediates_hand_examples() {
        // Light-duty energy: 10 trips, unit deadheads, eta 2 kWh/mi over
        // 5 mi at sharing 1 consume 100 kWh.
        let mut fx = fixtures::tiny_zero_demand();
        fx.batteries = vec![(200.0, 2.0)];
        fx.bins = vec![(5.0, 1.0)];
        fx.trips = vec![10.0, 0.0];
        let spec = fx.to_scenario();
        let e = crate::lp::assemble::energy_per_trip(&spec, VehicleClass::Hdv, 0, 0, 0);
        assert_eq!(e * 10.0, 100.0);

        // Heavy-duty moving: 4 trips of 30 mi at sharing 2, 60 mph, 1 h
        // steps keep one vehicle moving.
        let mut fx = fixtures::tiny_zero_demand();
        fx.bins = vec![(30.0, 2.0)];
        fx.speed_mph = 60.0;
        let spec = fx.to_scenario();
        let m = crate::lp::assemble::moving_per_trip(&spec, VehicleClass::Hdv, 0, 0, 0);
        assert_eq!(m * 4.0, 1.0);

        // Charging: 50 kWh in an hour through a 50 kW plug occupies one
        // charger.
        let mut fx = fixtures::tiny_zero_demand();
        fx.levels = vec![(50.0, 100.0, 100.0)];
        let spec = fx.to_scenario();
        let c = crate::lp::assemble::charging_per_kwh(&spec, VehicleClass::Hdv, 0, 0, 0);
        assert_eq!(c * 50.0, 1.0);
    }

    #[test]
    fn zero_demand_run_is_all_zero() {
        let spec = fixtures::tiny_zero_demand().to_scenario();
        let bundle = run_single_spec(&spec, Some(0.5), &RunSettings::default()).unwrap();
        assert_eq!(bundle.status, SolveStatus::Optimal);
        assert!(bundle.objective.abs() < 1e-7, "{}", bundle.objective);
        assert!(bundle.load_profile.iter().all(|row| row.kw.abs() < 1e-7));
        assert!(bundle.fleet_sizes.iter().all(|row| row.value.abs() < 1e-7));
    }

    #[test]
    fn intermediates_are_nonnegative_at_optimum() {
        let spec = fixtures::sharing_scenario();
        let bundle = run_single_spec(&spec, Some(0.6), &RunSettings::default()).unwrap();
        assert_eq!(bundle.status, SolveStatus::Optimal);
        let im = &bundle.intermediates;
        assert!(im.energy_kwh.iter().all(|&(.., v)| v >= -1e-9));
        assert!(im.moving.iter().all(|&(.., v)| v >= -1e-9));
        assert!(im.charging.iter().all(|&(.., v)| v >= -1e-9));
        assert!(im.idle.iter().all(|&(.., v)| v >= -1e-9));
    }

    #[test]
    fn cost_breakdown_sums_to_objective() {
        let spec = fixtures::sharing_scenario();
        for s in [0.0, 0.5, 1.0] {
            let bundle = run_single_spec(&spec, Some(s), &RunSettings::default()).unwrap();
            assert_eq!(bundle.status, SolveStatus::Optimal);
            let total = bundle.costs.total();
            assert!(
                (total - bundle.objective).abs() <= 1e-6 * (1.0 + bundle.objective.abs()),
                "s={s}: decomposition {total} vs objective {}",
                bundle.objective
            );
        }
    }

    #[test]
    fn full_shared_run_has_no_private_load() {
        let spec = fixtures::sharing_scenario();
        let bundle = run_single_spec(&spec, Some(1.0), &RunSettings::default()).unwrap();
        for row in &bundle.load_profile {
            if row.category == "hdv_private_auto" || row.category == "hdv_private_human" {
                assert!(row.kw.abs() < 1e-7, "{}: {}", row.category, row.kw);
            }
        }
    }

    #[test]
    fn zero_shared_run_uses_envelopes_only() {
        let spec = fixtures::sharing_scenario();
        let bundle = run_single_spec(&spec, Some(0.0), &RunSettings::default()).unwrap();
        assert_eq!(bundle.status, SolveStatus::Optimal);
        for row in &bundle.load_profile {
            if row.category == "hdv_fleet" {
                assert!(row.kw.abs() < 1e-7, "shared fleet must sit idle at s=0");
            }
        }
        let private: f64 = bundle
            .load_profile
            .iter()
            .filter(|r| r.category.starts_with("hdv_private"))
            .map(|r| r.kw)
            .sum();
        assert!(private > 1.0, "private envelopes must carry the load, got {private}");
        for row in &bundle.fleet_sizes {
            if row.class == VehicleClass::Hdv {
                assert!(row.value.abs() < 1e-6, "no shared trucks should be bought at s=0");
            }
        }
    }

    #[test]
    fn validation_failure_is_an_error() {
        let mut spec = fixtures::sharing_scenario();
        spec.demand.hdv.sharing[0] = 0.0;
        match run_single_spec(&spec, Some(0.5), &RunSettings::default()) {
            Err(RunError::Validation(report)) => {
                assert!(report.violations.iter().any(|v| v.code == "sharing-factor-below-one"));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }
}
