//! Cross-module integration: assembled programs solved end to end, the
//! explicit assembly as an independent route, and the oracle's constraint
//! encoding cross-validated against program residuals.

use fleetgrid::costs::CostCoefficients;
use fleetgrid::fixtures;
use fleetgrid::lp::{build_program, explicit::build_explicit_program, row_residuals, VarFamily};
use fleetgrid::oracle::{sample_for_cross_check, TinyScenario};
use fleetgrid::report::{reconstruct_billed_peaks, run_single_spec, RunSettings};
use fleetgrid::scenario::{ScenarioSpec, VehicleClass};
use fleetgrid::solver::{solve, SolveSettings, SolveStatus, Solution};

fn solve_spec(spec: &ScenarioSpec) -> (fleetgrid::lp::SparseProgram, fleetgrid::lp::VariableIndex, Solution) {
    let coeffs = CostCoefficients::compute(spec).unwrap();
    let (program, index) = build_program(spec, &coeffs).unwrap();
    let solution = solve(&program, &SolveSettings::default()).unwrap();
    (program, index, solution)
}

#[test]
fn two_hour_pipeline_matches_hand_optimum() {
    let spec = fixtures::tiny_two_hour().to_scenario();
    let (_, _, solution) = solve_spec(&spec);
    assert_eq!(solution.status, SolveStatus::Optimal);
    let expected = fixtures::tiny_two_hour_expected_objective();
    assert!(
        (solution.objective - expected).abs() <= 1e-6 * expected,
        "{} vs hand {expected}",
        solution.objective
    );
}

#[test]
fn explicit_assembly_solves_to_the_same_objective() {
    for fx in [fixtures::tiny_two_hour(), fixtures::tiny_price_dip(), fixtures::tiny_spread()] {
        let spec = fx.to_scenario();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (prod, _) = build_program(&spec, &coeffs).unwrap();
        let (explicit, _) = build_explicit_program(&spec, &coeffs).unwrap();
        let a = solve(&prod, &SolveSettings::default()).unwrap();
        let b = solve(&explicit, &SolveSettings::default()).unwrap();
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
        assert!(
            (a.objective - b.objective).abs() <= 1e-6 * (1.0 + a.objective.abs()),
            "substituted {} vs explicit {}",
            a.objective,
            b.objective
        );
    }
}

#[test]
fn oracle_feasibility_agrees_with_program_residuals() {
    // Two independent encodings of the same constraints must agree: the
    // oracle's accepted points satisfy the assembled rows, its rejected
    // points violate them. The oracle optimum supplies a guaranteed
    // accepted point per fixture; strided sampling supplies the rest.
    let mut accepted = 0;
    let mut rejected = 0;
    for (name, fx, stride) in [
        ("price-dip", fixtures::tiny_price_dip(), 1usize),
        ("envelope", fixtures::tiny_envelope(), 4999),
        ("envelope-tight", fixtures::tiny_envelope_tight(), 1327),
        ("two-battery", fixtures::tiny_two_battery(), 1),
    ] {
        let spec = fx.to_scenario();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (program, _) = build_program(&spec, &coeffs).unwrap();
        let tiny = TinyScenario::new(spec).unwrap();

        let check = |point: &[f64], was_accepted: bool| {
            let report = row_residuals(&program, point).unwrap();
            let max_violation = report
                .rows
                .iter()
                .map(|r| r.violation() / (1.0 + r.rhs.abs()))
                .fold(0.0f64, f64::max);
            if was_accepted {
                assert!(
                    max_violation <= 1e-7,
                    "{name}: oracle accepted a point the program rejects (violation {max_violation:.3e})"
                );
            } else {
                assert!(
                    max_violation > 1e-9,
                    "{name}: oracle rejected a point the program accepts"
                );
            }
        };

        let optimum = fleetgrid::oracle::enumerate_optimum(&tiny, 0.5).unwrap();
        check(&optimum.point, true);
        accepted += 1;

        for sample in sample_for_cross_check(&tiny, 0.5, stride, 200).unwrap() {
            check(&sample.point, sample.accepted);
            if sample.accepted {
                accepted += 1;
            } else {
                rejected += 1;
            }
        }
    }
    assert!(accepted >= 20, "too few accepted samples exercised: {accepted}");
    assert!(rejected >= 20, "too few rejected samples exercised: {rejected}");
}

#[test]
fn solutions_respect_cumulative_and_terminal_charging() {
    for (name, base, s) in [
        ("sharing", fixtures::sharing_scenario(), Some(0.5)),
        ("desk", fixtures::desk_scenario(), Some(0.5)),
    ] {
        let spec = fleetgrid::scenario::shaev_split(&base, s.unwrap()).unwrap();
        let (_, index, solution) = solve_spec(&spec);
        assert_eq!(solution.status, SolveStatus::Optimal, "{name}");
        // The solver certifies violations up to tol * (1 + max |rhs|); the
        // independent recomputation below must agree to that same scale.
        let allow = |scale: f64| 1e-6 * (1.0 + scale) + 2.0 * solution.max_primal_residual + 1e-12;
        let dims = &spec.dims;
        for class in VehicleClass::BOTH {
            let (trips_f, charge_f) = match class {
                VehicleClass::Ldv => (VarFamily::TripsLdv, VarFamily::ChargeLdv),
                VehicleClass::Hdv => (VarFamily::TripsHdv, VarFamily::ChargeHdv),
            };
            for b in 0..dims.batteries(class).len() {
                for r in 0..dims.n_regions() {
                    let mut cum_e_prev = 0.0;
                    let mut cum_p = 0.0;
                    let mut cum_e = 0.0;
                    for t in 0..dims.n_hours {
                        for l in 0..dims.levels(class).len() {
                            cum_p += solution.primal[index.col(charge_f, &[b, t, l, r])];
                        }
                        for d in 0..dims.bins(class).len() {
                            cum_e += solution.primal[index.col(trips_f, &[b, d, t, r])]
                                * fleetgrid::lp::assemble::energy_per_trip(&spec, class, b, d, r);
                        }
                        assert!(
                            cum_p <= cum_e_prev + allow(cum_e_prev),
                            "{name}: charge leads consumption at t={t} ({cum_p} vs {cum_e_prev})"
                        );
                        cum_e_prev = cum_e;
                    }
                    assert!(
                        (cum_p - cum_e).abs() <= allow(cum_e),
                        "{name}: terminal charge {cum_p} vs consumption {cum_e}"
                    );
                }
            }
        }
    }
}

#[test]
fn bundle_accounting_invariants_hold() {
    let spec = fixtures::sharing_scenario();
    let bundle = run_single_spec(&spec, Some(0.5), &RunSettings::default()).unwrap();
    assert_eq!(bundle.status, SolveStatus::Optimal);

    //

    // Moving + idle + charging stays within the fleet, and occupied
    // chargers within the installed count, at the reported primal.
    let split = fleetgrid::scenario::shaev_split(&spec, 0.5).unwrap();
    let (_, index, solution) = solve_spec(&split);
    let dims = &split.dims;
    for class in VehicleClass::BOTH {
        let (fleet_f, chargers_f, idle_f, trips_f, charge_f) = match class {
            VehicleClass::Ldv => (
                VarFamily::FleetLdv,
                VarFamily::ChargersLdv,
                VarFamily::IdleLdv,
                VarFamily::TripsLdv,
                VarFamily::ChargeLdv,
            ),
            VehicleClass::Hdv => (
                VarFamily::FleetHdv,
                VarFamily::ChargersHdv,
                VarFamily::IdleHdv,
                VarFamily::TripsHdv,
                VarFamily::ChargeHdv,
            ),
        };
        for b in 0..dims.batteries(class).len() {
            for r in 0..dims.n_regions() {
                let fleet = solution.primal[index.col(fleet_f, &[b, r])];
                for t in 0..dims.n_hours {
                    let mut busy = solution.primal[index.col(idle_f, &[b, t, r])];
                    for d in 0..dims.bins(class).len() {
                        busy += solution.primal[index.col(trips_f, &[b, d, t, r])]
                            * fleetgrid::lp::assemble::moving_per_trip(&split, class, d, t, r);
                    }
                    for l in 0..dims.levels(class).len() {
                        busy += solution.primal[index.col(charge_f, &[b, t, l, r])]
                            * fleetgrid::lp::assemble::charging_per_kwh(&split, class, b, l, r);
                    }
                    assert!(busy <= fleet + 1e-6 * (1.0 + fleet), "fleet accounting at t={t}");
                }
            }
        }
        for l in 0..dims.levels(class).len() {
            for r in 0..dims.n_regions() {
                let installed = solution.primal[index.col(chargers_f, &[l, r])];
                for t in 0..dims.n_hours {
                    let occupied: f64 = (0..dims.batteries(class).len())
                        .map(|b| {
                            solution.primal[index.col(charge_f, &[b, t, l, r])]
                                * fleetgrid::lp::assemble::charging_per_kwh(&split, class, b, l, r)
                        })
                        .sum();
                    assert!(
                        occupied <= installed + 1e-6 * (1.0 + installed),
                        "charger accounting at t={t}"
                    );
                }
            }
        }
    }
}

#[test]
fn billed_peak_reconstruction_matches_solution() {
    let spec = fixtures::sharing_scenario();
    let split = fleetgrid::scenario::shaev_split(&spec, 0.5).unwrap();
    let (_, index, solution) = solve_spec(&split);
    assert_eq!(solution.status, SolveStatus::Optimal);
    let reconstructed = reconstruct_billed_peaks(&split, &index, &solution.primal);
    for (r, peak) in reconstructed.iter().enumerate() {
        let solved = solution.primal[index.col(VarFamily::PeakDemand, &[r])];
        let expected = peak.net_max_kw.max(0.0);
        assert!(
            (solved - expected).abs() <= 1e-6 * (1.0 + peak.gross_max_kw),
            "region {r}: billed peak {solved} vs reconstruction {expected}"
        );
    }
}

#[test]
fn fleet_cost_component_matches_direct_recomputation() {
    // The reported fleet component must equal the per-vehicle daily costs
    // times the solved fleet sizes, recomputed outside the assembler.
    let spec = fleetgrid::scenario::shaev_split(&fixtures::sharing_scenario(), 0.7).unwrap();
    let coeffs = CostCoefficients::compute(&spec).unwrap();
    let (program, index, solution) = solve_spec(&spec);
    assert_eq!(solution.status, SolveStatus::Optimal);
    let breakdown = fleetgrid::report::cost_breakdown(&program, &index, &solution.primal);
    let mut direct = 0.0;
    let n_days = spec.grid.horizon_days;
    for class in VehicleClass::BOTH {
        let cc = coeffs.class(class);
        let family = match class {
            VehicleClass::Ldv => VarFamily::FleetLdv,
            VehicleClass::Hdv => VarFamily::FleetHdv,
        };
        let fleet = spec.fleet.class(class);
        for b in 0..spec.dims.batteries(class).len() {
            for r in 0..spec.dims.n_regions() {
                let daily = cc.vehicle_per_day[r] + cc.battery_per_kwh_day[r] * fleet.battery_kwh[b];
                direct += n_days * daily * solution.primal[index.col(family, &[b, r])];
            }
        }
    }
    assert!(
        (breakdown.fleet - direct).abs() <= 1e-9 * (1.0 + direct.abs()),
        "fleet component {} vs direct {direct}",
        breakdown.fleet
    );
}

#[test]
fn half_hour_steps_solve_consistently() {
    // Same one-trip day on 0.5 h steps: four steps spanning two hours.
    let mut spec = fixtures::tiny_two_hour().to_scenario();
    let dims = &mut spec.dims;
    dims.n_hours = 4;
    dims.dt_hours = 0.5;
    spec.grid.horizon_days = 2.0 / 24.0;
    let t = 4;
    spec.demand.hdv.trips = vec![1.0, 0.0, 0.0, 0.0];
    spec.demand.hdv.speed_mph = vec![10.0; t];
    spec.demand.ldv.trips = vec![0.0; t];
    spec.demand.ldv.speed_mph = vec![20.0; t];
    spec.exogenous.other_kw = vec![0.0; t];
    spec.exogenous.private_ldv_kw = vec![0.0; t];
    spec.exogenous.private_auto = fleetgrid::scenario::EnvelopeSet::zeros(t);
    spec.exogenous.private_human = fleetgrid::scenario::EnvelopeSet::zeros(t);
    let report = fleetgrid::scenario::validate_scenario(&spec);
    assert!(report.is_valid(), "{report}");

    let (_, index, solution) = solve_spec(&spec);
    assert_eq!(solution.status, SolveStatus::Optimal);

    // Terminal balance: total charge equals the 5 kWh consumed.
    let total_charge: f64 = (1..t)
        .map(|step| solution.primal[index.col(VarFamily::ChargeHdv, &[0, step, 0, 0])])
        .sum();
    assert!((total_charge - 5.0).abs() < 1e-5, "total charge {total_charge}");

    // The billed peak is power, max of charge energy per step over dt.
    let peak = solution.primal[index.col(VarFamily::PeakDemand, &[0])];
    let max_step_kw = (0..t)
        .map(|step| solution.primal[index.col(VarFamily::ChargeHdv, &[0, step, 0, 0])] / 0.5)
        .fold(0.0f64, f64::max);
    assert!((peak - max_step_kw).abs() <= 1e-5 * (1.0 + max_step_kw), "peak {peak} vs {max_step_kw}");

    // A full vehicle is busy while the trip runs: one 10-mile trip at
    // 10 mph spans two half-hour steps worth of duty.
    let moving = solution.primal[index.col(VarFamily::TripsHdv, &[0, 0, 0, 0])]
        * fleetgrid::lp::assemble::moving_per_trip(&spec, VehicleClass::Hdv, 0, 0, 0);
    assert!((moving - 2.0).abs() < 1e-6, "moving-equivalents {moving}");
}

#[test]
fn two_day_horizon_solves_and_reconciles() {
    // Double the sharing day: every hour-indexed table repeats, the
    // horizon spans 48 steps, and the demand split's plug window wraps
    // across midnight between the days.
    let day = fixtures::sharing_scenario();
    let mut spec = day.clone();
    spec.dims.n_hours = 48;
    spec.grid.horizon_days = 2.0;
    let repeat_tr = |v: &[f64]| {
        let mut out = v.to_vec();
        out.extend_from_slice(v);
        out
    };
    for class in VehicleClass::BOTH {
        let (src, dst) = match class {
            VehicleClass::Ldv => (&day.demand.ldv, &mut spec.demand.ldv),
            VehicleClass::Hdv => (&day.demand.hdv, &mut spec.demand.hdv),
        };
        let n_bins = day.dims.bins(class).len();
        let mut trips = Vec::new();
        let mut speed = Vec::new();
        for d in 0..n_bins {
            let chunk = &src.trips[d * 24..(d + 1) * 24];
            trips.extend(repeat_tr(chunk));
            let chunk = &src.speed_mph[d * 24..(d + 1) * 24];
            speed.extend(repeat_tr(chunk));
        }
        dst.trips = trips;
        dst.speed_mph = speed;
    }
    spec.exogenous.other_kw = repeat_tr(&day.exogenous.other_kw);
    spec.exogenous.private_ldv_kw = repeat_tr(&day.exogenous.private_ldv_kw);
    spec.exogenous.private_auto = fleetgrid::scenario::EnvelopeSet::zeros(48);
    spec.exogenous.private_human = fleetgrid::scenario::EnvelopeSet::zeros(48);

    let split = fleetgrid::scenario::shaev_split(&spec, 0.5).unwrap();
    let report = fleetgrid::scenario::validate_scenario(&split);
    assert!(report.is_valid(), "{report}");
    let bundle = run_single_spec(&spec, Some(0.5), &RunSettings::default()).unwrap();
    assert_eq!(bundle.status, SolveStatus::Optimal);
    // Two identical days cost roughly twice one day; fleet capital is
    // paid per day so the relation is near-exact.
    let one_day = run_single_spec(&day, Some(0.5), &RunSettings::default()).unwrap();
    let ratio = bundle.objective / one_day.objective;
    assert!(
        (1.8..=2.1).contains(&ratio),
        "two-day cost {} vs one-day {} (ratio {ratio})",
        bundle.objective,
        one_day.objective
    );
    let total = bundle.costs.total();
    assert!((total - bundle.objective).abs() <= 1e-6 * (1.0 + bundle.objective.abs()));
}
