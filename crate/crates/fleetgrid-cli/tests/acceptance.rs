//! Acceptance suite: every release criterion as one test printing a
//! single `ACCEPTANCE <criterion>: PASS/FAIL` line with its pinned
//! tolerance. Run with `cargo test -p fleetgrid-cli --test acceptance`.

use fleetgrid::costs::CostCoefficients;
use fleetgrid::dispatch::{extract_dispatch, verify_merit_order};
use fleetgrid::fixtures;
use fleetgrid::lp::{build_program, explicit::build_explicit_program, row_residuals, RowFamily, Sense};
use fleetgrid::oracle::{enumerate_optimum, TinyScenario};
use fleetgrid::report::{reconstruct_billed_peaks, run_single_spec, run_sweep_spec, RunSettings};
use fleetgrid::scenario::{shaev_split, ScenarioSpec};
use fleetgrid::solver::{solve, SolveSettings, SolveStatus, Solution};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn report(name: &str, pass: bool) {
    println!("ACCEPTANCE {name}: {}", if pass { "PASS" } else { "FAIL" });
}

fn solve_spec(spec: &ScenarioSpec) -> (fleetgrid::lp::SparseProgram, fleetgrid::lp::VariableIndex, Solution) {
    let coeffs = CostCoefficients::compute(spec).unwrap();
    let (program, index) = build_program(spec, &coeffs).unwrap();
    let solution = solve(&program, &SolveSettings::default()).unwrap();
    (program, index, solution)
}

/// Every scenario the merit-order and no-slack-peak criteria sweep over.
fn corpus() -> Vec<(String, ScenarioSpec)> {
    let mut out: Vec<(String, ScenarioSpec)> = fixtures::tiny_all()
        .into_iter()
        .map(|(name, fx)| (format!("tiny/{name}"), fx.to_scenario()))
        .collect();
    for s in [0.0, 0.5, 1.0] {
        out.push((format!("sharing/s={s}"), shaev_split(&fixtures::sharing_scenario(), s).unwrap()));
    }
    out.push(("desk/s=0.5".into(), shaev_split(&fixtures::desk_scenario(), 0.5).unwrap()));
    out.push(("two-region".into(), fixtures::two_region_grid()));
    out
}

// ---------------------------------------------------------------------------

#[test]
fn oracle_equivalence() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let fixtures_checked = fixtures::tiny_all();
    assert!(fixtures_checked.len() >= 5, "need at least five tiny fixtures");
    for (name, fx) in &fixtures_checked {
        let spec = fx.to_scenario();
        let (program, _, solution) = solve_spec(&spec);
        if solution.status != SolveStatus::Optimal {
            failures.push(format!("{name}: solver returned {}", solution.status.name()));
            continue;
        }
        let tiny = TinyScenario::new(spec).unwrap();
        let oracle = enumerate_optimum(&tiny, fx.grid_step).unwrap();
        let band = oracle.slack_objective + 1e-6 * (1.0 + oracle.objective.abs());
        let gap = solution.objective - oracle.objective;
        if gap > band || gap < -band {
            failures.push(format!(
                "{name}: pipeline {} vs oracle {} (band {band:.3e})",
                solution.objective, oracle.objective
            ));
        }
        let feasible = row_residuals(&program, &solution.primal)
            .unwrap()
            .feasible_within(1e-6);
        if !feasible {
            failures.push(format!("{name}: pipeline point fails residuals at 1e-6"));
        }
    }
    let elapsed = started.elapsed();
    let in_time = elapsed.as_secs_f64() < 60.0;
    let pass = failures.is_empty() && in_time;
    report("oracle-equivalence", pass);
    assert!(pass, "failures: {failures:?}; elapsed {elapsed:?} (budget 60 s)");
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum Expect {
    /// Some row of the family sits on its boundary (within 1e-6 scaled)
    /// while carrying nonzero gross activity.
    Binding,
    /// Some inequality row sits strictly inside its boundary, and every
    /// strictly-slack row carries a (near-)zero dual.
    Slack,
    /// Equality family in its vacuous state: rows hold with zero activity.
    Vacuous,
    /// Fix-to-zero family doing real work: the pinned columns are zero
    /// while the same variables are active elsewhere in the horizon.
    Pinned,
}

struct FamilyCase {
    name: &'static str,
    rows: &'static [RowFamily],
    explicit: bool,
    fixture: fn() -> ScenarioSpec,
    expect: Expect,
}

fn spec_of(fx: fixtures::TinyFixture) -> ScenarioSpec {
    fx.to_scenario()
}

fn family_cases() -> Vec<FamilyCase> {
    use RowFamily::*;
    fn two_hour() -> ScenarioSpec {
        spec_of(fixtures::tiny_two_hour())
    }
    fn zero() -> ScenarioSpec {
        spec_of(fixtures::tiny_zero_demand())
    }
    fn spread() -> ScenarioSpec {
        spec_of(fixtures::tiny_spread())
    }
    fn price_dip() -> ScenarioSpec {
        spec_of(fixtures::tiny_price_dip())
    }
    fn battery_tight() -> ScenarioSpec {
        spec_of(fixtures::tiny_battery_tight())
    }
    fn free_gen() -> ScenarioSpec {
        spec_of(fixtures::tiny_free_gen())
    }
    fn merit() -> ScenarioSpec {
        spec_of(fixtures::tiny_merit())
    }
    fn env() -> ScenarioSpec {
        spec_of(fixtures::tiny_envelope())
    }
    fn env_tight() -> ScenarioSpec {
        spec_of(fixtures::tiny_envelope_tight())
    }
    fn env_forced() -> ScenarioSpec {
        spec_of(fixtures::tiny_envelope_forced())
    }
    fn env_human() -> ScenarioSpec {
        spec_of(fixtures::with_human_envelope(fixtures::tiny_envelope()))
    }
    fn env_human_tight() -> ScenarioSpec {
        spec_of(fixtures::with_human_envelope(fixtures::tiny_envelope_tight()))
    }
    fn env_human_forced() -> ScenarioSpec {
        spec_of(fixtures::with_human_envelope(fixtures::tiny_envelope_forced()))
    }

    let b = |name, rows, fixture| FamilyCase { name, rows, explicit: false, fixture, expect: Expect::Binding };
    let s = |name, rows, fixture| FamilyCase { name, rows, explicit: false, fixture, expect: Expect::Slack };
    let v = |name, rows, fixture| FamilyCase { name, rows, explicit: false, fixture, expect: Expect::Vacuous };

    vec![
        b("demand-allocation", &[DemandAllocLdv, DemandAllocHdv][..], two_hour),
        v("demand-allocation", &[DemandAllocLdv, DemandAllocHdv][..], zero),
        FamilyCase { name: "energy-to-meet-demand", rows: &[DefEnergyLdv, DefEnergyHdv], explicit: true, fixture: two_hour, expect: Expect::Binding },
        FamilyCase { name: "energy-to-meet-demand", rows: &[DefEnergyLdv, DefEnergyHdv], explicit: true, fixture: zero, expect: Expect::Vacuous },
        FamilyCase { name: "vehicles-moving", rows: &[DefMovingLdv, DefMovingHdv], explicit: true, fixture: two_hour, expect: Expect::Binding },
        FamilyCase { name: "vehicles-moving", rows: &[DefMovingLdv, DefMovingHdv], explicit: true, fixture: zero, expect: Expect::Vacuous },
        FamilyCase { name: "vehicles-charging", rows: &[DefChargingLdv, DefChargingHdv], explicit: true, fixture: two_hour, expect: Expect::Binding },
        FamilyCase { name: "vehicles-charging", rows: &[DefChargingLdv, DefChargingHdv], explicit: true, fixture: zero, expect: Expect::Vacuous },
        b("charge-upper", &[ChargeUpperLdv, ChargeUpperHdv][..], two_hour),
        s("charge-upper", &[ChargeUpperLdv, ChargeUpperHdv][..], spread),
        b("charge-lower", &[ChargeLowerLdv, ChargeLowerHdv][..], battery_tight),
        s("charge-lower", &[ChargeLowerLdv, ChargeLowerHdv][..], two_hour),
        FamilyCase { name: "no-charge-at-start", rows: &[NoChargeStartLdv, NoChargeStartHdv], explicit: false, fixture: two_hour, expect: Expect::Pinned },
        v("no-charge-at-start", &[NoChargeStartLdv, NoChargeStartHdv][..], zero),
        b("terminal-state-of-charge", &[TerminalSocLdv, TerminalSocHdv][..], two_hour),
        v("terminal-state-of-charge", &[TerminalSocLdv, TerminalSocHdv][..], zero),
        b("fleet-dispatch", &[FleetDispatchLdv, FleetDispatchHdv][..], two_hour),
        s("fleet-dispatch", &[FleetDispatchLdv, FleetDispatchHdv][..], battery_tight),
        b("max-charging", &[MaxChargingLdv, MaxChargingHdv][..], two_hour),
        s("max-charging", &[MaxChargingLdv, MaxChargingHdv][..], price_dip),
        b("max-demand", &[MaxDemand][..], two_hour),
        s("max-demand", &[MaxDemand][..], price_dip),
        b("private-auto-power", &[PrivAutoPowerLb, PrivAutoPowerUb][..], env_tight),
        s("private-auto-power", &[PrivAutoPowerLb, PrivAutoPowerUb][..], env),
        b("private-auto-energy", &[PrivAutoEnergyLb, PrivAutoEnergyUb][..], env),
        s("private-auto-energy", &[PrivAutoEnergyLb, PrivAutoEnergyUb][..], env_forced),
        b("private-human-power", &[PrivHumanPowerLb, PrivHumanPowerUb][..], env_human_tight),
        s("private-human-power", &[PrivHumanPowerLb, PrivHumanPowerUb][..], env_human),
        b("private-human-energy", &[PrivHumanEnergyLb, PrivHumanEnergyUb][..], env_human),
        s("private-human-energy", &[PrivHumanEnergyLb, PrivHumanEnergyUb][..], env_human_forced),
        b("generation-balance", &[GenBalance][..], merit),
        s("generation-balance", &[GenBalance][..], free_gen),
    ]
}

#[test]
fn constraint_family_suite() {
    const TOL: f64 = 1e-6;
    let mut failures = Vec::new();
    let cases = family_cases();
    // Sixteen families, each with a binding and a non-binding fixture.
    assert_eq!(cases.len(), 32);

    for case in &cases {
        let spec = (case.fixture)();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (program, index) = if case.explicit {
            build_explicit_program(&spec, &coeffs).unwrap()
        } else {
            build_program(&spec, &coeffs).unwrap()
        };
        let solution = solve(&program, &SolveSettings::default()).unwrap();
        if solution.status != SolveStatus::Optimal {
            failures.push(format!("{}: solver returned {}", case.name, solution.status.name()));
            continue;
        }
        let residuals = row_residuals(&program, &solution.primal).unwrap();

        // Rows of the family with their boundary distance, gross term
        // activity, and dual.
        let mut rows = Vec::new();
        for (row, res) in residuals.rows.iter().enumerate() {
            if case.rows.contains(&res.label.family) {
                let distance = match res.sense {
                    Sense::Le => res.rhs - res.lhs,
                    Sense::Ge => res.lhs - res.rhs,
                    Sense::Eq => (res.lhs - res.rhs).abs(),
                };
                let activity: f64 = program
                    .row_entries(row)
                    .map(|(c, v)| (v * solution.primal[c]).abs())
                    .sum();
                rows.push((res, distance, activity, solution.duals[row]));
            }
        }
        if rows.is_empty() {
            failures.push(format!("{}: no rows assembled", case.name));
            continue;
        }
        // All rows must be satisfied at the tolerance regardless of state.
        for (res, _, _, _) in &rows {
            if res.violation() > TOL * (1.0 + res.rhs.abs()) {
                failures.push(format!("{}: {} violated by {:.3e}", case.name, res.label, res.violation()));
            }
        }
        let scale = |res: &fleetgrid::lp::RowResidual| 1.0 + res.rhs.abs().max(res.lhs.abs());
        let dual_scale = 1.0 + rows.iter().map(|&(_, _, _, y)| y.abs()).fold(0.0f64, f64::max);
        match case.expect {
            Expect::Binding => {
                let ok = rows.iter().any(|&(_, distance, activity, _)| {
                    distance.abs() <= TOL * (1.0 + activity) && activity > TOL
                });
                let _ = scale;
                if !ok {
                    failures.push(format!("{}: expected a binding row with activity", case.name));
                }
            }
            Expect::Slack => {
                let ok = rows.iter().any(|&(res, distance, activity, _)| {
                    distance > TOL * (1.0 + activity.max(scale(res) - 1.0))
                });
                if !ok {
                    failures.push(format!("{}: expected a strictly slack row", case.name));
                }
                // Complementary slackness: strictly slack rows carry no
                // dual weight.
                for &(res, distance, activity, dual) in &rows {
                    if res.sense != Sense::Eq
                        && distance > 1e-4 * (1.0 + activity)
                        && dual.abs() > 1e-5 * dual_scale
                    {
                        failures.push(format!(
                            "{}: slack row {} has dual {dual:.3e}",
                            case.name, res.label
                        ));
                    }
                }
            }
            Expect::Vacuous => {
                let ok = rows.iter().all(|&(res, _, activity, _)| activity <= TOL && res.rhs.abs() <= TOL);
                if !ok {
                    failures.push(format!("{}: expected vacuous rows", case.name));
                }
            }
            Expect::Pinned => {
                let held = rows.iter().all(|&(_, _, activity, _)| activity <= TOL);
                let charge_active: f64 = index
                    .families()
                    .filter(|(f, _)| {
                        matches!(f, fleetgrid::lp::VarFamily::ChargeLdv | fleetgrid::lp::VarFamily::ChargeHdv)
                    })
                    .flat_map(|(_, range)| range)
                    .map(|col| solution.primal[col])
                    .sum();
                if !held || charge_active <= TOL {
                    failures.push(format!(
                        "{}: pinned rows must hold with charging active elsewhere (held={held}, charge={charge_active})",
                        case.name
                    ));
                }
            }
        }
    }
    let pass = failures.is_empty();
    report("constraint-family-suite", pass);
    assert!(pass, "{failures:#?}");
}

// ---------------------------------------------------------------------------

#[test]
fn amortization_limit() {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;

    let mut failures = Vec::new();

    // Zero-rate limit across a grid of capital and lifetime.
    for capital in [1.0, 10.0, 1000.0, 5e4, 1.2e5, 9.9e6] {
        for lifetime in [1.0, 30.0, 365.0, 3650.0, 14600.0] {
            let limit = capital / lifetime;
            let near = fleetgrid::costs::amortize_daily(capital, 1e-12, lifetime).unwrap();
            if (near - limit).abs() > 1e-6 * limit {
                failures.push(format!("limit failure at ({capital}, {lifetime}): {near} vs {limit}"));
            }
        }
    }

    // Twenty deterministic pseudo-random triples against exact rational
    // arithmetic at 1e-9 relative.
    let ratio = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let one = BigRational::from(BigInt::from(1));
    let mut state: u64 = 0x2545f4914f6cdd1d;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 33) as i64
    };
    for _ in 0..20 {
        let capital = 1 + next() % 2_000_000;
        let rate_millionths = 1 + next() % 5000;
        let lifetime = (1 + next() % 15_000) as u32;
        let value = fleetgrid::costs::amortize_daily(
            capital as f64,
            rate_millionths as f64 / 1_000_000.0,
            lifetime as f64,
        )
        .unwrap();
        let rate = ratio(rate_millionths, 1_000_000);
        let growth = (one.clone() + rate.clone()).pow(lifetime as i32);
        let exact = ratio(capital, 1) * rate * growth.clone() / (growth - one.clone());
        let value_rat = BigRational::from_float(value).unwrap();
        let err = (value_rat - exact.clone()).abs();
        if err > exact.abs() * ratio(1, 1_000_000_000) {
            failures.push(format!(
                "closed-form mismatch at ({capital}, {rate_millionths}e-6, {lifetime})"
            ));
        }
    }

    let pass = failures.is_empty();
    report("amortization-limit", pass);
    assert!(pass, "{failures:#?}");
}

// ---------------------------------------------------------------------------

#[test]
fn sharing_monotonicity() {
    // Scaling every sharing factor by k weakly enlarges the feasible set,
    // so the optimum cannot rise.
    let base = fixtures::sharing_scenario();
    let mut objectives = Vec::new();
    for k in [1.0, 2.0, 4.0] {
        let mut spec = base.clone();
        for sigma in spec.demand.ldv.sharing.iter_mut().chain(spec.demand.hdv.sharing.iter_mut()) {
            *sigma *= k;
        }
        let (_, _, solution) = solve_spec(&spec);
        assert_eq!(solution.status, SolveStatus::Optimal, "k={k}");
        objectives.push((k, solution.objective));
    }
    let pass = objectives.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-8 * (1.0 + w[0].1.abs()));
    report("sharing-monotonicity", pass);
    assert!(pass, "objectives not non-increasing: {objectives:?}");
}

// ---------------------------------------------------------------------------

#[test]
fn sweep_directionality() {
    let started = Instant::now();
    let base = fixtures::sharing_scenario();
    let fractions = [0.0, 0.25, 0.5, 0.75, 1.0];
    let sweep = run_sweep_spec(&base, &fractions, &RunSettings::default(), None).unwrap();
    assert!(sweep.all_optimal(), "{}", sweep.summary_csv());

    let rows: Vec<(f64, f64, f64)> = sweep
        .members
        .iter()
        .map(|m| {
            let b = m.bundle.as_ref().unwrap();
            (m.share_fraction, b.objective, b.system_peak_kw)
        })
        .collect();
    let costs_ok = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-6 * (1.0 + w[0].1.abs()));
    let peaks_ok = rows.windows(2).all(|w| w[1].2 <= w[0].2 + 1e-6 * (1.0 + w[0].2.abs()));
    let in_time = started.elapsed().as_secs_f64() < 300.0;
    let pass = costs_ok && peaks_ok && in_time;
    report("sweep-directionality", pass);
    assert!(
        pass,
        "costs_ok={costs_ok} peaks_ok={peaks_ok} in_time={in_time}; rows={rows:?}"
    );
}

// ---------------------------------------------------------------------------

#[test]
fn merit_order_property() {
    let mut failures = Vec::new();
    for (name, spec) in corpus() {
        let (program, index, solution) = solve_spec(&spec);
        if solution.status != SolveStatus::Optimal {
            failures.push(format!("{name}: {}", solution.status.name()));
            continue;
        }
        let dispatch = extract_dispatch(&program, &solution, &index, &spec);
        let violations = verify_merit_order(&dispatch, &spec);
        if !violations.is_empty() {
            failures.push(format!("{name}: {} violations, first: {}", violations.len(), violations[0]));
        }
    }
    let pass = failures.is_empty();
    report("merit-order", pass);
    assert!(pass, "{failures:#?}");
}

// ---------------------------------------------------------------------------

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let mut entries: Vec<_> = std::fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("scenario");
    fleetgrid::scenario::save_scenario(&fixtures::sharing_scenario(), &scenario).unwrap();
    let binary = env!("CARGO_BIN_EXE_fleetgrid");

    let mut pass = true;
    let mut detail = String::new();

    for (label, args, out_a, out_b) in [
        ("solve", vec!["solve", "--share-fraction", "0.5"], "run_a", "run_b"),
        ("sweep", vec!["sweep", "--share-fractions", "0,0.5,1"], "sweep_a", "sweep_b"),
    ] {
        let run = |out: &str| {
            let status = Command::new(binary)
                .args(&args)
                .args(["--scenario", scenario.to_str().unwrap(), "--out", tmp.path().join(out).to_str().unwrap()])
                .output()
                .unwrap();
            assert!(status.status.success(), "{label} run failed: {status:?}");
        };
        run(out_a);
        run(out_b);
        let a = read_tree(&tmp.path().join(out_a));
        let b = read_tree(&tmp.path().join(out_b));
        if a.is_empty() || a.len() != b.len() {
            pass = false;
            detail.push_str(&format!("{label}: file sets differ ({} vs {})\n", a.len(), b.len()));
            continue;
        }
        for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
            if name_a != name_b || bytes_a != bytes_b {
                pass = false;
                detail.push_str(&format!("{label}: {name_a} differs between reruns\n"));
            }
        }
    }

    // Library-level: identical solves produce identical solution bytes.
    let spec = shaev_split(&fixtures::sharing_scenario(), 0.5).unwrap();
    let (program, _, _) = solve_spec(&spec);
    let s1 = solve(&program, &SolveSettings::default()).unwrap();
    let s2 = solve(&program, &SolveSettings::default()).unwrap();
    if s1.canonical_bytes() != s2.canonical_bytes() {
        pass = false;
        detail.push_str("library solve bytes differ\n");
    }

    report("determinism", pass);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------------------

#[test]
fn no_slack_peak() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, spec) in corpus() {
        if spec.grid.demand_charge.iter().all(|&b| b == 0.0) {
            continue;
        }
        let (_, index, solution) = solve_spec(&spec);
        if solution.status != SolveStatus::Optimal {
            failures.push(format!("{name}: {}", solution.status.name()));
            continue;
        }
        checked += 1;
        let reconstructed = reconstruct_billed_peaks(&spec, &index, &solution.primal);
        for (r, peak) in reconstructed.iter().enumerate() {
            if spec.grid.demand_charge[r] == 0.0 {
                continue;
            }
            let solved = solution.primal[index.col(fleetgrid::lp::VarFamily::PeakDemand, &[r])];
            let expected = peak.net_max_kw.max(0.0);
            if (solved - expected).abs() > 1e-6 * (1.0 + peak.gross_max_kw) {
                failures.push(format!("{name} region {r}: peak {solved} vs max net demand {expected}"));
            }
        }
    }
    let pass = failures.is_empty() && checked >= 5;
    report("no-slack-peak", pass);
    assert!(pass, "checked {checked}: {failures:#?}");
}

// ---------------------------------------------------------------------------

#[test]
fn scale() {
    let spec = shaev_split(&fixtures::desk_scenario(), 0.5).unwrap();
    let started = Instant::now();
    let coeffs = CostCoefficients::compute(&spec).unwrap();
    let (program, _) = build_program(&spec, &coeffs).unwrap();
    let solution = solve(&program, &SolveSettings::default()).unwrap();
    let elapsed = started.elapsed();
    let pass = solution.status == SolveStatus::Optimal && elapsed.as_secs_f64() < 10.0;
    report("scale", pass);
    assert!(
        pass,
        "status {} after {elapsed:?} (budget 10 s; {} rows, {} cols)",
        solution.status.name(),
        program.n_rows(),
        program.n_cols()
    );
}

// ---------------------------------------------------------------------------

#[test]
fn bundle_cost_identity() {
    // Companion check that the reported decomposition always reconciles
    // with the solver objective on the acceptance scenarios.
    let mut pass = true;
    for s in [0.0, 0.5, 1.0] {
        let bundle = run_single_spec(&fixtures::sharing_scenario(), Some(s), &RunSettings::default()).unwrap();
        let total = bundle.costs.total();
        if (total - bundle.objective).abs() > 1e-6 * (1.0 + bundle.objective.abs()) {
            pass = false;
        }
    }
    report("cost-decomposition-identity", pass);
    assert!(pass);
}
