//! End-to-end binary tests: exit codes, output files, config handling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fleetgrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fleetgrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_scenario(spec: &fleetgrid::ScenarioSpec, dir: &Path) {
    fleetgrid::scenario::save_scenario(spec, dir).unwrap();
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good");
    write_scenario(&fleetgrid::fixtures::sharing_scenario(), &good);
    let out = fleetgrid(&["validate", "--scenario", good.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{out:?}");

    let mut bad_spec = fleetgrid::fixtures::sharing_scenario();
    bad_spec.demand.hdv.sharing[0] = 0.25;
    let bad = tmp.path().join("bad");
    write_scenario(&bad_spec, &bad);
    let out = fleetgrid(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sharing-factor-below-one"), "{text}");

    let out = fleetgrid(&["validate", "--scenario", tmp.path().join("missing").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn solve_writes_tables_and_reports_optimal() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("tiny");
    write_scenario(&fleetgrid::fixtures::tiny_two_hour().to_scenario(), &dir);
    let run = tmp.path().join("run");
    let out = fleetgrid(&[
        "solve",
        "--scenario",
        dir.to_str().unwrap(),
        "--share-fraction",
        "1",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("status: optimal"), "{text}");
    for table in ["load_profile.csv", "costs.csv", "summary.csv", "prices.csv"] {
        assert!(run.join(table).exists(), "missing {table}");
    }
}

#[test]
fn infeasible_scenario_exits_three() {
    // Demand in the final hour can never be recharged before the terminal
    // balance, so this program is infeasible.
    let tmp = tempfile::tempdir().unwrap();
    let mut fx = fleetgrid::fixtures::tiny_zero_demand();
    fx.trips[1] = 1.0;
    let dir = tmp.path().join("impossible");
    write_scenario(&fx.to_scenario(), &dir);
    let out = fleetgrid(&[
        "solve",
        "--scenario",
        dir.to_str().unwrap(),
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("most violated row families"), "{err}");
}

#[test]
fn sweep_writes_members_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sharing");
    write_scenario(&fleetgrid::fixtures::sharing_scenario(), &dir);
    let out_dir = tmp.path().join("sweep");
    let out = fleetgrid(&[
        "sweep",
        "--scenario",
        dir.to_str().unwrap(),
        "--share-fractions",
        "0,1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("sweep_summary.csv").exists());
    assert!(out_dir.join("s_0").join("summary.csv").exists());
    assert!(out_dir.join("s_1").join("summary.csv").exists());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with('0') || l.starts_with('1')).count(), 2, "{text}");
}

#[test]
fn sweep_rejects_out_of_range_fraction() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sharing");
    write_scenario(&fleetgrid::fixtures::sharing_scenario(), &dir);
    let out = fleetgrid(&[
        "sweep",
        "--scenario",
        dir.to_str().unwrap(),
        "--share-fractions",
        "0,1.5",
        "--out",
        tmp.path().join("sweep").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn dump_lp_emits_interchange_text() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("tiny");
    write_scenario(&fleetgrid::fixtures::tiny_two_hour().to_scenario(), &dir);
    let out = fleetgrid(&["dump-lp", "--scenario", dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Minimize"));
    assert!(text.contains("Subject To"));
    assert!(text.contains("terminal_soc_hdv(0,0):"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn certify_with_oracle_passes_on_tiny() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("tiny");
    write_scenario(&fleetgrid::fixtures::tiny_two_hour().to_scenario(), &dir);
    let out = fleetgrid(&[
        "certify",
        "--scenario",
        dir.to_str().unwrap(),
        "--oracle",
        "--grid-step",
        "0.25",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("oracle: pass"), "{text}");
}

#[test]
fn certify_oracle_refuses_oversized_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sharing");
    write_scenario(&fleetgrid::fixtures::sharing_scenario(), &dir);
    let out = fleetgrid(&["certify", "--scenario", dir.to_str().unwrap(), "--oracle"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tiny"), "{out:?}");
}

#[test]
fn init_example_round_trips_through_validate() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["tiny", "sharing", "desk"] {
        let dir = tmp.path().join(kind);
        let out = fleetgrid(&["init-example", "--kind", kind, "--out", dir.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0);
        let out = fleetgrid(&["validate", "--scenario", dir.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "{kind} example failed validation");
    }
}

#[test]
fn worker_env_var_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sharing");
    write_scenario(&fleetgrid::fixtures::sharing_scenario(), &dir);
    let out = Command::new(env!("CARGO_BIN_EXE_fleetgrid"))
        .env("FLEETGRID_WORKERS", "1")
        .args([
            "sweep",
            "--scenario",
            dir.to_str().unwrap(),
            "--share-fractions",
            "0.25,0.75",
            "--out",
            tmp.path().join("sweep").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_version_checked() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("tiny");
    write_scenario(&fleetgrid::fixtures::tiny_two_hour().to_scenario(), &dir);

    let good = tmp.path().join("good.conf");
    fs::write(&good, "config_version = 1\nmax_iterations = 150\nworkers = 2\n").unwrap();
    let out = fleetgrid(&[
        "solve",
        "--scenario",
        dir.to_str().unwrap(),
        "--out",
        tmp.path().join("run").to_str().unwrap(),
        "--config",
        good.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let stale = tmp.path().join("stale.conf");
    fs::write(&stale, "max_iterations = 150\n").unwrap();
    let out = fleetgrid(&[
        "solve",
        "--scenario",
        dir.to_str().unwrap(),
        "--out",
        tmp.path().join("run2").to_str().unwrap(),
        "--config",
        stale.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("config_version"));
}
