//! Delimited-table output. One file per result family, each with a
//! `# fleetgrid <table> v1` schema comment naming units. Values use
//! shortest round-trip float formatting and fixed row order, so identical
//! runs write identical bytes.

use super::ReportBundle;
use crate::scenario::ScenarioSpec;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

pub fn write_bundle(bundle: &ReportBundle, spec: &ScenarioSpec, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("load_profile.csv"), load_profile_csv(bundle))?;
    fs::write(dir.join("chargers.csv"), counts_csv(bundle, true))?;
    fs::write(dir.join("fleet.csv"), counts_csv(bundle, false))?;
    fs::write(dir.join("peaks.csv"), peaks_csv(bundle))?;
    fs::write(dir.join("costs.csv"), costs_csv(bundle))?;
    fs::write(dir.join("dispatch.csv"), dispatch_csv(bundle, spec))?;
    fs::write(dir.join("prices.csv"), prices_csv(bundle, spec))?;
    fs::write(dir.join("flows.csv"), flows_csv(bundle, spec))?;
    fs::write(dir.join("intermediates.csv"), intermediates_csv(bundle))?;
    fs::write(dir.join("diagnostics.csv"), diagnostics_csv(bundle))?;
    fs::write(dir.join("summary.csv"), summary_csv(bundle))?;
    Ok(())
}

fn load_profile_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("# fleetgrid load_profile v1; units: kW per hour-of-horizon\nt,region,category,level,kw\n");
    for row in &bundle.load_profile {
        let _ = writeln!(out, "{},{},{},{},{}", row.t, row.region, row.category, row.level, row.kw);
    }
    out
}

fn counts_csv(bundle: &ReportBundle, chargers: bool) -> String {
    let (comment, header, rows) = if chargers {
        ("# fleetgrid chargers v1; units: chargers\n", "class,level,region,count\n", &bundle.charger_counts)
    } else {
        ("# fleetgrid fleet v1; units: vehicles\n", "class,battery,region,vehicles\n", &bundle.fleet_sizes)
    };
    let mut out = String::from(comment);
    out.push_str(header);
    for row in rows {
        let _ = writeln!(out, "{},{},{},{}", row.class.tag(), row.name, row.region, row.value);
    }
    out
}

fn peaks_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("# fleetgrid peaks v1; units: kW\nkind,region,kw\n");
    for (region, kw) in &bundle.billed_peaks {
        let _ = writeln!(out, "billed,{region},{kw}");
    }
    for (region, kw) in &bundle.grid_peaks {
        let _ = writeln!(out, "grid,{region},{kw}");
    }
    let _ = writeln!(out, "system,-,{}", bundle.system_peak_kw);
    out
}

fn costs_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("# fleetgrid costs v1; units: USD over the horizon\ncomponent,usd\n");
    for (name, value) in bundle.costs.components() {
        let _ = writeln!(out, "{name},{value}");
    }
    let _ = writeln!(out, "total,{}", bundle.costs.total());
    let _ = writeln!(out, "objective,{}", bundle.objective);
    out
}

fn dispatch_csv(bundle: &ReportBundle, spec: &ScenarioSpec) -> String {
    let mut out = String::from("# fleetgrid dispatch v1; units: kWh per step\ngenerator,t,energy_kwh,state\n");
    for row in &bundle.dispatch.generators {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            spec.dims.generators[row.generator],
            row.t,
            row.energy_kwh,
            row.state.name()
        );
    }
    out
}

fn prices_csv(bundle: &ReportBundle, spec: &ScenarioSpec) -> String {
    let mut out = String::from("# fleetgrid prices v1; units: USD/kWh (empty when duals unavailable)\ngrid_region,t,price\n");
    for row in &bundle.dispatch.regions {
        let price = row.price.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", spec.dims.grid_regions[row.region], row.t, price);
    }
    out
}

fn flows_csv(bundle: &ReportBundle, spec: &ScenarioSpec) -> String {
    let mut out = String::from("# fleetgrid flows v1; units: kWh per step sent\nfrom,to,t,energy_kwh,binding\n");
    for row in &bundle.dispatch.flows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            spec.dims.grid_regions[row.from],
            spec.dims.grid_regions[row.to],
            row.t,
            row.energy_kwh,
            row.binding
        );
    }
    out
}

fn intermediates_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from(
        "# fleetgrid intermediates v1; energy in kWh, moving/charging/idle in vehicles\nkind,class,battery,bin_or_level,t,region,value\n",
    );
    let im = &bundle.intermediates;
    for &(class, b, d, t, r, v) in &im.energy_kwh {
        let _ = writeln!(out, "energy,{},{b},{d},{t},{r},{v}", class.tag());
    }
    for &(class, b, d, t, r, v) in &im.moving {
        let _ = writeln!(out, "moving,{},{b},{d},{t},{r},{v}", class.tag());
    }
    for &(class, b, t, l, r, v) in &im.charging {
        let _ = writeln!(out, "charging,{},{b},{l},{t},{r},{v}", class.tag());
    }
    for &(class, b, t, r, v) in &im.idle {
        let _ = writeln!(out, "idle,{},{b},-,{t},{r},{v}", class.tag());
    }
    out
}

fn diagnostics_csv(bundle: &ReportBundle) -> String {
    let d = &bundle.diagnostics;
    let mut out = String::from("# fleetgrid diagnostics v1\nkey,value\n");
    let _ = writeln!(out, "status,{}", d.status.name());
    let _ = writeln!(out, "iterations,{}", d.iterations);
    let _ = writeln!(out, "max_primal_residual,{}", d.max_primal_residual);
    let _ = writeln!(out, "max_dual_residual,{}", d.max_dual_residual);
    let _ = writeln!(out, "relative_gap,{}", d.relative_gap);
    let _ = writeln!(out, "certified,{}", d.certified);
    let _ = writeln!(out, "merit_violations,{}", bundle.merit_violations);
    for (family, violation) in d.family_violations.iter().take(8) {
        let _ = writeln!(out, "violation.{},{}", family.name(), violation);
    }
    out
}

fn summary_csv(bundle: &ReportBundle) -> String {
    let fleet_total: f64 = bundle.fleet_sizes.iter().map(|r| r.value).sum();
    let charger_total: f64 = bundle.charger_counts.iter().map(|r| r.value).sum();
    let mut out = String::from(
        "# fleetgrid summary v1\nshare_fraction,status,objective_usd,system_peak_kw,fleet_vehicles,chargers\n",
    );
    let share = bundle.share_fraction.map(|s| s.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{share},{},{},{},{fleet_total},{charger_total}",
        bundle.status.name(),
        bundle.objective,
        bundle.system_peak_kw
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::report::{run_single_spec, RunSettings};

    #[test]
    fn written_tables_are_complete_and_deterministic() {
        let spec = fixtures::sharing_scenario();
        let bundle = run_single_spec(&spec, Some(0.5), &RunSettings::default()).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let dir_a = tmp.path().join("a");
        let dir_b = tmp.path().join("b");
        write_bundle(&bundle, &spec, &dir_a).unwrap();
        write_bundle(&bundle, &spec, &dir_b).unwrap();
        let names = [
            "load_profile.csv",
            "chargers.csv",
            "fleet.csv",
            "peaks.csv",
            "costs.csv",
            "dispatch.csv",
            "prices.csv",
            "flows.csv",
            "intermediates.csv",
            "diagnostics.csv",
            "summary.csv",
        ];
        for name in names {
            let a = fs::read(dir_a.join(name)).unwrap();
            let b = fs::read(dir_b.join(name)).unwrap();
            assert!(!a.is_empty(), "{name} empty");
            assert_eq!(a, b, "{name} differs between identical writes");
        }
    }
}
