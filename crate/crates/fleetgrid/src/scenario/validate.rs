//! Scenario validation. Violations are data, not failures: the checker
//! never errors and never mutates its input.

use super::types::{ScenarioSpec, VehicleClass};
use std::fmt;

/// One violated invariant, with enough context to locate the offending cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Stable machine-readable code, e.g. `sharing-factor-below-one`.
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

/// Itemised list of violated invariants; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, code: &'static str, message: String) {
        self.violations.push(Violation { code, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "scenario valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks every scenario invariant and returns the itemised report.
/// Idempotent and side-effect free.
pub fn validate_scenario(spec: &ScenarioSpec) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let dims = &spec.dims;

    // Dimension sets.
    for (name, len) in [
        ("mobility_regions", dims.mobility_regions.len()),
        ("grid_regions", dims.grid_regions.len()),
        ("ldv_batteries", dims.ldv_batteries.len()),
        ("hdv_batteries", dims.hdv_batteries.len()),
        ("ldv_levels", dims.ldv_levels.len()),
        ("hdv_levels", dims.hdv_levels.len()),
        ("ldv_bins", dims.ldv_bins.len()),
        ("hdv_bins", dims.hdv_bins.len()),
        ("generators", dims.generators.len()),
    ] {
        if len == 0 {
            rep.push("empty-dimension-set", format!("dimension set {name} is empty"));
        }
    }
    if dims.n_hours == 0 {
        rep.push("empty-dimension-set", "hour set is empty".into());
    }
    if !(dims.dt_hours > 0.0) {
        rep.push("bad-time-step", format!("dt_hours = {} must be > 0", dims.dt_hours));
    }
    if dims.region_map.len() != dims.mobility_regions.len() {
        rep.push(
            "region-map-incomplete",
            format!(
                "region map covers {} of {} mobility regions",
                dims.region_map.len(),
                dims.mobility_regions.len()
            ),
        );
    }
    for (r, &i) in dims.region_map.iter().enumerate() {
        if i >= dims.grid_regions.len() {
            rep.push(
                "region-map-dangling",
                format!("mobility region {} maps to unknown grid region index {i}", region(dims, r)),
            );
        }
    }
    // Hours are contiguous with uniform step by construction; check that the
    // horizon and the step agree on the hour count.
    let expect_hours = spec.grid.horizon_days * 24.0 / dims.dt_hours;
    if (expect_hours - dims.n_hours as f64).abs() > 1e-6 * expect_hours.max(1.0) {
        rep.push(
            "horizon-step-mismatch",
            format!(
                "horizon {} days at dt {} h implies {expect_hours} steps, scenario has {}",
                spec.grid.horizon_days, dims.dt_hours, dims.n_hours
            ),
        );
    }

    // Fleet parameters.
    for class in VehicleClass::BOTH {
        let fleet = spec.fleet.class(class);
        let tag = class.tag();
        for (b, &cap) in fleet.battery_kwh.iter().enumerate() {
            if !(cap > 0.0) {
                rep.push(
                    "battery-capacity-nonpositive",
                    format!("{tag} battery {}: capacity {cap} must be > 0", battery(dims, class, b)),
                );
            }
        }
        for (b, &eta) in fleet.efficiency_kwh_per_mile.iter().enumerate() {
            if !(eta > 0.0) {
                rep.push(
                    "efficiency-nonpositive",
                    format!("{tag} battery {}: efficiency {eta} must be > 0", battery(dims, class, b)),
                );
            }
        }
        for (name, v) in [
            ("vehicle_lifetime", fleet.vehicle_life_days),
            ("battery_lifetime", fleet.battery_life_days),
        ] {
            if !(v > 0.0) {
                rep.push("lifetime-nonpositive", format!("{tag} {name} = {v} must be > 0"));
            }
        }
        for (name, v) in [
            ("per_mile_maintenance", fleet.maintenance_per_mile),
            ("vehicle_capital", fleet.vehicle_capital),
            ("vehicle_fixed_om", fleet.vehicle_om_per_day),
            ("battery_capital", fleet.battery_capital_per_kwh),
        ] {
            if !(v >= 0.0) {
                rep.push("cost-negative", format!("{tag} {name} = {v} must be >= 0"));
            }
        }
        for (name, table) in [("psi_f", &fleet.fleet_mismatch), ("psi_b", &fleet.battery_mismatch)] {
            for (r, &psi) in table.iter().enumerate() {
                if !(psi >= 1.0) {
                    rep.push(
                        "mismatch-factor-below-one",
                        format!("{tag} {name} in region {}: {psi} must be >= 1", region(dims, r)),
                    );
                }
            }
        }
    }

    // Charger parameters.
    for class in VehicleClass::BOTH {
        let ch = spec.chargers.class(class);
        let tag = class.tag();
        for (l, &gamma) in ch.rating_kw.iter().enumerate() {
            if !(gamma > 0.0) {
                rep.push(
                    "charger-rating-nonpositive",
                    format!("{tag} level {}: rating {gamma} must be > 0", level(dims, class, l)),
                );
            }
        }
        for (l, &phi) in ch.capital_per_kw.iter().enumerate() {
            if !(phi >= 0.0) {
                rep.push(
                    "cost-negative",
                    format!("{tag} level {}: capital {phi} must be >= 0", level(dims, class, l)),
                );
            }
        }
        for (l, &life) in ch.life_days.iter().enumerate() {
            if !(life > 0.0) {
                rep.push(
                    "lifetime-nonpositive",
                    format!("{tag} level {}: lifetime {life} must be > 0", level(dims, class, l)),
                );
            }
        }
        for (k, &psi) in ch.charge_deadhead_time.iter().enumerate() {
            if !(psi > 0.0 && psi <= 1.0) {
                rep.push(
                    "deadhead-time-out-of-range",
                    format!("{tag} psi_chdt entry {k}: {psi} must lie in (0, 1]"),
                );
            }
        }
    }

    // Mobility demand.
    for class in VehicleClass::BOTH {
        let dem = spec.demand.class(class);
        let tag = class.tag();
        let n_bins = dims.bins(class).len();
        for (k, &dd) in dem.trips.iter().enumerate() {
            if !(dd >= 0.0) {
                rep.push("demand-negative", format!("{tag} trips entry {k}: {dd} must be >= 0"));
            }
        }
        for (k, &nu) in dem.speed_mph.iter().enumerate() {
            if !(nu > 0.0) {
                rep.push("speed-nonpositive", format!("{tag} speed entry {k}: {nu} must be > 0"));
            }
        }
        for (d, &sigma) in dem.sharing.iter().enumerate() {
            if !(sigma >= 1.0) {
                rep.push(
                    "sharing-factor-below-one",
                    format!("{tag} bin {}: sharing factor {sigma} must be >= 1", bin(dims, class, d)),
                );
            }
        }
        for (d, &rho) in dem.trip_miles.iter().enumerate() {
            if !(rho > 0.0) {
                rep.push(
                    "trip-distance-nonpositive",
                    format!("{tag} bin {}: trip distance {rho} must be > 0", bin(dims, class, d)),
                );
            }
        }
        for (name, table) in [
            ("psi_chdd", &dem.charge_deadhead_distance),
            ("psi_cdd", &dem.customer_deadhead_distance),
            ("psi_cdt", &dem.customer_deadhead_time),
        ] {
            for (r, &psi) in table.iter().enumerate() {
                if !(psi > 0.0) {
                    rep.push(
                        "deadhead-nonpositive",
                        format!("{tag} {name} in region {}: {psi} must be > 0", region(dims, r)),
                    );
                }
            }
        }
        let _ = n_bins;
    }

    // Exogenous loads and envelopes.
    for (k, &p) in spec.exogenous.other_kw.iter().enumerate() {
        if !(p >= 0.0) {
            rep.push("exogenous-load-negative", format!("p_other entry {k}: {p} must be >= 0"));
        }
    }
    for (k, &p) in spec.exogenous.private_ldv_kw.iter().enumerate() {
        if !(p >= 0.0) {
            rep.push("exogenous-load-negative", format!("p_private entry {k}: {p} must be >= 0"));
        }
    }
    for (name, env) in [
        ("automated", &spec.exogenous.private_auto),
        ("human-driven", &spec.exogenous.private_human),
    ] {
        for t in 0..dims.n_hours {
            for r in 0..dims.n_regions() {
                let k = dims.idx_tr(t, r);
                if env.power_lb_kw[k] > env.power_ub_kw[k] {
                    rep.push(
                        "envelope-power-crossed",
                        format!(
                            "{name} envelope power bounds crossed at t={t} r={}: {} > {}",
                            region(dims, r),
                            env.power_lb_kw[k],
                            env.power_ub_kw[k]
                        ),
                    );
                }
                if env.energy_lb_kwh[k] > env.energy_ub_kwh[k] {
                    rep.push(
                        "envelope-energy-crossed",
                        format!(
                            "{name} envelope energy bounds crossed at t={t} r={}: {} > {}",
                            region(dims, r),
                            env.energy_lb_kwh[k],
                            env.energy_ub_kwh[k]
                        ),
                    );
                }
                if !(env.power_lb_kw[k] >= 0.0) {
                    rep.push(
                        "envelope-power-negative",
                        format!("{name} envelope power lower bound negative at t={t} r={}", region(dims, r)),
                    );
                }
                if t > 0 {
                    let prev = dims.idx_tr(t - 1, r);
                    if env.energy_lb_kwh[k] + 1e-12 < env.energy_lb_kwh[prev] {
                        rep.push(
                            "envelope-energy-not-monotone",
                            format!(
                                "{name} cumulative energy lower bound decreases at t={t} r={}: {} -> {}",
                                region(dims, r),
                                env.energy_lb_kwh[prev],
                                env.energy_lb_kwh[k]
                            ),
                        );
                    }
                    if env.energy_ub_kwh[k] + 1e-12 < env.energy_ub_kwh[prev] {
                        rep.push(
                            "envelope-energy-not-monotone",
                            format!(
                                "{name} cumulative energy upper bound decreases at t={t} r={}: {} -> {}",
                                region(dims, r),
                                env.energy_ub_kwh[prev],
                                env.energy_ub_kwh[k]
                            ),
                        );
                    }
                }
            }
        }
        // Envelope feasibility: the cumulative charge reachable under the
        // power caps and the cumulative upper bound must cover every
        // cumulative lower bound, and minimum charging must stay under the
        // cumulative upper bound.
        for r in 0..dims.n_regions() {
            let mut reachable = 0.0f64;
            let mut forced = 0.0f64;
            for t in 0..dims.n_hours {
                let k = dims.idx_tr(t, r);
                reachable = (reachable + env.power_ub_kw[k] * dims.dt_hours).min(env.energy_ub_kwh[k]);
                forced += env.power_lb_kw[k] * dims.dt_hours;
                if env.energy_lb_kwh[k] > reachable + 1e-9 * (1.0 + reachable) {
                    rep.push(
                        "envelope-infeasible",
                        format!(
                            "{name} envelope in region {}: cumulative energy lower bound {} at t={t} \
                             exceeds reachable charge {reachable}",
                            region(dims, r),
                            env.energy_lb_kwh[k]
                        ),
                    );
                }
                if forced > env.energy_ub_kwh[k] + 1e-9 * (1.0 + forced) {
                    rep.push(
                        "envelope-infeasible",
                        format!(
                            "{name} envelope in region {}: minimum charging {forced} by t={t} \
                             exceeds the cumulative energy upper bound {}",
                            region(dims, r),
                            env.energy_ub_kwh[k]
                        ),
                    );
                }
            }
        }
    }

    // Grid parameters.
    if !(spec.grid.eta_trans > 0.0 && spec.grid.eta_trans <= 1.0) {
        rep.push(
            "transmission-efficiency-out-of-range",
            format!("eta_trans = {} must lie in (0, 1]", spec.grid.eta_trans),
        );
    }
    if !(spec.grid.discount_per_day >= 0.0) {
        rep.push("discount-negative", format!("rho_disc = {} must be >= 0", spec.grid.discount_per_day));
    }
    if !(spec.grid.horizon_days > 0.0) {
        rep.push("horizon-nonpositive", format!("n_days = {} must be > 0", spec.grid.horizon_days));
    }
    for (g, &cap) in spec.grid.gen_cap_kw.iter().enumerate() {
        if !(cap >= 0.0) {
            rep.push(
                "capacity-negative",
                format!("generator {}: capacity {cap} must be >= 0", generator(dims, g)),
            );
        }
    }
    for (g, &c) in spec.grid.gen_cost.iter().enumerate() {
        if !(c >= 0.0) {
            rep.push(
                "cost-negative",
                format!("generator {}: marginal cost {c} must be >= 0", generator(dims, g)),
            );
        }
    }
    for (g, &i) in spec.grid.gen_region.iter().enumerate() {
        if i >= dims.grid_regions.len() {
            rep.push(
                "generator-region-dangling",
                format!("generator {} homed in unknown grid region index {i}", generator(dims, g)),
            );
        }
    }
    for (k, &cap) in spec.grid.trans_cap_kw.iter().enumerate() {
        if !(cap >= 0.0) {
            rep.push("capacity-negative", format!("transmission pair {k}: capacity {cap} must be >= 0"));
        }
    }
    for (k, &c) in spec.grid.trans_cost.iter().enumerate() {
        if !(c >= 0.0) {
            rep.push("cost-negative", format!("transmission cost entry {k}: {c} must be >= 0"));
        }
    }
    for (r, &beta) in spec.grid.demand_charge.iter().enumerate() {
        if !(beta >= 0.0) {
            rep.push(
                "cost-negative",
                format!("demand charge in region {}: {beta} must be >= 0", region(dims, r)),
            );
        }
    }

    // Synthesis config.
    let s = &spec.synthesis;
    if !(0.0..=1.0).contains(&s.automated_share) {
        rep.push(
            "automated-share-out-of-range",
            format!("automated_share = {} must lie in [0, 1]", s.automated_share),
        );
    }

    // Table shape checks (programmatic constructions can get these wrong;
    // the loader always builds complete tables).
    let shapes: [(&str, usize, usize); 6] = [
        ("demand.ldv.trips", spec.demand.ldv.trips.len(), dims.ldv_bins.len() * dims.n_hours * dims.n_regions()),
        ("demand.hdv.trips", spec.demand.hdv.trips.len(), dims.hdv_bins.len() * dims.n_hours * dims.n_regions()),
        ("exogenous.other", spec.exogenous.other_kw.len(), dims.n_grid_regions() * dims.n_hours),
        ("exogenous.private_ldv", spec.exogenous.private_ldv_kw.len(), dims.n_hours * dims.n_regions()),
        ("grid.gen_cost", spec.grid.gen_cost.len(), dims.generators.len()),
        ("grid.trans_cap", spec.grid.trans_cap_kw.len(), dims.transmission_pairs().len()),
    ];
    for (name, found, expected) in shapes {
        if found != expected {
            rep.push("table-shape", format!("{name}: {found} entries, expected {expected}"));
        }
    }

    rep
}

fn region(dims: &super::DimensionSets, r: usize) -> String {
    dims.mobility_regions.get(r).cloned().unwrap_or_else(|| format!("#{r}"))
}

fn generator(dims: &super::DimensionSets, g: usize) -> String {
    dims.generators.get(g).cloned().unwrap_or_else(|| format!("#{g}"))
}

fn battery(dims: &super::DimensionSets, class: VehicleClass, b: usize) -> String {
    dims.batteries(class).get(b).cloned().unwrap_or_else(|| format!("#{b}"))
}

fn level(dims: &super::DimensionSets, class: VehicleClass, l: usize) -> String {
    dims.levels(class).get(l).cloned().unwrap_or_else(|| format!("#{l}"))
}

fn bin(dims: &super::DimensionSets, class: VehicleClass, d: usize) -> String {
    dims.bins(class).get(d).cloned().unwrap_or_else(|| format!("#{d}"))
}
