//! Scenario → sparse program translation.
//!
//! The energy, vehicles-moving, and vehicles-charging intermediates are
//! affine in the trip and charging variables, so they are substituted
//! symbolically instead of carried as columns; [`energy_per_trip`],
//! [`moving_per_trip`], and [`charging_per_kwh`] hold the substitution
//! constants and are reused by the reporter and by the explicit
//! cross-check assembly in [`super::explicit`].

use super::index::{RowFamily, RowLabel, VarFamily, VariableIndex};
use super::program::{Sense, SparseProgram};
use crate::costs::CostCoefficients;
use crate::error::AssemblyError;
use crate::scenario::{ScenarioSpec, VehicleClass};

/// Energy drawn per trip served (kWh/trip): deadhead-corrected distance
/// times drivetrain efficiency, divided by the sharing factor.
pub fn energy_per_trip(spec: &ScenarioSpec, class: VehicleClass, b: usize, d: usize, r: usize) -> f64 {
    let dem = spec.demand.class(class);
    let fleet = spec.fleet.class(class);
    let customer_deadhead = match class {
        VehicleClass::Ldv => dem.customer_deadhead_distance[r],
        VehicleClass::Hdv => 1.0,
    };
    dem.charge_deadhead_distance[r] * customer_deadhead * fleet.efficiency_kwh_per_mile[b]
        * dem.trip_miles[d]
        / dem.sharing[d]
}

/// Vehicles kept moving per trip served in a step (vehicles/trip).
pub fn moving_per_trip(spec: &ScenarioSpec, class: VehicleClass, d: usize, t: usize, r: usize) -> f64 {
    let dem = spec.demand.class(class);
    let n_bins = spec.dims.bins(class).len();
    let customer_time = match class {
        VehicleClass::Ldv => dem.customer_deadhead_time[r],
        VehicleClass::Hdv => 1.0,
    };
    dem.trip_miles[d] * customer_time
        / (dem.sharing[d] * spec.dims.dt_hours * dem.speed_mph[spec.dims.idx_dtr(n_bins, d, t, r)])
}

/// Chargers occupied per kWh charged in a step (vehicles/kWh).
pub fn charging_per_kwh(spec: &ScenarioSpec, class: VehicleClass, b: usize, l: usize, r: usize) -> f64 {
    let ch = spec.chargers.class(class);
    let n_levels = spec.dims.levels(class).len();
    1.0 / (spec.dims.dt_hours
        * ch.charge_deadhead_time[spec.dims.idx_blr(n_levels, b, l, r)]
        * ch.rating_kw[l])
}

struct ClassFamilies {
    class: VehicleClass,
    trips: VarFamily,
    idle: VarFamily,
    fleet: VarFamily,
    chargers: VarFamily,
    charge: VarFamily,
    demand_alloc: RowFamily,
    charge_upper: RowFamily,
    charge_lower: RowFamily,
    no_charge: RowFamily,
    terminal: RowFamily,
    fleet_dispatch: RowFamily,
    max_charging: RowFamily,
}

const LDV: ClassFamilies = ClassFamilies {
    class: VehicleClass::Ldv,
    trips: VarFamily::TripsLdv,
    idle: VarFamily::IdleLdv,
    fleet: VarFamily::FleetLdv,
    chargers: VarFamily::ChargersLdv,
    charge: VarFamily::ChargeLdv,
    demand_alloc: RowFamily::DemandAllocLdv,
    charge_upper: RowFamily::ChargeUpperLdv,
    charge_lower: RowFamily::ChargeLowerLdv,
    no_charge: RowFamily::NoChargeStartLdv,
    terminal: RowFamily::TerminalSocLdv,
    fleet_dispatch: RowFamily::FleetDispatchLdv,
    max_charging: RowFamily::MaxChargingLdv,
};

const HDV: ClassFamilies = ClassFamilies {
    class: VehicleClass::Hdv,
    trips: VarFamily::TripsHdv,
    idle: VarFamily::IdleHdv,
    fleet: VarFamily::FleetHdv,
    chargers: VarFamily::ChargersHdv,
    charge: VarFamily::ChargeHdv,
    demand_alloc: RowFamily::DemandAllocHdv,
    charge_upper: RowFamily::ChargeUpperHdv,
    charge_lower: RowFamily::ChargeLowerHdv,
    no_charge: RowFamily::NoChargeStartHdv,
    terminal: RowFamily::TerminalSocHdv,
    fleet_dispatch: RowFamily::FleetDispatchHdv,
    max_charging: RowFamily::MaxChargingHdv,
};

const CLASSES: [&ClassFamilies; 2] = [&LDV, &HDV];

/// Builds the full program for a validated scenario. Row emission order is
/// deterministic; two calls produce bit-identical programs.
pub fn build_program(
    spec: &ScenarioSpec,
    coeffs: &CostCoefficients,
) -> Result<(SparseProgram, VariableIndex), AssemblyError> {
    check_shapes(spec)?;
    let dims = &spec.dims;
    let index = VariableIndex::for_scenario(spec);
    let mut p = SparseProgram::new(index.n_cols());
    let dt = dims.dt_hours;
    let n_days = spec.grid.horizon_days;
    let n_regions = dims.n_regions();
    let n_hours = dims.n_hours;

    // Objective.
    for fam in CLASSES {
        let class = fam.class;
        let cc = coeffs.class(class);
        let fleet = spec.fleet.class(class);
        let chargers = spec.chargers.class(class);
        let n_bins = dims.bins(class).len();
        for b in 0..dims.batteries(class).len() {
            for d in 0..n_bins {
                for t in 0..n_hours {
                    for r in 0..n_regions {
                        let maint = cc.maintenance_per_moving_hour[dims.idx_dtr(n_bins, d, t, r)]
                            * moving_per_trip(spec, class, d, t, r);
                        p.add_objective(index.col(fam.trips, &[b, d, t, r]), maint);
                    }
                }
            }
            for r in 0..n_regions {
                let daily = cc.vehicle_per_day[r] + cc.battery_per_kwh_day[r] * fleet.battery_kwh[b];
                p.add_objective(index.col(fam.fleet, &[b, r]), n_days * daily);
            }
        }
        for l in 0..dims.levels(class).len() {
            for r in 0..n_regions {
                let daily = chargers.rating_kw[l] * cc.charger_per_kw_day[l];
                p.add_objective(index.col(fam.chargers, &[l, r]), n_days * daily);
            }
        }
    }
    for r in 0..n_regions {
        // The hourly demand-charge rate accumulates over every step of the
        // simulation.
        p.add_objective(
            index.col(VarFamily::PeakDemand, &[r]),
            coeffs.demand_rate_per_kw_hour[r] * n_hours as f64,
        );
    }
    for g in 0..dims.generators.len() {
        for t in 0..n_hours {
            p.add_objective(index.col(VarFamily::Generation, &[g, t]), spec.grid.gen_cost[g]);
        }
    }
    for (pair, _) in dims.transmission_pairs().iter().enumerate() {
        for t in 0..n_hours {
            p.add_objective(
                index.col(VarFamily::Transmission, &[pair, t]),
                spec.grid.trans_cost[pair * n_hours + t],
            );
        }
    }

    // Demand allocation: trips across battery types meet demand.
    for fam in CLASSES {
        let dem = spec.demand.class(fam.class);
        let n_bins = dims.bins(fam.class).len();
        for d in 0..n_bins {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let rhs = dem.trips[dims.idx_dtr(n_bins, d, t, r)];
                    let row = p.add_row(Sense::Eq, rhs, RowLabel::new(fam.demand_alloc, &[d, t, r]));
                    for b in 0..dims.batteries(fam.class).len() {
                        p.push(row, index.col(fam.trips, &[b, d, t, r]), 1.0);
                    }
                }
            }
        }
    }

    // Cumulative charging bounds and terminal state of charge.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        let fleet = spec.fleet.class(fam.class);
        // Charge upper: sum P through t minus consumption through t-1 <= 0.
        for b in 0..dims.batteries(fam.class).len() {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Le, 0.0, RowLabel::new(fam.charge_upper, &[b, t, r]));
                    for th in 0..=t {
                        for l in 0..n_levels {
                            p.push(row, index.col(fam.charge, &[b, th, l, r]), 1.0);
                        }
                    }
                    for th in 0..t {
                        for d in 0..n_bins {
                            let kappa = energy_per_trip(spec, fam.class, b, d, r);
                            p.push(row, index.col(fam.trips, &[b, d, th, r]), -kappa);
                        }
                    }
                }
            }
        }
        // Charge lower: charge through t-1 covers consumption through t less
        // the fleet's battery buffer.
        for b in 0..dims.batteries(fam.class).len() {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Ge, 0.0, RowLabel::new(fam.charge_lower, &[b, t, r]));
                    for th in 0..t {
                        for l in 0..n_levels {
                            p.push(row, index.col(fam.charge, &[b, th, l, r]), 1.0);
                        }
                    }
                    for th in 0..=t {
                        for d in 0..n_bins {
                            let kappa = energy_per_trip(spec, fam.class, b, d, r);
                            p.push(row, index.col(fam.trips, &[b, d, th, r]), -kappa);
                        }
                    }
                    p.push(row, index.col(fam.fleet, &[b, r]), fleet.battery_kwh[b]);
                }
            }
        }
    }

    // No charging in the first step.
    for fam in CLASSES {
        for b in 0..dims.batteries(fam.class).len() {
            for l in 0..dims.levels(fam.class).len() {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Eq, 0.0, RowLabel::new(fam.no_charge, &[b, l, r]));
                    p.push(row, index.col(fam.charge, &[b, 0, l, r]), 1.0);
                }
            }
        }
    }

    // Terminal state of charge: total charge equals total consumption.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        for b in 0..dims.batteries(fam.class).len() {
            for r in 0..n_regions {
                let row = p.add_row(Sense::Eq, 0.0, RowLabel::new(fam.terminal, &[b, r]));
                for t in 0..n_hours {
                    for l in 0..n_levels {
                        p.push(row, index.col(fam.charge, &[b, t, l, r]), 1.0);
                    }
                    for d in 0..n_bins {
                        let kappa = energy_per_trip(spec, fam.class, b, d, r);
                        p.push(row, index.col(fam.trips, &[b, d, t, r]), -kappa);
                    }
                }
            }
        }
    }

    // Fleet dispatch: moving + idle + charging within the fleet size.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        for b in 0..dims.batteries(fam.class).len() {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Le, 0.0, RowLabel::new(fam.fleet_dispatch, &[b, t, r]));
                    for d in 0..n_bins {
                        p.push(row, index.col(fam.trips, &[b, d, t, r]), moving_per_trip(spec, fam.class, d, t, r));
                    }
                    p.push(row, index.col(fam.idle, &[b, t, r]), 1.0);
                    for l in 0..n_levels {
                        p.push(row, index.col(fam.charge, &[b, t, l, r]), charging_per_kwh(spec, fam.class, b, l, r));
                    }
                    p.push(row, index.col(fam.fleet, &[b, r]), -1.0);
                }
            }
        }
    }

    // Max charging: occupied chargers within the installed count.
    for fam in CLASSES {
        let n_levels = dims.levels(fam.class).len();
        for l in 0..n_levels {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Le, 0.0, RowLabel::new(fam.max_charging, &[l, t, r]));
                    for b in 0..dims.batteries(fam.class).len() {
                        p.push(row, index.col(fam.charge, &[b, t, l, r]), charging_per_kwh(spec, fam.class, b, l, r));
                    }
                    p.push(row, index.col(fam.chargers, &[l, r]), -1.0);
                }
            }
        }
    }

    // Max demand: billed peak covers fleet power net of private charging,
    // with the fixed light-duty private profile on the right-hand side.
    for t in 0..n_hours {
        for r in 0..n_regions {
            let rhs = spec.exogenous.private_ldv_kw[dims.idx_tr(t, r)];
            let row = p.add_row(Sense::Le, rhs, RowLabel::new(RowFamily::MaxDemand, &[t, r]));
            for fam in CLASSES {
                for b in 0..dims.batteries(fam.class).len() {
                    for l in 0..dims.levels(fam.class).len() {
                        p.push(row, index.col(fam.charge, &[b, t, l, r]), 1.0 / dt);
                    }
                }
            }
            p.push(row, index.col(VarFamily::PrivAutoCharge, &[t, r]), -1.0);
            p.push(row, index.col(VarFamily::PrivHumanCharge, &[t, r]), -1.0);
            p.push(row, index.col(VarFamily::PeakDemand, &[r]), -1.0);
        }
    }

    // Private-truck envelopes: hourly power band and cumulative energy band.
    let envelopes = [
        (
            VarFamily::PrivAutoCharge,
            &spec.exogenous.private_auto,
            [
                RowFamily::PrivAutoPowerLb,
                RowFamily::PrivAutoPowerUb,
                RowFamily::PrivAutoEnergyLb,
                RowFamily::PrivAutoEnergyUb,
            ],
        ),
        (
            VarFamily::PrivHumanCharge,
            &spec.exogenous.private_human,
            [
                RowFamily::PrivHumanPowerLb,
                RowFamily::PrivHumanPowerUb,
                RowFamily::PrivHumanEnergyLb,
                RowFamily::PrivHumanEnergyUb,
            ],
        ),
    ];
    for (var, env, rows) in envelopes {
        for t in 0..n_hours {
            for r in 0..n_regions {
                let k = dims.idx_tr(t, r);
                let row = p.add_row(Sense::Ge, env.power_lb_kw[k], RowLabel::new(rows[0], &[t, r]));
                p.push(row, index.col(var, &[t, r]), 1.0);
                let row = p.add_row(Sense::Le, env.power_ub_kw[k], RowLabel::new(rows[1], &[t, r]));
                p.push(row, index.col(var, &[t, r]), 1.0);
                let row = p.add_row(Sense::Ge, env.energy_lb_kwh[k], RowLabel::new(rows[2], &[t, r]));
                for th in 0..=t {
                    p.push(row, index.col(var, &[th, r]), dt);
                }
                let row = p.add_row(Sense::Le, env.energy_ub_kwh[k], RowLabel::new(rows[3], &[t, r]));
                for th in 0..=t {
                    p.push(row, index.col(var, &[th, r]), dt);
                }
            }
        }
    }

    // Generation balance per grid region and step, transmission losses on
    // imports only.
    let pairs = dims.transmission_pairs();
    for i in 0..dims.n_grid_regions() {
        for t in 0..n_hours {
            let mut rhs = spec.exogenous.other_kw[dims.idx_it(i, t)] * dt;
            for r in 0..n_regions {
                if dims.region_map[r] == i {
                    rhs += spec.exogenous.private_ldv_kw[dims.idx_tr(t, r)] * dt;
                }
            }
            let row = p.add_row(Sense::Ge, rhs, RowLabel::new(RowFamily::GenBalance, &[i, t]));
            for g in 0..dims.generators.len() {
                if spec.grid.gen_region[g] == i {
                    p.push(row, index.col(VarFamily::Generation, &[g, t]), 1.0);
                }
            }
            for (pair, &(from, to)) in pairs.iter().enumerate() {
                if to == i {
                    p.push(row, index.col(VarFamily::Transmission, &[pair, t]), spec.grid.eta_trans);
                } else if from == i {
                    p.push(row, index.col(VarFamily::Transmission, &[pair, t]), -1.0);
                }
            }
            for r in 0..n_regions {
                if dims.region_map[r] != i {
                    continue;
                }
                for fam in CLASSES {
                    for b in 0..dims.batteries(fam.class).len() {
                        for l in 0..dims.levels(fam.class).len() {
                            p.push(row, index.col(fam.charge, &[b, t, l, r]), -1.0);
                        }
                    }
                }
                p.push(row, index.col(VarFamily::PrivAutoCharge, &[t, r]), -dt);
                p.push(row, index.col(VarFamily::PrivHumanCharge, &[t, r]), -dt);
            }
        }
    }

    // Generator and transmission capacity bounds.
    for g in 0..dims.generators.len() {
        for t in 0..n_hours {
            p.set_upper(index.col(VarFamily::Generation, &[g, t]), spec.grid.gen_cap_kw[g] * dt);
        }
    }
    for (pair, _) in pairs.iter().enumerate() {
        for t in 0..n_hours {
            p.set_upper(index.col(VarFamily::Transmission, &[pair, t]), spec.grid.trans_cap_kw[pair] * dt);
        }
    }

    Ok((p.finalize()?, index))
}

/// Expected row count of the production assembly; a pure function of the
/// dimension-set sizes.
pub fn expected_row_count(spec: &ScenarioSpec) -> usize {
    let d = &spec.dims;
    let (bl, bh) = (d.ldv_batteries.len(), d.hdv_batteries.len());
    let (dl, dh) = (d.ldv_bins.len(), d.hdv_bins.len());
    let (ll, lh) = (d.ldv_levels.len(), d.hdv_levels.len());
    let (t, r) = (d.n_hours, d.n_regions());
    (dl + dh) * t * r                // demand allocation
        + 2 * (bl + bh) * t * r      // charge upper + lower
        + (bl * ll + bh * lh) * r    // no charge at start
        + (bl + bh) * r              // terminal state of charge
        + (bl + bh) * t * r          // fleet dispatch
        + (ll + lh) * t * r          // max charging
        + t * r                      // max demand
        + 8 * t * r                  // envelopes
        + d.n_grid_regions() * t     // generation balance
}

/// Expected column count of the production assembly.
pub fn expected_col_count(spec: &ScenarioSpec) -> usize {
    let d = &spec.dims;
    let (bl, bh) = (d.ldv_batteries.len(), d.hdv_batteries.len());
    let (dl, dh) = (d.ldv_bins.len(), d.hdv_bins.len());
    let (ll, lh) = (d.ldv_levels.len(), d.hdv_levels.len());
    let (t, r) = (d.n_hours, d.n_regions());
    let g = d.generators.len();
    let i = d.n_grid_regions();
    (bl * dl + bh * dh) * t * r      // trips
        + (bl + bh) * t * r          // idle
        + (bl + bh) * r              // fleet
        + (ll + lh) * r              // chargers
        + (bl * ll + bh * lh) * t * r // charging energy
        + r                          // billed peak
        + 2 * t * r                  // private envelopes
        + g * t                      // generation
        + i * (i - 1) * t            // transmission
}

fn check_shapes(spec: &ScenarioSpec) -> Result<(), AssemblyError> {
    let d = &spec.dims;
    let (t, r, i) = (d.n_hours, d.n_regions(), d.n_grid_regions());
    let pairs = d.transmission_pairs().len();
    let checks: Vec<(&'static str, &'static str, usize, usize)> = vec![
        ("fleet", "ldv battery", spec.fleet.ldv.battery_kwh.len(), d.ldv_batteries.len()),
        ("fleet", "hdv battery", spec.fleet.hdv.battery_kwh.len(), d.hdv_batteries.len()),
        ("fleet", "ldv efficiency", spec.fleet.ldv.efficiency_kwh_per_mile.len(), d.ldv_batteries.len()),
        ("fleet", "hdv efficiency", spec.fleet.hdv.efficiency_kwh_per_mile.len(), d.hdv_batteries.len()),
        ("fleet", "ldv psi_f region", spec.fleet.ldv.fleet_mismatch.len(), r),
        ("fleet", "hdv psi_f region", spec.fleet.hdv.fleet_mismatch.len(), r),
        ("fleet", "ldv psi_b region", spec.fleet.ldv.battery_mismatch.len(), r),
        ("fleet", "hdv psi_b region", spec.fleet.hdv.battery_mismatch.len(), r),
        ("chargers", "ldv level", spec.chargers.ldv.rating_kw.len(), d.ldv_levels.len()),
        ("chargers", "hdv level", spec.chargers.hdv.rating_kw.len(), d.hdv_levels.len()),
        (
            "chargers",
            "ldv (b,l,r)",
            spec.chargers.ldv.charge_deadhead_time.len(),
            d.ldv_batteries.len() * d.ldv_levels.len() * r,
        ),
        (
            "chargers",
            "hdv (b,l,r)",
            spec.chargers.hdv.charge_deadhead_time.len(),
            d.hdv_batteries.len() * d.hdv_levels.len() * r,
        ),
        ("demand", "ldv (d,t,r)", spec.demand.ldv.trips.len(), d.ldv_bins.len() * t * r),
        ("demand", "hdv (d,t,r)", spec.demand.hdv.trips.len(), d.hdv_bins.len() * t * r),
        ("demand", "ldv speed (d,t,r)", spec.demand.ldv.speed_mph.len(), d.ldv_bins.len() * t * r),
        ("demand", "hdv speed (d,t,r)", spec.demand.hdv.speed_mph.len(), d.hdv_bins.len() * t * r),
        ("demand", "ldv bin", spec.demand.ldv.trip_miles.len(), d.ldv_bins.len()),
        ("demand", "hdv bin", spec.demand.hdv.trip_miles.len(), d.hdv_bins.len()),
        ("demand", "ldv sharing bin", spec.demand.ldv.sharing.len(), d.ldv_bins.len()),
        ("demand", "hdv sharing bin", spec.demand.hdv.sharing.len(), d.hdv_bins.len()),
        ("exogenous_loads", "(i,t)", spec.exogenous.other_kw.len(), i * t),
        ("exogenous_loads", "p_private (t,r)", spec.exogenous.private_ldv_kw.len(), t * r),
        ("exogenous_loads", "auto envelope (t,r)", spec.exogenous.private_auto.power_ub_kw.len(), t * r),
        ("exogenous_loads", "human envelope (t,r)", spec.exogenous.private_human.power_ub_kw.len(), t * r),
        ("grid", "generator", spec.grid.gen_cost.len(), d.generators.len()),
        ("grid", "generator capacity", spec.grid.gen_cap_kw.len(), d.generators.len()),
        ("grid", "generator region", spec.grid.gen_region.len(), d.generators.len()),
        ("grid", "transmission pair", spec.grid.trans_cap_kw.len(), pairs),
        ("grid", "transmission (pair,t)", spec.grid.trans_cost.len(), pairs * t),
        ("grid", "demand charge region", spec.grid.demand_charge.len(), r),
    ];
    for (table, subscript, found, expected) in checks {
        if found != expected {
            return Err(AssemblyError::DimensionMismatch { table, subscript, expected, found });
        }
    }
    Ok(())
}
