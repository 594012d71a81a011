//! Second assembly path that keeps the energy, vehicles-moving, and
//! vehicles-charging intermediates as real columns tied down by
//! definitional equality rows, instead of substituting them out.
//!
//! The production program and this one must agree on objective value and
//! on every shared row residual at any point; the test suite drives random
//! points through both. Solving this program is also how the definitional
//! families get their binding/slack coverage.

use super::assemble::{charging_per_kwh, energy_per_trip, moving_per_trip};
use super::index::{RowFamily, RowLabel, VarFamily, VariableIndex};
use super::program::{Sense, SparseProgram};
use crate::costs::CostCoefficients;
use crate::error::AssemblyError;
use crate::scenario::{ScenarioSpec, VehicleClass};

struct ClassFamilies {
    class: VehicleClass,
    trips: VarFamily,
    idle: VarFamily,
    fleet: VarFamily,
    chargers: VarFamily,
    charge: VarFamily,
    energy: VarFamily,
    moving: VarFamily,
    charging_count: VarFamily,
    demand_alloc: RowFamily,
    def_energy: RowFamily,
    def_moving: RowFamily,
    def_charging: RowFamily,
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
    energy: VarFamily::EnergyLdv,
    moving: VarFamily::MovingLdv,
    charging_count: VarFamily::ChargingCountLdv,
    demand_alloc: RowFamily::DemandAllocLdv,
    def_energy: RowFamily::DefEnergyLdv,
    def_moving: RowFamily::DefMovingLdv,
    def_charging: RowFamily::DefChargingLdv,
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
    energy: VarFamily::EnergyHdv,
    moving: VarFamily::MovingHdv,
    charging_count: VarFamily::ChargingCountHdv,
    demand_alloc: RowFamily::DemandAllocHdv,
    def_energy: RowFamily::DefEnergyHdv,
    def_moving: RowFamily::DefMovingHdv,
    def_charging: RowFamily::DefChargingHdv,
    charge_upper: RowFamily::ChargeUpperHdv,
    charge_lower: RowFamily::ChargeLowerHdv,
    no_charge: RowFamily::NoChargeStartHdv,
    terminal: RowFamily::TerminalSocHdv,
    fleet_dispatch: RowFamily::FleetDispatchHdv,
    max_charging: RowFamily::MaxChargingHdv,
};

const CLASSES: [&ClassFamilies; 2] = [&LDV, &HDV];

/// Builds the explicit program. Shared rows carry the same labels as the
/// production assembly so residual tables line up label-for-label.
pub fn build_explicit_program(
    spec: &ScenarioSpec,
    coeffs: &CostCoefficients,
) -> Result<(SparseProgram, VariableIndex), AssemblyError> {
    let dims = &spec.dims;
    let index = VariableIndex::for_scenario_explicit(spec);
    let mut p = SparseProgram::new(index.n_cols());
    let dt = dims.dt_hours;
    let n_days = spec.grid.horizon_days;
    let n_regions = dims.n_regions();
    let n_hours = dims.n_hours;

    // Objective: maintenance lands on the moving-vehicle columns here;
    // everything else matches the production assembly.
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
                        p.add_objective(
                            index.col(fam.moving, &[b, d, t, r]),
                            cc.maintenance_per_moving_hour[dims.idx_dtr(n_bins, d, t, r)],
                        );
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
                p.add_objective(
                    index.col(fam.chargers, &[l, r]),
                    n_days * chargers.rating_kw[l] * cc.charger_per_kw_day[l],
                );
            }
        }
    }
    for r in 0..n_regions {
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

    // Demand allocation.
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

    // Definitional rows: E = kappa_E D, V_m = kappa_M D, V_c = kappa_C P.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        for b in 0..dims.batteries(fam.class).len() {
            for d in 0..n_bins {
                for t in 0..n_hours {
                    for r in 0..n_regions {
                        let row = p.add_row(Sense::Eq, 0.0, RowLabel::new(fam.def_energy, &[b, d, t, r]));
                        p.push(row, index.col(fam.energy, &[b, d, t, r]), 1.0);
                        p.push(row, index.col(fam.trips, &[b, d, t, r]), -energy_per_trip(spec, fam.class, b, d, r));
                        let row = p.add_row(Sense::Eq, 0.0, RowLabel::new(fam.def_moving, &[b, d, t, r]));
                        p.push(row, index.col(fam.moving, &[b, d, t, r]), 1.0);
                        p.push(row, index.col(fam.trips, &[b, d, t, r]), -moving_per_trip(spec, fam.class, d, t, r));
                    }
                }
            }
            for t in 0..n_hours {
                for l in 0..n_levels {
                    for r in 0..n_regions {
                        let row = p.add_row(Sense::Eq, 0.0, RowLabel::new(fam.def_charging, &[b, t, l, r]));
                        p.push(row, index.col(fam.charging_count, &[b, t, l, r]), 1.0);
                        p.push(row, index.col(fam.charge, &[b, t, l, r]), -charging_per_kwh(spec, fam.class, b, l, r));
                    }
                }
            }
        }
    }

    // Cumulative charging bounds over the explicit energy columns.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        let fleet = spec.fleet.class(fam.class);
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
                            p.push(row, index.col(fam.energy, &[b, d, th, r]), -1.0);
                        }
                    }
                }
            }
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
                            p.push(row, index.col(fam.energy, &[b, d, th, r]), -1.0);
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

    // Terminal state of charge.
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
                        p.push(row, index.col(fam.energy, &[b, d, t, r]), -1.0);
                    }
                }
            }
        }
    }

    // Fleet dispatch over explicit moving and charging-count columns.
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        for b in 0..dims.batteries(fam.class).len() {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Le, 0.0, RowLabel::new(fam.fleet_dispatch, &[b, t, r]));
                    for d in 0..n_bins {
                        p.push(row, index.col(fam.moving, &[b, d, t, r]), 1.0);
                    }
                    p.push(row, index.col(fam.idle, &[b, t, r]), 1.0);
                    for l in 0..n_levels {
                        p.push(row, index.col(fam.charging_count, &[b, t, l, r]), 1.0);
                    }
                    p.push(row, index.col(fam.fleet, &[b, r]), -1.0);
                }
            }
        }
    }

    // Max charging over explicit charging-count columns.
    for fam in CLASSES {
        for l in 0..dims.levels(fam.class).len() {
            for t in 0..n_hours {
                for r in 0..n_regions {
                    let row = p.add_row(Sense::Le, 0.0, RowLabel::new(fam.max_charging, &[l, t, r]));
                    for b in 0..dims.batteries(fam.class).len() {
                        p.push(row, index.col(fam.charging_count, &[b, t, l, r]), 1.0);
                    }
                    p.push(row, index.col(fam.chargers, &[l, r]), -1.0);
                }
            }
        }
    }

    // Max demand, envelopes, generation balance, and capacity bounds match
    // the production assembly coefficient for coefficient.
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

/// Expands a production-program point to the explicit variable space by
/// evaluating the substituted definitions.
pub fn expand_point(
    spec: &ScenarioSpec,
    production_index: &VariableIndex,
    explicit_index: &VariableIndex,
    point: &[f64],
) -> Vec<f64> {
    let dims = &spec.dims;
    let mut out = vec![0.0; explicit_index.n_cols()];
    out[..point.len()].copy_from_slice(point);
    for fam in CLASSES {
        let n_bins = dims.bins(fam.class).len();
        let n_levels = dims.levels(fam.class).len();
        for b in 0..dims.batteries(fam.class).len() {
            for t in 0..dims.n_hours {
                for r in 0..dims.n_regions() {
                    for d in 0..n_bins {
                        let trips = point[production_index.col(fam.trips, &[b, d, t, r])];
                        out[explicit_index.col(fam.energy, &[b, d, t, r])] =
                            trips * energy_per_trip(spec, fam.class, b, d, r);
                        out[explicit_index.col(fam.moving, &[b, d, t, r])] =
                            trips * moving_per_trip(spec, fam.class, d, t, r);
                    }
                    for l in 0..n_levels {
                        let charge = point[production_index.col(fam.charge, &[b, t, l, r])];
                        out[explicit_index.col(fam.charging_count, &[b, t, l, r])] =
                            charge * charging_per_kwh(spec, fam.class, b, l, r);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lp::assemble::build_program;
    use crate::lp::program::row_residuals;
    use std::collections::HashMap;

    /// Deterministic pseudo-random positive values.
    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        ((z ^ (z >> 31)) as f64 / u64::MAX as f64) * 10.0
    }

    #[test]
    fn substitution_matches_explicit_assembly_at_random_points() {
        let spec = fixtures::sharing_scenario();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (prod, prod_index) = build_program(&spec, &coeffs).unwrap();
        let (explicit, explicit_index) = build_explicit_program(&spec, &coeffs).unwrap();

        let mut rng = 0x5eed_u64;
        for _ in 0..4 {
            let point: Vec<f64> = (0..prod.n_cols()).map(|_| splitmix(&mut rng)).collect();
            let expanded = expand_point(&spec, &prod_index, &explicit_index, &point);

            let obj_prod = prod.objective_at(&point);
            let obj_explicit = explicit.objective_at(&expanded);
            assert!(
                (obj_prod - obj_explicit).abs() <= 1e-9 * (1.0 + obj_prod.abs()),
                "objectives diverge: {obj_prod} vs {obj_explicit}"
            );

            let res_prod = row_residuals(&prod, &point).unwrap();
            let res_explicit = row_residuals(&explicit, &expanded).unwrap();
            let by_label: HashMap<_, f64> =
                res_explicit.rows.iter().map(|r| (r.label, r.signed())).collect();
            for row in &res_prod.rows {
                let explicit_signed = by_label[&row.label];
                assert!(
                    (row.signed() - explicit_signed).abs() <= 1e-9 * (1.0 + row.signed().abs()),
                    "{}: {} vs {}",
                    row.label,
                    row.signed(),
                    explicit_signed
                );
            }
            // Definitional rows hold exactly at an expanded point.
            for row in &res_explicit.rows {
                if matches!(
                    row.label.family,
                    RowFamily::DefEnergyLdv
                        | RowFamily::DefEnergyHdv
                        | RowFamily::DefMovingLdv
                        | RowFamily::DefMovingHdv
                        | RowFamily::DefChargingLdv
                        | RowFamily::DefChargingHdv
                ) {
                    assert!(row.violation() <= 1e-9, "{} violated: {}", row.label, row.violation());
                }
            }
        }
    }
}
