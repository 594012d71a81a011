//! Bundled example scenarios.
//!
//! The tiny fixtures drive the enumeration oracle and the per-constraint
//! unit suite; `sharing_scenario` is the sharing-dominant instance the
//! sweep runs on; `desk_scenario` is the larger two-region sizing
//! benchmark. `fleetgrid init-example` writes any of them to disk.
//!
//! The charge-lags-consumption convention plus the terminal
//! state-of-charge equality mean a feasible scenario cannot place fleet
//! demand in its final step; every fixture ends with at least one quiet
//! hour.

use crate::lp::{VarFamily, VariableIndex};
use crate::scenario::{
    ChargerParams, ClassChargers, ClassDemand, ClassFleet, DimensionSets, EnvelopeSet,
    ExogenousLoads, FleetParams, GridParams, MobilityDemand, ScenarioSpec, SynthesisConfig,
};

/// Compact single-region builder for oracle-sized instances. Fields are the
/// heavy-duty side; the light-duty side is a fixed minimal block with zero
/// demand.
#[derive(Debug, Clone)]
pub struct TinyFixture {
    pub n_hours: usize,
    /// Per battery type: (capacity kWh, efficiency kWh/mile).
    pub batteries: Vec<(f64, f64)>,
    /// Per charger level: (rating kW, capital $/kW, lifetime days).
    pub levels: Vec<(f64, f64, f64)>,
    /// Per distance bin: (trip miles, sharing factor).
    pub bins: Vec<(f64, f64)>,
    /// Trips per `(bin, t)`, bin-major.
    pub trips: Vec<f64>,
    pub speed_mph: f64,
    /// Per generator: (marginal cost $/kWh, capacity kW).
    pub generators: Vec<(f64, f64)>,
    pub demand_charge: f64,
    pub maintenance_per_mile: f64,
    pub vehicle_capital: f64,
    pub vehicle_life_days: f64,
    pub vehicle_om_per_day: f64,
    pub battery_capital_per_kwh: f64,
    pub battery_life_days: f64,
    pub charge_deadhead_time: f64,
    /// Non-mobility load per step (kW).
    pub other_kw: Vec<f64>,
    /// Optional automated-truck envelope: `[p_lb, p_ub, e_lb, e_ub]` per step.
    pub auto_envelope: Option<[Vec<f64>; 4]>,
    /// Optional human-driven envelope, same layout.
    pub human_envelope: Option<[Vec<f64>; 4]>,
    /// Discretisation step for the enumeration oracle (kWh).
    pub grid_step: f64,
}

impl TinyFixture {
    fn blank(n_hours: usize) -> Self {
        TinyFixture {
            n_hours,
            batteries: vec![(100.0, 0.5)],
            levels: vec![(10.0, 240.0, 240.0)],
            bins: vec![(10.0, 1.0)],
            trips: vec![0.0; n_hours],
            speed_mph: 10.0,
            generators: vec![(0.04, 1000.0)],
            demand_charge: 7.32,
            maintenance_per_mile: 0.1,
            vehicle_capital: 1000.0,
            vehicle_life_days: 1000.0,
            vehicle_om_per_day: 0.0,
            battery_capital_per_kwh: 100.0,
            battery_life_days: 100.0,
            charge_deadhead_time: 1.0,
            other_kw: vec![0.0; n_hours],
            auto_envelope: None,
            human_envelope: None,
            grid_step: 0.25,
        }
    }

    pub fn to_scenario(&self) -> ScenarioSpec {
        let n_hours = self.n_hours;
        let n_bins = self.bins.len();
        assert_eq!(self.trips.len(), n_bins * n_hours, "trips must be (bin, t) dense");
        let dims = DimensionSets {
            n_hours,
            dt_hours: 1.0,
            mobility_regions: vec!["TR1".into()],
            grid_regions: vec!["TI1".into()],
            region_map: vec![0],
            ldv_batteries: vec!["LB1".into()],
            hdv_batteries: (0..self.batteries.len()).map(|b| format!("HB{}", b + 1)).collect(),
            ldv_levels: vec!["LL1".into()],
            hdv_levels: (0..self.levels.len()).map(|l| format!("HL{}", l + 1)).collect(),
            ldv_bins: vec!["LD1".into()],
            hdv_bins: (0..self.bins.len()).map(|d| format!("HD{}", d + 1)).collect(),
            generators: (0..self.generators.len()).map(|g| format!("TG{}", g + 1)).collect(),
        };

        let ldv_fleet = ClassFleet {
            battery_kwh: vec![50.0],
            efficiency_kwh_per_mile: vec![0.3],
            maintenance_per_mile: 0.05,
            vehicle_capital: 20_000.0,
            vehicle_om_per_day: 1.0,
            vehicle_life_days: 4000.0,
            battery_capital_per_kwh: 90.0,
            battery_life_days: 2000.0,
            fleet_mismatch: vec![1.0],
            battery_mismatch: vec![1.0],
        };
        let hdv_fleet = ClassFleet {
            battery_kwh: self.batteries.iter().map(|&(b, _)| b).collect(),
            efficiency_kwh_per_mile: self.batteries.iter().map(|&(_, e)| e).collect(),
            maintenance_per_mile: self.maintenance_per_mile,
            vehicle_capital: self.vehicle_capital,
            vehicle_om_per_day: self.vehicle_om_per_day,
            vehicle_life_days: self.vehicle_life_days,
            battery_capital_per_kwh: self.battery_capital_per_kwh,
            battery_life_days: self.battery_life_days,
            fleet_mismatch: vec![1.0],
            battery_mismatch: vec![1.0],
        };

        let ldv_chargers = ClassChargers {
            rating_kw: vec![7.0],
            capital_per_kw: vec![100.0],
            life_days: vec![1000.0],
            charge_deadhead_time: vec![1.0],
        };
        let hdv_chargers = ClassChargers {
            rating_kw: self.levels.iter().map(|&(g, _, _)| g).collect(),
            capital_per_kw: self.levels.iter().map(|&(_, c, _)| c).collect(),
            life_days: self.levels.iter().map(|&(_, _, l)| l).collect(),
            charge_deadhead_time: vec![self.charge_deadhead_time; self.batteries.len() * self.levels.len()],
        };

        let ldv_demand = ClassDemand {
            trips: vec![0.0; n_hours],
            trip_miles: vec![5.0],
            speed_mph: vec![20.0; n_hours],
            sharing: vec![1.0],
            charge_deadhead_distance: vec![1.0],
            customer_deadhead_distance: vec![1.0],
            customer_deadhead_time: vec![1.0],
        };
        let hdv_demand = ClassDemand {
            trips: self.trips.clone(),
            trip_miles: self.bins.iter().map(|&(rho, _)| rho).collect(),
            speed_mph: vec![self.speed_mph; n_bins * n_hours],
            sharing: self.bins.iter().map(|&(_, sigma)| sigma).collect(),
            charge_deadhead_distance: vec![1.0],
            customer_deadhead_distance: vec![1.0],
            customer_deadhead_time: vec![1.0],
        };

        let envelope = |source: &Option<[Vec<f64>; 4]>| match source {
            None => EnvelopeSet::zeros(n_hours),
            Some([p_lb, p_ub, e_lb, e_ub]) => EnvelopeSet {
                power_lb_kw: p_lb.clone(),
                power_ub_kw: p_ub.clone(),
                energy_lb_kwh: e_lb.clone(),
                energy_ub_kwh: e_ub.clone(),
            },
        };

        ScenarioSpec {
            fleet: FleetParams { ldv: ldv_fleet, hdv: hdv_fleet },
            chargers: ChargerParams { ldv: ldv_chargers, hdv: hdv_chargers },
            demand: MobilityDemand { ldv: ldv_demand, hdv: hdv_demand },
            exogenous: ExogenousLoads {
                other_kw: self.other_kw.clone(),
                private_ldv_kw: vec![0.0; n_hours],
                private_auto: envelope(&self.auto_envelope),
                private_human: envelope(&self.human_envelope),
            },
            grid: GridParams {
                gen_cost: self.generators.iter().map(|&(c, _)| c).collect(),
                gen_cap_kw: self.generators.iter().map(|&(_, cap)| cap).collect(),
                gen_region: vec![0; self.generators.len()],
                trans_cost: Vec::new(),
                trans_cap_kw: Vec::new(),
                eta_trans: 0.95,
                demand_charge: vec![self.demand_charge],
                discount_per_day: 0.0,
                horizon_days: n_hours as f64 / 24.0,
            },
            synthesis: SynthesisConfig::default(),
            split: None,
            dims,
        }
    }
}

/// Empty system: zero demand everywhere. Optimum is the origin at zero cost.
pub fn tiny_zero_demand() -> TinyFixture {
    TinyFixture::blank(2)
}

/// One trip in the first of two hours. Every variable is forced:
/// the trip consumes `e = eta * rho / sigma = 5` kWh from the full battery,
/// the second hour must replace exactly that (terminal state of charge,
/// cumulative bound binding), one vehicle moves in hour 0, half a charger
/// is occupied in hour 1, the billed peak is 5 kW, and generation covers
/// 5 kWh. The optimal objective is therefore hand-computable.
pub fn tiny_two_hour() -> TinyFixture {
    let mut fx = TinyFixture::blank(2);
    fx.trips[0] = 1.0;
    fx
}

/// Hand computation of the [`tiny_two_hour`] optimum from its binding set.
pub fn tiny_two_hour_expected_objective() -> f64 {
    let energy = 0.5 * 10.0 / 1.0; // eta * rho / sigma
    let maintenance = 0.1 * 10.0; // beta_v * (moving = 1) * speed
    let n_days = 2.0 / 24.0;
    let demand_charge = crate::costs::demand_charge_hourly_rate(7.32) * 2.0 * energy;
    let chargers = n_days * 10.0 * 1.0 * (energy / 10.0); // gamma * theta_c * N
    let fleet = n_days * (1.0 + 1.0 * 100.0) * 1.0; // (theta_v + theta_b B) V*
    let generation = 0.04 * energy;
    maintenance + demand_charge + chargers + fleet + generation
}

/// The unique optimal (and only feasible) point of [`tiny_two_hour`] as a
/// full column vector.
pub fn tiny_two_hour_feasible_point(spec: &ScenarioSpec, index: &VariableIndex) -> Vec<f64> {
    let mut x = vec![0.0; index.n_cols()];
    let energy = crate::lp::assemble::energy_per_trip(spec, crate::scenario::VehicleClass::Hdv, 0, 0, 0);
    x[index.col(VarFamily::TripsHdv, &[0, 0, 0, 0])] = 1.0;
    x[index.col(VarFamily::ChargeHdv, &[0, 1, 0, 0])] = energy;
    x[index.col(VarFamily::FleetHdv, &[0, 0])] = 1.0;
    x[index.col(VarFamily::ChargersHdv, &[0, 0])] = energy / 10.0;
    x[index.col(VarFamily::PeakDemand, &[0])] = energy;
    x[index.col(VarFamily::Generation, &[0, 1])] = energy;
    x
}

/// Two generators, demand served entirely by exogenous load: hour 1 fits
/// under the cheap unit, hour 2 exceeds it by exactly 10 kWh.
pub fn tiny_merit() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.generators = vec![(0.02, 100.0), (0.05, 500.0)];
    fx.other_kw = vec![80.0, 110.0, 40.0];
    fx
}

/// Envelope-only instance: no fleet demand, the automated private profile
/// must absorb 60 kWh under a 50 kW cap.
pub fn tiny_envelope() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.generators = vec![(0.03, 400.0)];
    fx.demand_charge = 0.0;
    fx.auto_envelope = Some([
        vec![0.0, 0.0, 0.0],
        vec![50.0, 50.0, 50.0],
        vec![0.0, 0.0, 60.0],
        vec![60.0, 60.0, 60.0],
    ]);
    fx.grid_step = 0.5;
    fx
}

/// Two charger levels with different ratings and prices; the optimiser
/// picks the cheaper mix for a one-trip day.
pub fn tiny_two_level() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.levels = vec![(10.0, 240.0, 240.0), (50.0, 2400.0, 240.0)];
    fx.trips[0] = 2.0;
    fx.grid_step = 0.5;
    fx
}

/// Two battery types with different capacities and efficiencies; the
/// demand split across them is a free choice.
pub fn tiny_two_battery() -> TinyFixture {
    let mut fx = TinyFixture::blank(2);
    fx.batteries = vec![(100.0, 0.5), (40.0, 0.3)];
    fx.trips[0] = 1.0;
    fx.grid_step = 0.05;
    fx
}

/// Three hours, demand up front, and a demand charge steep enough that
/// charging spreads evenly over the remaining hours: the intermediate
/// cumulative charging bound goes strictly slack.
pub fn tiny_spread() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.trips[0] = 2.0;
    fx.demand_charge = 73.2;
    fx.grid_step = 0.25;
    fx
}

/// Expensive late-day energy concentrates all charging in the second
/// hour: the charger-count bound binds there and sits strictly slack in
/// the cheap-but-unused third hour.
pub fn tiny_price_dip() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.trips[0] = 1.0;
    fx.generators = vec![(0.02, 100.0), (0.5, 500.0)];
    fx.other_kw = vec![0.0, 0.0, 96.0];
    fx.demand_charge = 0.732;
    fx.grid_step = 0.25;
    fx
}

/// Small batteries make the charge-keeps-up bound drive the fleet size;
/// every fleet-dispatch row ends up strictly slack.
pub fn tiny_battery_tight() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.trips[0] = 1.0;
    fx.batteries = vec![(4.0, 0.5)];
    fx.speed_mph = 100.0;
    fx.grid_step = 0.25;
    fx
}

/// A costless generator serving a flat exogenous load: its dispatch face
/// is a bounded interval, so the balance rows settle strictly slack.
pub fn tiny_free_gen() -> TinyFixture {
    let mut fx = TinyFixture::blank(2);
    fx.generators = vec![(0.0, 200.0)];
    fx.other_kw = vec![50.0, 50.0];
    fx.grid_step = 0.5;
    fx
}

/// Automated envelope whose power caps sum exactly to the required
/// energy: every power upper bound is forced to bind.
pub fn tiny_envelope_tight() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.generators = vec![(0.03, 400.0)];
    fx.demand_charge = 0.0;
    fx.auto_envelope = Some([
        vec![0.0, 0.0, 0.0],
        vec![40.0, 40.0, 20.0],
        vec![0.0, 0.0, 100.0],
        vec![100.0, 100.0, 100.0],
    ]);
    fx.grid_step = 0.5;
    fx
}

/// Automated envelope with positive power floors and no energy demand:
/// the floors bind while everything else stays slack.
pub fn tiny_envelope_forced() -> TinyFixture {
    let mut fx = TinyFixture::blank(3);
    fx.generators = vec![(0.03, 400.0)];
    fx.demand_charge = 0.0;
    fx.auto_envelope = Some([
        vec![10.0, 10.0, 0.0],
        vec![50.0, 50.0, 50.0],
        vec![0.0, 0.0, 0.0],
        vec![150.0, 150.0, 150.0],
    ]);
    fx.grid_step = 0.5;
    fx
}

/// Moves the automated envelope of a fixture onto the human-driven
/// profile instead.
pub fn with_human_envelope(mut fx: TinyFixture) -> TinyFixture {
    fx.human_envelope = fx.auto_envelope.take();
    fx
}

/// The oracle-checked corpus.
pub fn tiny_all() -> Vec<(&'static str, TinyFixture)> {
    vec![
        ("zero-demand", tiny_zero_demand()),
        ("two-hour", tiny_two_hour()),
        ("merit", tiny_merit()),
        ("envelope", tiny_envelope()),
        ("two-level", tiny_two_level()),
        ("two-battery", tiny_two_battery()),
        ("spread", tiny_spread()),
        ("price-dip", tiny_price_dip()),
        ("battery-tight", tiny_battery_tight()),
        ("free-gen", tiny_free_gen()),
        ("envelope-tight", tiny_envelope_tight()),
        ("envelope-forced", tiny_envelope_forced()),
        ("envelope-human", with_human_envelope(tiny_envelope())),
        ("envelope-human-tight", with_human_envelope(tiny_envelope_tight())),
    ]
}

/// Two grid regions joined by a thin line: cheap generation sits across a
/// 50 kW link from the load, so the local expensive unit must run while
/// the link saturates. No fleet demand.
pub fn two_region_grid() -> ScenarioSpec {
    let fx = TinyFixture::blank(2);
    let mut spec = fx.to_scenario();
    spec.dims.grid_regions = vec!["TI1".into(), "TI2".into()];
    spec.dims.region_map = vec![1];
    spec.dims.generators = vec!["GFAR".into(), "GNEAR".into()];
    spec.grid.gen_cost = vec![0.02, 0.05];
    spec.grid.gen_cap_kw = vec![500.0, 500.0];
    spec.grid.gen_region = vec![0, 1];
    let pairs = spec.dims.transmission_pairs();
    spec.grid.trans_cap_kw = vec![0.0; pairs.len()];
    spec.grid.trans_cost = vec![0.0; pairs.len() * spec.dims.n_hours];
    let forward = spec.dims.transmission_pair_index(0, 1);
    spec.grid.trans_cap_kw[forward] = 50.0;
    for t in 0..spec.dims.n_hours {
        spec.grid.trans_cost[forward * spec.dims.n_hours + t] = 0.001;
    }
    spec.exogenous.other_kw = vec![0.0, 0.0, 150.0, 150.0]; // (i, t) dense
    spec
}

/// 24-hour day-shaped profile helper.
fn shape(base: &[f64; 24], scale: f64) -> Vec<f64> {
    base.iter().map(|v| v * scale).collect()
}

const HDV_SHAPE: [f64; 24] = [
    2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 4.0, 6.0, 8.0, 8.0, 7.0, 6.0, 6.0, 7.0, 8.0, 8.0, 6.0, 4.0, 3.0,
    2.0, 1.0, 1.0, 0.0, 0.0,
];

const LDV_SHAPE: [f64; 24] = [
    1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 3.0, 5.0, 6.0, 5.0, 4.0, 4.0, 4.0, 4.0, 5.0, 6.0, 5.0, 4.0, 3.0,
    2.0, 2.0, 1.0, 0.0, 0.0,
];

const OTHER_SHAPE: [f64; 24] = [
    0.5, 0.45, 0.45, 0.45, 0.5, 0.6, 0.8, 1.0, 1.1, 1.15, 1.2, 1.2, 1.15, 1.15, 1.2, 1.25, 1.3,
    1.25, 1.1, 0.95, 0.8, 0.7, 0.6, 0.55,
];

/// Single-region, sharing-dominant 24-hour scenario: high marginal energy
/// cost and a sharing factor of 3, so routing demand to the shared fleet
/// pays for its capital several times over.
pub fn sharing_scenario() -> ScenarioSpec {
    let n_hours = 24;
    let dims = DimensionSets {
        n_hours,
        dt_hours: 1.0,
        mobility_regions: vec!["R1".into()],
        grid_regions: vec!["I1".into()],
        region_map: vec![0],
        ldv_batteries: vec!["LB60".into()],
        hdv_batteries: vec!["HB400".into()],
        ldv_levels: vec!["LL7".into()],
        hdv_levels: vec!["HL150".into(), "HL350".into()],
        ldv_bins: vec!["LD8".into()],
        hdv_bins: vec!["HD20".into(), "HD60".into()],
        generators: vec!["GBASE".into(), "GPEAK".into()],
    };

    let mut hdv_trips = Vec::with_capacity(2 * n_hours);
    hdv_trips.extend(shape(&HDV_SHAPE, 6.0)); // 20-mile bin
    hdv_trips.extend(shape(&HDV_SHAPE, 2.0)); // 60-mile bin

    ScenarioSpec {
        fleet: FleetParams {
            ldv: ClassFleet {
                battery_kwh: vec![60.0],
                efficiency_kwh_per_mile: vec![0.3],
                maintenance_per_mile: 0.06,
                vehicle_capital: 28_000.0,
                vehicle_om_per_day: 2.0,
                vehicle_life_days: 4380.0,
                battery_capital_per_kwh: 90.0,
                battery_life_days: 2920.0,
                fleet_mismatch: vec![1.05],
                battery_mismatch: vec![1.05],
            },
            hdv: ClassFleet {
                battery_kwh: vec![400.0],
                efficiency_kwh_per_mile: vec![1.4],
                maintenance_per_mile: 0.15,
                vehicle_capital: 120_000.0,
                vehicle_om_per_day: 15.0,
                vehicle_life_days: 3650.0,
                battery_capital_per_kwh: 80.0,
                battery_life_days: 2920.0,
                fleet_mismatch: vec![1.1],
                battery_mismatch: vec![1.1],
            },
        },
        chargers: ChargerParams {
            ldv: ClassChargers {
                rating_kw: vec![7.2],
                capital_per_kw: vec![200.0],
                life_days: vec![3650.0],
                charge_deadhead_time: vec![0.9],
            },
            hdv: ClassChargers {
                rating_kw: vec![150.0, 350.0],
                capital_per_kw: vec![600.0, 900.0],
                life_days: vec![3650.0, 3650.0],
                charge_deadhead_time: vec![0.85, 0.85],
            },
        },
        demand: MobilityDemand {
            ldv: ClassDemand {
                trips: shape(&LDV_SHAPE, 3.0),
                trip_miles: vec![8.0],
                speed_mph: vec![25.0; n_hours],
                sharing: vec![1.2],
                charge_deadhead_distance: vec![1.05],
                customer_deadhead_distance: vec![1.05],
                customer_deadhead_time: vec![1.05],
            },
            hdv: ClassDemand {
                trips: hdv_trips,
                trip_miles: vec![20.0, 60.0],
                speed_mph: vec![30.0; 2 * n_hours],
                sharing: vec![3.0, 3.0],
                charge_deadhead_distance: vec![1.06],
                customer_deadhead_distance: vec![1.0],
                customer_deadhead_time: vec![1.0],
            },
        },
        exogenous: ExogenousLoads {
            other_kw: shape(&OTHER_SHAPE, 1000.0),
            private_ldv_kw: shape(&LDV_SHAPE, 10.0),
            private_auto: EnvelopeSet::zeros(n_hours),
            private_human: EnvelopeSet::zeros(n_hours),
        },
        grid: GridParams {
            gen_cost: vec![0.38, 0.65],
            gen_cap_kw: vec![3000.0, 9000.0],
            gen_region: vec![0, 0],
            trans_cost: Vec::new(),
            trans_cap_kw: Vec::new(),
            eta_trans: 0.95,
            demand_charge: vec![12.0],
            discount_per_day: 0.0002,
            horizon_days: 1.0,
        },
        synthesis: SynthesisConfig::default(),
        split: None,
        dims,
    }
}

/// Two-region sizing benchmark: 2 mobility regions, 2 grid regions,
/// 24 hours, 2 heavy-duty battery types, 2 charger levels, 3 generators,
/// 3 distance bins, with inter-regional transmission.
pub fn desk_scenario() -> ScenarioSpec {
    let n_hours = 24;
    let n_regions = 2;
    let dims = DimensionSets {
        n_hours,
        dt_hours: 1.0,
        mobility_regions: vec!["R1".into(), "R2".into()],
        grid_regions: vec!["I1".into(), "I2".into()],
        region_map: vec![0, 1],
        ldv_batteries: vec!["LB60".into()],
        hdv_batteries: vec!["HB300".into(), "HB500".into()],
        ldv_levels: vec!["LL7".into()],
        hdv_levels: vec!["HL150".into(), "HL350".into()],
        ldv_bins: vec!["LD8".into()],
        hdv_bins: vec!["HD15".into(), "HD40".into(), "HD80".into()],
        generators: vec!["G1BASE".into(), "G1PEAK".into(), "G2MID".into()],
    };

    // Trips per (bin, t, r): region 2 runs at 60% of region 1.
    let bin_scale = [5.0, 2.5, 1.0];
    let region_scale = [1.0, 0.6];
    let mut hdv_trips = Vec::with_capacity(3 * n_hours * n_regions);
    for bs in bin_scale {
        for t in 0..n_hours {
            for rs in region_scale {
                hdv_trips.push(HDV_SHAPE[t] * bs * rs);
            }
        }
    }
    let mut ldv_trips = Vec::with_capacity(n_hours * n_regions);
    for t in 0..n_hours {
        for rs in region_scale {
            ldv_trips.push(LDV_SHAPE[t] * 3.0 * rs);
        }
    }
    let mut other = Vec::with_capacity(2 * n_hours);
    other.extend(shape(&OTHER_SHAPE, 1200.0));
    other.extend(shape(&OTHER_SHAPE, 700.0));
    let mut private_ldv = Vec::with_capacity(n_hours * n_regions);
    for t in 0..n_hours {
        for rs in region_scale {
            private_ldv.push(LDV_SHAPE[t] * 12.0 * rs);
        }
    }

    let pairs = dims.transmission_pairs();
    let trans_cap = vec![1500.0; pairs.len()];
    let trans_cost = vec![0.01; pairs.len() * n_hours];

    ScenarioSpec {
        fleet: FleetParams {
            ldv: ClassFleet {
                battery_kwh: vec![60.0],
                efficiency_kwh_per_mile: vec![0.3],
                maintenance_per_mile: 0.06,
                vehicle_capital: 28_000.0,
                vehicle_om_per_day: 2.0,
                vehicle_life_days: 4380.0,
                battery_capital_per_kwh: 90.0,
                battery_life_days: 2920.0,
                fleet_mismatch: vec![1.05, 1.08],
                battery_mismatch: vec![1.05, 1.06],
            },
            hdv: ClassFleet {
                battery_kwh: vec![300.0, 500.0],
                efficiency_kwh_per_mile: vec![1.3, 1.5],
                maintenance_per_mile: 0.15,
                vehicle_capital: 120_000.0,
                vehicle_om_per_day: 15.0,
                vehicle_life_days: 3650.0,
                battery_capital_per_kwh: 80.0,
                battery_life_days: 2920.0,
                fleet_mismatch: vec![1.1, 1.15],
                battery_mismatch: vec![1.1, 1.12],
            },
        },
        chargers: ChargerParams {
            ldv: ClassChargers {
                rating_kw: vec![7.2],
                capital_per_kw: vec![200.0],
                life_days: vec![3650.0],
                charge_deadhead_time: vec![0.9, 0.9],
            },
            hdv: ClassChargers {
                rating_kw: vec![150.0, 350.0],
                capital_per_kw: vec![600.0, 900.0],
                life_days: vec![3650.0, 3650.0],
                charge_deadhead_time: vec![0.85; 2 * 2 * 2],
            },
        },
        demand: MobilityDemand {
            ldv: ClassDemand {
                trips: ldv_trips,
                trip_miles: vec![8.0],
                speed_mph: vec![25.0; n_hours * n_regions],
                sharing: vec![1.2],
                charge_deadhead_distance: vec![1.05, 1.07],
                customer_deadhead_distance: vec![1.05, 1.05],
                customer_deadhead_time: vec![1.05, 1.06],
            },
            hdv: ClassDemand {
                trips: hdv_trips,
                trip_miles: vec![15.0, 40.0, 80.0],
                speed_mph: vec![30.0; 3 * n_hours * n_regions],
                sharing: vec![2.0, 2.5, 3.0],
                charge_deadhead_distance: vec![1.06, 1.09],
                customer_deadhead_distance: vec![1.0, 1.0],
                customer_deadhead_time: vec![1.0, 1.0],
            },
        },
        exogenous: ExogenousLoads {
            other_kw: other,
            private_ldv_kw: private_ldv,
            private_auto: EnvelopeSet::zeros(n_hours * n_regions),
            private_human: EnvelopeSet::zeros(n_hours * n_regions),
        },
        grid: GridParams {
            gen_cost: vec![0.30, 0.55, 0.40],
            gen_cap_kw: vec![4000.0, 9000.0, 5000.0],
            gen_region: vec![0, 0, 1],
            trans_cost,
            trans_cap_kw: trans_cap,
            eta_trans: 0.95,
            demand_charge: vec![11.0, 13.0],
            discount_per_day: 0.0002,
            horizon_days: 1.0,
        },
        synthesis: SynthesisConfig::default(),
        split: None,
        dims,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::validate_scenario;

    #[test]
    fn bundled_scenarios_validate() {
        for (name, spec) in [
            ("sharing", sharing_scenario()),
            ("desk", desk_scenario()),
        ] {
            let report = validate_scenario(&spec);
            assert!(report.is_valid(), "{name}: {report}");
        }
        for (name, fx) in tiny_all() {
            let report = validate_scenario(&fx.to_scenario());
            assert!(report.is_valid(), "{name}: {report}");
        }
    }

    #[test]
    fn split_fixtures_validate_across_fractions() {
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for (name, spec) in [("sharing", sharing_scenario()), ("desk", desk_scenario())] {
                let split = crate::scenario::shaev_split(&spec, s).unwrap();
                let report = validate_scenario(&split);
                assert!(report.is_valid(), "{name} at s={s}: {report}");
            }
        }
    }
}
