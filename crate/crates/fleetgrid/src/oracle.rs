//! Brute-force reference optimiser for tiny instances.
//!
//! The oracle discretises the free decision blocks (fleet charging, trip
//! splits across battery types, private-envelope charging) on a regular
//! grid and exhaustively evaluates every combination. Constraints are
//! implemented directly from the model equations, textually independent
//! of the assembler, so a transcription bug in either path shows up as a
//! disagreement. Conditionally optimal variables are not enumerated:
//! given the charging plan, the cheapest fleet size, charger count,
//! billed peak, and generator dispatch are closed-form monotone fills,
//! so taking them at their cheapest feasible values equals enumerating
//! them.
//!
//! The terminal state-of-charge equality cannot be hit by independent
//! grid values, so the last charging slot of each battery is not
//! enumerated: it is derived as the remainder that balances cumulative
//! consumption exactly (and the point is rejected when that remainder
//! turns negative). Every constraint is then checked exactly, up to
//! floating-point dust, and refining the step only adds grid points, so
//! a finer grid can never report a worse optimum. The reported objective
//! carries a conservative Lipschitz bound `slack_objective` (grid step
//! times summed per-dimension cost sensitivities, remainder coupling
//! included): the continuous optimum lies within that band below the
//! oracle value.
//!
//! Enumeration is a pure fold over the grid (the reduction is an
//! associative min, so the outer blocks could be scanned in parallel);
//! the implementation walks it serially, which is plenty under the point
//! budget.

use crate::error::OracleError;
use crate::lp::{row_residuals, SparseProgram, VarFamily, VariableIndex};
use crate::scenario::ScenarioSpec;
use crate::solver::Solution;

/// A scenario small enough for exhaustive search, plus the search budget.
#[derive(Debug, Clone)]
pub struct TinyScenario {
    pub spec: ScenarioSpec,
    /// Max number of grid points the search may visit.
    pub budget_points: f64,
}

impl TinyScenario {
    /// Wraps a scenario after checking the tiny-instance bounds: one
    /// mobility region, at most 4 hours, 2 heavy-duty battery types,
    /// 2 charger levels, 2 generators, 2 distance bins, no light-duty
    /// demand, and no transmission network.
    pub fn new(spec: ScenarioSpec) -> Result<Self, OracleError> {
        let d = &spec.dims;
        let mut problems = Vec::new();
        if d.n_regions() > 1 || d.n_grid_regions() > 1 {
            problems.push(format!("{} regions", d.n_regions().max(d.n_grid_regions())));
        }
        if d.n_hours > 4 {
            problems.push(format!("{} hours", d.n_hours));
        }
        if d.hdv_batteries.len() > 2 {
            problems.push(format!("{} battery types", d.hdv_batteries.len()));
        }
        if d.hdv_levels.len() > 2 {
            problems.push(format!("{} charger levels", d.hdv_levels.len()));
        }
        if d.generators.len() > 2 {
            problems.push(format!("{} generators", d.generators.len()));
        }
        if d.hdv_bins.len() > 2 {
            problems.push(format!("{} distance bins", d.hdv_bins.len()));
        }
        if spec.demand.ldv.trips.iter().any(|&v| v != 0.0) {
            problems.push("nonzero light-duty demand".into());
        }
        if !problems.is_empty() {
            return Err(OracleError::NotTiny(problems.join(", ")));
        }
        Ok(TinyScenario { spec, budget_points: 1e8 })
    }
}

/// What one enumerated dimension controls.
#[derive(Debug, Clone, Copy)]
enum DimKind {
    /// Fleet charging energy `(battery, t, level)`.
    Charge(usize, usize, usize),
    /// Trips assigned to battery 0 in cell `(bin, t)`; battery 1 takes
    /// the remainder.
    TripSplit(usize, usize),
    /// Private automated charging power at `t`.
    EnvAuto(usize),
    /// Private human-driven charging power at `t`.
    EnvHuman(usize),
}

struct Dim {
    kind: DimKind,
    values: Vec<f64>,
}

/// Best grid point found, materialised as a full program column vector.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub objective: f64,
    pub point: Vec<f64>,
    /// Discretisation band: the continuous optimum is within this of
    /// `objective`.
    pub slack_objective: f64,
    /// Constraint slack granted to grid points.
    pub slack_feasibility: f64,
    pub points_evaluated: u64,
    pub grid_step_kwh: f64,
}

/// Model constants derived straight from the scenario tables; heavy-duty
/// only, single region.
struct Tables {
    n_hours: usize,
    n_bat: usize,
    n_lvl: usize,
    n_bin: usize,
    dt: f64,
    /// kWh consumed per trip, `(b, d)`.
    energy_per_trip: Vec<f64>,
    /// Vehicles moving per trip, `(d, t)`.
    moving_per_trip: Vec<f64>,
    /// Chargers occupied per kWh per step, `(b, l)`.
    charging_per_kwh: Vec<f64>,
    battery_kwh: Vec<f64>,
    /// Objective $ per trip (maintenance), `(d, t)`.
    maint_per_trip: Vec<f64>,
    /// Objective $ per charger, per level.
    charger_cost: Vec<f64>,
    /// Objective $ per vehicle, per battery.
    fleet_cost: Vec<f64>,
    /// Objective $ per kW of billed peak.
    peak_cost: f64,
    /// Generators sorted by (cost, index): `(cost, capacity_kwh)`.
    merit: Vec<(f64, f64)>,
    trips: Vec<f64>,
    /// Fixed load per step (kWh): non-mobility plus light-duty private.
    base_load_kwh: Vec<f64>,
    private_ldv_kw: Vec<f64>,
}

impl Tables {
    fn build(spec: &ScenarioSpec) -> Tables {
        let d = &spec.dims;
        let fleet = &spec.fleet.hdv;
        let dem = &spec.demand.hdv;
        let ch = &spec.chargers.hdv;
        let (n_bat, n_lvl, n_bin, n_hours) = (
            d.hdv_batteries.len(),
            d.hdv_levels.len(),
            d.hdv_bins.len(),
            d.n_hours,
        );
        let dt = d.dt_hours;
        let n_days = spec.grid.horizon_days;
        let rate = spec.grid.discount_per_day;

        let amort = |capital: f64, life: f64| {
            crate::costs::amortize_daily(capital, rate, life).expect("finite amortisation")
        };

        let mut energy_per_trip = vec![0.0; n_bat * n_bin];
        for b in 0..n_bat {
            for bin in 0..n_bin {
                energy_per_trip[b * n_bin + bin] = dem.charge_deadhead_distance[0]
                    * fleet.efficiency_kwh_per_mile[b]
                    * dem.trip_miles[bin]
                    / dem.sharing[bin];
            }
        }
        let mut moving_per_trip = vec![0.0; n_bin * n_hours];
        let mut maint_per_trip = vec![0.0; n_bin * n_hours];
        for bin in 0..n_bin {
            for t in 0..n_hours {
                let speed = dem.speed_mph[d.idx_dtr(n_bin, bin, t, 0)];
                let moving = dem.trip_miles[bin] / (dem.sharing[bin] * dt * speed);
                moving_per_trip[bin * n_hours + t] = moving;
                maint_per_trip[bin * n_hours + t] = fleet.maintenance_per_mile * speed * moving;
            }
        }
        let mut charging_per_kwh = vec![0.0; n_bat * n_lvl];
        for b in 0..n_bat {
            for l in 0..n_lvl {
                charging_per_kwh[b * n_lvl + l] =
                    1.0 / (dt * ch.charge_deadhead_time[d.idx_blr(n_lvl, b, l, 0)] * ch.rating_kw[l]);
            }
        }
        let charger_cost: Vec<f64> = (0..n_lvl)
            .map(|l| n_days * ch.rating_kw[l] * amort(ch.capital_per_kw[l], ch.life_days[l]))
            .collect();
        let fleet_cost: Vec<f64> = (0..n_bat)
            .map(|b| {
                let vehicle = fleet.fleet_mismatch[0]
                    * (fleet.vehicle_om_per_day + amort(fleet.vehicle_capital, fleet.vehicle_life_days));
                let battery = fleet.battery_mismatch[0]
                    * amort(fleet.battery_capital_per_kwh, fleet.battery_life_days)
                    * fleet.battery_kwh[b];
                n_days * (vehicle + battery)
            })
            .collect();
        let peak_cost =
            spec.grid.demand_charge[0] / 30.5 / 24.0 * n_hours as f64;

        let mut merit: Vec<(f64, f64)> = spec
            .grid
            .gen_cost
            .iter()
            .zip(&spec.grid.gen_cap_kw)
            .map(|(&c, &cap)| (c, cap * dt))
            .collect();
        merit.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let base_load_kwh: Vec<f64> = (0..n_hours)
            .map(|t| {
                (spec.exogenous.other_kw[d.idx_it(0, t)] + spec.exogenous.private_ldv_kw[d.idx_tr(t, 0)]) * dt
            })
            .collect();

        Tables {
            n_hours,
            n_bat,
            n_lvl,
            n_bin,
            dt,
            energy_per_trip,
            moving_per_trip,
            charging_per_kwh,
            battery_kwh: fleet.battery_kwh.clone(),
            maint_per_trip,
            charger_cost,
            fleet_cost,
            peak_cost,
            merit,
            trips: dem.trips.clone(),
            base_load_kwh,
            private_ldv_kw: (0..n_hours).map(|t| spec.exogenous.private_ldv_kw[d.idx_tr(t, 0)]).collect(),
        }
    }

    fn trip(&self, bin: usize, t: usize) -> f64 {
        // (d, t, r) dense with one region.
        self.trips[bin * self.n_hours + t]
    }
}

/// Builds the enumerated dimensions. Grid steps use power-of-two split
/// counts so halving `grid_step` refines every grid in place.
fn build_dims(tables: &Tables, spec: &ScenarioSpec, grid_step: f64) -> Vec<Dim> {
    let mut dims = Vec::new();
    let t_count = tables.n_hours;

    // Trip splits across two battery types.
    if tables.n_bat == 2 {
        for bin in 0..tables.n_bin {
            for t in 0..t_count {
                let dd = tables.trip(bin, t);
                if dd == 0.0 {
                    continue;
                }
                let k_span = (0..tables.n_bat)
                    .map(|b| tables.energy_per_trip[b * tables.n_bin + bin])
                    .fold(0.0f64, f64::max);
                let want = (dd * k_span / grid_step).max(1.0);
                let splits = want.log2().ceil().exp2() as usize;
                let values: Vec<f64> = (0..=splits).map(|k| dd * k as f64 / splits as f64).collect();
                dims.push(Dim { kind: DimKind::TripSplit(bin, t), values });
            }
        }
    }

    // Fleet charging. The first step is pinned to zero by the no-charge
    // rule, and the `(t = T-1, l = 0)` slot is the derived remainder that
    // closes the terminal state-of-charge equality, so neither is
    // enumerated.
    for b in 0..tables.n_bat {
        let cap: f64 = (0..tables.n_bin)
            .map(|bin| {
                tables.energy_per_trip[b * tables.n_bin + bin]
                    * (0..t_count).map(|t| tables.trip(bin, t)).sum::<f64>()
            })
            .sum();
        if cap == 0.0 {
            continue;
        }
        let steps = (cap / grid_step).ceil() as usize;
        for t in 1..t_count {
            for l in 0..tables.n_lvl {
                if t == t_count - 1 && l == 0 {
                    continue;
                }
                let values: Vec<f64> = (0..=steps).map(|k| k as f64 * grid_step).collect();
                dims.push(Dim { kind: DimKind::Charge(b, t, l), values });
            }
        }
    }

    // Envelope charging wherever the bounds leave room.
    let envelopes = [
        (&spec.exogenous.private_auto, DimKind::EnvAuto(0)),
        (&spec.exogenous.private_human, DimKind::EnvHuman(0)),
    ];
    for (env, proto) in envelopes {
        for t in 0..t_count {
            let lb = env.power_lb_kw[t];
            let ub = env.power_ub_kw[t];
            if ub == 0.0 && lb == 0.0 {
                continue;
            }
            let mut values: Vec<f64> = Vec::new();
            let mut v = lb;
            while v < ub {
                values.push(v);
                v += grid_step;
            }
            values.push(ub);
            let kind = match proto {
                DimKind::EnvAuto(_) => DimKind::EnvAuto(t),
                DimKind::EnvHuman(_) => DimKind::EnvHuman(t),
                _ => unreachable!(),
            };
            dims.push(Dim { kind, values });
        }
    }
    dims
}

/// Exhaustively evaluates the discretised program and returns the best
/// point with its conservative error bounds.
pub fn enumerate_optimum(tiny: &TinyScenario, grid_step_kwh: f64) -> Result<OracleResult, OracleError> {
    assert!(grid_step_kwh > 0.0, "grid step must be positive");
    let spec = &tiny.spec;
    let tables = Tables::build(spec);
    let dims = build_dims(&tables, spec, grid_step_kwh);

    let points: f64 = dims.iter().map(|d| d.values.len() as f64).product();
    if points > tiny.budget_points {
        return Err(OracleError::BudgetExceeded { points, budget: tiny.budget_points });
    }

    // Constraints are checked exactly; this is floating-point headroom only.
    let slack_feasibility = 1e-9;

    let slack_objective = objective_slack(&tables, &dims, grid_step_kwh);

    let mut eval = Evaluator::new(&tables, spec, slack_feasibility);
    let mut cursor = vec![0usize; dims.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut visited: u64 = 0;
    loop {
        visited += 1;
        let assignment: Vec<f64> = cursor.iter().zip(&dims).map(|(&k, d)| d.values[k]).collect();
        if let Some(objective) = eval.evaluate(&dims, &assignment) {
            if best.as_ref().map(|(b, _)| objective < *b).unwrap_or(true) {
                best = Some((objective, assignment));
            }
        }
        // Odometer increment.
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                // exhausted
                let (objective, assignment) = best.ok_or(OracleError::NoFeasiblePoint)?;
                let point = eval.materialize(&dims, &assignment);
                return Ok(OracleResult {
                    objective,
                    point,
                    slack_objective,
                    slack_feasibility,
                    points_evaluated: visited,
                    grid_step_kwh,
                });
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < dims[pos].values.len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Conservative per-dimension cost sensitivities times the step.
fn objective_slack(tables: &Tables, dims: &[Dim], grid_step: f64) -> f64 {
    let gen_max = tables.merit.iter().map(|&(c, _)| c).fold(0.0f64, f64::max);
    let peak_sensitivity = tables.peak_cost / tables.dt;
    let fleet_max: f64 = (0..tables.n_bat)
        .map(|b| tables.fleet_cost[b] / tables.battery_kwh[b])
        .fold(0.0f64, f64::max);
    // Cost sensitivity of one kWh moved through a charging slot; shifting
    // a free slot also shifts the derived remainder slot, so dimension
    // sensitivities count both ends.
    let slot_l = |b: usize, l: usize| {
        let k_c = tables.charging_per_kwh[b * tables.n_lvl + l];
        let charger = tables.charger_cost[l] * k_c;
        let fleet = tables.fleet_cost[b] * (k_c + 1.0 / tables.battery_kwh[b]);
        gen_max + peak_sensitivity + charger + fleet
    };
    let remainder_l_max = (0..tables.n_bat).map(|b| slot_l(b, 0)).fold(0.0f64, f64::max);
    dims.iter()
        .map(|d| match d.kind {
            DimKind::Charge(b, _, l) => (slot_l(b, l) + slot_l(b, 0)) * grid_step,
            DimKind::TripSplit(bin, t) => {
                let step = d.values.get(1).copied().unwrap_or(0.0) - d.values[0];
                let k_span: f64 = (0..tables.n_bat)
                    .map(|b| tables.energy_per_trip[b * tables.n_bin + bin])
                    .sum();
                let moving = tables.moving_per_trip[bin * tables.n_hours + t];
                let fleet: f64 = (0..tables.n_bat).map(|b| tables.fleet_cost[b]).sum::<f64>() * moving;
                (k_span * (gen_max + fleet_max + remainder_l_max) + fleet) * step
            }
            DimKind::EnvAuto(_) | DimKind::EnvHuman(_) => {
                (gen_max * tables.dt + tables.peak_cost) * grid_step
            }
        })
        .sum()
}

struct Evaluator<'a> {
    tables: &'a Tables,
    spec: &'a ScenarioSpec,
    slack: f64,
    // Scratch, reused across evaluations.
    trips: Vec<f64>,
    charge: Vec<f64>,
    env_auto: Vec<f64>,
    env_human: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(tables: &'a Tables, spec: &'a ScenarioSpec, slack: f64) -> Self {
        Evaluator {
            tables,
            spec,
            slack,
            trips: vec![0.0; tables.n_bat * tables.n_bin * tables.n_hours],
            charge: vec![0.0; tables.n_bat * tables.n_hours * tables.n_lvl],
            env_auto: vec![0.0; tables.n_hours],
            env_human: vec![0.0; tables.n_hours],
        }
    }

    /// Loads one grid assignment and derives the remainder charging slot
    /// of each battery so total charge balances total consumption exactly.
    /// Fails when a remainder would have to be negative.
    fn load_assignment(&mut self, dims: &[Dim], assignment: &[f64]) -> bool {
        let tb = self.tables;
        self.trips.fill(0.0);
        self.charge.fill(0.0);
        self.env_auto.fill(0.0);
        self.env_human.fill(0.0);
        // Demand sits fully on battery 0 unless a split dimension says
        // otherwise; with a single battery type it is simply forced.
        for bin in 0..tb.n_bin {
            for t in 0..tb.n_hours {
                self.trips[bin * tb.n_hours + t] = tb.trip(bin, t);
            }
        }
        for (dim, &v) in dims.iter().zip(assignment) {
            match dim.kind {
                DimKind::Charge(b, t, l) => {
                    self.charge[(b * tb.n_hours + t) * tb.n_lvl + l] = v;
                }
                DimKind::TripSplit(bin, t) => {
                    let dd = tb.trip(bin, t);
                    self.trips[bin * tb.n_hours + t] = v;
                    self.trips[(tb.n_bin + bin) * tb.n_hours + t] = dd - v;
                }
                DimKind::EnvAuto(t) => self.env_auto[t] = v,
                DimKind::EnvHuman(t) => self.env_human[t] = v,
            }
        }
        for b in 0..tb.n_bat {
            let target: f64 = (0..tb.n_bin)
                .map(|bin| {
                    tb.energy_per_trip[b * tb.n_bin + bin]
                        * (0..tb.n_hours).map(|t| self.trips_of(b, bin, t)).sum::<f64>()
                })
                .sum();
            let free: f64 = (0..tb.n_hours)
                .map(|t| (0..tb.n_lvl).map(|l| self.charge_of(b, t, l)).sum::<f64>())
                .sum();
            let remainder = target - free;
            let tol = 1e-9 * (1.0 + target.abs());
            if tb.n_hours < 2 {
                if remainder.abs() > tol {
                    return false;
                }
                continue;
            }
            if remainder < -tol {
                return false;
            }
            self.charge[(b * tb.n_hours + (tb.n_hours - 1)) * tb.n_lvl] = remainder.max(0.0);
        }
        true
    }

    fn trips_of(&self, b: usize, bin: usize, t: usize) -> f64 {
        if b == 0 {
            self.trips[bin * self.tables.n_hours + t]
        } else {
            self.trips[(self.tables.n_bin + bin) * self.tables.n_hours + t]
        }
    }

    fn charge_of(&self, b: usize, t: usize, l: usize) -> f64 {
        self.charge[(b * self.tables.n_hours + t) * self.tables.n_lvl + l]
    }

    /// Feasibility filter plus exact objective; `None` when rejected.
    fn evaluate(&mut self, dims: &[Dim], assignment: &[f64]) -> Option<f64> {
        if !self.load_assignment(dims, assignment) {
            return None;
        }
        let tb = self.tables;
        let slack = self.slack;
        let mut objective = 0.0;

        let mut fleet = vec![0.0f64; tb.n_bat];
        for b in 0..tb.n_bat {
            // Batteries start full: cumulative charge may not lead
            // cumulative consumption, and must match it at the end.
            let mut cum_e = 0.0;
            let mut cum_p = 0.0;
            for t in 0..tb.n_hours {
                let e_t: f64 = (0..tb.n_bin)
                    .map(|bin| tb.energy_per_trip[b * tb.n_bin + bin] * self.trips_of(b, bin, t))
                    .sum();
                let p_t: f64 = (0..tb.n_lvl).map(|l| self.charge_of(b, t, l)).sum();
                let cum_e_prev = cum_e;
                let cum_p_prev = cum_p;
                cum_e += e_t;
                cum_p += p_t;
                if cum_p > cum_e_prev + slack * (1.0 + cum_e_prev.abs()) {
                    return None;
                }
                // Battery buffer requirement.
                fleet[b] = fleet[b].max((cum_e - cum_p_prev) / tb.battery_kwh[b]);
                // Simultaneous duty requirement.
                let moving: f64 = (0..tb.n_bin)
                    .map(|bin| tb.moving_per_trip[bin * tb.n_hours + t] * self.trips_of(b, bin, t))
                    .sum();
                let charging: f64 = (0..tb.n_lvl)
                    .map(|l| tb.charging_per_kwh[b * tb.n_lvl + l] * self.charge_of(b, t, l))
                    .sum();
                fleet[b] = fleet[b].max(moving + charging);
            }
            if (cum_p - cum_e).abs() > slack * (1.0 + cum_e.abs()) {
                return None;
            }
            objective += tb.fleet_cost[b] * fleet[b];
        }

        for l in 0..tb.n_lvl {
            let occupied = (0..tb.n_hours)
                .map(|t| {
                    (0..tb.n_bat)
                        .map(|b| tb.charging_per_kwh[b * tb.n_lvl + l] * self.charge_of(b, t, l))
                        .sum::<f64>()
                })
                .fold(0.0f64, f64::max);
            objective += tb.charger_cost[l] * occupied;
        }

        // Envelope cumulative-energy bands.
        for (env, series) in [
            (&self.spec.exogenous.private_auto, &self.env_auto),
            (&self.spec.exogenous.private_human, &self.env_human),
        ] {
            let mut cum = 0.0;
            for t in 0..tb.n_hours {
                cum += series[t] * tb.dt;
                let tol = slack * (1.0 + cum.abs());
                if cum < env.energy_lb_kwh[t] - tol || cum > env.energy_ub_kwh[t] + tol {
                    return None;
                }
            }
        }

        // Maintenance.
        for b in 0..tb.n_bat {
            for bin in 0..tb.n_bin {
                for t in 0..tb.n_hours {
                    objective += tb.maint_per_trip[bin * tb.n_hours + t] * self.trips_of(b, bin, t);
                }
            }
        }

        // Billed peak: the fleet draw net of private charging, floored at
        // zero by the variable bound.
        let peak = (0..tb.n_hours)
            .map(|t| {
                let fleet_kwh: f64 = (0..tb.n_bat)
                    .flat_map(|b| (0..tb.n_lvl).map(move |l| (b, l)))
                    .map(|(b, l)| self.charge_of(b, t, l))
                    .sum();
                fleet_kwh / tb.dt - self.private_ldv(t) - self.env_auto[t] - self.env_human[t]
            })
            .fold(0.0f64, f64::max);
        objective += tb.peak_cost * peak;

        // Merit-order generation fill.
        for t in 0..tb.n_hours {
            let mut remaining = tb.base_load_kwh[t]
                + (self.env_auto[t] + self.env_human[t]) * tb.dt
                + (0..tb.n_bat)
                    .flat_map(|b| (0..tb.n_lvl).map(move |l| (b, l)))
                    .map(|(b, l)| self.charge_of(b, t, l))
                    .sum::<f64>();
            for &(cost, cap) in &tb.merit {
                let take = remaining.min(cap);
                objective += cost * take;
                remaining -= take;
                if remaining <= 0.0 {
                    break;
                }
            }
            if remaining > 1e-9 * (1.0 + tb.base_load_kwh[t]) {
                return None;
            }
        }

        Some(objective)
    }

    fn private_ldv(&self, t: usize) -> f64 {
        self.tables.private_ldv_kw[t]
    }

    /// Expands an accepted assignment into a full program column vector.
    fn materialize(&mut self, dims: &[Dim], assignment: &[f64]) -> Vec<f64> {
        let loaded = self.load_assignment(dims, assignment);
        debug_assert!(loaded, "materialising a rejected assignment");
        let tb = self.tables;
        let index = VariableIndex::for_scenario(self.spec);
        let mut x = vec![0.0; index.n_cols()];

        let mut fleet = vec![0.0f64; tb.n_bat];
        for b in 0..tb.n_bat {
            let mut cum_e = 0.0;
            let mut cum_p = 0.0;
            for t in 0..tb.n_hours {
                let e_t: f64 = (0..tb.n_bin)
                    .map(|bin| tb.energy_per_trip[b * tb.n_bin + bin] * self.trips_of(b, bin, t))
                    .sum();
                let cum_p_prev = cum_p;
                cum_e += e_t;
                cum_p += (0..tb.n_lvl).map(|l| self.charge_of(b, t, l)).sum::<f64>();
                fleet[b] = fleet[b].max((cum_e - cum_p_prev) / tb.battery_kwh[b]);
                let moving: f64 = (0..tb.n_bin)
                    .map(|bin| tb.moving_per_trip[bin * tb.n_hours + t] * self.trips_of(b, bin, t))
                    .sum();
                let charging: f64 = (0..tb.n_lvl)
                    .map(|l| tb.charging_per_kwh[b * tb.n_lvl + l] * self.charge_of(b, t, l))
                    .sum();
                fleet[b] = fleet[b].max(moving + charging);
            }
        }

        for b in 0..tb.n_bat {
            x[index.col(VarFamily::FleetHdv, &[b, 0])] = fleet[b];
            for t in 0..tb.n_hours {
                for bin in 0..tb.n_bin {
                    x[index.col(VarFamily::TripsHdv, &[b, bin, t, 0])] = self.trips_of(b, bin, t);
                }
                for l in 0..tb.n_lvl {
                    x[index.col(VarFamily::ChargeHdv, &[b, t, l, 0])] = self.charge_of(b, t, l);
                }
                let moving: f64 = (0..tb.n_bin)
                    .map(|bin| tb.moving_per_trip[bin * tb.n_hours + t] * self.trips_of(b, bin, t))
                    .sum();
                let charging: f64 = (0..tb.n_lvl)
                    .map(|l| tb.charging_per_kwh[b * tb.n_lvl + l] * self.charge_of(b, t, l))
                    .sum();
                x[index.col(VarFamily::IdleHdv, &[b, t, 0])] = (fleet[b] - moving - charging).max(0.0);
            }
        }
        for l in 0..tb.n_lvl {
            let occupied = (0..tb.n_hours)
                .map(|t| {
                    (0..tb.n_bat)
                        .map(|b| tb.charging_per_kwh[b * tb.n_lvl + l] * self.charge_of(b, t, l))
                        .sum::<f64>()
                })
                .fold(0.0f64, f64::max);
            x[index.col(VarFamily::ChargersHdv, &[l, 0])] = occupied;
        }
        for t in 0..tb.n_hours {
            x[index.col(VarFamily::PrivAutoCharge, &[t, 0])] = self.env_auto[t];
            x[index.col(VarFamily::PrivHumanCharge, &[t, 0])] = self.env_human[t];
        }
        let peak = (0..tb.n_hours)
            .map(|t| {
                let fleet_kwh: f64 = (0..tb.n_bat)
                    .flat_map(|b| (0..tb.n_lvl).map(move |l| (b, l)))
                    .map(|(b, l)| self.charge_of(b, t, l))
                    .sum();
                fleet_kwh / tb.dt - self.private_ldv(t) - self.env_auto[t] - self.env_human[t]
            })
            .fold(0.0f64, f64::max);
        x[index.col(VarFamily::PeakDemand, &[0])] = peak;

        // Merit fill back onto the named generators.
        let mut gens: Vec<usize> = (0..self.spec.grid.gen_cost.len()).collect();
        gens.sort_by(|&a, &b| {
            self.spec.grid.gen_cost[a]
                .partial_cmp(&self.spec.grid.gen_cost[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        for t in 0..tb.n_hours {
            let mut remaining = tb.base_load_kwh[t]
                + (self.env_auto[t] + self.env_human[t]) * tb.dt
                + (0..tb.n_bat)
                    .flat_map(|b| (0..tb.n_lvl).map(move |l| (b, l)))
                    .map(|(b, l)| self.charge_of(b, t, l))
                    .sum::<f64>();
            for &g in &gens {
                let take = remaining.min(self.spec.grid.gen_cap_kw[g] * tb.dt);
                x[index.col(VarFamily::Generation, &[g, t])] = take;
                remaining -= take;
                if remaining <= 0.0 {
                    break;
                }
            }
        }
        x
    }
}

/// One enumerated grid point materialised as a full column vector, with
/// the oracle's feasibility verdict, for cross-validating the oracle's
/// direct constraint encoding against the assembled program's residuals.
#[derive(Debug, Clone)]
pub struct CrossCheckSample {
    pub point: Vec<f64>,
    pub accepted: bool,
}

/// Walks the enumeration grid and returns every `stride`-th assignment
/// whose charging remainder is well defined, up to `max_samples`.
pub fn sample_for_cross_check(
    tiny: &TinyScenario,
    grid_step_kwh: f64,
    stride: usize,
    max_samples: usize,
) -> Result<Vec<CrossCheckSample>, OracleError> {
    let spec = &tiny.spec;
    let tables = Tables::build(spec);
    let dims = build_dims(&tables, spec, grid_step_kwh);
    let points: f64 = dims.iter().map(|d| d.values.len() as f64).product();
    if points > tiny.budget_points {
        return Err(OracleError::BudgetExceeded { points, budget: tiny.budget_points });
    }
    let mut eval = Evaluator::new(&tables, spec, 1e-9);
    let mut cursor = vec![0usize; dims.len()];
    let mut samples = Vec::new();
    let mut visited = 0usize;
    loop {
        let assignment: Vec<f64> = cursor.iter().zip(&dims).map(|(&k, d)| d.values[k]).collect();
        if visited % stride.max(1) == 0 && eval.load_assignment(&dims, &assignment) {
            let accepted = eval.evaluate(&dims, &assignment).is_some();
            let point = eval.materialize(&dims, &assignment);
            samples.push(CrossCheckSample { point, accepted });
            if samples.len() >= max_samples {
                return Ok(samples);
            }
        }
        visited += 1;
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return Ok(samples);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < dims[pos].values.len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Pass/fail comparison of pipeline output against the oracle band.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub pass: bool,
    /// `pipeline objective - oracle objective`; negative means the solver
    /// beat the grid, which discretisation expects.
    pub gap: f64,
    pub pipeline_feasible: bool,
    pub band: f64,
}

/// The pipeline passes when its objective does not exceed the oracle's by
/// more than the discretisation band plus `tol`, and its point satisfies
/// every program row at the 1e-6 scaled tolerance.
pub fn compare(
    oracle: &OracleResult,
    program: &SparseProgram,
    pipeline: &Solution,
    tol: f64,
) -> CompareReport {
    let feasible = row_residuals(program, &pipeline.primal)
        .map(|rep| rep.feasible_within(1e-6))
        .unwrap_or(false);
    let gap = pipeline.objective - oracle.objective;
    let band = oracle.slack_objective + tol;
    CompareReport { pass: feasible && gap <= band, gap, pipeline_feasible: feasible, band }
}
