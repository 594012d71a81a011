//! Grid-side post-processing: dispatch tables, marginal prices from the
//! balance-row duals, transmission-flow accounting, and merit-order
//! verification.

use crate::lp::{RowFamily, SparseProgram, VarFamily, VariableIndex};
use crate::scenario::{ScenarioSpec, VehicleClass};
use crate::solver::Solution;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenState {
    Off,
    Marginal,
    AtCapacity,
}

impl GenState {
    pub fn name(self) -> &'static str {
        match self {
            GenState::Off => "off",
            GenState::Marginal => "marginal",
            GenState::AtCapacity => "at_capacity",
        }
    }
}

/// One generator-hour.
#[derive(Debug, Clone)]
pub struct GeneratorHour {
    pub generator: usize,
    pub t: usize,
    pub energy_kwh: f64,
    pub state: GenState,
}

/// One directed flow-hour.
#[derive(Debug, Clone)]
pub struct FlowHour {
    pub from: usize,
    pub to: usize,
    pub t: usize,
    pub energy_kwh: f64,
    pub binding: bool,
}

/// One grid-region hour: local marginal price (dual of the balance row,
/// $/kWh; absent when the solution carries no duals), energy accounting in
/// kWh per step.
#[derive(Debug, Clone)]
pub struct RegionHour {
    pub region: usize,
    pub t: usize,
    pub price: Option<f64>,
    pub load_kwh: f64,
    pub generation_kwh: f64,
    pub imports_kwh: f64,
    pub exports_kwh: f64,
}

#[derive(Debug, Clone)]
pub struct DispatchResult {
    pub generators: Vec<GeneratorHour>,
    pub flows: Vec<FlowHour>,
    pub regions: Vec<RegionHour>,
}

impl DispatchResult {
    pub fn region_hour(&self, i: usize, t: usize) -> &RegionHour {
        self.regions.iter().find(|r| r.region == i && r.t == t).expect("region hour present")
    }

    pub fn generation_of(&self, g: usize, t: usize) -> f64 {
        self.generators
            .iter()
            .find(|e| e.generator == g && e.t == t)
            .map(|e| e.energy_kwh)
            .unwrap_or(0.0)
    }
}

/// Tabulates generation, flows, and prices from an optimal solution.
/// Prices come from duals only; when the solution carries no dual vector
/// they are reported as unavailable, never re-derived.
pub fn extract_dispatch(
    program: &SparseProgram,
    solution: &Solution,
    index: &VariableIndex,
    spec: &ScenarioSpec,
) -> DispatchResult {
    let dims = &spec.dims;
    let dt = dims.dt_hours;
    let duals_available = solution.duals.len() == program.n_rows();

    let mut balance_row: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for row in 0..program.n_rows() {
        let label = program.label(row);
        if label.family == RowFamily::GenBalance {
            balance_row.insert((label.subs[0] as usize, label.subs[1] as usize), row);
        }
    }

    let mut generators = Vec::new();
    for g in 0..dims.generators.len() {
        let cap = spec.grid.gen_cap_kw[g] * dt;
        for t in 0..dims.n_hours {
            let e = solution.primal[index.col(VarFamily::Generation, &[g, t])];
            let tol = 1e-6 * (1.0 + cap);
            let state = if e <= tol {
                GenState::Off
            } else if cap - e <= tol {
                GenState::AtCapacity
            } else {
                GenState::Marginal
            };
            generators.push(GeneratorHour { generator: g, t, energy_kwh: e, state });
        }
    }

    let pairs = dims.transmission_pairs();
    let mut flows = Vec::new();
    for (pair, &(from, to)) in pairs.iter().enumerate() {
        let cap = spec.grid.trans_cap_kw[pair] * dt;
        for t in 0..dims.n_hours {
            let e = solution.primal[index.col(VarFamily::Transmission, &[pair, t])];
            flows.push(FlowHour { from, to, t, energy_kwh: e, binding: cap - e <= 1e-6 * (1.0 + cap) });
        }
    }

    let mut regions = Vec::new();
    for i in 0..dims.n_grid_regions() {
        for t in 0..dims.n_hours {
            let mut load = spec.exogenous.other_kw[dims.idx_it(i, t)] * dt;
            for r in 0..dims.n_regions() {
                if dims.region_map[r] != i {
                    continue;
                }
                let k = dims.idx_tr(t, r);
                load += spec.exogenous.private_ldv_kw[k] * dt;
                load += solution.primal[index.col(VarFamily::PrivAutoCharge, &[t, r])] * dt;
                load += solution.primal[index.col(VarFamily::PrivHumanCharge, &[t, r])] * dt;
                for class in VehicleClass::BOTH {
                    let (charge, n_b, n_l) = match class {
                        VehicleClass::Ldv => (VarFamily::ChargeLdv, dims.ldv_batteries.len(), dims.ldv_levels.len()),
                        VehicleClass::Hdv => (VarFamily::ChargeHdv, dims.hdv_batteries.len(), dims.hdv_levels.len()),
                    };
                    for b in 0..n_b {
                        for l in 0..n_l {
                            load += solution.primal[index.col(charge, &[b, t, l, r])];
                        }
                    }
                }
            }
            let generation: f64 = (0..dims.generators.len())
                .filter(|&g| spec.grid.gen_region[g] == i)
                .map(|g| solution.primal[index.col(VarFamily::Generation, &[g, t])])
                .sum();
            let mut imports = 0.0;
            let mut exports = 0.0;
            for (pair, &(from, to)) in pairs.iter().enumerate() {
                let e = solution.primal[index.col(VarFamily::Transmission, &[pair, t])];
                if to == i {
                    imports += e;
                } else if from == i {
                    exports += e;
                }
            }
            let price = if duals_available {
                Some(solution.duals[balance_row[&(i, t)]])
            } else {
                None
            };
            regions.push(RegionHour { region: i, t, price, load_kwh: load, generation_kwh: generation, imports_kwh: imports, exports_kwh: exports });
        }
    }

    DispatchResult { generators, flows, regions }
}

/// A cheaper-generator-was-idle finding.
#[derive(Debug, Clone)]
pub struct MeritViolation {
    pub t: usize,
    pub expensive: usize,
    pub cheap: usize,
    pub dispatched_kwh: f64,
    pub spare_kwh: f64,
}

impl fmt::Display for MeritViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={}: generator {} dispatched {:.3} kWh while cheaper generator {} had {:.3} kWh spare",
            self.t, self.expensive, self.dispatched_kwh, self.cheap, self.spare_kwh
        )
    }
}

/// Checks that no generator runs while a cheaper one sits idle without a
/// transmission explanation. Same-region pairs have no excuse; for
/// cross-region pairs the direct link may be saturated, or losses and
/// wheeling may price the import above the local unit.
pub fn verify_merit_order(result: &DispatchResult, spec: &ScenarioSpec) -> Vec<MeritViolation> {
    let dims = &spec.dims;
    let dt = dims.dt_hours;
    let n_gen = dims.generators.len();
    let mut violations = Vec::new();
    let energy_tol = |cap_kw: f64| 1e-6 * (1.0 + cap_kw * dt);

    for t in 0..dims.n_hours {
        for expensive in 0..n_gen {
            let dispatched = result.generation_of(expensive, t);
            if dispatched <= energy_tol(spec.grid.gen_cap_kw[expensive]) {
                continue;
            }
            let i = spec.grid.gen_region[expensive];
            for cheap in 0..n_gen {
                if cheap == expensive {
                    continue;
                }
                let spare = spec.grid.gen_cap_kw[cheap] * dt - result.generation_of(cheap, t);
                if spare <= energy_tol(spec.grid.gen_cap_kw[cheap]) {
                    continue;
                }
                let i_cheap = spec.grid.gen_region[cheap];
                if i_cheap == i {
                    if spec.grid.gen_cost[cheap] + 1e-9 < spec.grid.gen_cost[expensive] {
                        violations.push(MeritViolation {
                            t,
                            expensive,
                            cheap,
                            dispatched_kwh: dispatched,
                            spare_kwh: spare,
                        });
                    }
                    continue;
                }
                // Cross-region: importing one kWh delivered costs
                // (generation + wheeling) / eta over the direct link.
                let pair = dims.transmission_pair_index(i_cheap, i);
                let wheeling = spec.grid.trans_cost[pair * dims.n_hours + t];
                let delivered_cost = (spec.grid.gen_cost[cheap] + wheeling) / spec.grid.eta_trans;
                if delivered_cost + 1e-9 >= spec.grid.gen_cost[expensive] {
                    continue;
                }
                let link_binding = result
                    .flows
                    .iter()
                    .any(|f| f.from == i_cheap && f.to == i && f.t == t && f.binding);
                if !link_binding {
                    violations.push(MeritViolation {
                        t,
                        expensive,
                        cheap,
                        dispatched_kwh: dispatched,
                        spare_kwh: spare,
                    });
                }
            }
        }
    }
    violations
}

/// Max energy-conservation residual across region-hours, scaled by load.
pub fn max_balance_residual(result: &DispatchResult, spec: &ScenarioSpec) -> f64 {
    let eta = spec.grid.eta_trans;
    result
        .regions
        .iter()
        .map(|rh| {
            let slack = rh.generation_kwh + eta * rh.imports_kwh - rh.exports_kwh - rh.load_kwh;
            (-slack).max(0.0) / (1.0 + rh.load_kwh)
        })
        .fold(0.0, f64::max)
}
