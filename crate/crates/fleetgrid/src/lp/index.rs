//! Bijection between named decision variables and column positions, and
//! the labelled row families.

use crate::scenario::ScenarioSpec;
use std::fmt;

/// Decision-variable families. The `Energy`/`Moving`/`ChargingCount`
/// families only exist in the explicit (non-substituted) assembly used for
/// cross-checking; the production program substitutes them out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarFamily {
    /// Trips served, light duty: `(battery, bin, t, region)`.
    TripsLdv,
    /// Trips served, heavy duty: `(battery, bin, t, region)`.
    TripsHdv,
    /// Idle vehicles: `(battery, t, region)`.
    IdleLdv,
    IdleHdv,
    /// Fleet size: `(battery, region)`.
    FleetLdv,
    FleetHdv,
    /// Charger count: `(level, region)`.
    ChargersLdv,
    ChargersHdv,
    /// Charging energy per step (kWh): `(battery, t, level, region)`.
    ChargeLdv,
    ChargeHdv,
    /// Billed peak (kW): `(region)`.
    PeakDemand,
    /// Private automated-truck charging power (kW): `(t, region)`.
    PrivAutoCharge,
    /// Private human-driven-truck charging power (kW): `(t, region)`.
    PrivHumanCharge,
    /// Generator output per step (kWh): `(generator, t)`.
    Generation,
    /// Transmitted energy per step (kWh): `(directed pair, t)`.
    Transmission,
    /// Energy to meet demand (explicit assembly only): `(battery, bin, t, region)`.
    EnergyLdv,
    EnergyHdv,
    /// Vehicles moving (explicit assembly only): `(battery, bin, t, region)`.
    MovingLdv,
    MovingHdv,
    /// Vehicles charging (explicit assembly only): `(battery, t, level, region)`.
    ChargingCountLdv,
    ChargingCountHdv,
}

impl VarFamily {
    pub fn name(self) -> &'static str {
        match self {
            VarFamily::TripsLdv => "D",
            VarFamily::TripsHdv => "D_H",
            VarFamily::IdleLdv => "V_i",
            VarFamily::IdleHdv => "V_iH",
            VarFamily::FleetLdv => "V_star",
            VarFamily::FleetHdv => "V_starH",
            VarFamily::ChargersLdv => "N",
            VarFamily::ChargersHdv => "N_H",
            VarFamily::ChargeLdv => "P",
            VarFamily::ChargeHdv => "P_H",
            VarFamily::PeakDemand => "P_max",
            VarFamily::PrivAutoCharge => "P_Hpriv",
            VarFamily::PrivHumanCharge => "P_Hhdr",
            VarFamily::Generation => "G",
            VarFamily::Transmission => "T",
            VarFamily::EnergyLdv => "E",
            VarFamily::EnergyHdv => "E_H",
            VarFamily::MovingLdv => "V_m",
            VarFamily::MovingHdv => "V_mH",
            VarFamily::ChargingCountLdv => "V_c",
            VarFamily::ChargingCountHdv => "V_cH",
        }
    }
}

/// Constraint-row families. Every row in an assembled program carries one
/// of these labels plus its subscripts, so residual and dual reports can
/// name the constraint that produced them. The `Def*` families exist only
/// in the explicit assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowFamily {
    /// Trips across batteries meet demand: `(bin, t, region)`, equality.
    DemandAllocLdv,
    DemandAllocHdv,
    /// Cumulative charge can't lead cumulative consumption: `(battery, t, region)`, <=.
    ChargeUpperLdv,
    ChargeUpperHdv,
    /// Charge keeps up with consumption less battery buffer: `(battery, t, region)`, >=.
    ChargeLowerLdv,
    ChargeLowerHdv,
    /// No charging in the first step: `(battery, level, region)`, equality.
    NoChargeStartLdv,
    NoChargeStartHdv,
    /// Batteries end full: `(battery, region)`, equality.
    TerminalSocLdv,
    TerminalSocHdv,
    /// Moving + idle + charging within fleet size: `(battery, t, region)`, <=.
    FleetDispatchLdv,
    FleetDispatchHdv,
    /// Vehicles charging within charger count: `(level, t, region)`, <=.
    MaxChargingLdv,
    MaxChargingHdv,
    /// Billed peak covers net fleet power: `(t, region)`, <=.
    MaxDemand,
    /// Private automated envelope: `(t, region)`.
    PrivAutoPowerLb,
    PrivAutoPowerUb,
    PrivAutoEnergyLb,
    PrivAutoEnergyUb,
    /// Private human-driven envelope: `(t, region)`.
    PrivHumanPowerLb,
    PrivHumanPowerUb,
    PrivHumanEnergyLb,
    PrivHumanEnergyUb,
    /// Supply covers demand per grid region and step: `(grid region, t)`, >=.
    GenBalance,
    /// Definitional rows of the explicit assembly, all equalities.
    DefEnergyLdv,
    DefEnergyHdv,
    DefMovingLdv,
    DefMovingHdv,
    DefChargingLdv,
    DefChargingHdv,
}

impl RowFamily {
    pub fn name(self) -> &'static str {
        match self {
            RowFamily::DemandAllocLdv => "demand_alloc_ldv",
            RowFamily::DemandAllocHdv => "demand_alloc_hdv",
            RowFamily::ChargeUpperLdv => "charge_upper_ldv",
            RowFamily::ChargeUpperHdv => "charge_upper_hdv",
            RowFamily::ChargeLowerLdv => "charge_lower_ldv",
            RowFamily::ChargeLowerHdv => "charge_lower_hdv",
            RowFamily::NoChargeStartLdv => "no_charge_start_ldv",
            RowFamily::NoChargeStartHdv => "no_charge_start_hdv",
            RowFamily::TerminalSocLdv => "terminal_soc_ldv",
            RowFamily::TerminalSocHdv => "terminal_soc_hdv",
            RowFamily::FleetDispatchLdv => "fleet_dispatch_ldv",
            RowFamily::FleetDispatchHdv => "fleet_dispatch_hdv",
            RowFamily::MaxChargingLdv => "max_charging_ldv",
            RowFamily::MaxChargingHdv => "max_charging_hdv",
            RowFamily::MaxDemand => "max_demand",
            RowFamily::PrivAutoPowerLb => "priv_auto_power_lb",
            RowFamily::PrivAutoPowerUb => "priv_auto_power_ub",
            RowFamily::PrivAutoEnergyLb => "priv_auto_energy_lb",
            RowFamily::PrivAutoEnergyUb => "priv_auto_energy_ub",
            RowFamily::PrivHumanPowerLb => "priv_human_power_lb",
            RowFamily::PrivHumanPowerUb => "priv_human_power_ub",
            RowFamily::PrivHumanEnergyLb => "priv_human_energy_lb",
            RowFamily::PrivHumanEnergyUb => "priv_human_energy_ub",
            RowFamily::GenBalance => "gen_balance",
            RowFamily::DefEnergyLdv => "def_energy_ldv",
            RowFamily::DefEnergyHdv => "def_energy_hdv",
            RowFamily::DefMovingLdv => "def_moving_ldv",
            RowFamily::DefMovingHdv => "def_moving_hdv",
            RowFamily::DefChargingLdv => "def_charging_ldv",
            RowFamily::DefChargingHdv => "def_charging_hdv",
        }
    }
}

/// A row's constraint family plus up to four subscripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowLabel {
    pub family: RowFamily,
    pub subs: [u32; 4],
    pub arity: u8,
}

impl RowLabel {
    pub fn new(family: RowFamily, subs: &[usize]) -> Self {
        debug_assert!(subs.len() <= 4);
        let mut packed = [0u32; 4];
        for (slot, &s) in packed.iter_mut().zip(subs) {
            *slot = s as u32;
        }
        RowLabel { family, subs: packed, arity: subs.len() as u8 }
    }
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family.name())?;
        for k in 0..self.arity as usize {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.subs[k])?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FamilyBlock {
    family: VarFamily,
    offset: usize,
    shape: [usize; 4],
    arity: u8,
}

impl FamilyBlock {
    fn len(&self) -> usize {
        self.shape[..self.arity as usize].iter().product()
    }
}

/// Ordered registry mapping `(family, subscripts)` to columns and back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableIndex {
    blocks: Vec<FamilyBlock>,
    n_cols: usize,
}

impl VariableIndex {
    /// The production variable set for a scenario.
    pub fn for_scenario(spec: &ScenarioSpec) -> Self {
        Self::build(spec, false)
    }

    /// The explicit variable set: production families plus columns for the
    /// substituted intermediates.
    pub fn for_scenario_explicit(spec: &ScenarioSpec) -> Self {
        Self::build(spec, true)
    }

    fn build(spec: &ScenarioSpec, explicit: bool) -> Self {
        let d = &spec.dims;
        let (bl, bh) = (d.ldv_batteries.len(), d.hdv_batteries.len());
        let (dl, dh) = (d.ldv_bins.len(), d.hdv_bins.len());
        let (ll, lh) = (d.ldv_levels.len(), d.hdv_levels.len());
        let (t, r) = (d.n_hours, d.n_regions());
        let g = d.generators.len();
        let pairs = d.transmission_pairs().len();

        let mut families: Vec<(VarFamily, Vec<usize>)> = vec![
            (VarFamily::TripsLdv, vec![bl, dl, t, r]),
            (VarFamily::TripsHdv, vec![bh, dh, t, r]),
            (VarFamily::IdleLdv, vec![bl, t, r]),
            (VarFamily::IdleHdv, vec![bh, t, r]),
            (VarFamily::FleetLdv, vec![bl, r]),
            (VarFamily::FleetHdv, vec![bh, r]),
            (VarFamily::ChargersLdv, vec![ll, r]),
            (VarFamily::ChargersHdv, vec![lh, r]),
            (VarFamily::ChargeLdv, vec![bl, t, ll, r]),
            (VarFamily::ChargeHdv, vec![bh, t, lh, r]),
            (VarFamily::PeakDemand, vec![r]),
            (VarFamily::PrivAutoCharge, vec![t, r]),
            (VarFamily::PrivHumanCharge, vec![t, r]),
            (VarFamily::Generation, vec![g, t]),
            (VarFamily::Transmission, vec![pairs, t]),
        ];
        if explicit {
            families.extend([
                (VarFamily::EnergyLdv, vec![bl, dl, t, r]),
                (VarFamily::EnergyHdv, vec![bh, dh, t, r]),
                (VarFamily::MovingLdv, vec![bl, dl, t, r]),
                (VarFamily::MovingHdv, vec![bh, dh, t, r]),
                (VarFamily::ChargingCountLdv, vec![bl, t, ll, r]),
                (VarFamily::ChargingCountHdv, vec![bh, t, lh, r]),
            ]);
        }

        let mut blocks = Vec::with_capacity(families.len());
        let mut offset = 0;
        for (family, dims) in families {
            let mut shape = [1usize; 4];
            shape[..dims.len()].copy_from_slice(&dims);
            let block = FamilyBlock { family, offset, shape, arity: dims.len() as u8 };
            offset += block.len();
            blocks.push(block);
        }
        VariableIndex { blocks, n_cols: offset }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn block(&self, family: VarFamily) -> &FamilyBlock {
        self.blocks
            .iter()
            .find(|b| b.family == family)
            .unwrap_or_else(|| panic!("family {family:?} not registered in this index"))
    }

    /// Number of columns registered for one family.
    pub fn family_len(&self, family: VarFamily) -> usize {
        self.block(family).len()
    }

    /// Column of `(family, subscripts)`; total over registered families.
    pub fn col(&self, family: VarFamily, subs: &[usize]) -> usize {
        let block = self.block(family);
        debug_assert_eq!(subs.len(), block.arity as usize, "{family:?} subscript arity");
        let mut idx = 0;
        for (k, &s) in subs.iter().enumerate() {
            debug_assert!(s < block.shape[k], "{family:?} subscript {k} = {s} out of range {}", block.shape[k]);
            idx = idx * block.shape[k] + s;
        }
        block.offset + idx
    }

    /// Inverse of [`Self::col`]: the owning family and subscripts.
    pub fn describe(&self, col: usize) -> (VarFamily, [usize; 4], u8) {
        let block = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.offset <= col)
            .expect("column below first block");
        let mut rem = col - block.offset;
        debug_assert!(rem < block.len(), "column {col} beyond the last block");
        let arity = block.arity as usize;
        let mut subs = [0usize; 4];
        for k in (0..arity).rev() {
            subs[k] = rem % block.shape[k];
            rem /= block.shape[k];
        }
        (block.family, subs, block.arity)
    }

    /// Human-readable variable name for diagnostics and program dumps.
    pub fn col_name(&self, col: usize) -> String {
        let (family, subs, arity) = self.describe(col);
        let mut s = format!("{}(", family.name());
        for k in 0..arity as usize {
            if k > 0 {
                s.push(',');
            }
            s.push_str(&subs[k].to_string());
        }
        s.push(')');
        s
    }

    /// Iterates every registered family with its column range.
    pub fn families(&self) -> impl Iterator<Item = (VarFamily, std::ops::Range<usize>)> + '_ {
        self.blocks.iter().map(|b| (b.family, b.offset..b.offset + b.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bijection_over_all_columns() {
        let spec = fixtures::desk_scenario();
        for index in [
            VariableIndex::for_scenario(&spec),
            VariableIndex::for_scenario_explicit(&spec),
        ] {
            for col in 0..index.n_cols() {
                let (family, subs, arity) = index.describe(col);
                assert_eq!(index.col(family, &subs[..arity as usize]), col);
            }
        }
    }

    #[test]
    fn column_count_is_sum_of_family_sizes() {
        let spec = fixtures::desk_scenario();
        let index = VariableIndex::for_scenario(&spec);
        let total: usize = index.families().map(|(_, range)| range.len()).sum();
        assert_eq!(total, index.n_cols());
    }

    #[test]
    fn lexicographic_layout() {
        let spec = fixtures::desk_scenario();
        let index = VariableIndex::for_scenario(&spec);
        // Last subscript is the fastest-moving one.
        let a = index.col(VarFamily::ChargeHdv, &[0, 0, 0, 0]);
        let b = index.col(VarFamily::ChargeHdv, &[0, 0, 0, 1]);
        assert_eq!(b, a + 1);
    }
}
