//! Input data types. All power is in kW, energy in kWh, money in USD,
//! distance in miles; time steps are `dt_hours` long.

/// The two vehicle classes carried through every table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleClass {
    /// Light-duty passenger vehicles.
    Ldv,
    /// Heavy-duty trucks.
    Hdv,
}

impl VehicleClass {
    pub const BOTH: [VehicleClass; 2] = [VehicleClass::Ldv, VehicleClass::Hdv];

    pub fn tag(self) -> &'static str {
        match self {
            VehicleClass::Ldv => "ldv",
            VehicleClass::Hdv => "hdv",
        }
    }
}

/// Index sets of the model plus the mobility-region → grid-region map.
///
/// Hours are implicit: `0..n_hours` contiguous with uniform step `dt_hours`,
/// where `n_hours = horizon_days * 24 / dt_hours`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSets {
    pub n_hours: usize,
    pub dt_hours: f64,
    pub mobility_regions: Vec<String>,
    pub grid_regions: Vec<String>,
    /// `region_map[r]` is the grid region serving mobility region `r`.
    pub region_map: Vec<usize>,
    pub ldv_batteries: Vec<String>,
    pub hdv_batteries: Vec<String>,
    pub ldv_levels: Vec<String>,
    pub hdv_levels: Vec<String>,
    pub ldv_bins: Vec<String>,
    pub hdv_bins: Vec<String>,
    pub generators: Vec<String>,
}

impl DimensionSets {
    pub fn batteries(&self, class: VehicleClass) -> &[String] {
        match class {
            VehicleClass::Ldv => &self.ldv_batteries,
            VehicleClass::Hdv => &self.hdv_batteries,
        }
    }

    pub fn levels(&self, class: VehicleClass) -> &[String] {
        match class {
            VehicleClass::Ldv => &self.ldv_levels,
            VehicleClass::Hdv => &self.hdv_levels,
        }
    }

    pub fn bins(&self, class: VehicleClass) -> &[String] {
        match class {
            VehicleClass::Ldv => &self.ldv_bins,
            VehicleClass::Hdv => &self.hdv_bins,
        }
    }

    pub fn n_regions(&self) -> usize {
        self.mobility_regions.len()
    }

    pub fn n_grid_regions(&self) -> usize {
        self.grid_regions.len()
    }

    /// Dense index into a `(d, t, r)` table laid out d-major.
    pub fn idx_dtr(&self, n_bins: usize, d: usize, t: usize, r: usize) -> usize {
        debug_assert!(d < n_bins && t < self.n_hours && r < self.n_regions());
        (d * self.n_hours + t) * self.n_regions() + r
    }

    /// Dense index into a `(t, r)` table laid out t-major.
    pub fn idx_tr(&self, t: usize, r: usize) -> usize {
        debug_assert!(t < self.n_hours && r < self.n_regions());
        t * self.n_regions() + r
    }

    /// Dense index into a `(i, t)` table laid out i-major.
    pub fn idx_it(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.n_grid_regions() && t < self.n_hours);
        i * self.n_hours + t
    }

    /// Dense index into a `(b, l, r)` table laid out b-major.
    pub fn idx_blr(&self, n_levels: usize, b: usize, l: usize, r: usize) -> usize {
        (b * n_levels + l) * self.n_regions() + r
    }

    /// Ordered directed grid-region pairs, self-loops excluded.
    pub fn transmission_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_grid_regions();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
        for from in 0..n {
            for to in 0..n {
                if from != to {
                    pairs.push((from, to));
                }
            }
        }
        pairs
    }

    /// Index of `(from, to)` in [`Self::transmission_pairs`].
    pub fn transmission_pair_index(&self, from: usize, to: usize) -> usize {
        debug_assert_ne!(from, to);
        from * (self.n_grid_regions() - 1) + if to < from { to } else { to - 1 }
    }
}

/// Per-class fleet economics and physics.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFleet {
    /// Battery capacity per battery type (kWh).
    pub battery_kwh: Vec<f64>,
    /// Drivetrain conversion efficiency per battery type (kWh/mile).
    pub efficiency_kwh_per_mile: Vec<f64>,
    /// Mileage-dependent maintenance ($/mile).
    pub maintenance_per_mile: f64,
    /// Vehicle capital cost excluding the battery ($).
    pub vehicle_capital: f64,
    /// Fixed O&M ($/day).
    pub vehicle_om_per_day: f64,
    /// Vehicle lifetime (days).
    pub vehicle_life_days: f64,
    /// Battery capital cost ($/kWh).
    pub battery_capital_per_kwh: f64,
    /// Battery lifetime (days).
    pub battery_life_days: f64,
    /// Fleet spatial-mismatch factor per mobility region (≥ 1).
    pub fleet_mismatch: Vec<f64>,
    /// Battery spatial-mismatch factor per mobility region (≥ 1).
    pub battery_mismatch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetParams {
    pub ldv: ClassFleet,
    pub hdv: ClassFleet,
}

impl FleetParams {
    pub fn class(&self, class: VehicleClass) -> &ClassFleet {
        match class {
            VehicleClass::Ldv => &self.ldv,
            VehicleClass::Hdv => &self.hdv,
        }
    }
}

/// Per-class charger catalogue.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassChargers {
    /// Power rating per level (kW).
    pub rating_kw: Vec<f64>,
    /// Capital cost per level ($/kW).
    pub capital_per_kw: Vec<f64>,
    /// Lifetime per level (days).
    pub life_days: Vec<f64>,
    /// Charger deadhead-time correction per `(battery, level, region)`,
    /// in (0, 1]: the usable fraction of a plugged hour.
    pub charge_deadhead_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargerParams {
    pub ldv: ClassChargers,
    pub hdv: ClassChargers,
}

impl ChargerParams {
    pub fn class(&self, class: VehicleClass) -> &ClassChargers {
        match class {
            VehicleClass::Ldv => &self.ldv,
            VehicleClass::Hdv => &self.hdv,
        }
    }
}

/// Per-class trip demand and trip physics.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDemand {
    /// Exogenous trips per step, `(d, t, r)` dense.
    pub trips: Vec<f64>,
    /// Trip distance per bin (miles).
    pub trip_miles: Vec<f64>,
    /// Average speed per `(d, t, r)` (mph).
    pub speed_mph: Vec<f64>,
    /// Sharing factor per bin (trip-equivalents per vehicle trip, ≥ 1).
    pub sharing: Vec<f64>,
    /// Charge deadhead distance correction per region.
    pub charge_deadhead_distance: Vec<f64>,
    /// Customer deadhead distance correction per region (light-duty only;
    /// held at 1 and unused in the heavy-duty energy equation).
    pub customer_deadhead_distance: Vec<f64>,
    /// Customer deadhead time correction per region (light-duty only).
    pub customer_deadhead_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityDemand {
    pub ldv: ClassDemand,
    pub hdv: ClassDemand,
}

impl MobilityDemand {
    pub fn class(&self, class: VehicleClass) -> &ClassDemand {
        match class {
            VehicleClass::Ldv => &self.ldv,
            VehicleClass::Hdv => &self.hdv,
        }
    }
}

/// Power and cumulative-energy bounds on one exogenous charging profile,
/// all `(t, r)` dense.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSet {
    pub power_lb_kw: Vec<f64>,
    pub power_ub_kw: Vec<f64>,
    /// Cumulative energy through step t, lower bound (kWh).
    pub energy_lb_kwh: Vec<f64>,
    /// Cumulative energy through step t, upper bound (kWh).
    pub energy_ub_kwh: Vec<f64>,
}

impl EnvelopeSet {
    pub fn zeros(len: usize) -> Self {
        EnvelopeSet {
            power_lb_kw: vec![0.0; len],
            power_ub_kw: vec![0.0; len],
            energy_lb_kwh: vec![0.0; len],
            energy_ub_kwh: vec![0.0; len],
        }
    }
}

/// Fixed load profiles and private-truck charging envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousLoads {
    /// Non-mobility grid demand per `(i, t)` (kW).
    pub other_kw: Vec<f64>,
    /// Personal light-duty charging profile per `(t, r)` (kW, fixed).
    pub private_ldv_kw: Vec<f64>,
    /// Personal automated-truck charging envelope.
    pub private_auto: EnvelopeSet,
    /// Personal human-driven-truck charging envelope.
    pub private_human: EnvelopeSet,
}

/// Generator, transmission, tariff, and financial parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridParams {
    /// Marginal generation cost per generator ($/kWh).
    pub gen_cost: Vec<f64>,
    /// Generator capacity (kW).
    pub gen_cap_kw: Vec<f64>,
    /// Home grid region per generator.
    pub gen_region: Vec<usize>,
    /// Transmission marginal cost per `(pair, t)` dense ($/kWh).
    pub trans_cost: Vec<f64>,
    /// Transmission capacity per directed pair (kW).
    pub trans_cap_kw: Vec<f64>,
    /// Transmission efficiency on imports, in (0, 1].
    pub eta_trans: f64,
    /// Demand charge per mobility region ($/kW/month).
    pub demand_charge: Vec<f64>,
    /// Daily discount rate used by every amortisation.
    pub discount_per_day: f64,
    /// Horizon length in days (fractional horizons allowed for short tests).
    pub horizon_days: f64,
}

/// Knobs for the private-envelope synthesis performed by the demand split.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    /// Share of the private truck fleet that is automated (rest human-driven).
    pub automated_share: f64,
    /// Hour of day at which private trucks plug in.
    pub plug_start_hour: f64,
    /// Hour of day at which private trucks unplug.
    pub plug_end_hour: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            automated_share: 0.5,
            plug_start_hour: 18.0,
            plug_end_hour: 6.0,
        }
    }
}

impl SynthesisConfig {
    /// Whether a private truck is plugged in during the step starting at
    /// hour-of-day `h`. The window may wrap past midnight.
    pub fn plugged(&self, h: f64) -> bool {
        let h = h.rem_euclid(24.0);
        if self.plug_start_hour <= self.plug_end_hour {
            h >= self.plug_start_hour && h < self.plug_end_hour
        } else {
            h >= self.plug_start_hour || h < self.plug_end_hour
        }
    }
}

/// Full immutable input bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub dims: DimensionSets,
    pub fleet: FleetParams,
    pub chargers: ChargerParams,
    pub demand: MobilityDemand,
    pub exogenous: ExogenousLoads,
    pub grid: GridParams,
    pub synthesis: SynthesisConfig,
    /// Present after `shaev_split`; records how demand was divided.
    pub split: Option<super::SplitInfo>,
}

impl ScenarioSpec {
    /// Hour of day at the start of step `t`.
    pub fn hour_of_day(&self, t: usize) -> f64 {
        (t as f64 * self.dims.dt_hours).rem_euclid(24.0)
    }

    /// Total demand trip-miles per class over the horizon.
    pub fn trip_miles(&self, class: VehicleClass) -> f64 {
        let dem = self.demand.class(class);
        let n_bins = self.dims.bins(class).len();
        let mut total = 0.0;
        for d in 0..n_bins {
            for t in 0..self.dims.n_hours {
                for r in 0..self.dims.n_regions() {
                    total += dem.trips[self.dims.idx_dtr(n_bins, d, t, r)] * dem.trip_miles[d];
                }
            }
        }
        total
    }
}
