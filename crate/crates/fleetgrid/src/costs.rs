//! Amortised and operating cost coefficients.
//!
//! Pure, stateless functions plus a per-scenario cache. Every capital cost
//! is converted to an equivalent daily payment with the capital-recovery
//! factor `capital * rate * (1 + rate)^L / ((1 + rate)^L - 1)`; at zero
//! rate the analytic limit `capital / L` applies. The demand charge
//! converts a monthly $/kW tariff to an hourly rate with the fixed
//! 30.5 day/month convention.

use crate::error::CostError;
use crate::scenario::{ScenarioSpec, VehicleClass};

/// Days per month used by the demand-charge conversion.
pub const DAYS_PER_MONTH: f64 = 30.5;

/// Converts a capital cost to an equivalent daily payment.
///
/// Evaluated as `capital * rate * exp(g) / expm1(g)` with
/// `g = L * ln(1 + rate)`, which stays accurate for rates down to the
/// zero-rate limit `capital / L`.
pub fn amortize_daily(capital: f64, rate: f64, lifetime_days: f64) -> Result<f64, CostError> {
    if !(capital >= 0.0) || !(lifetime_days > 0.0) || !(rate >= 0.0) {
        return Err(CostError::BadInput(format!(
            "capital {capital} must be >= 0, lifetime {lifetime_days} > 0, rate {rate} >= 0"
        )));
    }
    if rate == 0.0 {
        return Ok(capital / lifetime_days);
    }
    let g = lifetime_days * rate.ln_1p();
    let denom = g.exp_m1();
    let value = capital * rate * (denom + 1.0) / denom;
    if !value.is_finite() {
        return Err(CostError::NonFinite { capital, rate, lifetime: lifetime_days });
    }
    Ok(value)
}

/// Daily cost of one vehicle without its battery, spatial mismatch applied.
pub fn daily_vehicle_cost(
    spec: &ScenarioSpec,
    class: VehicleClass,
    region: usize,
) -> Result<f64, CostError> {
    let fleet = spec.fleet.class(class);
    let amortised = amortize_daily(
        fleet.vehicle_capital,
        spec.grid.discount_per_day,
        fleet.vehicle_life_days,
    )?;
    Ok(fleet.fleet_mismatch[region] * (fleet.vehicle_om_per_day + amortised))
}

/// Daily cost per kWh of battery, spatial mismatch applied.
pub fn daily_battery_cost(
    spec: &ScenarioSpec,
    class: VehicleClass,
    region: usize,
) -> Result<f64, CostError> {
    let fleet = spec.fleet.class(class);
    let amortised = amortize_daily(
        fleet.battery_capital_per_kwh,
        spec.grid.discount_per_day,
        fleet.battery_life_days,
    )?;
    Ok(fleet.battery_mismatch[region] * amortised)
}

/// Hourly maintenance cost of `moving` vehicles at `speed` mph.
pub fn maintenance_cost(per_mile: f64, moving: f64, speed_mph: f64) -> f64 {
    per_mile * moving * speed_mph
}

/// Hourly objective rate on the billed peak, from a monthly $/kW tariff.
pub fn demand_charge_hourly_rate(beta_per_kw_month: f64) -> f64 {
    beta_per_kw_month / DAYS_PER_MONTH / 24.0
}

/// Per-class amortised coefficient block.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCosts {
    /// Daily charger cost per level ($/kW/day).
    pub charger_per_kw_day: Vec<f64>,
    /// Daily vehicle cost per region ($/vehicle/day).
    pub vehicle_per_day: Vec<f64>,
    /// Daily battery cost per region ($/kWh/day).
    pub battery_per_kwh_day: Vec<f64>,
    /// Maintenance rate per moving vehicle per hour, `(d, t, r)` dense.
    pub maintenance_per_moving_hour: Vec<f64>,
}

/// Every objective coefficient, precomputed once per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCoefficients {
    pub ldv: ClassCosts,
    pub hdv: ClassCosts,
    /// Hourly demand-charge rate per mobility region ($/kW/hour).
    pub demand_rate_per_kw_hour: Vec<f64>,
}

impl CostCoefficients {
    pub fn class(&self, class: VehicleClass) -> &ClassCosts {
        match class {
            VehicleClass::Ldv => &self.ldv,
            VehicleClass::Hdv => &self.hdv,
        }
    }

    /// Computes and caches every coefficient; fails on any non-finite or
    /// negative result.
    pub fn compute(spec: &ScenarioSpec) -> Result<Self, CostError> {
        let mut out = CostCoefficients {
            ldv: Self::class_costs(spec, VehicleClass::Ldv)?,
            hdv: Self::class_costs(spec, VehicleClass::Hdv)?,
            demand_rate_per_kw_hour: spec
                .grid
                .demand_charge
                .iter()
                .map(|&b| demand_charge_hourly_rate(b))
                .collect(),
        };
        for (name, table) in [
            ("ldv charger", &out.ldv.charger_per_kw_day),
            ("hdv charger", &out.hdv.charger_per_kw_day),
            ("ldv vehicle", &out.ldv.vehicle_per_day),
            ("hdv vehicle", &out.hdv.vehicle_per_day),
            ("ldv battery", &out.ldv.battery_per_kwh_day),
            ("hdv battery", &out.hdv.battery_per_kwh_day),
            ("ldv maintenance", &out.ldv.maintenance_per_moving_hour),
            ("hdv maintenance", &out.hdv.maintenance_per_moving_hour),
            ("demand rate", &out.demand_rate_per_kw_hour),
        ] {
            for &v in table.iter() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(CostError::BadInput(format!("{name} coefficient {v} is not finite and non-negative")));
                }
            }
        }
        // Maintenance table is shared with the assembler; keep it dense even
        // when demand is empty.
        out.demand_rate_per_kw_hour.shrink_to_fit();
        Ok(out)
    }

    fn class_costs(spec: &ScenarioSpec, class: VehicleClass) -> Result<ClassCosts, CostError> {
        let dims = &spec.dims;
        let chargers = spec.chargers.class(class);
        let demand = spec.demand.class(class);
        let rate = spec.grid.discount_per_day;

        let charger_per_kw_day = chargers
            .capital_per_kw
            .iter()
            .zip(&chargers.life_days)
            .map(|(&phi, &life)| amortize_daily(phi, rate, life))
            .collect::<Result<Vec<_>, _>>()?;

        let vehicle_per_day = (0..dims.n_regions())
            .map(|r| daily_vehicle_cost(spec, class, r))
            .collect::<Result<Vec<_>, _>>()?;
        let battery_per_kwh_day = (0..dims.n_regions())
            .map(|r| daily_battery_cost(spec, class, r))
            .collect::<Result<Vec<_>, _>>()?;

        let per_mile = spec.fleet.class(class).maintenance_per_mile;
        let n_bins = dims.bins(class).len();
        let mut maintenance = vec![0.0; n_bins * dims.n_hours * dims.n_regions()];
        for d in 0..n_bins {
            for t in 0..dims.n_hours {
                for r in 0..dims.n_regions() {
                    let idx = dims.idx_dtr(n_bins, d, t, r);
                    maintenance[idx] = maintenance_cost(per_mile, 1.0, demand.speed_mph[idx]);
                }
            }
        }

        Ok(ClassCosts {
            charger_per_kw_day,
            vehicle_per_day,
            battery_per_kwh_day,
            maintenance_per_moving_hour: maintenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Exact rational evaluation of the capital-recovery factor for integer
    /// lifetimes and rational rates; the independent high-precision oracle.
    fn amortize_exact(capital: BigRational, rate: BigRational, lifetime: u32) -> BigRational {
        let one = BigRational::from(BigInt::from(1));
        let growth = (one.clone() + rate.clone()).pow(lifetime as i32);
        capital * rate * growth.clone() / (growth - one)
    }

    fn assert_close_to_exact(value: f64, exact: &BigRational, rel_tol_denom: i64) {
        let value_rat = BigRational::from_float(value).expect("finite");
        let err = (value_rat - exact.clone()).abs();
        let bound = exact.abs() * ratio(1, rel_tol_denom);
        assert!(err <= bound, "|{value} - exact| = {err} exceeds {bound}");
    }

    #[test]
    fn zero_rate_is_straight_line() {
        assert_eq!(amortize_daily(1000.0, 0.0, 1000.0).unwrap(), 1.0);
    }

    #[test]
    fn unit_case_doubles() {
        assert_eq!(amortize_daily(1.0, 1.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn matches_exact_rational_evaluation() {
        let value = amortize_daily(5000.0, 0.0002, 3650.0).unwrap();
        let exact = amortize_exact(ratio(5000, 1), ratio(2, 10_000), 3650);
        assert_close_to_exact(value, &exact, 1_000_000_000);
    }

    #[test]
    fn twenty_random_triples_match_exact_oracle() {
        // Deterministic LCG; rates are exact ten-thousandths so the rational
        // oracle sees the same inputs bit for bit.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        for _ in 0..20 {
            let capital = 1 + next() % 1_000_000;
            let rate_ten_thousandths = 1 + next() % 50;
            let lifetime = (1 + next() % 20_000) as u32;
            let value = amortize_daily(
                capital as f64,
                rate_ten_thousandths as f64 / 10_000.0,
                lifetime as f64,
            )
            .unwrap();
            let exact = amortize_exact(ratio(capital, 1), ratio(rate_ten_thousandths, 10_000), lifetime);
            assert_close_to_exact(value, &exact, 1_000_000_000);
        }
    }

    #[test]
    fn continuous_at_zero_rate() {
        for &(capital, lifetime) in &[(1000.0, 1000.0), (5000.0, 3650.0), (1.0, 1.0), (120_000.0, 7300.0)] {
            let limit = capital / lifetime;
            let near = amortize_daily(capital, 1e-12, lifetime).unwrap();
            assert!(
                (near - limit).abs() <= 1e-6 * limit,
                "capital {capital}, lifetime {lifetime}: {near} vs {limit}"
            );
        }
    }

    #[test]
    fn overflow_is_a_domain_error() {
        let err = amortize_daily(1.0, 1.0, 1e6, ).unwrap_err();
        assert!(matches!(err, CostError::NonFinite { .. }));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(amortize_daily(-1.0, 0.0, 10.0).is_err());
        assert!(amortize_daily(1.0, -0.1, 10.0).is_err());
        assert!(amortize_daily(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn vehicle_cost_reduces_to_amortisation() {
        let mut spec = fixtures::sharing_scenario();
        spec.grid.discount_per_day = 0.0;
        spec.fleet.hdv.fleet_mismatch = vec![1.0; spec.dims.n_regions()];
        spec.fleet.hdv.vehicle_om_per_day = 0.0;
        spec.fleet.hdv.vehicle_capital = 1000.0;
        spec.fleet.hdv.vehicle_life_days = 1000.0;
        assert_eq!(daily_vehicle_cost(&spec, VehicleClass::Hdv, 0).unwrap(), 1.0);
    }

    #[test]
    fn vehicle_cost_zero_capital_case() {
        let mut spec = fixtures::sharing_scenario();
        spec.fleet.hdv.fleet_mismatch = vec![2.0; spec.dims.n_regions()];
        spec.fleet.hdv.vehicle_om_per_day = 3.0;
        spec.fleet.hdv.vehicle_capital = 0.0;
        assert_eq!(daily_vehicle_cost(&spec, VehicleClass::Hdv, 0).unwrap(), 6.0);
    }

    #[test]
    fn realistic_vehicle_row_matches_oracle() {
        let mut spec = fixtures::sharing_scenario();
        spec.grid.discount_per_day = 0.00013;
        spec.fleet.hdv.fleet_mismatch = vec![1.2; spec.dims.n_regions()];
        spec.fleet.hdv.vehicle_om_per_day = 10.0;
        spec.fleet.hdv.vehicle_capital = 120_000.0;
        spec.fleet.hdv.vehicle_life_days = 3650.0;
        let value = daily_vehicle_cost(&spec, VehicleClass::Hdv, 0).unwrap();
        let exact = ratio(12, 10)
            * (ratio(10, 1) + amortize_exact(ratio(120_000, 1), ratio(13, 100_000), 3650));
        assert_close_to_exact(value, &exact, 1_000_000_000);
    }

    #[test]
    fn battery_cost_examples() {
        let mut spec = fixtures::sharing_scenario();
        spec.grid.discount_per_day = 0.0;
        spec.fleet.hdv.battery_mismatch = vec![1.0; spec.dims.n_regions()];
        spec.fleet.hdv.battery_capital_per_kwh = 100.0;
        spec.fleet.hdv.battery_life_days = 100.0;
        assert_eq!(daily_battery_cost(&spec, VehicleClass::Hdv, 0).unwrap(), 1.0);

        // Linear in the mismatch factor.
        spec.fleet.hdv.battery_mismatch = vec![1.5; spec.dims.n_regions()];
        assert_eq!(daily_battery_cost(&spec, VehicleClass::Hdv, 0).unwrap(), 1.5);
    }

    #[test]
    fn battery_cost_matches_oracle() {
        let mut spec = fixtures::sharing_scenario();
        spec.grid.discount_per_day = 0.0002;
        spec.fleet.hdv.battery_mismatch = vec![1.1; spec.dims.n_regions()];
        spec.fleet.hdv.battery_capital_per_kwh = 95.0;
        spec.fleet.hdv.battery_life_days = 2920.0;
        let value = daily_battery_cost(&spec, VehicleClass::Hdv, 0).unwrap();
        let exact = ratio(11, 10) * amortize_exact(ratio(95, 1), ratio(2, 10_000), 2920);
        assert_close_to_exact(value, &exact, 1_000_000_000);
    }

    #[test]
    fn maintenance_examples() {
        // 0.1 $/mi, 10 vehicles, 30 mph -> 30 $/h.
        assert_eq!(maintenance_cost(0.1, 10.0, 30.0), 30.0);
        assert_eq!(maintenance_cost(0.1, 0.0, 30.0), 0.0);
        // Additive across cells, up to summation rounding.
        let parts = maintenance_cost(0.1, 4.0, 30.0) + maintenance_cost(0.1, 6.0, 30.0);
        let whole = maintenance_cost(0.1, 10.0, 30.0);
        assert!((parts - whole).abs() <= 1e-12 * whole);
    }

    #[test]
    fn demand_rate_examples() {
        assert_eq!(demand_charge_hourly_rate(0.0), 0.0);
        let rate = demand_charge_hourly_rate(10.0);
        assert!((rate - 10.0 / 732.0).abs() < 1e-12);
        assert_eq!(demand_charge_hourly_rate(30.5 * 24.0), 1.0);
    }

    #[test]
    fn coefficients_all_finite_nonnegative() {
        for spec in [fixtures::sharing_scenario(), fixtures::desk_scenario()] {
            let coeffs = CostCoefficients::compute(&spec).unwrap();
            assert!(coeffs.hdv.charger_per_kw_day.iter().all(|v| v.is_finite() && *v >= 0.0));
            assert!(coeffs.hdv.vehicle_per_day.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    proptest! {
        #[test]
        fn monotone_in_rate_and_capital(
            capital in 1.0_f64..1e6,
            rate in 1e-8_f64..0.01,
            lifetime in 1.0_f64..20_000.0,
            bump in 1.01_f64..2.0,
        ) {
            let base = amortize_daily(capital, rate, lifetime).unwrap();
            let more_rate = amortize_daily(capital, rate * bump, lifetime).unwrap();
            let more_capital = amortize_daily(capital * bump, rate, lifetime).unwrap();
            prop_assert!(more_rate >= base);
            prop_assert!(more_capital >= base);
        }

        #[test]
        fn homogeneous_degree_one_in_capital(
            capital in 0.0_f64..1e6,
            rate in 0.0_f64..0.01,
            lifetime in 1.0_f64..20_000.0,
            k in 0.0_f64..100.0,
        ) {
            let scaled = amortize_daily(k * capital, rate, lifetime).unwrap();
            let unscaled = amortize_daily(capital, rate, lifetime).unwrap();
            prop_assert!((scaled - k * unscaled).abs() <= 1e-9 * (1.0 + scaled.abs()));
        }
    }
}
