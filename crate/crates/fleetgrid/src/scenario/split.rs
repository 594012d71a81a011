//! Shared-fraction demand split.
//!
//! `shaev_split` divides the heavy-duty trip demand of a scenario: a
//! fraction `s` stays in the optimised shared-fleet tables, and the
//! remainder becomes exogenous private charging envelopes, divided between
//! automated and human-driven profiles by the configured automated share.

use super::types::{EnvelopeSet, ScenarioSpec};
use crate::error::SplitError;

/// Record of how `shaev_split` divided the truck demand. Trip-mile totals
/// let callers check conservation without re-deriving the split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInfo {
    pub shared_fraction: f64,
    pub automated_share: f64,
    pub shared_trip_miles: f64,
    pub private_auto_trip_miles: f64,
    pub private_human_trip_miles: f64,
}

/// Returns a new scenario with heavy-duty demand split at fraction `s`.
///
/// The shared tables keep `s` of every trip cell. The private remainder is
/// converted to charging envelopes: hourly energy need follows the
/// heavy-duty energy equation with deadhead correction (no sharing for
/// private trucks), accumulated into cumulative bounds; the hourly power
/// cap is the connected-charger rating times the private vehicle count
/// during the configured plug-in window. The cumulative upper bound tracks
/// consumption inclusively (charge may keep pace within the hour but never
/// lead it) and the final lower bound pins total charge to total
/// consumption, mirroring the terminal state of charge of the shared fleet.
pub fn shaev_split(spec: &ScenarioSpec, s: f64) -> Result<ScenarioSpec, SplitError> {
    if !(0.0..=1.0).contains(&s) || s.is_nan() {
        return Err(SplitError::FractionOutOfRange(s));
    }
    let mut out = spec.clone();
    let dims = &spec.dims;
    let dem = &spec.demand.hdv;
    let n_bins = dims.hdv_bins.len();
    let n_hours = dims.n_hours;
    let n_regions = dims.n_regions();
    let auto_share = spec.synthesis.automated_share;

    // Scale the shared tables.
    for v in &mut out.demand.hdv.trips {
        *v *= s;
    }

    // Reference private truck: battery-type averages stand in for the
    // unmodelled private fleet mix.
    let fleet = &spec.fleet.hdv;
    let n_bat = fleet.battery_kwh.len() as f64;
    let eta_ref = fleet.efficiency_kwh_per_mile.iter().sum::<f64>() / n_bat;
    let battery_ref = fleet.battery_kwh.iter().sum::<f64>() / n_bat;
    // Connected-charger rating: the largest heavy-duty level.
    let rating_ref = spec
        .chargers
        .hdv
        .rating_kw
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);

    let mut totals = SplitTotals::default();
    out.exogenous.private_auto = synthesize_envelope(
        spec,
        (1.0 - s) * auto_share,
        eta_ref,
        battery_ref,
        rating_ref,
        &mut totals.auto_miles,
    );
    out.exogenous.private_human = synthesize_envelope(
        spec,
        (1.0 - s) * (1.0 - auto_share),
        eta_ref,
        battery_ref,
        rating_ref,
        &mut totals.human_miles,
    );

    let mut shared_miles = 0.0;
    for d in 0..n_bins {
        for t in 0..n_hours {
            for r in 0..n_regions {
                shared_miles += out.demand.hdv.trips[dims.idx_dtr(n_bins, d, t, r)] * dem.trip_miles[d];
            }
        }
    }

    out.split = Some(SplitInfo {
        shared_fraction: s,
        automated_share: auto_share,
        shared_trip_miles: shared_miles,
        private_auto_trip_miles: totals.auto_miles,
        private_human_trip_miles: totals.human_miles,
    });
    Ok(out)
}

#[derive(Default)]
struct SplitTotals {
    auto_miles: f64,
    human_miles: f64,
}

/// Builds one private envelope carrying `fraction` of the original
/// heavy-duty demand, and accumulates its trip-miles into `miles_out`.
fn synthesize_envelope(
    spec: &ScenarioSpec,
    fraction: f64,
    eta_ref: f64,
    battery_ref: f64,
    rating_ref: f64,
    miles_out: &mut f64,
) -> EnvelopeSet {
    let dims = &spec.dims;
    let dem = &spec.demand.hdv;
    let n_bins = dims.hdv_bins.len();
    let n_hours = dims.n_hours;
    let n_regions = dims.n_regions();
    let dt = dims.dt_hours;

    let mut env = EnvelopeSet::zeros(n_hours * n_regions);
    if fraction == 0.0 {
        return env;
    }

    for r in 0..n_regions {
        let psi_chdd = dem.charge_deadhead_distance[r];
        // Hourly energy need and simultaneous vehicle count for the private
        // share; private trucks serve one trip-equivalent per vehicle trip.
        let mut need = vec![0.0; n_hours];
        let mut moving = vec![0.0; n_hours];
        for t in 0..n_hours {
            for d in 0..n_bins {
                let trips = fraction * dem.trips[dims.idx_dtr(n_bins, d, t, r)];
                let rho = dem.trip_miles[d];
                *miles_out += trips * rho;
                need[t] += trips * psi_chdd * eta_ref * rho;
                moving[t] += trips * rho / (dt * dem.speed_mph[dims.idx_dtr(n_bins, d, t, r)]);
            }
        }
        let total_need: f64 = need.iter().sum();
        // Private trucks charge overnight, so the fleet must both cover the
        // peak simultaneous duty and carry a full day of range.
        let fleet_count = moving
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max)
            .max(total_need / battery_ref);

        let mut cum = 0.0;
        for t in 0..n_hours {
            let k = dims.idx_tr(t, r);
            cum += need[t];
            env.energy_ub_kwh[k] = cum;
            env.energy_lb_kwh[k] = (cum - fleet_count * battery_ref).max(0.0);
            env.power_ub_kw[k] = if spec.synthesis.plugged(spec.hour_of_day(t)) {
                rating_ref * fleet_count
            } else {
                0.0
            };
        }
        if n_hours > 0 {
            // Terminal state of charge: total charge equals total need.
            let last = dims.idx_tr(n_hours - 1, r);
            env.energy_lb_kwh[last] = total_need;
        }
    }
    env
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scenario::VehicleClass;
    use proptest::prelude::*;

    fn total_hdv_trip_miles(spec: &ScenarioSpec) -> f64 {
        spec.trip_miles(VehicleClass::Hdv)
    }

    fn split_trip_miles(spec: &ScenarioSpec) -> f64 {
        let info = spec.split.as_ref().expect("split info");
        info.shared_trip_miles + info.private_auto_trip_miles + info.private_human_trip_miles
    }

    #[test]
    fn full_shared_keeps_demand_and_zeroes_envelopes() {
        let spec = fixtures::sharing_scenario();
        let out = shaev_split(&spec, 1.0).unwrap();
        assert_eq!(out.demand.hdv.trips, spec.demand.hdv.trips);
        assert!(out.exogenous.private_auto.power_ub_kw.iter().all(|&v| v == 0.0));
        assert!(out.exogenous.private_auto.energy_lb_kwh.iter().all(|&v| v == 0.0));
        assert!(out.exogenous.private_human.energy_ub_kwh.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_shared_moves_everything_private() {
        let spec = fixtures::sharing_scenario();
        let out = shaev_split(&spec, 0.0).unwrap();
        assert!(out.demand.hdv.trips.iter().all(|&v| v == 0.0));
        let info = out.split.as_ref().unwrap();
        assert_eq!(info.shared_trip_miles, 0.0);
        let original = total_hdv_trip_miles(&spec);
        let routed = info.private_auto_trip_miles + info.private_human_trip_miles;
        assert!((routed - original).abs() <= 1e-9 * original.max(1.0));
    }

    #[test]
    fn half_split_on_round_demand() {
        // 10 trips/h of 10-mile trips on the sharing fixture's single
        // region: 100 trip-miles per hour. At s = 0.5 with the default
        // automated share, 50 stay shared and 25/25 go private.
        let mut spec = fixtures::sharing_scenario();
        let dims = spec.dims.clone();
        let n_bins = dims.hdv_bins.len();
        for v in &mut spec.demand.hdv.trips {
            *v = 0.0;
        }
        for t in 0..dims.n_hours - 1 {
            spec.demand.hdv.trips[dims.idx_dtr(n_bins, 0, t, 0)] = 10.0;
        }
        spec.demand.hdv.trip_miles[0] = 10.0;

        let out = shaev_split(&spec, 0.5).unwrap();
        let info = out.split.as_ref().unwrap();
        let hours = (dims.n_hours - 1) as f64;
        assert!((info.shared_trip_miles - 50.0 * hours).abs() < 1e-9);
        assert!((info.private_auto_trip_miles - 25.0 * hours).abs() < 1e-9);
        assert!((info.private_human_trip_miles - 25.0 * hours).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range_fraction() {
        let spec = fixtures::sharing_scenario();
        assert!(shaev_split(&spec, -0.1).is_err());
        assert!(shaev_split(&spec, 1.5).is_err());
        assert!(shaev_split(&spec, f64::NAN).is_err());
    }

    #[test]
    fn split_scenario_still_validates() {
        let spec = fixtures::sharing_scenario();
        for s in [0.0, 0.3, 1.0] {
            let out = shaev_split(&spec, s).unwrap();
            let report = crate::scenario::validate_scenario(&out);
            assert!(report.is_valid(), "s={s}: {report}");
        }
    }

    proptest! {
        #[test]
        fn trip_miles_conserved(s in 0.0_f64..=1.0) {
            let spec = fixtures::sharing_scenario();
            let original = total_hdv_trip_miles(&spec);
            let out = shaev_split(&spec, s).unwrap();
            let total = split_trip_miles(&out);
            prop_assert!((total - original).abs() <= 1e-9 * original.max(1.0));
        }
    }
}
