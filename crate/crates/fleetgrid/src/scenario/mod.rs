//! Scenario data model: dimension sets, parameter tables, exogenous loads,
//! directory I/O, validation, and the shared-fraction demand split.
//!
//! A `ScenarioSpec` is immutable after construction and safe to share
//! read-only across concurrent workers; every operation here returns a new
//! value rather than mutating in place.

mod io;
mod split;
mod types;
mod validate;

pub use io::{load_scenario, save_scenario};
pub use split::{shaev_split, SplitInfo};
pub use types::{
    ChargerParams, ClassChargers, ClassDemand, ClassFleet, DimensionSets, EnvelopeSet,
    ExogenousLoads, FleetParams, GridParams, MobilityDemand, ScenarioSpec, SynthesisConfig,
    VehicleClass,
};
pub use validate::{validate_scenario, ValidationReport, Violation};
