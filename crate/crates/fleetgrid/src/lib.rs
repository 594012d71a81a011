//! fleetgrid couples a shared electric truck fleet, private electrified
//! truck envelopes, charging infrastructure, and the bulk electricity grid
//! in a single linear program, and minimises the amortised daily cost of
//! owning and operating all of it.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`scenario`] — input data model: dimension sets, parameter tables,
//!    exogenous loads; directory-based load/save and validation, plus the
//!    shared-fraction split that routes truck demand between the optimised
//!    fleet and exogenous private charging envelopes.
//! 2. [`costs`] — amortisation and operating-cost coefficients.
//! 3. [`lp`] — translation of a scenario into a sparse linear program with
//!    labelled rows, and residual evaluation at arbitrary points.
//! 4. [`solver`] — deterministic primal-dual interior-point solve with
//!    certified residuals.
//! 5. [`dispatch`] — grid-side post-processing: generator dispatch tables,
//!    marginal prices from duals, merit-order verification.
//! 6. [`report`] — result bundles, delimited-table writers, and
//!    share-fraction sweeps.
//! 7. [`oracle`] — an independent brute-force reference for tiny instances.
//!
//! [`fixtures`] carries the bundled example scenarios used by the test
//! suite and by `fleetgrid init-example`.

pub mod costs;
pub mod dispatch;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod solver;

pub use error::{AssemblyError, CostError, LoadError, OracleError, SolveError, SplitError};
pub use scenario::ScenarioSpec;
