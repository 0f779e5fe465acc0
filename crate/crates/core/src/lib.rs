//! Throughput analysis of an energy-harvesting decode-and-forward relay in an
//! underlay cognitive radio network: special functions, closed-form outage
//! and throughput expressions, Monte Carlo simulation, optimization over the
//! power-splitting fraction and the rate, and sweep/report tooling.

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod report;
pub mod scenario;
pub mod specfun;
pub mod sweep;

pub use analytic::{OutageBreakdown, P3Variant};
pub use error::{Error, Result};
pub use model::{LinkStats, NetworkGeometry, SystemParams};
pub use montecarlo::{McEstimate, Variant};
pub use optimize::{OptResult, RhoObjective, RsObjective};
pub use scenario::ScenarioConfig;
