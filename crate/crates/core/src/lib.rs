//! Bayesian optimisation when the search space is unknown.
//!
//! Starting from a user box that need not contain the optimum, the optimiser
//! grows the search region by an analytically derived radius whenever a
//! computable regret bound shows the current region has been solved to
//! accuracy `ε`. The library is generic over the floating-point type via
//! [`Scalar`]; the aliases at the crate root fix it to `f64`.

pub mod acq_opt;
pub mod acquisition;
pub mod benchlab;
pub mod bounds;
pub mod engine;
pub mod error;
pub mod expansion;
pub mod gp;
pub mod linalg;
pub mod rng;
pub mod scalar;

pub use acquisition::{asymptotic_value, lcb, ucb, BetaSchedule};
pub use benchlab::Benchmark;
pub use engine::{run, run_baseline, run_ubo, trigger_probe, Objective, Strategy, TraceFlag};
pub use error::{Result, UboError};
pub use expansion::{build_region, expansion_radius, regret_upper_bound};
pub use gp::{posterior, KernelFamily};
pub use scalar::Scalar;

pub type KernelSpec = gp::KernelSpec<f64>;
pub type Dataset = gp::Dataset<f64>;
pub type GpPosterior = gp::GpPosterior<f64>;
pub type BoxBounds = bounds::BoxBounds<f64>;
pub type SearchRegion = expansion::SearchRegion<f64>;
pub type RunConfig = engine::RunConfig<f64>;
pub type RunTrace = engine::RunTrace<f64>;
pub type IterationRecord = engine::IterationRecord<f64>;
