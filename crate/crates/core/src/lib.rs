//! Delay analysis for heterogeneous chunk-based live streaming.
//!
//! The crate covers four layers:
//!
//! * [`model`]: bandwidth profiles, collaboration models and the class-based
//!   and adversarial profile generators.
//! * [`single_chunk`]: exact minimal delays for diffusing one chunk under the
//!   many-to-one, one-to-one and one-to-c models, closed-form approximations
//!   and the bound evaluator.
//! * [`stream`]: feasibility, delay floors, the intra-then-inter group planner
//!   and a schedule checker that replays timed transfers.
//! * [`oracle`]: exhaustive search over tiny instances in exact rational
//!   arithmetic, used to certify the greedy single-chunk algorithm.
//!
//! [`report`] bundles the batch computations behind the `hetstream` CLI.

pub mod error;
pub mod model;
pub mod oracle;
pub mod report;
pub mod single_chunk;
pub mod stream;

pub use error::{Error, Result};
pub use model::{
    BandwidthProfile, ClassPopulation, ClassSize, ClassSpec, DiffusionModel, InjectionConfig,
    PeerClass, Scalar, StreamConfig,
};
pub use single_chunk::{BoundReport, DelayCurve};
pub use stream::{GroupPlan, Schedule, SimulationResult, TransferEvent};

/// Absolute tolerance used when comparing delays and capacities.
pub const TOLERANCE: f64 = 1e-9;
