//! Incentive-driven task allocation for device-assisted multi-cell edge networks.
//!
//! The library models an edge service provider operating one edge server per
//! cell. Task devices hold deadline-bound computation tasks; auxiliary devices
//! rent out spare compute. Allocation runs in up to three levels:
//!
//! 1. [`bargain`] — each device and its home server negotiate an offload fee
//!    (Nash bargaining); overloaded servers keep only their highest-margin
//!    tasks per unit of requested frequency.
//! 2. [`schedule`] — overloaded servers hand spilled tasks to under-loaded
//!    neighbor servers over the backhaul, most-overloaded first.
//! 3. [`auction`] — tasks still unplaced go to a per-cell sealed double
//!    auction over auxiliary devices.
//!
//! [`pipeline`] composes the levels into complete strategies (including the
//! baselines in [`baselines`]), [`validate`] checks any outcome against the
//! model's feasibility and rationality constraints, [`generator`] builds
//! deterministic random scenarios, and [`experiments`] runs parameter sweeps
//! and writes CSV metrics.
//!
//! All computation is `f64`, single-threaded, and fully determined by the
//! scenario (itself fully determined by a seed).

pub mod auction;
pub mod bargain;
pub mod baselines;
pub mod economics;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod model;
pub mod pipeline;
pub mod schedule;
pub mod validate;

pub use auction::{AuctionInput, AuctionResult, AuctionSeller, AuctionTask, Offer, TaskAdMatch};
pub use bargain::{BargainOutcome, CellLoadReport};
pub use error::{Error, ModeInfeasible};
pub use model::{
    AdId, AuxDevice, BackhaulMatrix, CellId, CostBreakdown, Decision, EconParams, EdgeServer,
    ExecutionMode, RadioLink, Scenario, Task, TaskDevice, TdId,
};
pub use pipeline::{AllocationOutcome, LevelTiming, Strategy};
pub use schedule::{Reassignment, ReassignmentPlan};
pub use validate::{Constraint, Violation};

/// Absolute tolerance for monetary and frequency comparisons.
pub const EPS: f64 = 1e-9;
