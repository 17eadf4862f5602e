//! The plan-sense-replan loop: world state, plan diffing, round
//! records, and the engine that drives an investigation to
//! termination.

mod diff;
mod engine;
mod record;
mod state;

pub use diff::{diff_plans, PlanDiff, PlanInstance};
pub use engine::{
    Backend, EngineError, InvestigationConfig, InvestigationStatus, PlannerMode, RoundEngine,
};
pub use record::{read_log, write_log, InvestigationLog, LogError, RoundRecord, RoundTimings};
pub use state::{
    check_monotonic, restore, snapshot, validate_registry, HostsetEntry, HostsetStatus,
    SnapshotError, StateViolation, WorldState, SNAPSHOT_FORMAT,
};
