//! Strategic plan-sense-replan engine for network drill-down analysis.
//!
//! The crate is organized around the investigation loop:
//!
//! - [`pddl`] — data model, parser and emitter for the planning
//!   language subset exchanged between components.
//! - [`ground`] — instantiation of a domain/problem pair into a
//!   propositional task.
//! - [`search`] — deterministic planners (cost-greedy, cost-optimal,
//!   exhaustive oracle), plan validation, and critical-path scheduling.
//! - [`netadmin`] — generator for the network-administration domain,
//!   its problem instances, sensing manifest, and causal graph.
//! - [`sensing`] — sensing-action resolution: a seeded simulator and a
//!   deterministic trace analyzer over synthetic traffic.
//! - [`tactical`] — tag-based composition of analytic flows and the
//!   simulated deployment registry.
//! - [`round`] — world state, plan diffing, and the round engine that
//!   drives investigations to termination.
//! - [`report`] — metric reports projected from investigation logs.

pub mod ground;
pub mod netadmin;
pub mod num;
pub mod pddl;
pub mod report;
pub mod round;
pub mod search;
pub mod sensing;
pub mod tactical;

pub use ground::{ground, GroundAction, GroundError, GroundTask};
pub use num::Num;
pub use pddl::{Domain, GroundAtom, Metric, Name, Problem};
pub use search::{
    plan_metric, plan_metric_with, plan_optimal, plan_optimal_with, plan_oracle,
    schedule_temporal, validate_plan, Plan, PlanError, ScheduledPlan, SearchLimits,
};
