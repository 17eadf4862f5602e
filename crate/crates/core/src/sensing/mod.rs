//! Sensing-action resolution: outcome values, the seeded simulator
//! backend, and the deterministic trace-analysis backend.

mod analyze;
mod outcome;
mod rng;
mod simulate;
mod traces;

pub use analyze::{analyze_traces, AnalysisThresholds, AnalyzeError};
pub use outcome::{
    ChildHostset, MemberAssignment, OutcomeSchema, OutcomeSchemaError, OutcomeViolation,
    SensingOutcome,
};
pub use rng::keyed_rng;
pub use simulate::{sensing_subject, simulate_outcome, SimulateError};
pub use traces::{
    generate_traces, read_trace_files, write_trace_files, AnomalyKind, AnomalySpec, GroundTruth,
    TraceConfig, TraceError, TraceRecord, TraceSet,
};
