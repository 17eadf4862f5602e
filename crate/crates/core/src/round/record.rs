//! Round records and the append-only investigation log.
//!
//! Logs are replayable byte-for-byte: every field is a deterministic
//! function of (initial state, goals, config, seed). Timings are
//! simulated-time accounting, not wall clock — execution time comes
//! from action duration annotations, planning and tactical effort from
//! fixed per-unit charges — so reruns serialize identically.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pddl::Name;
use crate::round::diff::{PlanDiff, PlanInstance};
use crate::round::state::HostsetStatus;
use crate::search::PlanFile;

/// Simulated milliseconds per search node expanded.
pub const PLANNING_MS_PER_EXPANSION: u64 = 1;
/// Simulated milliseconds per composed flow component.
pub const TACTICAL_MS_PER_COMPONENT: u64 = 10;
/// Simulated milliseconds charged to state management per round.
pub const OTHER_MS_PER_ROUND: u64 = 50;

/// Deterministic simulated-time accounting for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundTimings {
    pub planning_ms: u64,
    pub tactical_ms: u64,
    pub execution_ms: u64,
    pub other_ms: u64,
}

impl RoundTimings {
    pub fn total(&self) -> u64 {
        self.planning_ms + self.tactical_ms + self.execution_ms + self.other_ms
    }

    pub fn overhead(&self) -> u64 {
        self.planning_ms + self.tactical_ms + self.other_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingEvent {
    pub instance: PlanInstance,
    pub subject: Name,
    pub digest: String,
    pub children_created: usize,
    pub subject_discarded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostsetCreated {
    pub hostset: Name,
    pub parent: Name,
    pub members: Vec<String>,
    pub discarded_at_birth: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostsetResolved {
    pub hostset: Name,
    pub status: HostsetStatus,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentEvent {
    pub instance: PlanInstance,
    pub deployment_id: u64,
    pub components: Vec<String>,
}

/// Everything one round did, serialized as one log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    /// Hostsets whose investigation this round planned for.
    pub goals: Vec<Name>,
    pub plan: PlanFile,
    pub diff: PlanDiff,
    pub executed: Vec<PlanInstance>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sensing: Option<SensingEvent>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub created: Vec<HostsetCreated>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub resolved: Vec<HostsetResolved>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub deployments: Vec<DeploymentEvent>,
    pub timings: RoundTimings,
    /// Set on the record that ends the investigation.
    pub terminated: bool,
}

/// Append-only sequence of round records with derived per-hostset
/// first-seen/resolution views.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvestigationLog {
    pub rounds: Vec<RoundRecord>,
}

impl InvestigationLog {
    pub fn push(&mut self, record: RoundRecord) {
        debug_assert!(
            self.rounds
                .last()
                .is_none_or(|last| last.round < record.round),
            "round indices must be strictly increasing"
        );
        self.rounds.push(record);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.rounds {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<InvestigationLog, LogError> {
        let mut rounds = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: RoundRecord = serde_json::from_str(line)
                .map_err(|e| LogError::Corrupt { line: i + 1, reason: e.to_string() })?;
            if let Some(prev) = rounds.last() {
                let prev: &RoundRecord = prev;
                if record.round <= prev.round {
                    return Err(LogError::Corrupt {
                        line: i + 1,
                        reason: "round indices must be strictly increasing".into(),
                    });
                }
            }
            rounds.push(record);
        }
        Ok(InvestigationLog { rounds })
    }

    /// First round whose executed prefix touched each hostset.
    pub fn first_worked_rounds(&self) -> std::collections::BTreeMap<Name, u32> {
        let mut map = std::collections::BTreeMap::new();
        for record in &self.rounds {
            for instance in &record.executed {
                for arg in &instance.args {
                    if let Ok(n) = Name::new(arg) {
                        map.entry(n).or_insert(record.round);
                    }
                }
            }
        }
        map
    }

    /// Resolution round per hostset.
    pub fn resolution_rounds(&self) -> std::collections::BTreeMap<Name, (u32, HostsetStatus)> {
        let mut map = std::collections::BTreeMap::new();
        for record in &self.rounds {
            for r in &record.resolved {
                map.entry(r.hostset.clone()).or_insert((record.round, r.status));
            }
        }
        map
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("corrupt log at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("log io: {0}")]
    Io(#[from] std::io::Error),
}

pub fn write_log(path: &Path, log: &InvestigationLog) -> Result<(), LogError> {
    let mut out = fs::File::create(path)?;
    out.write_all(log.to_jsonl().as_bytes())?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<InvestigationLog, LogError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut text = String::new();
    for line in reader.lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    InvestigationLog::from_jsonl(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Num;

    fn record(round: u32) -> RoundRecord {
        RoundRecord {
            round,
            goals: vec![],
            plan: PlanFile {
                actions: vec![],
                total_cost: Num::ZERO,
                makespan: None,
                nodes_generated: 0,
                nodes_expanded: 0,
            },
            diff: PlanDiff::default(),
            executed: vec![],
            sensing: None,
            created: vec![],
            resolved: vec![],
            deployments: vec![],
            timings: RoundTimings::default(),
            terminated: false,
        }
    }

    #[test]
    fn jsonl_round_trips() {
        let mut log = InvestigationLog::default();
        log.push(record(1));
        log.push(record(2));
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        let back = InvestigationLog::from_jsonl(&text).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn corrupt_line_is_reported_with_position() {
        let mut log = InvestigationLog::default();
        log.push(record(1));
        let mut text = log.to_jsonl();
        text.push_str("{not json\n");
        let err = InvestigationLog::from_jsonl(&text).unwrap_err();
        assert!(matches!(err, LogError::Corrupt { line: 2, .. }));
    }

    #[test]
    fn non_increasing_rounds_rejected() {
        let mut log = InvestigationLog::default();
        log.push(record(1));
        log.push(record(2));
        let mut text = log.to_jsonl();
        text.push_str(&serde_json::to_string(&record(2)).unwrap());
        text.push('\n');
        assert!(InvestigationLog::from_jsonl(&text).is_err());
    }
}
