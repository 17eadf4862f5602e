//! Sensing-outcome values: what a resolved sensing action injects back
//! into the world state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::pddl::{GroundAtom, Name};

/// Pre-determined shape of a sensing action's possible outcomes, keyed
/// by action name in the sensing manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutcomeSchema {
    /// Split a hostset into per-protocol children; each member joins
    /// the first protocol whose inclusion draw succeeds.
    PartitionByProtocol {
        /// protocol -> inclusion probability in [0, 1].
        include_prob: std::collections::BTreeMap<Name, f64>,
    },
    /// Split a hostset into 0..=3 refined children.
    RefineSplit {
        /// Probability of producing 0, 1, 2 or 3 children.
        child_count_dist: [f64; 4],
        assignment: MemberAssignment,
        /// Hostsets at or below this size are confirmed rather than
        /// split further.
        min_split_size: usize,
    },
    /// Keep-or-discard decision with the given flag probability.
    FlagDecision { flag_prob: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemberAssignment {
    /// Members are assigned to children independently and uniformly.
    Uniform,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OutcomeSchemaError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("child count distribution sums to {0}, expected 1")]
    BadDistribution(f64),
}

impl OutcomeSchema {
    pub fn validate(&self) -> Result<(), OutcomeSchemaError> {
        match self {
            OutcomeSchema::PartitionByProtocol { include_prob } => {
                for &p in include_prob.values() {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(OutcomeSchemaError::BadProbability(p));
                    }
                }
            }
            OutcomeSchema::RefineSplit { child_count_dist, .. } => {
                for &p in child_count_dist {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(OutcomeSchemaError::BadProbability(p));
                    }
                }
                let sum: f64 = child_count_dist.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(OutcomeSchemaError::BadDistribution(sum));
                }
            }
            OutcomeSchema::FlagDecision { flag_prob } => {
                if !(0.0..=1.0).contains(flag_prob) {
                    return Err(OutcomeSchemaError::BadProbability(*flag_prob));
                }
            }
        }
        Ok(())
    }
}

/// A child hostset produced by a sensing outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildHostset {
    pub name: Name,
    pub members: BTreeSet<String>,
    /// Facts describing the child (protocol assignment, resume point).
    pub facts: Vec<GroundAtom>,
    /// Children holding only clean members are discarded at creation.
    pub discarded: bool,
}

/// The resolved effect of one sensing execution.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SensingOutcome {
    pub children: Vec<ChildHostset>,
    /// Additional facts, e.g. anomaly marks on the subject itself.
    pub new_facts: Vec<GroundAtom>,
    /// Facts withdrawn, e.g. the optimistic assumption that planning
    /// could continue past the sensing action on the subject.
    pub removed_facts: Vec<GroundAtom>,
    /// True when the subject hostset turned out clean or empty.
    pub discard_parent: bool,
}

impl SensingOutcome {
    /// Checks disjointness and containment of children against the
    /// parent's member set.
    pub fn validate(&self, parent_members: &BTreeSet<String>) -> Result<(), OutcomeViolation> {
        let mut seen: BTreeSet<&String> = BTreeSet::new();
        for child in &self.children {
            for m in &child.members {
                if !parent_members.contains(m) {
                    return Err(OutcomeViolation::MemberNotInParent {
                        child: child.name.clone(),
                        member: m.clone(),
                    });
                }
                if !seen.insert(m) {
                    return Err(OutcomeViolation::OverlappingChildren(m.clone()));
                }
            }
        }
        Ok(())
    }

    /// Stable hex digest of the canonical serialization, recorded in
    /// round logs.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("outcome serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OutcomeViolation {
    #[error("child `{child}` contains `{member}` which is not in the parent")]
    MemberNotInParent { child: Name, member: String },
    #[error("member `{0}` appears in more than one child")]
    OverlappingChildren(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::name;

    #[test]
    fn schema_validation_catches_bad_inputs() {
        let bad = OutcomeSchema::FlagDecision { flag_prob: 1.5 };
        assert!(bad.validate().is_err());
        let bad = OutcomeSchema::RefineSplit {
            child_count_dist: [0.5, 0.5, 0.5, 0.0],
            assignment: MemberAssignment::Uniform,
            min_split_size: 4,
        };
        assert!(matches!(bad.validate(), Err(OutcomeSchemaError::BadDistribution(_))));
    }

    #[test]
    fn outcome_validation_checks_containment_and_disjointness() {
        let parent: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let child = |n: &str, members: &[&str]| ChildHostset {
            name: name(n),
            members: members.iter().map(|s| s.to_string()).collect(),
            facts: vec![],
            discarded: false,
        };
        let ok = SensingOutcome {
            children: vec![child("c1", &["a"]), child("c2", &["b", "c"])],
            ..Default::default()
        };
        assert!(ok.validate(&parent).is_ok());
        let overlap = SensingOutcome {
            children: vec![child("c1", &["a", "b"]), child("c2", &["b"])],
            ..Default::default()
        };
        assert!(matches!(
            overlap.validate(&parent),
            Err(OutcomeViolation::OverlappingChildren(_))
        ));
        let escape = SensingOutcome {
            children: vec![child("c1", &["z"])],
            ..Default::default()
        };
        assert!(matches!(
            escape.validate(&parent),
            Err(OutcomeViolation::MemberNotInParent { .. })
        ));
    }

    #[test]
    fn schema_round_trips_through_json() {
        let s = OutcomeSchema::RefineSplit {
            child_count_dist: [0.1, 0.3, 0.4, 0.2],
            assignment: MemberAssignment::Uniform,
            min_split_size: 4,
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("refine-split"));
        let back: OutcomeSchema = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
