//! Plan diffing between consecutive rounds. Identity of an action
//! instance is its schema name plus bound arguments; position in the
//! sequence does not matter.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ground::{GroundAction, GroundTask};
use crate::search::{Plan, PlanFile};

/// A ground action instance identified by name and arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlanInstance {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanInstance {
    pub fn of(action: &GroundAction) -> PlanInstance {
        PlanInstance {
            name: action.schema.to_string(),
            args: action.args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn from_plan(task: &GroundTask, plan: &Plan) -> Vec<PlanInstance> {
        plan.steps
            .iter()
            .map(|&id| PlanInstance::of(&task.actions[id as usize]))
            .collect()
    }

    pub fn from_plan_file(file: &PlanFile) -> Vec<PlanInstance> {
        file.actions
            .iter()
            .map(|a| PlanInstance { name: a.name.clone(), args: a.args.clone() })
            .collect()
    }
}

impl fmt::Display for PlanInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(", "))
    }
}

/// Cancellations and additions between consecutive plans.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanDiff {
    pub canceled: BTreeSet<PlanInstance>,
    pub added: BTreeSet<PlanInstance>,
    pub retained: BTreeSet<PlanInstance>,
}

impl PlanDiff {
    pub fn change_count(&self) -> usize {
        self.canceled.len() + self.added.len()
    }
}

/// Set difference over instance identity.
pub fn diff_plans(previous: &[PlanInstance], current: &[PlanInstance]) -> PlanDiff {
    let prev: BTreeSet<PlanInstance> = previous.iter().cloned().collect();
    let cur: BTreeSet<PlanInstance> = current.iter().cloned().collect();
    PlanDiff {
        canceled: prev.difference(&cur).cloned().collect(),
        added: cur.difference(&prev).cloned().collect(),
        retained: prev.intersection(&cur).cloned().collect(),
    }
}
