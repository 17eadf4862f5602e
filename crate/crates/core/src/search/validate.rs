//! Executability checking by simulated state progression, independent
//! of any search internals.

use std::collections::BTreeSet;

use crate::ground::GroundTask;
use crate::num::Num;
use crate::pddl::Name;
use crate::search::{Plan, PlanFile};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ValidationError {
    #[error("step {position}: precondition of `{action}` does not hold")]
    NotApplicable { position: usize, action: String },
    #[error("final state does not satisfy the goal")]
    GoalUnmet,
    #[error("recorded total cost {recorded} differs from the step sum {actual}")]
    CostMismatch { recorded: Num, actual: Num },
    #[error("step {position}: no ground action `{action}` in this task")]
    UnknownAction { position: usize, action: String },
}

/// Replays `plan` from the initial state, checking every precondition,
/// the goal, and the recorded cost.
pub fn validate_plan(task: &GroundTask, plan: &Plan) -> Result<(), ValidationError> {
    let mut state: BTreeSet<u32> = task.init.iter().copied().collect();
    let mut cost = Num::ZERO;
    for (position, &id) in plan.steps.iter().enumerate() {
        let action = task.actions.get(id as usize).ok_or_else(|| {
            ValidationError::UnknownAction {
                position,
                action: format!("#{id}"),
            }
        })?;
        if !action.precondition.iter().all(|f| state.contains(f)) {
            return Err(ValidationError::NotApplicable {
                position,
                action: action.instance_label(),
            });
        }
        for f in &action.del {
            state.remove(f);
        }
        for f in &action.add {
            state.insert(*f);
        }
        cost += action.cost;
    }
    if !task.goal.iter().all(|f| state.contains(f)) {
        return Err(ValidationError::GoalUnmet);
    }
    if cost != plan.total_cost {
        return Err(ValidationError::CostMismatch {
            recorded: plan.total_cost,
            actual: cost,
        });
    }
    Ok(())
}

/// Validates a serialized plan by resolving each `name(args)` step
/// against the task's ground actions.
pub fn validate_plan_file(task: &GroundTask, file: &PlanFile) -> Result<(), ValidationError> {
    let mut steps = Vec::with_capacity(file.actions.len());
    for (position, entry) in file.actions.iter().enumerate() {
        let args: Result<Vec<Name>, _> = entry.args.iter().map(|a| Name::new(a)).collect();
        let label = format!("{}({})", entry.name, entry.args.join(", "));
        let args = args.map_err(|_| ValidationError::UnknownAction {
            position,
            action: label.clone(),
        })?;
        let found = task
            .actions
            .iter()
            .find(|a| a.schema.as_str() == entry.name && a.args == args)
            .ok_or(ValidationError::UnknownAction { position, action: label })?;
        steps.push(found.id);
    }
    let plan = Plan {
        steps,
        total_cost: file.total_cost,
        nodes_generated: file.nodes_generated,
        nodes_expanded: file.nodes_expanded,
    };
    validate_plan(task, &plan)
}
