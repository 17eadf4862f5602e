//! Exhaustive depth-bounded enumeration over action sequences.
//!
//! Intentionally naive and kept independent of the search machinery:
//! its own state representation and its own progression code. Only
//! branches that cannot possibly beat the best plan found so far are
//! cut, so the minimum-cost result is exact within the depth bound.

use std::collections::BTreeSet;

use crate::ground::{ActionId, GroundTask};
use crate::search::{Plan, PlanError};

pub const ORACLE_MAX_ACTIONS: usize = 64;
pub const ORACLE_MAX_DEPTH: usize = 12;

/// Minimum-cost goal-achieving plan of length at most `depth_bound`.
pub fn plan_oracle(task: &GroundTask, depth_bound: usize) -> Result<Plan, PlanError> {
    if task.actions.len() > ORACLE_MAX_ACTIONS {
        return Err(PlanError::CapacityExceeded(format!(
            "{} ground actions (oracle limit {ORACLE_MAX_ACTIONS})",
            task.actions.len()
        )));
    }
    if depth_bound > ORACLE_MAX_DEPTH {
        return Err(PlanError::CapacityExceeded(format!(
            "depth bound {depth_bound} (oracle limit {ORACLE_MAX_DEPTH})"
        )));
    }

    let init: BTreeSet<u32> = task.init.iter().copied().collect();
    let goal: BTreeSet<u32> = task.goal.iter().copied().collect();

    let mut best: Option<(u64, Vec<ActionId>)> = None;
    let mut prefix: Vec<ActionId> = Vec::new();
    let mut explored: u64 = 0;
    enumerate(task, &init, &goal, depth_bound, 0, &mut prefix, &mut best, &mut explored);

    match best {
        Some((cost_millis, steps)) => Ok(Plan {
            steps,
            total_cost: crate::num::Num::from_millis(cost_millis),
            nodes_generated: explored,
            nodes_expanded: explored,
        }),
        None => Err(PlanError::Unsolvable),
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    task: &GroundTask,
    state: &BTreeSet<u32>,
    goal: &BTreeSet<u32>,
    depth_left: usize,
    acc_cost: u64,
    prefix: &mut Vec<ActionId>,
    best: &mut Option<(u64, Vec<ActionId>)>,
    explored: &mut u64,
) {
    *explored += 1;
    if goal.iter().all(|f| state.contains(f)) {
        match best {
            Some((c, _)) if acc_cost >= *c => {}
            _ => *best = Some((acc_cost, prefix.clone())),
        }
        return;
    }
    if depth_left == 0 {
        return;
    }
    for action in &task.actions {
        let cost = acc_cost + action.cost.millis();
        // Costs are nonnegative, so any continuation costs at least
        // `cost`; it cannot strictly beat an existing best.
        if matches!(best, Some((c, _)) if cost >= *c) {
            continue;
        }
        if !action.precondition.iter().all(|f| state.contains(f)) {
            continue;
        }
        let mut next = state.clone();
        for f in &action.del {
            next.remove(f);
        }
        for f in &action.add {
            next.insert(*f);
        }
        prefix.push(action.id);
        enumerate(task, &next, goal, depth_left - 1, cost, prefix, best, explored);
        prefix.pop();
    }
}
