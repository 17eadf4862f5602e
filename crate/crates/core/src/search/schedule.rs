//! Critical-path scheduling of a sequential plan.
//!
//! Two steps are ordered when they interfere (an effect of the earlier
//! touches a precondition of the later, their effects overlap, or the
//! later deletes a precondition of the earlier). Every action starts
//! at the earliest time consistent with that precedence; the makespan
//! is the length of the critical path.

use serde::{Deserialize, Serialize};

use crate::ground::{ActionId, GroundTask};
use crate::num::Num;
use crate::search::{interferes, Plan};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub start: Num,
    pub duration: Num,
    pub action: ActionId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledPlan {
    pub entries: Vec<ScheduleEntry>,
    pub makespan: Num,
}

pub fn schedule_temporal(plan: &Plan, task: &GroundTask) -> ScheduledPlan {
    let steps = &plan.steps;
    let mut starts = vec![Num::ZERO; steps.len()];
    let mut makespan = Num::ZERO;
    for later in 0..steps.len() {
        let mut start = Num::ZERO;
        for earlier in 0..later {
            if interferes(task, steps[earlier], steps[later]) {
                let finish = starts[earlier] + task.actions[steps[earlier] as usize].duration;
                start = start.max(finish);
            }
        }
        starts[later] = start;
        makespan = makespan.max(start + task.actions[steps[later] as usize].duration);
    }
    let entries = steps
        .iter()
        .enumerate()
        .map(|(i, &action)| ScheduleEntry {
            start: starts[i],
            duration: task.actions[action as usize].duration,
            action,
        })
        .collect();
    ScheduledPlan { entries, makespan }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{GroundAction, GroundTask};
    use crate::pddl::{name, GroundAtom};

    fn fact(i: usize) -> GroundAtom {
        GroundAtom::new(name(&format!("f{i}")), vec![])
    }

    fn action(id: u32, pre: Vec<u32>, add: Vec<u32>, duration: u64) -> GroundAction {
        GroundAction {
            id,
            schema: name(&format!("a{id}")),
            args: vec![],
            precondition: pre,
            add,
            del: vec![],
            cost: Num::ZERO,
            duration: Num::from_int(duration),
            sensing: false,
        }
    }

    fn plan_of(steps: Vec<ActionId>) -> Plan {
        Plan {
            steps,
            total_cost: Num::ZERO,
            nodes_generated: 0,
            nodes_expanded: 0,
        }
    }

    #[test]
    fn dependent_chain_accumulates() {
        let task = GroundTask::from_parts(
            (0..3).map(fact).collect(),
            vec![0],
            vec![2],
            vec![action(0, vec![0], vec![1], 2), action(1, vec![1], vec![2], 3)],
        );
        let s = schedule_temporal(&plan_of(vec![0, 1]), &task);
        assert_eq!(s.entries[0].start, Num::ZERO);
        assert_eq!(s.entries[1].start, Num::from_int(2));
        assert_eq!(s.makespan, Num::from_int(5));
    }

    #[test]
    fn independent_actions_overlap() {
        let task = GroundTask::from_parts(
            (0..4).map(fact).collect(),
            vec![0, 1],
            vec![2, 3],
            vec![action(0, vec![0], vec![2], 4), action(1, vec![1], vec![3], 7)],
        );
        let s = schedule_temporal(&plan_of(vec![0, 1]), &task);
        assert_eq!(s.entries[0].start, Num::ZERO);
        assert_eq!(s.entries[1].start, Num::ZERO);
        assert_eq!(s.makespan, Num::from_int(7));
    }

    #[test]
    fn empty_plan_has_zero_makespan() {
        let task = GroundTask::from_parts((0..1).map(fact).collect(), vec![0], vec![0], vec![]);
        let s = schedule_temporal(&plan_of(vec![]), &task);
        assert!(s.entries.is_empty());
        assert_eq!(s.makespan, Num::ZERO);
    }
}
