//! Deterministic planners over ground tasks.
//!
//! Three entry points share one task representation:
//!
//! - [`plan_metric`] — greedy best-first search guided by the additive
//!   delete-relaxation heuristic; fast, not necessarily optimal.
//! - [`plan_optimal`] — uniform-cost search; cost-optimal.
//! - [`plan_oracle`] — exhaustive enumeration for small tasks, used to
//!   cross-check the other two.
//!
//! All searches break ties by lower accumulated cost, then lower
//! action id, then insertion order, so identical tasks yield identical
//! plans on every platform. Returned plans are emitted in a canonical
//! execution order: a lexicographically minimal (by bound arguments,
//! then action id) linear extension of the plan's interference
//! precedence, which keeps actions on the same objects adjacent.

mod hadd;
mod oracle;
mod schedule;
mod state;
mod validate;

pub use oracle::plan_oracle;
pub use schedule::{schedule_temporal, ScheduleEntry, ScheduledPlan};
pub use validate::{validate_plan, validate_plan_file, ValidationError};

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::ground::{ActionId, GroundTask};
use crate::num::Num;
use hadd::HaddContext;
use state::State;

/// Resource limits for one planner call.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub wall_budget: Duration,
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits {
            wall_budget: Duration::from_secs(10),
        }
    }
}

/// An executable action sequence with search statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<ActionId>,
    pub total_cost: Num,
    pub nodes_generated: u64,
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PlanError {
    #[error("goal unreachable: search space exhausted")]
    Unsolvable,
    #[error("planner exceeded its wall budget of {0:?}")]
    Timeout(Duration),
    #[error("task outside oracle bounds: {0}")]
    CapacityExceeded(String),
}

/// Greedy best-first search on `f = h_add` with deferred evaluation.
pub fn plan_metric(task: &GroundTask) -> Result<Plan, PlanError> {
    plan_metric_with(task, &SearchLimits::default())
}

pub fn plan_metric_with(task: &GroundTask, limits: &SearchLimits) -> Result<Plan, PlanError> {
    search(task, limits, Mode::Greedy)
}

/// Uniform-cost search; returns a cost-optimal plan.
pub fn plan_optimal(task: &GroundTask) -> Result<Plan, PlanError> {
    plan_optimal_with(task, &SearchLimits::default())
}

pub fn plan_optimal_with(task: &GroundTask, limits: &SearchLimits) -> Result<Plan, PlanError> {
    search(task, limits, Mode::UniformCost)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Greedy,
    UniformCost,
}

struct Node {
    state: State,
    parent: u32,
    action: ActionId,
}

const NO_PARENT: u32 = u32::MAX;

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct OpenKey {
    f: u64,
    g: u64,
    action: ActionId,
    seq: u64,
}

struct OpenEntry {
    key: OpenKey,
    parent: u32,
    action: ActionId,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

fn search(task: &GroundTask, limits: &SearchLimits, mode: Mode) -> Result<Plan, PlanError> {
    let deadline = Instant::now() + limits.wall_budget;
    match mode {
        Mode::Greedy => {
            // Successors are restricted to helpful actions first; that
            // pruning is incomplete in general, so an exhausted search
            // falls back to unrestricted successor generation.
            let mut run = SearchRun::new(task, limits, Mode::Greedy, deadline, true);
            match run.solve() {
                Err(PlanError::Unsolvable) => {
                    let mut full = SearchRun::new(task, limits, Mode::Greedy, deadline, false);
                    full.solve()
                }
                other => other,
            }
        }
        Mode::UniformCost => {
            let mut run = SearchRun::new(task, limits, Mode::UniformCost, deadline, false);
            run.solve()
        }
    }
}

struct SearchRun<'a> {
    task: &'a GroundTask,
    limits: SearchLimits,
    mode: Mode,
    deadline: Instant,
    prune_to_helpful: bool,
    hadd: Option<HaddContext>,
    arena: Vec<Node>,
    closed: HashSet<State>,
    open: BinaryHeap<Reverse<OpenEntry>>,
    seq: u64,
    generated: u64,
    expanded: u64,
}

impl<'a> SearchRun<'a> {
    fn new(
        task: &'a GroundTask,
        limits: &SearchLimits,
        mode: Mode,
        deadline: Instant,
        prune_to_helpful: bool,
    ) -> SearchRun<'a> {
        SearchRun {
            task,
            limits: *limits,
            mode,
            deadline,
            prune_to_helpful,
            hadd: match mode {
                Mode::Greedy => Some(HaddContext::new(task)),
                Mode::UniformCost => None,
            },
            arena: Vec::new(),
            closed: HashSet::new(),
            open: BinaryHeap::new(),
            seq: 0,
            generated: 0,
            expanded: 0,
        }
    }

    fn solve(&mut self) -> Result<Plan, PlanError> {
        let init = State::from_facts(self.task.fact_count(), &self.task.init);
        if let Some(goal_idx) = self.expand(init, NO_PARENT, 0, 0) {
            return Ok(self.reconstruct(goal_idx));
        }
        let mut pops: u64 = 0;
        while let Some(Reverse(entry)) = self.open.pop() {
            pops += 1;
            if pops % 256 == 0 && Instant::now() > self.deadline {
                return Err(PlanError::Timeout(self.limits.wall_budget));
            }
            let parent = &self.arena[entry.parent as usize];
            let state = parent.state.apply(&self.task.actions[entry.action as usize]);
            if self.closed.contains(&state) {
                continue;
            }
            #[cfg(feature = "search-trace")]
            eprintln!(
                "expand f={} g={} a={}",
                entry.key.f,
                entry.key.g,
                self.task.actions[entry.action as usize].instance_label()
            );
            if let Some(goal_idx) = self.expand(state, entry.parent, entry.action, entry.key.g) {
                return Ok(self.reconstruct(goal_idx));
            }
        }
        Err(PlanError::Unsolvable)
    }

    /// Closes and expands a node: goal test, heuristic, successor
    /// pushes. Returns the node index when it satisfies the goal.
    fn expand(&mut self, state: State, parent: u32, action: ActionId, g: u64) -> Option<u32> {
        self.closed.insert(state.clone());
        let idx = self.arena.len() as u32;
        self.arena.push(Node { state, parent, action });
        self.expanded += 1;
        let state = &self.arena[idx as usize].state;
        if state.contains_all(&self.task.goal) {
            return Some(idx);
        }
        let f = match &mut self.hadd {
            Some(ctx) => match ctx.eval(self.task, state, &self.task.goal) {
                Some(h) => h,
                None => return None, // dead end in the relaxation
            },
            None => 0,
        };
        let helpful_only = self.prune_to_helpful
            && self.hadd.as_ref().is_some_and(|ctx| {
                self.task
                    .actions
                    .iter()
                    .any(|a| ctx.helpful[a.id as usize] && state.contains_all(&a.precondition))
            });
        let state = &self.arena[idx as usize].state;
        for a in &self.task.actions {
            if helpful_only && !self.hadd.as_ref().expect("greedy mode").helpful[a.id as usize] {
                continue;
            }
            if state.contains_all(&a.precondition) {
                self.generated += 1;
                self.seq += 1;
                let child_g = g + a.cost.millis();
                let key_f = match self.mode {
                    Mode::Greedy => f,
                    Mode::UniformCost => child_g,
                };
                self.open.push(Reverse(OpenEntry {
                    key: OpenKey { f: key_f, g: child_g, action: a.id, seq: self.seq },
                    parent: idx,
                    action: a.id,
                }));
            }
        }
        None
    }

    fn reconstruct(&self, goal_idx: u32) -> Plan {
        let mut steps = Vec::new();
        let mut idx = goal_idx;
        while self.arena[idx as usize].parent != NO_PARENT {
            steps.push(self.arena[idx as usize].action);
            idx = self.arena[idx as usize].parent;
        }
        steps.reverse();
        let steps = canonical_order(self.task, &steps);
        let total_cost = steps
            .iter()
            .map(|&a| self.task.actions[a as usize].cost)
            .sum();
        Plan {
            steps,
            total_cost,
            nodes_generated: self.generated,
            nodes_expanded: self.expanded,
        }
    }
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Interference test: must `earlier` stay before `later`?
pub(crate) fn interferes(task: &GroundTask, earlier: ActionId, later: ActionId) -> bool {
    let a = &task.actions[earlier as usize];
    let b = &task.actions[later as usize];
    let mut a_eff: Vec<u32> = a.add.iter().chain(&a.del).copied().collect();
    a_eff.sort_unstable();
    let mut b_eff: Vec<u32> = b.add.iter().chain(&b.del).copied().collect();
    b_eff.sort_unstable();
    intersects(&a.add, &b.precondition)
        || intersects(&a.del, &b.precondition)
        || intersects(&a_eff, &b_eff)
        || intersects(&a.precondition, &b.del)
}

/// Reorders a valid plan into its canonical linear extension: among
/// steps whose predecessors (under interference precedence) are all
/// emitted, repeatedly pick the least by (args, action id, position).
/// Unordered steps commute, so the result is executable and reaches
/// the same final state.
fn canonical_order(task: &GroundTask, steps: &[ActionId]) -> Vec<ActionId> {
    let n = steps.len();
    if n <= 1 {
        return steps.to_vec();
    }
    let mut preds_left = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if interferes(task, steps[i], steps[j]) {
                preds_left[j] += 1;
                succs[i].push(j);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(Vec<crate::pddl::Name>, ActionId, usize)>> = BinaryHeap::new();
    for i in 0..n {
        if preds_left[i] == 0 {
            ready.push(Reverse((task.actions[steps[i] as usize].args.clone(), steps[i], i)));
        }
    }
    let mut out = Vec::with_capacity(n);
    while let Some(Reverse((_, action, pos))) = ready.pop() {
        out.push(action);
        for &j in &succs[pos] {
            preds_left[j] -= 1;
            if preds_left[j] == 0 {
                ready.push(Reverse((task.actions[steps[j] as usize].args.clone(), steps[j], j)));
            }
        }
    }
    debug_assert_eq!(out.len(), n);
    out
}

/// Serialized plan format consumed by the plan container and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub actions: Vec<PlanFileAction>,
    pub total_cost: Num,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub makespan: Option<Num>,
    pub nodes_generated: u64,
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFileAction {
    pub name: String,
    pub args: Vec<String>,
    pub cost: Num,
    pub duration: Num,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub start: Option<Num>,
}

impl PlanFile {
    pub fn new(task: &GroundTask, plan: &Plan, schedule: Option<&ScheduledPlan>) -> PlanFile {
        let starts: Option<Vec<Num>> = schedule.map(|s| s.entries.iter().map(|e| e.start).collect());
        let actions = plan
            .steps
            .iter()
            .enumerate()
            .map(|(i, &id)| {
                let a = &task.actions[id as usize];
                PlanFileAction {
                    name: a.schema.to_string(),
                    args: a.args.iter().map(|n| n.to_string()).collect(),
                    cost: a.cost,
                    duration: a.duration,
                    start: starts.as_ref().map(|s| s[i]),
                }
            })
            .collect();
        PlanFile {
            actions,
            total_cost: plan.total_cost,
            makespan: schedule.map(|s| s.makespan),
            nodes_generated: plan.nodes_generated,
            nodes_expanded: plan.nodes_expanded,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{GroundAction, GroundTask};
    use crate::pddl::{name, GroundAtom};

    pub(crate) fn fact(i: usize) -> GroundAtom {
        GroundAtom::new(name(&format!("f{i}")), vec![])
    }

    pub(crate) fn action(
        id: u32,
        pre: Vec<u32>,
        add: Vec<u32>,
        del: Vec<u32>,
        cost: u64,
    ) -> GroundAction {
        GroundAction {
            id,
            schema: name(&format!("a{id}")),
            args: vec![],
            precondition: pre,
            add,
            del,
            cost: Num::from_int(cost),
            duration: Num::ZERO,
            sensing: false,
        }
    }

    fn chain3() -> GroundTask {
        GroundTask::from_parts(
            (0..4).map(fact).collect(),
            vec![0],
            vec![3],
            vec![
                action(0, vec![0], vec![1], vec![], 1),
                action(1, vec![1], vec![2], vec![], 1),
                action(2, vec![2], vec![3], vec![], 1),
            ],
        )
    }

    #[test]
    fn satisfied_goal_gives_empty_plan() {
        let task = GroundTask::from_parts((0..1).map(fact).collect(), vec![0], vec![0], vec![]);
        let plan = plan_metric(&task).unwrap();
        assert!(plan.steps.is_empty());
        assert_eq!(plan.total_cost, Num::ZERO);
        let plan = plan_optimal(&task).unwrap();
        assert_eq!(plan.total_cost, Num::ZERO);
    }

    #[test]
    fn chain_found_in_order() {
        let task = chain3();
        let plan = plan_metric(&task).unwrap();
        assert_eq!(plan.steps, vec![0, 1, 2]);
        assert_eq!(plan.total_cost, Num::from_int(3));
        assert!(plan.nodes_expanded >= 4);
        let optimal = plan_optimal(&task).unwrap();
        assert_eq!(optimal.total_cost, plan.total_cost);
    }

    #[test]
    fn optimal_prefers_cheap_route() {
        // Two routes to f1: direct (cost 5) or via f2 (cost 1 + 2).
        let task = GroundTask::from_parts(
            (0..3).map(fact).collect(),
            vec![0],
            vec![1],
            vec![
                action(0, vec![0], vec![1], vec![], 5),
                action(1, vec![0], vec![2], vec![], 1),
                action(2, vec![2], vec![1], vec![], 2),
            ],
        );
        let plan = plan_optimal(&task).unwrap();
        assert_eq!(plan.total_cost, Num::from_int(3));
        assert_eq!(plan.steps, vec![1, 2]);
    }

    #[test]
    fn unsolvable_reported() {
        let task = GroundTask::from_parts((0..2).map(fact).collect(), vec![0], vec![1], vec![]);
        assert_eq!(plan_metric(&task), Err(PlanError::Unsolvable));
        assert_eq!(plan_optimal(&task), Err(PlanError::Unsolvable));
    }

    #[test]
    fn deterministic_across_runs() {
        let task = chain3();
        let a = plan_metric(&task).unwrap();
        let b = plan_metric(&task).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_order_keeps_interfering_steps() {
        // a1 deletes a0's precondition; original order must survive.
        let task = GroundTask::from_parts(
            (0..3).map(fact).collect(),
            vec![0],
            vec![1, 2],
            vec![
                action(0, vec![0], vec![1], vec![], 1),
                action(1, vec![0], vec![2], vec![0], 1),
            ],
        );
        let ordered = canonical_order(&task, &[0, 1]);
        assert_eq!(ordered, vec![0, 1]);
        let plan = plan_metric(&task).unwrap();
        assert!(validate_plan(&task, &plan).is_ok());
    }
}
