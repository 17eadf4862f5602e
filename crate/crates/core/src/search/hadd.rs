//! Additive delete-relaxation heuristic.
//!
//! `h_add(s) = Σ_g h(g)` where `h(f) = 0` for facts in `s` and
//! otherwise the cheapest `cost(a) + Σ h(pre(a))` over actions adding
//! `f`. Computed with a Dijkstra sweep over the relaxed task; the
//! sweep stops as soon as every goal fact is settled.
//!
//! When every action cost in the task is zero (e.g. the duration-only
//! domain variant) the heuristic falls back to unit action costs so
//! the search still gets distance guidance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::ground::{FactId, GroundTask};
use crate::search::state::State;

const INF: u64 = u64::MAX;

const NO_SUPPORTER: u32 = u32::MAX;

pub struct HaddContext {
    /// fact id -> ids of actions with that fact in their precondition.
    consumers: Vec<Vec<u32>>,
    /// Actions with empty preconditions, triggered unconditionally.
    free_actions: Vec<u32>,
    /// Effective action cost in millis (unit fallback when all zero).
    action_cost: Vec<u64>,
    pre_template: Vec<u32>,
    // Scratch reused across evaluations.
    fact_cost: Vec<u64>,
    best_supporter: Vec<u32>,
    pre_remaining: Vec<u32>,
    pre_cost: Vec<u64>,
    heap: BinaryHeap<Reverse<(u64, FactId)>>,
    goal_stamp: Vec<u32>,
    epoch: u32,
    mark_stack: Vec<FactId>,
    fact_marked: Vec<bool>,
    /// Actions on the relaxed best-supporter paths to the goal,
    /// refreshed by `eval`.
    pub helpful: Vec<bool>,
}

impl HaddContext {
    pub fn new(task: &GroundTask) -> HaddContext {
        let n_facts = task.fact_count();
        let n_actions = task.actions.len();
        let mut consumers = vec![Vec::new(); n_facts];
        let mut free_actions = Vec::new();
        let mut pre_template = vec![0u32; n_actions];
        for action in &task.actions {
            pre_template[action.id as usize] = action.precondition.len() as u32;
            if action.precondition.is_empty() {
                free_actions.push(action.id);
            }
            for &f in &action.precondition {
                consumers[f as usize].push(action.id);
            }
        }
        let unit = task.actions.iter().all(|a| a.cost.is_zero());
        let action_cost = task
            .actions
            .iter()
            .map(|a| if unit { 1000 } else { a.cost.millis() })
            .collect();
        HaddContext {
            consumers,
            free_actions,
            action_cost,
            pre_template,
            fact_cost: vec![INF; n_facts],
            best_supporter: vec![NO_SUPPORTER; n_facts],
            pre_remaining: vec![0; n_actions],
            pre_cost: vec![0; n_actions],
            heap: BinaryHeap::new(),
            goal_stamp: vec![0; n_facts],
            epoch: 0,
            mark_stack: Vec::new(),
            fact_marked: vec![false; n_facts],
            helpful: vec![false; n_actions],
        }
    }

    /// Heuristic value of `state` toward `goal`, or `None` when some
    /// goal fact is unreachable in the relaxation. Also refreshes
    /// `helpful` with the actions on the relaxed best-supporter paths.
    pub fn eval(&mut self, task: &GroundTask, state: &State, goal: &[FactId]) -> Option<u64> {
        self.epoch += 1;
        self.fact_cost.fill(INF);
        self.best_supporter.fill(NO_SUPPORTER);
        self.pre_remaining.copy_from_slice(&self.pre_template);
        self.pre_cost.fill(0);
        self.heap.clear();

        let mut goal_left = 0u32;
        for &g in goal {
            self.goal_stamp[g as usize] = self.epoch;
            goal_left += 1;
        }

        for f in state.iter() {
            self.fact_cost[f as usize] = 0;
            self.heap.push(Reverse((0, f)));
        }
        for &a in &self.free_actions {
            let total = self.action_cost[a as usize];
            for &e in &task.actions[a as usize].add {
                if total < self.fact_cost[e as usize] {
                    self.fact_cost[e as usize] = total;
                    self.best_supporter[e as usize] = a;
                    self.heap.push(Reverse((total, e)));
                }
            }
        }

        while let Some(Reverse((cost, fact))) = self.heap.pop() {
            if cost > self.fact_cost[fact as usize] {
                continue;
            }
            if self.goal_stamp[fact as usize] == self.epoch {
                self.goal_stamp[fact as usize] = 0;
                goal_left -= 1;
                if goal_left == 0 {
                    break;
                }
            }
            for &a in &self.consumers[fact as usize] {
                let ai = a as usize;
                self.pre_remaining[ai] -= 1;
                self.pre_cost[ai] += cost;
                if self.pre_remaining[ai] == 0 {
                    let total = self.pre_cost[ai].saturating_add(self.action_cost[ai]);
                    for &e in &task.actions[ai].add {
                        if total < self.fact_cost[e as usize] {
                            self.fact_cost[e as usize] = total;
                            self.best_supporter[e as usize] = a;
                            self.heap.push(Reverse((total, e)));
                        }
                    }
                }
            }
        }

        let mut sum = 0u64;
        for &g in goal {
            let c = self.fact_cost[g as usize];
            if c == INF {
                return None;
            }
            sum = sum.saturating_add(c);
        }
        self.mark_helpful(task, state, goal);
        Some(sum)
    }

    /// Walks best supporters back from the goal, marking every action
    /// on a cheapest relaxed path. Used for successor pruning.
    fn mark_helpful(&mut self, task: &GroundTask, state: &State, goal: &[FactId]) {
        self.helpful.fill(false);
        self.fact_marked.fill(false);
        self.mark_stack.clear();
        for &g in goal {
            if !state.contains(g) {
                self.mark_stack.push(g);
                self.fact_marked[g as usize] = true;
            }
        }
        while let Some(fact) = self.mark_stack.pop() {
            let supporter = self.best_supporter[fact as usize];
            if supporter == NO_SUPPORTER {
                continue;
            }
            self.helpful[supporter as usize] = true;
            for &p in &task.actions[supporter as usize].precondition {
                if !state.contains(p) && !self.fact_marked[p as usize] {
                    self.fact_marked[p as usize] = true;
                    self.mark_stack.push(p);
                }
            }
        }
    }
}
