//! The round engine: build a problem from the world state, plan, diff
//! against the previous round, deploy and execute the deterministic
//! prefix, resolve the sensing action that ends it, and fold the
//! outcome back into the world.

use std::collections::BTreeSet;

use crate::ground::{ground, GroundError};
use crate::netadmin::{
    default_manifest, fixed_objects, generate_domain, hostset_name, ConfigError, DomainConfig,
    SensingManifest, Variant, POP_TO_ADMIN,
};
use crate::num::Num;
use crate::pddl::{name, Domain, GroundAtom, Metric, Name, Problem};
use crate::round::diff::{diff_plans, PlanDiff, PlanInstance};
use crate::round::record::{
    DeploymentEvent, HostsetCreated, HostsetResolved, InvestigationLog, RoundRecord, RoundTimings,
    SensingEvent, OTHER_MS_PER_ROUND, PLANNING_MS_PER_EXPANSION, TACTICAL_MS_PER_COMPONENT,
};
use crate::round::state::{HostsetStatus, WorldState};
use crate::search::{
    plan_metric_with, plan_optimal_with, schedule_temporal, PlanError, PlanFile, SearchLimits,
};
use crate::sensing::{
    analyze_traces, keyed_rng, sensing_subject, simulate_outcome, AnalysisThresholds,
    SensingOutcome, TraceSet,
};
use crate::tactical::{
    action_to_goal_tags, compose, default_library, default_mapping, source_tags, Component,
    DeploymentRegistry, TagMapping, TagSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerMode {
    #[default]
    Metric,
    Optimal,
    Temporal,
}

/// Where sensing outcomes come from.
pub enum Backend {
    /// Pseudo-random outcomes drawn from the manifest.
    Simulator,
    /// Deterministic outcomes computed from synthetic traces.
    Traces {
        traces: TraceSet,
        thresholds: AnalysisThresholds,
    },
}

#[derive(Debug, Clone)]
pub struct InvestigationConfig {
    pub domain: DomainConfig,
    pub mode: PlannerMode,
    pub seed: u64,
    pub round_limit: u32,
    pub search: SearchLimits,
}

impl Default for InvestigationConfig {
    fn default() -> Self {
        InvestigationConfig {
            domain: DomainConfig::default(),
            mode: PlannerMode::Metric,
            seed: 0,
            round_limit: 10_000,
            search: SearchLimits::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("planning failed: {0}")]
    Planning(#[from] PlanError),
    #[error("grounding failed: {0}")]
    Ground(#[from] GroundError),
    #[error("backend failed: {0}")]
    Backend(String),
    #[error("tactical composition failed: {0}")]
    Tactical(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// How an investigation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvestigationStatus {
    /// Every goal met; all hostsets flagged or discarded.
    GoalsMet { rounds: u32 },
    /// The configured round ceiling was hit first.
    RoundLimit { limit: u32 },
}

pub struct RoundEngine {
    config: InvestigationConfig,
    backend: Backend,
    domain: Domain,
    manifest: SensingManifest,
    library: Vec<Component>,
    mapping: TagMapping,
    sources: TagSet,
    registry: DeploymentRegistry,
    state: WorldState,
    /// Previous round's plan minus its executed prefix; executed
    /// actions completed, so they are neither canceled nor re-added.
    prev_plan: Vec<PlanInstance>,
    round: u32,
    log: InvestigationLog,
    terminated: bool,
}

impl RoundEngine {
    /// Engine over explicit root hostsets.
    pub fn new(
        config: InvestigationConfig,
        backend: Backend,
        roots: Vec<(Name, BTreeSet<String>)>,
    ) -> Result<RoundEngine, EngineError> {
        let variant = match config.mode {
            PlannerMode::Temporal => Variant::Temporal,
            _ => Variant::Metric,
        };
        let domain = generate_domain(&config.domain, variant)?;
        let manifest = default_manifest(&config.domain);
        if let Backend::Traces { .. } = backend {
            let expected: Vec<Name> = vec![name("http"), name("tcp"), name("smtp")];
            if config.domain.protocols != expected {
                return Err(EngineError::Backend(
                    "the trace backend maps signals onto protocols http, tcp, smtp".into(),
                ));
            }
        }
        let mut state = WorldState::new(fixed_objects(&config.domain));
        for (root, members) in roots {
            state
                .facts
                .insert(GroundAtom::new(name("unprocessed"), vec![root.clone()]));
            state.add_root_hostset(root, members, 0);
        }
        state.fluents.insert(name("total-cost"), Num::ZERO);
        Ok(RoundEngine {
            library: default_library(),
            mapping: default_mapping(&config.domain),
            sources: source_tags(),
            registry: DeploymentRegistry::new(),
            config,
            backend,
            domain,
            manifest,
            state,
            prev_plan: Vec::new(),
            round: 0,
            log: InvestigationLog::default(),
            terminated: false,
        })
    }

    /// Simulator-backed engine with synthetic root hostsets.
    pub fn new_simulated(
        config: InvestigationConfig,
        n_hostsets: usize,
        members_per_hostset: usize,
    ) -> Result<RoundEngine, EngineError> {
        let roots = (0..n_hostsets)
            .map(|i| {
                let root = hostset_name(i, n_hostsets);
                let members = (0..members_per_hostset)
                    .map(|j| format!("{root}-m{j:03}"))
                    .collect();
                (root, members)
            })
            .collect();
        RoundEngine::new(config, Backend::Simulator, roots)
    }

    /// Trace-backed engine: one root hostset covering the whole
    /// monitored network.
    pub fn new_traced(
        config: InvestigationConfig,
        traces: TraceSet,
        thresholds: AnalysisThresholds,
    ) -> Result<RoundEngine, EngineError> {
        let members: BTreeSet<String> = traces.hosts.iter().cloned().collect();
        let root = hostset_name(0, 1);
        RoundEngine::new(
            config,
            Backend::Traces { traces, thresholds },
            vec![(root, members)],
        )
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn log(&self) -> &InvestigationLog {
        &self.log
    }

    pub fn into_log(self) -> InvestigationLog {
        self.log
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn registry_dump(&self) -> String {
        self.registry.dump_json()
    }

    /// Replaces the component library and action mapping.
    pub fn with_tactical(mut self, library: Vec<Component>, mapping: TagMapping) -> RoundEngine {
        self.library = library;
        self.mapping = mapping;
        self
    }

    /// Replaces the sensing manifest (simulator backend).
    pub fn with_manifest(mut self, manifest: SensingManifest) -> RoundEngine {
        self.manifest = manifest;
        self
    }

    fn build_problem(&self, frontier: &[Name]) -> Problem {
        let mut objects: Vec<(Name, Name)> = frontier
            .iter()
            .map(|h| (h.clone(), name("hostset")))
            .collect();
        objects.extend(self.state.fixed_objects.clone());
        let known: BTreeSet<&Name> = objects.iter().map(|(o, _)| o).collect();
        let init: Vec<GroundAtom> = self
            .state
            .facts
            .iter()
            .filter(|f| f.args.iter().all(|a| known.contains(a)))
            .cloned()
            .collect();
        let goal: Vec<GroundAtom> = frontier
            .iter()
            .map(|h| GroundAtom::new(name("investigated"), vec![h.clone()]))
            .collect();
        let (metric, init_cost) = match self.config.mode {
            PlannerMode::Temporal => (Metric::MinimizeMakespan, None),
            _ => (Metric::MinimizeTotalCost, Some(Num::ZERO)),
        };
        Problem::new(
            name(&format!("{}-round-{}", self.config.domain.base_name, self.round)),
            self.domain.name.clone(),
            objects,
            init,
            init_cost,
            goal,
            metric,
        )
    }

    /// Executes one plan-sense-replan round. The returned record is
    /// also appended to the investigation log.
    pub fn run_round(&mut self) -> Result<&RoundRecord, EngineError> {
        self.round += 1;
        let round = self.round;
        let frontier = self.state.active_frontier();

        if frontier.is_empty() {
            // Goals met: empty plan, empty diff, world unchanged.
            let record = RoundRecord {
                round,
                goals: vec![],
                plan: empty_plan_file(),
                diff: PlanDiff::default(),
                executed: vec![],
                sensing: None,
                created: vec![],
                resolved: vec![],
                deployments: vec![],
                timings: RoundTimings { other_ms: OTHER_MS_PER_ROUND, ..Default::default() },
                terminated: true,
            };
            self.terminated = true;
            self.log.push(record);
            return Ok(self.log.rounds.last().expect("just pushed"));
        }

        // Plan for the active frontier.
        let problem = self.build_problem(&frontier);
        let task = ground(&self.domain, &problem)?;
        let (plan, schedule) = match self.config.mode {
            PlannerMode::Metric => (plan_metric_with(&task, &self.config.search)?, None),
            PlannerMode::Optimal => (plan_optimal_with(&task, &self.config.search)?, None),
            PlannerMode::Temporal => {
                let p = plan_metric_with(&task, &self.config.search)?;
                let s = schedule_temporal(&p, &task);
                (p, Some(s))
            }
        };
        let plan_file = PlanFile::new(&task, &plan, schedule.as_ref());
        let instances = PlanInstance::from_plan(&task, &plan);
        let planning_ms =
            (plan.nodes_expanded + plan.nodes_generated / 10) * PLANNING_MS_PER_EXPANSION;

        let diff = diff_plans(&self.prev_plan, &instances);

        // Teardown: cancel any still-running deployment of a canceled
        // instance.
        for canceled in &diff.canceled {
            if let Some(id) = self.registry.running_for(canceled) {
                self.registry
                    .cancel(id)
                    .map_err(|e| EngineError::Tactical(e.to_string()))?;
            }
        }

        // Deterministic prefix: everything up to and including the
        // first sensing action.
        let prefix_end = plan
            .steps
            .iter()
            .position(|&id| task.actions[id as usize].sensing)
            .map(|i| i + 1)
            .unwrap_or(plan.steps.len());

        let mut executed = Vec::with_capacity(prefix_end);
        let mut deployments = Vec::new();
        let mut resolved: Vec<HostsetResolved> = Vec::new();
        let mut tactical_ms = 0u64;
        let mut execution_ms = 0u64;

        for &aid in &plan.steps[..prefix_end] {
            let action = &task.actions[aid as usize];
            let instance = PlanInstance::of(action);

            // Deploy the analytic flow implementing this action.
            let (goal_tags, params) = action_to_goal_tags(&instance, &self.mapping)
                .map_err(|e| EngineError::Tactical(e.to_string()))?;
            let mut flow = compose(&goal_tags, &self.library, &self.sources)
                .map_err(|e| EngineError::Tactical(e.to_string()))?;
            for node in &mut flow.nodes {
                if let Some(component) = self.library.iter().find(|c| c.id == node.component) {
                    node.params = params
                        .iter()
                        .filter(|(k, _)| component.params.contains_key(*k))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                }
            }
            tactical_ms += flow.component_count() as u64 * TACTICAL_MS_PER_COMPONENT;
            let dep_id = self
                .registry
                .deploy(flow.clone(), instance.clone())
                .map_err(|e| EngineError::Tactical(e.to_string()))?;
            deployments.push(DeploymentEvent {
                instance: instance.clone(),
                deployment_id: dep_id,
                components: flow.nodes.iter().map(|n| n.component.clone()).collect(),
            });

            // Apply deterministic effects.
            for &f in &action.del {
                self.state.facts.remove(task.fact(f));
            }
            for &f in &action.add {
                self.state.facts.insert(task.fact(f).clone());
            }
            let cost = self.state.fluents.entry(name("total-cost")).or_insert(Num::ZERO);
            *cost += self.config.domain.cost_for(action.schema.as_str());
            execution_ms += self.config.domain.duration_for(action.schema.as_str()).millis() * 60;

            for arg in &action.args {
                if let Some(entry) = self.state.registry.get_mut(arg) {
                    entry.first_worked_round.get_or_insert(round);
                }
            }

            // Escalation resolves its hostset.
            if action.schema.as_str() == POP_TO_ADMIN {
                let subject = action.args[0].clone();
                let members: Vec<String> =
                    self.state.registry[&subject].members.iter().cloned().collect();
                self.state.mark_resolved(&subject, HostsetStatus::Flagged, round);
                resolved.push(HostsetResolved {
                    hostset: subject,
                    status: HostsetStatus::Flagged,
                    members,
                });
            }

            self.registry
                .complete(dep_id)
                .map_err(|e| EngineError::Tactical(e.to_string()))?;
            executed.push(instance);
        }

        // Resolve the sensing action that closed the prefix.
        let mut sensing_event = None;
        let mut created = Vec::new();
        if prefix_end > 0 {
            let last = &task.actions[plan.steps[prefix_end - 1] as usize];
            if last.sensing {
                let instance = PlanInstance::of(last);
                let outcome = self.resolve_sensing(last.schema.clone(), &last.args, round)?;
                let subject = sensing_subject(&last.args, &self.state)
                    .ok_or_else(|| {
                        EngineError::Backend(format!("no registered hostset in {instance}"))
                    })?
                    .clone();
                outcome
                    .validate(&self.state.registry[&subject].members)
                    .map_err(|e| EngineError::Backend(e.to_string()))?;
                sensing_event = Some(SensingEvent {
                    instance,
                    subject: subject.clone(),
                    digest: outcome.digest(),
                    children_created: outcome.children.len(),
                    subject_discarded: outcome.discard_parent,
                });
                self.apply_outcome(&subject, outcome, round, &mut created, &mut resolved)?;
            }
        }

        resolved.extend(self.cascade(round));

        let record = RoundRecord {
            round,
            goals: frontier,
            plan: plan_file,
            diff,
            executed,
            sensing: sensing_event,
            created,
            resolved,
            deployments,
            timings: RoundTimings {
                planning_ms,
                tactical_ms,
                execution_ms,
                other_ms: OTHER_MS_PER_ROUND,
            },
            terminated: false,
        };

        let executed_set: BTreeSet<&PlanInstance> = record.executed.iter().collect();
        self.prev_plan = instances
            .iter()
            .filter(|i| !executed_set.contains(i))
            .cloned()
            .collect();

        self.log.push(record);
        Ok(self.log.rounds.last().expect("just pushed"))
    }

    fn resolve_sensing(
        &mut self,
        schema: Name,
        args: &[Name],
        round: u32,
    ) -> Result<SensingOutcome, EngineError> {
        match &self.backend {
            Backend::Simulator => {
                let instance_label = {
                    let args: Vec<&str> = args.iter().map(|a| a.as_str()).collect();
                    format!("{}({})", schema, args.join(", "))
                };
                let mut rng = keyed_rng(self.config.seed, round, &instance_label);
                simulate_outcome(&schema, args, &self.state, &self.manifest, &mut rng)
                    .map_err(|e| EngineError::Backend(e.to_string()))
            }
            Backend::Traces { traces, thresholds } => {
                analyze_traces(&schema, args, &self.state, traces, thresholds)
                    .map_err(|e| EngineError::Backend(e.to_string()))
            }
        }
    }

    fn apply_outcome(
        &mut self,
        subject: &Name,
        outcome: SensingOutcome,
        round: u32,
        created: &mut Vec<HostsetCreated>,
        resolved: &mut Vec<HostsetResolved>,
    ) -> Result<(), EngineError> {
        for child in outcome.children {
            if self.state.registry.contains_key(&child.name) {
                return Err(EngineError::Backend(format!(
                    "hostset `{}` created twice",
                    child.name
                )));
            }
            self.state.registry.insert(
                child.name.clone(),
                crate::round::state::HostsetEntry {
                    members: child.members.clone(),
                    parent: Some(subject.clone()),
                    status: if child.discarded {
                        HostsetStatus::Discarded
                    } else {
                        HostsetStatus::Active
                    },
                    first_seen_round: round,
                    first_worked_round: None,
                    resolved_round: child.discarded.then_some(round),
                },
            );
            for fact in &child.facts {
                self.state.facts.insert(fact.clone());
            }
            created.push(HostsetCreated {
                hostset: child.name.clone(),
                parent: subject.clone(),
                members: child.members.iter().cloned().collect(),
                discarded_at_birth: child.discarded,
            });
            if child.discarded {
                resolved.push(HostsetResolved {
                    hostset: child.name,
                    status: HostsetStatus::Discarded,
                    members: created.last().expect("just pushed").members.clone(),
                });
            }
        }
        for fact in &outcome.new_facts {
            self.state.facts.insert(fact.clone());
        }
        for fact in &outcome.removed_facts {
            self.state.facts.remove(fact);
        }
        if outcome.discard_parent {
            let members: Vec<String> =
                self.state.registry[subject].members.iter().cloned().collect();
            self.state.mark_resolved(subject, HostsetStatus::Discarded, round);
            resolved.push(HostsetResolved {
                hostset: subject.clone(),
                status: HostsetStatus::Discarded,
                members,
            });
        }
        Ok(())
    }

    fn cascade(&mut self, round: u32) -> Vec<HostsetResolved> {
        self.state
            .cascade_resolution(round)
            .into_iter()
            .map(|(hostset, status)| {
                let members = self.state.registry[&hostset].members.iter().cloned().collect();
                HostsetResolved { hostset, status, members }
            })
            .collect()
    }

    /// Loops rounds until the goals are met or the round ceiling hits.
    pub fn run_investigation(&mut self) -> Result<InvestigationStatus, EngineError> {
        while !self.terminated {
            if self.round >= self.config.round_limit {
                return Ok(InvestigationStatus::RoundLimit {
                    limit: self.config.round_limit,
                });
            }
            self.run_round()?;
        }
        Ok(InvestigationStatus::GoalsMet { rounds: self.round })
    }
}

fn empty_plan_file() -> PlanFile {
    PlanFile {
        actions: vec![],
        total_cost: Num::ZERO,
        makespan: None,
        nodes_generated: 0,
        nodes_expanded: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::round::state::validate_registry;

    fn quick_config(seed: u64) -> InvestigationConfig {
        InvestigationConfig { seed, ..Default::default() }
    }

    #[test]
    fn single_hostset_investigation_terminates() {
        let mut engine = RoundEngine::new_simulated(quick_config(42), 1, 16).unwrap();
        let status = engine.run_investigation().unwrap();
        let rounds = match status {
            InvestigationStatus::GoalsMet { rounds } => rounds,
            other => panic!("unexpected status {other:?}"),
        };
        assert!(rounds > 1);
        // Root resolved one way or the other.
        let root = hostset_name(0, 1);
        assert_ne!(engine.state().registry[&root].status, HostsetStatus::Active);
        validate_registry(engine.state()).unwrap();
        assert!(engine.log().rounds.last().unwrap().terminated);
    }

    #[test]
    fn first_round_diff_adds_entire_plan() {
        let mut engine = RoundEngine::new_simulated(quick_config(7), 2, 8).unwrap();
        let record = engine.run_round().unwrap();
        assert!(record.diff.canceled.is_empty());
        assert_eq!(record.diff.added.len(), record.plan.actions.len());
    }

    #[test]
    fn prefix_has_at_most_one_sensing_action_and_last() {
        let mut engine = RoundEngine::new_simulated(quick_config(3), 3, 12).unwrap();
        engine.run_investigation().unwrap();
        for record in &engine.log().rounds {
            let sensing: Vec<usize> = record
                .executed
                .iter()
                .enumerate()
                .filter(|(_, i)| i.name.starts_with("sense-"))
                .map(|(idx, _)| idx)
                .collect();
            assert!(sensing.len() <= 1, "round {}", record.round);
            if let Some(&idx) = sensing.first() {
                assert_eq!(idx, record.executed.len() - 1, "round {}", record.round);
            }
        }
    }

    #[test]
    fn replay_is_byte_identical() {
        let run = |seed| {
            let mut engine = RoundEngine::new_simulated(quick_config(seed), 2, 10).unwrap();
            engine.run_investigation().unwrap();
            engine.into_log().to_jsonl()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn registry_invariants_hold_after_every_round() {
        let mut engine = RoundEngine::new_simulated(quick_config(5), 4, 16).unwrap();
        let mut prev = engine.state().clone();
        while !engine.terminated() {
            engine.run_round().unwrap();
            validate_registry(engine.state()).unwrap();
            crate::round::state::check_monotonic(&prev, engine.state()).unwrap();
            prev = engine.state().clone();
        }
    }

    #[test]
    fn round_limit_is_reported() {
        let config = InvestigationConfig { round_limit: 2, ..quick_config(1) };
        let mut engine = RoundEngine::new_simulated(config, 3, 16).unwrap();
        let status = engine.run_investigation().unwrap();
        assert_eq!(status, InvestigationStatus::RoundLimit { limit: 2 });
    }
}
