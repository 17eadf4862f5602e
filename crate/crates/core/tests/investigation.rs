//! Round-engine behavior over full investigations: diff recounts,
//! snapshot fidelity, deployment accounting, and drill-down edge
//! cases.

use std::collections::{BTreeMap, BTreeSet};

use stratplan_core::netadmin::{default_manifest, DomainConfig, PROTOCOL_SENSOR};
use stratplan_core::round::{
    diff_plans, restore, snapshot, validate_registry, HostsetStatus, InvestigationConfig,
    PlanInstance, RoundEngine,
};
use stratplan_core::sensing::OutcomeSchema;

fn engine(seed: u64, hostsets: usize, members: usize) -> RoundEngine {
    RoundEngine::new_simulated(
        InvestigationConfig { seed, ..Default::default() },
        hostsets,
        members,
    )
    .unwrap()
}

#[test]
fn diff_recomputable_from_logged_plans() {
    let mut engine = engine(23, 3, 16);
    engine.run_investigation().unwrap();
    let log = engine.log();

    // The recorded diff of round N must equal plain set arithmetic
    // between round N-1's plan minus its executed prefix, and round
    // N's plan.
    for window in log.rounds.windows(2) {
        let prev = &window[0];
        let cur = &window[1];
        let executed: BTreeSet<&PlanInstance> = prev.executed.iter().collect();
        let remainder: Vec<PlanInstance> = PlanInstance::from_plan_file(&prev.plan)
            .into_iter()
            .filter(|i| !executed.contains(i))
            .collect();
        let expected = diff_plans(&remainder, &PlanInstance::from_plan_file(&cur.plan));
        assert_eq!(cur.diff, expected, "round {}", cur.round);
    }
}

#[test]
fn sensing_split_diff_matches_set_difference() {
    // Drive rounds until a split happens, then recount that round's
    // diff by hand.
    let mut engine = engine(42, 1, 24);
    loop {
        let record = engine.run_round().unwrap();
        if record.created.iter().filter(|c| !c.discarded_at_birth).count() >= 2 {
            break;
        }
        assert!(!record.terminated, "investigation ended without a split");
    }
    // The replan after the split carries the interesting diff.
    engine.run_round().unwrap();
    let log = engine.log();
    let n = log.rounds.len();
    assert!(n >= 2);
    let prev = &log.rounds[n - 2];
    let cur = &log.rounds[n - 1];
    let executed: BTreeSet<&PlanInstance> = prev.executed.iter().collect();
    let remainder: Vec<PlanInstance> = PlanInstance::from_plan_file(&prev.plan)
        .into_iter()
        .filter(|i| !executed.contains(i))
        .collect();
    let oracle = diff_plans(&remainder, &PlanInstance::from_plan_file(&cur.plan));
    assert_eq!(cur.diff.added.len(), oracle.added.len());
    assert_eq!(cur.diff.canceled.len(), oracle.canceled.len());
}

#[test]
fn mid_investigation_snapshot_round_trips() {
    let mut engine = engine(5, 20, 8);
    // Push past the first splits so the registry holds a real forest.
    for _ in 0..30 {
        let record = engine.run_round().unwrap();
        if record.terminated {
            break;
        }
    }
    let state = engine.state();
    assert!(state.registry.len() >= 20, "want a populated registry");
    let restored = restore(&snapshot(state)).unwrap();
    assert_eq!(&restored, state);
    validate_registry(&restored).unwrap();
}

#[test]
fn deployments_recount_from_log() {
    let mut engine = engine(31, 4, 16);
    engine.run_investigation().unwrap();
    let log = engine.log();

    let mut total = 0usize;
    let mut executed_ever: BTreeSet<PlanInstance> = BTreeSet::new();
    for record in &log.rounds {
        // One deployment per executed action, in execution order.
        let deployed: Vec<&PlanInstance> =
            record.deployments.iter().map(|d| &d.instance).collect();
        let executed: Vec<&PlanInstance> = record.executed.iter().collect();
        assert_eq!(deployed, executed, "round {}", record.round);
        total += record.deployments.len();
        for instance in &record.executed {
            assert!(
                executed_ever.insert(instance.clone()),
                "instance {instance} executed twice"
            );
        }
    }
    // Every executed instance entered some round's plan as an
    // addition exactly once, so the added-and-eventually-executed
    // recount reproduces the deployment total.
    let added_executed: usize = log
        .rounds
        .iter()
        .flat_map(|r| r.diff.added.iter())
        .filter(|i| executed_ever.contains(*i))
        .count();
    assert_eq!(total, added_executed);
    assert_eq!(total, executed_ever.len());
}

#[test]
fn always_empty_split_discards_without_escalation() {
    let config = DomainConfig::default();
    let mut manifest = default_manifest(&config);
    // Every protocol draw fails: the partition always comes back
    // empty and the subject is discarded as clean.
    manifest.entries.insert(
        stratplan_core::pddl::name(PROTOCOL_SENSOR),
        OutcomeSchema::PartitionByProtocol {
            include_prob: config.protocols.iter().map(|p| (p.clone(), 0.0)).collect(),
        },
    );
    let mut engine = engine(9, 2, 16).with_manifest(manifest);
    engine.run_investigation().unwrap();
    let state = engine.state();
    for root in state.roots() {
        assert_eq!(state.registry[&root].status, HostsetStatus::Discarded);
    }
    let escalations = engine
        .log()
        .rounds
        .iter()
        .flat_map(|r| r.executed.iter())
        .filter(|i| i.name == "pop-to-admin")
        .count();
    assert_eq!(escalations, 0);
}

#[test]
fn hostset_growth_stays_bounded() {
    let mut engine = engine(77, 6, 32);
    engine.run_investigation().unwrap();
    let state = engine.state();

    fn depth_of<'a>(
        state: &'a stratplan_core::round::WorldState,
        mut h: &'a stratplan_core::Name,
    ) -> usize {
        let mut depth = 1usize;
        while let Some(parent) = &state.registry[h].parent {
            depth += 1;
            h = parent;
        }
        depth
    }
    let max_depth = state.registry.keys().map(|h| depth_of(state, h)).max().unwrap();
    let initial_hosts = 6 * 32;
    // Branch factor: three protocols plus a clean remainder.
    let bound = initial_hosts * 4 * max_depth;
    assert!(
        state.registry.len() <= bound,
        "{} hostsets exceed bound {bound}",
        state.registry.len()
    );
}

#[test]
fn goals_track_active_frontier() {
    let mut engine = engine(3, 2, 16);
    let mut seen_child_goal = false;
    loop {
        let record = engine.run_round().unwrap();
        if record.terminated {
            break;
        }
        // Goals are exactly the active frontier at planning time.
        for goal in &record.goals {
            assert!(goal.as_str().starts_with("hs"));
        }
        if record.goals.iter().any(|g| g.as_str().len() > 4) {
            seen_child_goal = true;
        }
    }
    assert!(seen_child_goal, "drill-down never rewrote goals to children");
}

#[test]
fn flag_counts_by_status_are_consistent() {
    let mut engine = engine(12, 5, 16);
    engine.run_investigation().unwrap();
    let state = engine.state();
    let mut by_status: BTreeMap<HostsetStatus, usize> = BTreeMap::new();
    for entry in state.registry.values() {
        *by_status.entry(entry.status).or_default() += 1;
    }
    assert_eq!(by_status.get(&HostsetStatus::Active).copied().unwrap_or(0), 0);
    assert_eq!(
        by_status.values().sum::<usize>(),
        state.registry.len(),
    );
}
