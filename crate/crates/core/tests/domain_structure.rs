//! Structural checks of the generated domain: causal-graph shape via
//! an independent longest-path search, and end-to-end plan shape.

use std::collections::BTreeSet;

use stratplan_core::netadmin::{
    causal_graph, generate_domain, generate_problem, DomainConfig, Variant, POP_TO_ADMIN,
    PROTOCOL_SENSOR,
};
use stratplan_core::pddl::{name, Name};
use stratplan_core::{ground, plan_metric, validate_plan};

/// Longest simple path (in nodes) by exhaustive DFS over the causal
/// graph, independent of any graph helper.
fn dfs_longest_path(nodes: &[Name], edges: &[(Name, Name)]) -> usize {
    fn walk(
        current: &Name,
        edges: &[(Name, Name)],
        visited: &mut BTreeSet<Name>,
    ) -> usize {
        let mut best = 0;
        for (from, to) in edges {
            if from == current && !visited.contains(to) {
                visited.insert(to.clone());
                best = best.max(walk(to, edges, visited));
                visited.remove(to);
            }
        }
        best + 1
    }
    nodes
        .iter()
        .map(|n| {
            let mut visited = BTreeSet::from([n.clone()]);
            walk(n, edges, &mut visited)
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn default_causal_graph_shape() {
    let domain = generate_domain(&DomainConfig::default(), Variant::Metric).unwrap();
    let graph = causal_graph(&domain);

    assert_eq!(graph.nodes.len(), 22);
    assert_eq!(graph.out_degree(&name(PROTOCOL_SENSOR)), 3);
    assert_eq!(graph.in_degree(&name(POP_TO_ADMIN)), 3);

    let edges: Vec<(Name, Name)> = graph
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    // Setup chain (8) + protocol sensor + one branch (4) + escalation.
    assert_eq!(dfs_longest_path(&graph.nodes, &edges), 14);
}

#[test]
fn refinement_loops_are_branch_local() {
    let domain = generate_domain(&DomainConfig::default(), Variant::Metric).unwrap();
    let graph = causal_graph(&domain);
    // Tarjan-free cycle check: a node is cyclic when it can reach
    // itself; only branch interiors may be.
    for node in &graph.nodes {
        let mut reachable = BTreeSet::new();
        let mut stack: Vec<Name> = graph.successors(node).cloned().collect();
        while let Some(next) = stack.pop() {
            if reachable.insert(next.clone()) {
                stack.extend(graph.successors(&next).cloned());
            }
        }
        if reachable.contains(node) {
            let cyclic_ok = node.as_str().starts_with("compare-model-")
                || node.as_str().starts_with("sense-refine-")
                || node.as_str().starts_with("filter-")
                || node.as_str().starts_with("correlate-pass-");
            assert!(cyclic_ok, "unexpected cycle through {node}");
        }
    }
}

#[test]
fn single_hostset_plan_ends_with_escalation() {
    let config = DomainConfig::default();
    let domain = generate_domain(&config, Variant::Metric).unwrap();
    let problem = generate_problem(&config, 1, 1, 0).unwrap();
    let task = ground(&domain, &problem).unwrap();
    let plan = plan_metric(&task).unwrap();
    validate_plan(&task, &plan).unwrap();
    let last = &task.actions[*plan.steps.last().unwrap() as usize];
    assert_eq!(last.schema.as_str(), POP_TO_ADMIN);
    assert_eq!(plan.steps.len(), 14);
}

#[test]
fn investigated_goal_requires_escalating_a_descendant() {
    // Over a simulated investigation, every flagged hostset got there
    // through an escalation applied to itself or a descendant of the
    // goal root, linked by the lineage chain.
    use stratplan_core::round::{HostsetStatus, InvestigationConfig, RoundEngine};
    let mut engine = RoundEngine::new_simulated(
        InvestigationConfig { seed: 17, ..Default::default() },
        3,
        16,
    )
    .unwrap();
    engine.run_investigation().unwrap();
    let state = engine.state();
    for root in state.roots() {
        if state.registry[&root].status != HostsetStatus::Flagged {
            continue;
        }
        let escalated: Vec<Name> = engine
            .log()
            .rounds
            .iter()
            .flat_map(|r| r.executed.iter())
            .filter(|i| i.name == POP_TO_ADMIN)
            .filter_map(|i| i.args.first())
            .map(|a| name(a))
            .collect();
        let descendant_escalated = escalated.iter().any(|h| state.root_of(h) == root);
        assert!(descendant_escalated, "flagged root {root} without escalation");
    }
}
