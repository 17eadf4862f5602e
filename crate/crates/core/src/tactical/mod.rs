//! Tag-based tactical composition: each strategic action becomes a
//! goal tag set, satisfied by assembling analytic components into a
//! flow and deploying it on a simulated platform registry.

mod library;
mod registry;

pub use library::{default_library, default_mapping, source_tags, SOURCE_TAGS};
pub use registry::{
    Deployment, DeploymentRegistry, DeploymentState, RegistryError,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::num::Num;
use crate::round::PlanInstance;

pub type TagSet = BTreeSet<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Platform {
    Stream,
    Batch,
}

/// An analytic component in the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub platform: Platform,
    pub input_tags: TagSet,
    pub output_tags: TagSet,
    pub unit_cost: Num,
    /// Runtime parameter declarations: name -> type.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

/// One placed component with its bound runtime parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowNode {
    pub component: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

/// A composed analytic flow: a DAG of component instances in execution
/// order, with tag-labeled edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub nodes: Vec<FlowNode>,
    /// (producer index, consumer index, tags carried).
    pub edges: Vec<(usize, usize, TagSet)>,
    pub terminal_tags: TagSet,
    pub goal_tags: TagSet,
}

impl Flow {
    pub fn component_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_cost(&self, library: &[Component]) -> Num {
        self.nodes
            .iter()
            .filter_map(|n| library.iter().find(|c| c.id == n.component))
            .map(|c| c.unit_cost)
            .sum()
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ComposeError {
    #[error("no flow over this library covers the goal tags {0:?}")]
    Unsatisfiable(Vec<String>),
    #[error("the component library is empty")]
    EmptyLibrary,
}

/// Tag closure: every tag reachable from `sources` by repeatedly
/// applying library components.
fn closure(library: &[Component], sources: &TagSet) -> TagSet {
    let mut tags = sources.clone();
    loop {
        let mut grew = false;
        for c in library {
            if c.input_tags.is_subset(&tags) && !c.output_tags.is_subset(&tags) {
                tags.extend(c.output_tags.iter().cloned());
                grew = true;
            }
        }
        if !grew {
            return tags;
        }
    }
}

/// Components that can contribute to the goal, found by backward
/// chaining over tags. Keeps enumeration small on large libraries.
fn relevant<'a>(library: &'a [Component], goal: &TagSet, sources: &TagSet) -> Vec<&'a Component> {
    let mut needed: TagSet = goal.difference(sources).cloned().collect();
    let mut pool: Vec<&Component> = Vec::new();
    loop {
        let mut grew = false;
        for c in library {
            if pool.iter().any(|p| p.id == c.id) {
                continue;
            }
            if c.output_tags.iter().any(|t| needed.contains(t)) {
                for t in &c.input_tags {
                    if !sources.contains(t) {
                        needed.insert(t.clone());
                    }
                }
                pool.push(c);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    pool.sort_by(|a, b| a.id.cmp(&b.id));
    pool
}

/// Checks whether `subset` forms an executable flow covering `goal`,
/// returning the application order when it does. Every member must be
/// applicable (useless members mean a smaller subset exists).
fn feasible_order<'a>(
    subset: &[&'a Component],
    sources: &TagSet,
    goal: &TagSet,
) -> Option<Vec<&'a Component>> {
    let mut tags = sources.clone();
    let mut remaining: Vec<&Component> = subset.to_vec();
    let mut order = Vec::with_capacity(subset.len());
    while !remaining.is_empty() {
        let idx = remaining
            .iter()
            .position(|c| c.input_tags.is_subset(&tags))?;
        let c = remaining.remove(idx);
        tags.extend(c.output_tags.iter().cloned());
        order.push(c);
    }
    goal.is_subset(&tags).then_some(order)
}

/// Upper bound on enumerated subsets before falling back to a greedy
/// cover; libraries within the exhaustive-check range (<= 12
/// components) are always fully enumerated.
const ENUMERATION_BUDGET: u64 = 2_000_000;

/// Advances `combo` to the next k-combination of `0..n` in
/// lexicographic order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] != i + n - k {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Composes a minimum-component-count flow covering `goal_tags` from
/// `source_tags`, deterministic with ties broken by lexicographic
/// component-id sequence.
pub fn compose(
    goal_tags: &TagSet,
    library: &[Component],
    source_tags: &TagSet,
) -> Result<Flow, ComposeError> {
    if library.is_empty() {
        return Err(ComposeError::EmptyLibrary);
    }
    let reach = closure(library, source_tags);
    if !goal_tags.is_subset(&reach) {
        return Err(ComposeError::Unsatisfiable(
            goal_tags.difference(&reach).cloned().collect(),
        ));
    }
    if goal_tags.is_subset(source_tags) {
        return Ok(build_flow(&[], source_tags, goal_tags));
    }

    let pool = relevant(library, goal_tags, source_tags);
    let mut budget = ENUMERATION_BUDGET;
    'sizes: for k in 1..=pool.len() {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if budget == 0 {
                break 'sizes;
            }
            budget -= 1;
            let subset: Vec<&Component> = combo.iter().map(|&i| pool[i]).collect();
            if let Some(order) = feasible_order(&subset, source_tags, goal_tags) {
                return Ok(build_flow(&order, source_tags, goal_tags));
            }
            if !next_combination(&mut combo, pool.len()) {
                break;
            }
        }
    }

    // Budget exhausted on a satisfiable goal: greedy cover, then drop
    // components that were never needed.
    let mut order: Vec<&Component> = Vec::new();
    let mut tags = source_tags.clone();
    while !goal_tags.is_subset(&tags) {
        let next = pool
            .iter()
            .find(|c| !order.iter().any(|o| o.id == c.id) && c.input_tags.is_subset(&tags))
            .expect("closure guaranteed satisfiability");
        tags.extend(next.output_tags.iter().cloned());
        order.push(next);
    }
    loop {
        let mut dropped = false;
        for i in (0..order.len()).rev() {
            let mut trimmed = order.clone();
            trimmed.remove(i);
            if feasible_order(&trimmed, source_tags, goal_tags).is_some() {
                order = trimmed;
                dropped = true;
                break;
            }
        }
        if !dropped {
            break;
        }
    }
    let order = feasible_order(&order, source_tags, goal_tags).expect("greedy cover is feasible");
    Ok(build_flow(&order, source_tags, goal_tags))
}

fn build_flow(order: &[&Component], sources: &TagSet, goal: &TagSet) -> Flow {
    let mut terminal = sources.clone();
    let mut edges = Vec::new();
    for (j, consumer) in order.iter().enumerate() {
        let mut by_producer: BTreeMap<usize, TagSet> = BTreeMap::new();
        for tag in &consumer.input_tags {
            // Earliest producer wins; absent producers mean the tag is
            // a source.
            if let Some(i) = order[..j].iter().position(|p| p.output_tags.contains(tag)) {
                by_producer.entry(i).or_default().insert(tag.clone());
            }
        }
        for (i, tags) in by_producer {
            edges.push((i, j, tags));
        }
        terminal.extend(consumer.output_tags.iter().cloned());
    }
    Flow {
        nodes: order
            .iter()
            .map(|c| FlowNode { component: c.id.clone(), params: BTreeMap::new() })
            .collect(),
        edges,
        terminal_tags: terminal,
        goal_tags: goal.clone(),
    }
}

/// Independent validity check: walks the DAG verifying acyclicity and
/// that every node's inputs are covered by sources plus predecessor
/// outputs, and that the terminal tags cover the goal.
pub fn validate_flow(
    flow: &Flow,
    library: &[Component],
    sources: &TagSet,
) -> Result<(), FlowViolation> {
    let mut tags = sources.clone();
    for (idx, node) in flow.nodes.iter().enumerate() {
        let component = library
            .iter()
            .find(|c| c.id == node.component)
            .ok_or_else(|| FlowViolation::UnknownComponent(node.component.clone()))?;
        for tag in &component.input_tags {
            if !tags.contains(tag) {
                return Err(FlowViolation::UncoveredInput {
                    node: idx,
                    component: component.id.clone(),
                    tag: tag.clone(),
                });
            }
        }
        tags.extend(component.output_tags.iter().cloned());
    }
    for (i, j, _) in &flow.edges {
        if i >= j {
            return Err(FlowViolation::EdgeNotForward { from: *i, to: *j });
        }
    }
    if !flow.goal_tags.is_subset(&tags) {
        return Err(FlowViolation::GoalNotCovered);
    }
    Ok(())
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FlowViolation {
    #[error("flow references unknown component `{0}`")]
    UnknownComponent(String),
    #[error("node {node} (`{component}`) input tag `{tag}` is not covered")]
    UncoveredInput { node: usize, component: String, tag: String },
    #[error("edge {from} -> {to} does not follow execution order")]
    EdgeNotForward { from: usize, to: usize },
    #[error("terminal tags do not cover the goal")]
    GoalNotCovered,
}

/// How a mapping entry fills one runtime parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArgBinding {
    /// Positional argument of the strategic action instance.
    Arg(usize),
    /// Fixed literal (e.g. the branch's protocol).
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagGoal {
    pub tags: TagSet,
    #[serde(default)]
    pub bind: BTreeMap<String, ArgBinding>,
}

/// Strategic-action-name -> tactical goal mapping.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TagMapping {
    pub entries: BTreeMap<String, TagGoal>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("strategic action `{0}` has no tactical mapping")]
pub struct UnmappedAction(pub String);

/// Translates one strategic action instance into tactical goal tags
/// plus bound parameters.
pub fn action_to_goal_tags(
    instance: &PlanInstance,
    mapping: &TagMapping,
) -> Result<(TagSet, BTreeMap<String, String>), UnmappedAction> {
    let goal = mapping
        .entries
        .get(&instance.name)
        .ok_or_else(|| UnmappedAction(instance.name.clone()))?;
    let mut params = BTreeMap::new();
    for (pname, binding) in &goal.bind {
        let value = match binding {
            ArgBinding::Arg(i) => instance
                .args
                .get(*i)
                .cloned()
                .ok_or_else(|| UnmappedAction(instance.name.clone()))?,
            ArgBinding::Value(v) => v.clone(),
        };
        params.insert(pname.clone(), value);
    }
    Ok((goal.tags.clone(), params))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tags(xs: &[&str]) -> TagSet {
        xs.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn comp(id: &str, inputs: &[&str], outputs: &[&str]) -> Component {
        Component {
            id: id.to_string(),
            platform: Platform::Stream,
            input_tags: tags(inputs),
            output_tags: tags(outputs),
            unit_cost: Num::from_int(1),
            params: BTreeMap::new(),
        }
    }

    #[test]
    fn single_component_flow() {
        let library = vec![comp("alpha", &["src"], &["goal"])];
        let flow = compose(&tags(&["goal"]), &library, &tags(&["src"])).unwrap();
        assert_eq!(flow.component_count(), 1);
        validate_flow(&flow, &library, &tags(&["src"])).unwrap();
    }

    #[test]
    fn two_stage_pipeline_is_found_and_minimal() {
        let library = vec![
            comp("aggregator", &["parsed"], &["aggregated"]),
            comp("parser", &["src"], &["parsed"]),
            comp("verbose-route-a", &["src"], &["x1"]),
            comp("verbose-route-b", &["x1"], &["x2"]),
            comp("verbose-route-c", &["x2"], &["aggregated"]),
        ];
        let flow = compose(&tags(&["aggregated"]), &library, &tags(&["src"])).unwrap();
        assert_eq!(flow.component_count(), 2);
        assert_eq!(flow.nodes[0].component, "parser");
        assert_eq!(flow.nodes[1].component, "aggregator");
        assert_eq!(flow.edges.len(), 1);
        validate_flow(&flow, &library, &tags(&["src"])).unwrap();
    }

    #[test]
    fn unsatisfiable_goal_reported() {
        let library = vec![comp("alpha", &["src"], &["a"])];
        let err = compose(&tags(&["nothing-makes-this"]), &library, &tags(&["src"])).unwrap_err();
        assert!(matches!(err, ComposeError::Unsatisfiable(_)));
    }

    #[test]
    fn ties_break_lexicographically() {
        let library = vec![
            comp("zeta", &["src"], &["goal"]),
            comp("alpha", &["src"], &["goal"]),
        ];
        let flow = compose(&tags(&["goal"]), &library, &tags(&["src"])).unwrap();
        assert_eq!(flow.nodes[0].component, "alpha");
    }

    #[test]
    fn goal_already_in_sources_gives_empty_flow() {
        let library = vec![comp("alpha", &["src"], &["a"])];
        let flow = compose(&tags(&["src"]), &library, &tags(&["src"])).unwrap();
        assert_eq!(flow.component_count(), 0);
    }

    #[test]
    fn mapping_binds_args_and_literals() {
        let mut mapping = TagMapping::default();
        mapping.entries.insert(
            "sense-refine-http".into(),
            TagGoal {
                tags: tags(&["http-traffic", "model-compare", "split"]),
                bind: [
                    ("hostset".to_string(), ArgBinding::Arg(0)),
                    ("protocol".to_string(), ArgBinding::Value("http".into())),
                ]
                .into_iter()
                .collect(),
            },
        );
        let instance = PlanInstance {
            name: "sense-refine-http".into(),
            args: vec!["hs3".into(), "df-zscore".into(), "tw-recent".into()],
        };
        let (goal, params) = action_to_goal_tags(&instance, &mapping).unwrap();
        assert!(goal.contains("split"));
        assert_eq!(params["hostset"], "hs3");
        assert_eq!(params["protocol"], "http");

        let unmapped = PlanInstance { name: "mystery".into(), args: vec![] };
        assert!(action_to_goal_tags(&unmapped, &mapping).is_err());
    }
}
