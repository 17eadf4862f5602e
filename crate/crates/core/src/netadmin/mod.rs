//! Generator for the network-administration planning domain: a setup
//! chain that groups hostsets by protocol, a protocol sensing action
//! that fans out into one analysis branch per protocol, and a terminal
//! escalation action that hands a refined hostset to an administrator.
//!
//! Two variants share identical schemas: the metric variant carries
//! compute costs through `total-cost`, the temporal variant carries
//! execution durations. The sensing manifest generated alongside the
//! domain is the authoritative record of which actions are sensing
//! actions and how their outcomes are drawn.

mod causal;

pub use causal::{causal_graph, CausalEdge, CausalGraph};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::Num;
use crate::pddl::{
    name, object_type, ActionSchema, Atom, Domain, GroundAtom, Metric, Name, Param, PredicateSig,
    Problem, Requirements, Term, TypeForest,
};
use crate::sensing::{MemberAssignment, OutcomeSchema};

/// Domain variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Costs on actions, `total-cost` minimization.
    Metric,
    /// Durations on actions, makespan scheduling.
    Temporal,
}

/// Per-class default costs and durations, overridable per action name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionClassValues {
    pub setup: Num,
    pub analytics: Num,
    pub sensing: Num,
    pub admin: Num,
}

impl Default for ActionClassValues {
    fn default() -> Self {
        ActionClassValues {
            setup: Num::from_int(1),
            analytics: Num::from_int(5),
            sensing: Num::from_int(10),
            admin: Num::from_int(1),
        }
    }
}

fn default_durations() -> ActionClassValues {
    ActionClassValues {
        setup: Num::from_int(1),
        analytics: Num::from_int(5),
        sensing: Num::from_int(15),
        admin: Num::from_int(1),
    }
}

/// Configuration of the generated domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    pub base_name: String,
    pub protocols: Vec<Name>,
    pub setup_chain_length: usize,
    /// Actions per protocol branch; the last-but-one is the branch's
    /// sensing action.
    pub branch_length: usize,
    pub class_costs: ActionClassValues,
    pub class_durations: ActionClassValues,
    /// Per-action-name overrides.
    pub costs: BTreeMap<String, Num>,
    pub durations: BTreeMap<String, Num>,
    pub seed: u64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            base_name: "netadmin".into(),
            protocols: vec![name("http"), name("tcp"), name("smtp")],
            setup_chain_length: 8,
            branch_length: 4,
            class_costs: ActionClassValues::default(),
            class_durations: default_durations(),
            costs: BTreeMap::new(),
            durations: BTreeMap::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("setup_chain_length must be at least 1")]
    SetupChainTooShort,
    #[error("branch_length must be at least 2")]
    BranchTooShort,
    #[error("at least one protocol is required")]
    NoProtocols,
    #[error("duplicate protocol `{0}`")]
    DuplicateProtocol(Name),
    #[error("n_goals must satisfy 1 <= n_goals <= n_hostsets (got {n_goals}/{n_hostsets})")]
    BadGoalCount { n_goals: usize, n_hostsets: usize },
}

impl DomainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.setup_chain_length < 1 {
            return Err(ConfigError::SetupChainTooShort);
        }
        if self.branch_length < 2 {
            return Err(ConfigError::BranchTooShort);
        }
        if self.protocols.is_empty() {
            return Err(ConfigError::NoProtocols);
        }
        for (i, p) in self.protocols.iter().enumerate() {
            if self.protocols[..i].contains(p) {
                return Err(ConfigError::DuplicateProtocol(p.clone()));
            }
        }
        Ok(())
    }

    fn cost_of(&self, action: &str, class: ActionClass) -> Num {
        self.costs.get(action).copied().unwrap_or(match class {
            ActionClass::Setup => self.class_costs.setup,
            ActionClass::Analytics => self.class_costs.analytics,
            ActionClass::Sensing => self.class_costs.sensing,
            ActionClass::Admin => self.class_costs.admin,
        })
    }

    fn duration_of(&self, action: &str, class: ActionClass) -> Num {
        self.durations.get(action).copied().unwrap_or(match class {
            ActionClass::Setup => self.class_durations.setup,
            ActionClass::Analytics => self.class_durations.analytics,
            ActionClass::Sensing => self.class_durations.sensing,
            ActionClass::Admin => self.class_durations.admin,
        })
    }

    /// Duration lookup used by the round engine's simulated-time
    /// accounting, resolved the same way as domain generation.
    pub fn duration_for(&self, action: &str) -> Num {
        self.duration_of(action, classify(action))
    }

    /// Cost lookup resolved the same way as domain generation.
    pub fn cost_for(&self, action: &str) -> Num {
        self.cost_of(action, classify(action))
    }
}

#[derive(Clone, Copy)]
enum ActionClass {
    Setup,
    Analytics,
    Sensing,
    Admin,
}

fn classify(action: &str) -> ActionClass {
    if action.starts_with("sense-") {
        ActionClass::Sensing
    } else if action == "pop-to-admin" {
        ActionClass::Admin
    } else if action.starts_with("filter-")
        || action.starts_with("compare-model-")
        || action.starts_with("correlate-pass-")
        || action.starts_with("mark-anomalous-")
    {
        ActionClass::Analytics
    } else {
        ActionClass::Setup
    }
}

/// Name of the protocol sensing action that ends the setup chain.
pub const PROTOCOL_SENSOR: &str = "sense-gather-final-protocols";
/// Name of the terminal escalation action.
pub const POP_TO_ADMIN: &str = "pop-to-admin";

/// Fixed non-hostset objects every problem carries.
pub fn fixed_objects(config: &DomainConfig) -> Vec<(Name, Name)> {
    let mut objs: Vec<(Name, Name)> = config
        .protocols
        .iter()
        .map(|p| (p.clone(), name("protocol")))
        .collect();
    objs.push((name("df-zscore"), name("distancefunction")));
    objs.push((name("tw-recent"), name("timewindow")));
    objs.push((name("tm-baseline"), name("trafficmodel")));
    objs.push((name("bl-primary"), name("blacklist")));
    objs.push((name("th-default"), name("threshold")));
    objs.push((name("rp-queue"), name("report")));
    objs
}

fn hostset_param() -> Param {
    Param { name: name("s"), ty: name("hostset") }
}

fn var(n: &str) -> Term {
    Term::Var(name(n))
}

fn obj(n: &Name) -> Term {
    Term::Obj(n.clone())
}

fn unary(pred: &str, term: Term) -> Atom {
    Atom::new(name(pred), vec![term])
}

/// Eight named setup stages; chains longer than eight continue with
/// numbered preparation passes.
const SETUP_STAGES: [(&str, &str); 8] = [
    ("ingest-flows", "flows-ingested"),
    ("ingest-dns", "dns-ingested"),
    ("extract-blacklist", "extracted-blacklist"),
    ("check-frequent-hosts", "frequent-hosts-checked"),
    ("align-windows", "windowed"),
    ("build-baseline", "baselined"),
    ("aggregate-traffic", "aggregated"),
    ("group-by-protocol", "protocol-grouped"),
];

fn setup_stage(i: usize) -> (String, String) {
    if i < SETUP_STAGES.len() {
        let (a, f) = SETUP_STAGES[i];
        (a.to_string(), f.to_string())
    } else {
        (format!("prepare-pass-{}", i + 1), format!("prepared-{}", i + 1))
    }
}

/// Generates the domain for the given variant.
pub fn generate_domain(config: &DomainConfig, variant: Variant) -> Result<Domain, ConfigError> {
    config.validate()?;

    let mut types = TypeForest::new();
    for ty in [
        "hostset",
        "protocol",
        "distancefunction",
        "timewindow",
        "trafficmodel",
        "blacklist",
        "threshold",
        "report",
    ] {
        types.declare(name(ty), object_type()).expect("static types");
    }

    fn declare(preds: &mut Vec<PredicateSig>, pname: &str, params: &[(&str, &str)]) {
        preds.push(PredicateSig {
            name: name(pname),
            params: params
                .iter()
                .map(|(n, t)| Param { name: name(n), ty: name(t) })
                .collect(),
        });
    }

    let mut predicates: Vec<PredicateSig> = Vec::new();
    declare(&mut predicates, "unprocessed", &[("s", "hostset")]);
    for i in 0..config.setup_chain_length {
        let (_, fact) = setup_stage(i);
        declare(&mut predicates, &fact, &[("s", "hostset")]);
    }
    declare(&mut predicates, "blacklist-matched", &[("s", "hostset"), ("b", "blacklist")]);
    declare(&mut predicates, "checked-global-frequent-hosts", &[]);
    declare(&mut predicates, "window-aligned", &[("s", "hostset"), ("w", "timewindow")]);
    declare(&mut predicates, "baseline-built", &[("s", "hostset"), ("m", "trafficmodel")]);
    declare(&mut predicates, "protocols-sensed", &[("s", "hostset")]);
    declare(&mut predicates, "assigned-protocol", &[("s", "hostset"), ("p", "protocol")]);
    declare(&mut predicates, "filtered", &[("s", "hostset"), ("p", "protocol")]);
    // One predicate per extra correlation pass (branches longer than 4).
    for k in 1..=config.branch_length.saturating_sub(4) {
        declare(
            &mut predicates,
            &format!("correlated-{k}"),
            &[("s", "hostset"), ("p", "protocol")],
        );
    }
    declare(
        &mut predicates,
        "model-compared",
        &[
            ("s", "hostset"),
            ("p", "protocol"),
            ("d", "distancefunction"),
            ("w", "timewindow"),
        ],
    );
    declare(&mut predicates, "refined", &[("s", "hostset"), ("p", "protocol")]);
    declare(
        &mut predicates,
        "anomaly-confirmed",
        &[("s", "hostset"), ("p", "protocol"), ("t", "threshold")],
    );
    declare(&mut predicates, "ready-for-admin", &[("s", "hostset")]);
    declare(&mut predicates, "reported", &[("s", "hostset"), ("r", "report")]);
    declare(&mut predicates, "investigated", &[("s", "hostset")]);
    declare(&mut predicates, "obtained-from", &[("s1", "hostset"), ("s2", "hostset")]);

    let mut actions: Vec<ActionSchema> = Vec::new();
    let mut push = |aname: String,
                    params: Vec<Param>,
                    pre: Vec<Atom>,
                    add: Vec<Atom>,
                    del: Vec<Atom>,
                    class: ActionClass,
                    sensing: bool| {
        let (cost, duration) = match variant {
            Variant::Metric => (config.cost_of(&aname, class), Num::ZERO),
            Variant::Temporal => (Num::ZERO, config.duration_of(&aname, class)),
        };
        actions.push(ActionSchema::new(
            name(&aname),
            params,
            pre,
            add,
            del,
            cost,
            duration,
            sensing,
        ));
    };

    // Setup chain: gather, filter and aggregate data per hostset.
    let mut chain_fact = "unprocessed".to_string();
    for i in 0..config.setup_chain_length {
        let (aname, fact) = setup_stage(i);
        let mut params = vec![hostset_param()];
        let mut pre = vec![unary(&chain_fact, var("s"))];
        let mut add = vec![unary(&fact, var("s"))];
        let mut del = Vec::new();
        match aname.as_str() {
            "ingest-flows" => del.push(unary("unprocessed", var("s"))),
            "extract-blacklist" => {
                params.push(Param { name: name("b"), ty: name("blacklist") });
                add.push(Atom::new(name("blacklist-matched"), vec![var("s"), var("b")]));
            }
            "check-frequent-hosts" => {
                add.push(Atom::new(name("checked-global-frequent-hosts"), vec![]));
            }
            "align-windows" => {
                params.push(Param { name: name("w"), ty: name("timewindow") });
                add.push(Atom::new(name("window-aligned"), vec![var("s"), var("w")]));
            }
            "build-baseline" => {
                params.push(Param { name: name("m"), ty: name("trafficmodel") });
                params.push(Param { name: name("w"), ty: name("timewindow") });
                pre.push(Atom::new(name("window-aligned"), vec![var("s"), var("w")]));
                add.push(Atom::new(name("baseline-built"), vec![var("s"), var("m")]));
            }
            _ => {}
        }
        push(aname, params, pre, add, del, ActionClass::Setup, false);
        chain_fact = fact;
    }

    // Protocol sensing: deterministic effects optimistically open every
    // protocol branch; the executed outcome replaces this with the
    // protocols actually observed.
    {
        let mut add = vec![unary("protocols-sensed", var("s"))];
        for p in &config.protocols {
            add.push(Atom::new(name("assigned-protocol"), vec![var("s"), obj(p)]));
        }
        push(
            PROTOCOL_SENSOR.to_string(),
            vec![hostset_param()],
            vec![unary(&chain_fact, var("s"))],
            add,
            vec![],
            ActionClass::Sensing,
            true,
        );
    }

    // One analysis branch per protocol:
    //   filter -> [correlate passes] -> compare-model -> sense-refine -> mark-anomalous
    // with branch_length actions in total.
    for p in &config.protocols {
        let entry = Atom::new(name("assigned-protocol"), vec![var("s"), obj(p)]);
        let interior = config.branch_length - 2;
        let mut chain: Vec<Atom> = vec![entry.clone()];
        let mut prev = entry.clone();

        // Interior analytics before the branch sensor: a filter, then
        // correlation passes, then the model comparison.
        for slot in 0..interior {
            let last_interior = slot + 1 == interior;
            let (aname, fact, extra_params) = if last_interior && interior >= 2 {
                (
                    format!("compare-model-{p}"),
                    Atom::new(
                        name("model-compared"),
                        vec![var("s"), obj(p), var("d"), var("w")],
                    ),
                    vec![
                        Param { name: name("d"), ty: name("distancefunction") },
                        Param { name: name("w"), ty: name("timewindow") },
                    ],
                )
            } else if slot == 0 {
                (
                    format!("filter-{p}"),
                    Atom::new(name("filtered"), vec![var("s"), obj(p)]),
                    vec![],
                )
            } else {
                (
                    format!("correlate-pass-{slot}-{p}"),
                    Atom::new(name(&format!("correlated-{slot}")), vec![var("s"), obj(p)]),
                    vec![],
                )
            };
            let mut params = vec![hostset_param()];
            params.extend(extra_params);
            push(
                aname,
                params,
                vec![prev.clone()],
                vec![fact.clone()],
                vec![],
                ActionClass::Analytics,
                false,
            );
            chain.push(fact.clone());
            prev = fact;
        }

        // Branch sensor. Re-adding the fact the deepest interior step
        // consumed records the refinement loop in the causal graph:
        // refined children re-run that segment of the branch.
        let loop_fact = if chain.len() >= 2 {
            chain[chain.len() - 2].clone()
        } else {
            chain[0].clone()
        };
        let refine_params: Vec<Param> = {
            let mut ps = vec![hostset_param()];
            for v in prev.args.iter().filter_map(|t| t.as_var()) {
                if v.as_str() != "s" {
                    let ty = if v.as_str() == "d" { "distancefunction" } else { "timewindow" };
                    ps.push(Param { name: v.clone(), ty: name(ty) });
                }
            }
            ps
        };
        let refined = Atom::new(name("refined"), vec![var("s"), obj(p)]);
        push(
            format!("sense-refine-{p}"),
            refine_params,
            vec![prev.clone()],
            vec![refined.clone(), loop_fact],
            vec![],
            ActionClass::Sensing,
            true,
        );

        push(
            format!("mark-anomalous-{p}"),
            vec![hostset_param(), Param { name: name("t"), ty: name("threshold") }],
            vec![refined],
            vec![
                Atom::new(
                    name("anomaly-confirmed"),
                    vec![var("s"), obj(p), var("t")],
                ),
                unary("ready-for-admin", var("s")),
            ],
            vec![],
            ActionClass::Analytics,
            false,
        );
    }

    push(
        POP_TO_ADMIN.to_string(),
        vec![hostset_param(), Param { name: name("r"), ty: name("report") }],
        vec![unary("ready-for-admin", var("s"))],
        vec![
            Atom::new(name("reported"), vec![var("s"), var("r")]),
            unary("investigated", var("s")),
        ],
        vec![],
        ActionClass::Admin,
        false,
    );

    let requirements = match variant {
        Variant::Metric => Requirements {
            strips: true,
            typing: true,
            action_costs: true,
            durative_actions: false,
        },
        Variant::Temporal => Requirements {
            strips: true,
            typing: true,
            action_costs: false,
            durative_actions: true,
        },
    };

    let domain = Domain {
        name: name(&config.base_name),
        requirements,
        types,
        predicates,
        actions,
        has_total_cost: matches!(variant, Variant::Metric),
    };
    domain.validate().expect("generated domain is well-formed");
    Ok(domain)
}

/// Root hostset name: `hs001`, zero-padded to the instance width.
pub fn hostset_name(index: usize, total: usize) -> Name {
    let width = total.to_string().len().max(2);
    name(&format!("hs{:0width$}", index + 1))
}

/// Generates a problem instance with `n_hostsets` unprocessed hostsets
/// and `investigated` goals on `n_goals` of them, chosen by `seed`.
pub fn generate_problem(
    config: &DomainConfig,
    n_hostsets: usize,
    n_goals: usize,
    seed: u64,
) -> Result<Problem, ConfigError> {
    config.validate()?;
    if n_goals < 1 || n_goals > n_hostsets {
        return Err(ConfigError::BadGoalCount { n_goals, n_hostsets });
    }

    let hostsets: Vec<Name> = (0..n_hostsets).map(|i| hostset_name(i, n_hostsets)).collect();
    let mut objects: Vec<(Name, Name)> = hostsets
        .iter()
        .map(|h| (h.clone(), name("hostset")))
        .collect();
    objects.extend(fixed_objects(config));

    let init: Vec<GroundAtom> = hostsets
        .iter()
        .map(|h| GroundAtom::new(name("unprocessed"), vec![h.clone()]))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n_hostsets).collect();
    indices.shuffle(&mut rng);
    indices.truncate(n_goals);
    let goal: Vec<GroundAtom> = indices
        .into_iter()
        .map(|i| GroundAtom::new(name("investigated"), vec![hostsets[i].clone()]))
        .collect();

    Ok(Problem::new(
        name(&format!("{}-{}x{}", config.base_name, n_hostsets, n_goals)),
        name(&config.base_name),
        objects,
        init,
        Some(Num::ZERO),
        goal,
        Metric::MinimizeTotalCost,
    ))
}

/// Default inclusion probabilities cycled over configured protocols.
const DEFAULT_INCLUDE_PROBS: [f64; 3] = [0.25, 0.2, 0.15];

/// Sensing manifest version emitted and accepted.
pub const MANIFEST_VERSION: u32 = 1;

/// Maps every sensing action of the generated domain to its outcome
/// schema. This sidecar is authoritative: the planning language cannot
/// express the runtime nondeterminism itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingManifest {
    pub version: u32,
    pub entries: BTreeMap<Name, OutcomeSchema>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ManifestError {
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("sensing action `{0}` has no manifest entry")]
    MissingEntry(Name),
    #[error("manifest entry `{0}` does not match a sensing action")]
    StrayEntry(Name),
    #[error(transparent)]
    Schema(#[from] crate::sensing::OutcomeSchemaError),
}

impl SensingManifest {
    /// Every sensing-marked schema has exactly one entry and vice versa.
    pub fn validate_against(&self, domain: &Domain) -> Result<(), ManifestError> {
        if self.version != MANIFEST_VERSION {
            return Err(ManifestError::Version(self.version));
        }
        for (entry, schema) in &self.entries {
            schema.validate()?;
            match domain.action(entry) {
                Some(a) if a.sensing => {}
                _ => return Err(ManifestError::StrayEntry(entry.clone())),
            }
        }
        for action in &domain.actions {
            if action.sensing && !self.entries.contains_key(&action.name) {
                return Err(ManifestError::MissingEntry(action.name.clone()));
            }
        }
        Ok(())
    }
}

/// Builds the default manifest for a configured domain.
pub fn default_manifest(config: &DomainConfig) -> SensingManifest {
    let mut entries = BTreeMap::new();
    let include_prob: BTreeMap<Name, f64> = config
        .protocols
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), DEFAULT_INCLUDE_PROBS[i % DEFAULT_INCLUDE_PROBS.len()]))
        .collect();
    entries.insert(
        name(PROTOCOL_SENSOR),
        OutcomeSchema::PartitionByProtocol { include_prob },
    );
    for p in &config.protocols {
        entries.insert(
            name(&format!("sense-refine-{p}")),
            OutcomeSchema::RefineSplit {
                child_count_dist: [0.1, 0.3, 0.4, 0.2],
                assignment: MemberAssignment::Uniform,
                min_split_size: 4,
            },
        );
    }
    SensingManifest { version: MANIFEST_VERSION, entries }
}
