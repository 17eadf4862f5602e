//! Property tests: parser round-trips over generator output, diff
//! against plain set arithmetic, outcome conservation, and registry
//! transition safety.

use std::collections::BTreeSet;

use proptest::prelude::*;

use stratplan_core::netadmin::{generate_domain, generate_problem, DomainConfig, Variant};
use stratplan_core::num::Num;
use stratplan_core::pddl::{emit_domain, emit_problem, name, parse_domain, parse_problem};
use stratplan_core::round::{diff_plans, PlanInstance, WorldState};
use stratplan_core::sensing::{keyed_rng, simulate_outcome};
use stratplan_core::tactical::{DeploymentRegistry, Flow, RegistryError};

const PROTOCOL_POOL: [&str; 5] = ["http", "tcp", "smtp", "dns", "ssh"];

fn config_strategy() -> impl Strategy<Value = DomainConfig> {
    (
        1usize..=5,
        1usize..=10,
        2usize..=6,
        0u64..=40,
        0u64..=40,
    )
        .prop_map(|(n_protocols, setup, branch, cost_base, duration_base)| DomainConfig {
            protocols: PROTOCOL_POOL[..n_protocols].iter().map(|p| name(p)).collect(),
            setup_chain_length: setup,
            branch_length: branch,
            class_costs: stratplan_core::netadmin::ActionClassValues {
                setup: Num::from_millis(cost_base * 250),
                analytics: Num::from_millis(cost_base * 500 + 500),
                sensing: Num::from_millis(cost_base * 1000 + 1000),
                admin: Num::from_int(1),
            },
            ..DomainConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_domains_round_trip(config in config_strategy(), metric in any::<bool>()) {
        let variant = if metric { Variant::Metric } else { Variant::Temporal };
        let domain = generate_domain(&config, variant).unwrap();
        let text = emit_domain(&domain);
        let parsed = parse_domain(&text).unwrap();
        prop_assert_eq!(&parsed, &domain);
        prop_assert_eq!(emit_domain(&parsed), text);
    }

    #[test]
    fn generated_problems_round_trip(
        config in config_strategy(),
        hostsets in 1usize..=20,
        seed in 0u64..=1000,
    ) {
        let domain = generate_domain(&config, Variant::Metric).unwrap();
        let goals = 1 + seed as usize % hostsets;
        let problem = generate_problem(&config, hostsets, goals, seed).unwrap();
        let text = emit_problem(&problem);
        let parsed = parse_problem(&text, &domain).unwrap();
        prop_assert_eq!(&parsed, &problem);
        prop_assert_eq!(emit_problem(&parsed), text);
    }

    #[test]
    fn num_display_parse_round_trip(millis in 0u64..=10_000_000) {
        let n = Num::from_millis(millis);
        prop_assert_eq!(Num::parse_decimal(&n.to_string()).unwrap(), n);
    }
}

fn instance_strategy() -> impl Strategy<Value = Vec<PlanInstance>> {
    proptest::collection::vec((0usize..6, 0usize..8), 0..30).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(schema, arg)| PlanInstance {
                name: format!("a{schema}"),
                args: vec![format!("hs{arg:02}")],
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn diff_matches_set_arithmetic(
        prev in instance_strategy(),
        cur in instance_strategy(),
    ) {
        let diff = diff_plans(&prev, &cur);
        let prev_set: BTreeSet<_> = prev.iter().cloned().collect();
        let cur_set: BTreeSet<_> = cur.iter().cloned().collect();
        prop_assert_eq!(&diff.canceled, &prev_set.difference(&cur_set).cloned().collect());
        prop_assert_eq!(&diff.added, &cur_set.difference(&prev_set).cloned().collect());
        prop_assert_eq!(&diff.retained, &prev_set.intersection(&cur_set).cloned().collect());
        // Partitions line up.
        prop_assert_eq!(diff.canceled.len() + diff.retained.len(), prev_set.len());
        prop_assert_eq!(diff.added.len() + diff.retained.len(), cur_set.len());
    }

    #[test]
    fn simulated_outcomes_conserve_members(
        members in 0usize..=40,
        seed in 0u64..=500,
        refine in any::<bool>(),
    ) {
        let mut world = WorldState::new(vec![]);
        let hs = name("hs01");
        world.add_root_hostset(
            hs.clone(),
            (0..members).map(|i| format!("m{i:02}")).collect(),
            1,
        );
        let manifest = stratplan_core::netadmin::default_manifest(&DomainConfig::default());
        let schema = if refine { "sense-refine-http" } else { "sense-gather-final-protocols" };
        let mut rng = keyed_rng(seed, 1, schema);
        let outcome =
            simulate_outcome(&name(schema), &[hs.clone()], &world, &manifest, &mut rng).unwrap();
        outcome.validate(&world.registry[&hs].members).unwrap();
        // Children (when any) partition the parent in full.
        if !outcome.children.is_empty() {
            let total: usize = outcome.children.iter().map(|c| c.members.len()).sum();
            prop_assert_eq!(total, members);
        }
    }

    #[test]
    fn registry_never_double_runs(ops in proptest::collection::vec((0u8..3, 0u64..6), 0..200)) {
        let mut registry = DeploymentRegistry::new();
        let flow = Flow {
            nodes: vec![],
            edges: vec![],
            terminal_tags: BTreeSet::new(),
            goal_tags: BTreeSet::new(),
        };
        for (op, key) in ops {
            let instance = PlanInstance { name: format!("a{key}"), args: vec![] };
            let result: Result<(), RegistryError> = match op {
                0 => registry.deploy(flow.clone(), instance).map(|_| ()),
                1 => {
                    let id = key % (registry.len() as u64 + 1);
                    registry.cancel(id).map(|_| ())
                }
                _ => {
                    let id = key % (registry.len() as u64 + 1);
                    registry.complete(id).map(|_| ())
                }
            };
            let _ = result; // errors are legal; violations are not
            prop_assert!(registry.check_invariant());
        }
    }
}
