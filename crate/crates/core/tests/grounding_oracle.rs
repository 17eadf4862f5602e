//! Cross-checks grounding against a naive independent enumerator.

use std::collections::{BTreeMap, BTreeSet};

use stratplan_core::ground;
use stratplan_core::netadmin::{generate_domain, generate_problem, DomainConfig, Variant};
use stratplan_core::pddl::{Atom, Domain, GroundAtom, Name, Problem, Term};

/// Counts type-consistent instantiations the slow way: enumerate every
/// argument tuple, instantiate every atom by substitution, drop
/// bindings with ill-typed atoms, then drop those whose precondition
/// uses a never-added predicate unsatisfied in init.
fn naive_ground_count(domain: &Domain, problem: &Problem) -> usize {
    let object_types: BTreeMap<&Name, &Name> =
        problem.objects.iter().map(|(o, t)| (o, t)).collect();
    let added: BTreeSet<&Name> = domain
        .actions
        .iter()
        .flat_map(|a| a.add.iter().map(|atom| &atom.predicate))
        .collect();
    let init: BTreeSet<&GroundAtom> = problem.init.iter().collect();

    let well_typed = |atom: &GroundAtom| -> bool {
        let sig = domain.predicate(&atom.predicate).expect("declared predicate");
        atom.args.len() == sig.arity()
            && atom.args.iter().zip(&sig.params).all(|(arg, param)| {
                object_types
                    .get(arg)
                    .is_some_and(|ty| domain.types.is_subtype(ty, &param.ty))
            })
    };

    let mut count = 0;
    for schema in &domain.actions {
        // All object tuples for the parameters, unrestricted by type:
        // typing is enforced through the instantiated atoms instead,
        // which makes this an independent route.
        let pools: Vec<Vec<&Name>> = schema
            .params
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|(_, t)| domain.types.is_subtype(t, &p.ty))
                    .map(|(o, _)| o)
                    .collect()
            })
            .collect();
        let mut stack: Vec<Vec<&Name>> = vec![vec![]];
        for pool in &pools {
            let mut next = Vec::new();
            for prefix in &stack {
                for obj in pool {
                    let mut row = prefix.clone();
                    row.push(obj);
                    next.push(row);
                }
            }
            stack = next;
        }
        'binding: for binding in stack {
            let map: BTreeMap<&Name, &Name> = schema
                .params
                .iter()
                .map(|p| &p.name)
                .zip(binding.iter().copied())
                .collect();
            let subst = |atom: &Atom| -> GroundAtom {
                GroundAtom::new(
                    atom.predicate.clone(),
                    atom.args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => (*map.get(v).expect("bound")).clone(),
                            Term::Obj(o) => o.clone(),
                        })
                        .collect(),
                )
            };
            let all_atoms: Vec<GroundAtom> = schema
                .precondition
                .iter()
                .chain(&schema.add)
                .chain(&schema.del)
                .map(subst)
                .collect();
            if !all_atoms.iter().all(well_typed) {
                continue;
            }
            for pre in schema.precondition.iter().map(subst) {
                if !added.contains(&pre.predicate) && !init.contains(&pre) {
                    continue 'binding;
                }
            }
            count += 1;
        }
    }
    count
}

#[test]
fn netadmin_ground_count_matches_naive_enumeration() {
    let config = DomainConfig::default();
    let domain = generate_domain(&config, Variant::Metric).unwrap();
    let problem = generate_problem(&config, 5, 3, 11).unwrap();
    let task = ground(&domain, &problem).unwrap();
    assert_eq!(task.actions.len(), naive_ground_count(&domain, &problem));
}

#[test]
fn ground_count_matches_on_varied_configs() {
    for (protocols, hostsets, seed) in [(1usize, 2usize, 1u64), (2, 4, 2), (3, 3, 3)] {
        let config = DomainConfig {
            protocols: ["http", "tcp", "smtp"][..protocols]
                .iter()
                .map(|p| stratplan_core::pddl::name(p))
                .collect(),
            ..DomainConfig::default()
        };
        let domain = generate_domain(&config, Variant::Metric).unwrap();
        let problem = generate_problem(&config, hostsets, hostsets, seed).unwrap();
        let task = ground(&domain, &problem).unwrap();
        assert_eq!(
            task.actions.len(),
            naive_ground_count(&domain, &problem),
            "protocols={protocols} hostsets={hostsets}"
        );
    }
}
