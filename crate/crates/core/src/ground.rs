//! Instantiation of a domain/problem pair into a propositional task
//! with dense fact and action identifiers.
//!
//! Enumeration order is fixed — predicates and schemas in declaration
//! order, argument tuples in lexicographic object-name order — so two
//! runs over the same inputs produce identical tasks.

use std::collections::{BTreeMap, HashMap};

use crate::num::Num;
use crate::pddl::{Domain, GroundAtom, ModelError, Name, Problem, Term};

pub type FactId = u32;
pub type ActionId = u32;

/// Default ceiling on the number of ground actions.
pub const DEFAULT_ACTION_CAPACITY: usize = 1_000_000;

/// A fully instantiated action over fact identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    pub schema: Name,
    pub args: Vec<Name>,
    /// Sorted fact ids.
    pub precondition: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub cost: Num,
    pub duration: Num,
    pub sensing: bool,
}

impl GroundAction {
    /// `schema(arg, arg)` display form used in logs and plan files.
    pub fn instance_label(&self) -> String {
        let args: Vec<&str> = self.args.iter().map(|a| a.as_str()).collect();
        format!("{}({})", self.schema, args.join(", "))
    }
}

/// A propositional planning task.
#[derive(Debug, Clone)]
pub struct GroundTask {
    facts: Vec<GroundAtom>,
    fact_ids: HashMap<GroundAtom, FactId>,
    pub init: Vec<FactId>,
    pub goal: Vec<FactId>,
    pub actions: Vec<GroundAction>,
}

impl GroundTask {
    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn fact(&self, id: FactId) -> &GroundAtom {
        &self.facts[id as usize]
    }

    pub fn fact_id(&self, atom: &GroundAtom) -> Option<FactId> {
        self.fact_ids.get(atom).copied()
    }

    pub fn facts(&self) -> &[GroundAtom] {
        &self.facts
    }

    /// Builds a task directly from parts; used by tests and benches to
    /// construct synthetic tasks without a textual domain.
    pub fn from_parts(
        facts: Vec<GroundAtom>,
        mut init: Vec<FactId>,
        mut goal: Vec<FactId>,
        actions: Vec<GroundAction>,
    ) -> GroundTask {
        let fact_ids = facts
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as FactId))
            .collect();
        init.sort_unstable();
        init.dedup();
        goal.sort_unstable();
        goal.dedup();
        GroundTask { facts, fact_ids, init, goal, actions }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GroundError {
    #[error("ground action count {count} exceeds the configured ceiling {limit}")]
    CapacityExceeded { count: usize, limit: usize },
    #[error("schema `{schema}` references object `{object}` missing from the problem")]
    UnknownObject { schema: Name, object: Name },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

/// Grounds with the default action-count ceiling.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<GroundTask, GroundError> {
    ground_with_capacity(domain, problem, DEFAULT_ACTION_CAPACITY)
}

pub fn ground_with_capacity(
    domain: &Domain,
    problem: &Problem,
    capacity: usize,
) -> Result<GroundTask, GroundError> {
    domain.validate()?;
    problem.validate(domain)?;

    let object_types: BTreeMap<&Name, &Name> =
        problem.objects.iter().map(|(o, t)| (o, t)).collect();

    // Candidate objects per declared type, sorted by name.
    let mut by_type: HashMap<&Name, Vec<&Name>> = HashMap::new();
    let mut all_types: Vec<&Name> = domain.types.entries().iter().map(|(t, _)| t).collect();
    let object_ty = crate::pddl::object_type();
    all_types.push(&object_ty);
    for ty in all_types {
        let mut objs: Vec<&Name> = problem
            .objects
            .iter()
            .filter(|(_, ot)| domain.types.is_subtype(ot, ty))
            .map(|(o, _)| o)
            .collect();
        objs.sort();
        by_type.insert(ty, objs);
    }

    // Schemas may reference objects directly; they must exist.
    for schema in &domain.actions {
        for atom in schema
            .precondition
            .iter()
            .chain(&schema.add)
            .chain(&schema.del)
        {
            for term in &atom.args {
                if let Term::Obj(obj) = term {
                    if !object_types.contains_key(obj) {
                        return Err(GroundError::UnknownObject {
                            schema: schema.name.clone(),
                            object: obj.clone(),
                        });
                    }
                }
            }
        }
    }

    // Fact universe: every signature-consistent ground atom, predicate
    // declaration order first, then lexicographic argument order.
    let mut facts = Vec::new();
    let mut fact_ids: HashMap<GroundAtom, FactId> = HashMap::new();
    for pred in &domain.predicates {
        let pools: Vec<&Vec<&Name>> = pred
            .params
            .iter()
            .map(|p| by_type.get(&p.ty).expect("declared type"))
            .collect();
        for combo in cartesian(&pools) {
            let atom = GroundAtom::new(pred.name.clone(), combo.iter().map(|n| (*n).clone()).collect());
            let id = facts.len() as FactId;
            fact_ids.insert(atom.clone(), id);
            facts.push(atom);
        }
    }

    // A predicate is static when no schema ever adds it; preconditions
    // on static atoms absent from init can never be satisfied.
    let mut static_preds: Vec<&Name> = domain.predicates.iter().map(|p| &p.name).collect();
    static_preds.retain(|p| {
        !domain
            .actions
            .iter()
            .any(|a| a.add.iter().any(|atom| atom.predicate == **p))
    });

    let init_ids: Vec<FactId> = problem
        .init
        .iter()
        .map(|a| *fact_ids.get(a).expect("validated init atom"))
        .collect();
    let init_set: std::collections::HashSet<FactId> = init_ids.iter().copied().collect();

    let mut actions: Vec<GroundAction> = Vec::new();
    for schema in &domain.actions {
        let pools: Vec<&Vec<&Name>> = schema
            .params
            .iter()
            .map(|p| by_type.get(&p.ty).expect("declared type"))
            .collect();
        'bindings: for combo in cartesian(&pools) {
            let binding: BTreeMap<&Name, &Name> = schema
                .params
                .iter()
                .map(|p| &p.name)
                .zip(combo.iter().copied())
                .collect();

            let instantiate = |atoms: &[crate::pddl::Atom]| -> Option<Vec<FactId>> {
                let mut ids = Vec::with_capacity(atoms.len());
                for atom in atoms {
                    let args: Vec<Name> = atom
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => (*binding.get(v).expect("validated variable")).clone(),
                            Term::Obj(o) => o.clone(),
                        })
                        .collect();
                    // Ill-typed under this binding: not a fact at all.
                    let id = *fact_ids.get(&GroundAtom::new(atom.predicate.clone(), args))?;
                    ids.push(id);
                }
                ids.sort_unstable();
                ids.dedup();
                Some(ids)
            };

            let Some(pre) = instantiate(&schema.precondition) else {
                continue 'bindings;
            };
            let Some(add) = instantiate(&schema.add) else {
                continue 'bindings;
            };
            let Some(del) = instantiate(&schema.del) else {
                continue 'bindings;
            };

            // Static pruning against init.
            for &fid in &pre {
                let pred = &facts[fid as usize].predicate;
                if static_preds.contains(&pred) && !init_set.contains(&fid) {
                    continue 'bindings;
                }
            }

            if actions.len() >= capacity {
                return Err(GroundError::CapacityExceeded {
                    count: actions.len() + 1,
                    limit: capacity,
                });
            }
            actions.push(GroundAction {
                id: actions.len() as ActionId,
                schema: schema.name.clone(),
                args: combo.iter().map(|n| (*n).clone()).collect(),
                precondition: pre,
                add,
                del,
                cost: schema.cost,
                duration: schema.duration,
                sensing: schema.sensing,
            });
        }
    }

    let goal_ids: Vec<FactId> = problem
        .goal
        .iter()
        .map(|a| *fact_ids.get(a).expect("validated goal atom"))
        .collect();

    Ok(GroundTask::from_parts(facts, init_ids, goal_ids, actions))
}

/// Lexicographic cartesian product (last pool varies fastest).
fn cartesian<'a>(pools: &[&Vec<&'a Name>]) -> Vec<Vec<&'a Name>> {
    let mut out: Vec<Vec<&Name>> = vec![vec![]];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for item in pool.iter() {
                let mut row = prefix.clone();
                row.push(item);
                next.push(row);
            }
        }
        out = next;
    }
    out
}
