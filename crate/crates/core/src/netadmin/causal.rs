//! Causal graph over action schemas: a labeled edge `a1 -e-> a2` for
//! every add effect `e` of `a1` that unifies with a precondition atom
//! of `a2`.

use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, Domain, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalEdge {
    pub from: Name,
    pub to: Name,
    /// The add effect mediating the dependency.
    pub label: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalGraph {
    /// Schema names in declaration order.
    pub nodes: Vec<Name>,
    /// Edges ordered by (from, to, label) declaration positions.
    pub edges: Vec<CausalEdge>,
}

impl CausalGraph {
    pub fn out_degree(&self, node: &Name) -> usize {
        self.edges.iter().filter(|e| e.from == *node).count()
    }

    pub fn in_degree(&self, node: &Name) -> usize {
        self.edges.iter().filter(|e| e.to == *node).count()
    }

    pub fn successors<'a>(&'a self, node: &'a Name) -> impl Iterator<Item = &'a Name> {
        self.edges.iter().filter(move |e| e.from == *node).map(|e| &e.to)
    }
}

/// Equivalence classes of variables with at most one object constraint
/// each; the two atoms' variables live in separate scopes (sides).
#[derive(Default)]
struct Binder {
    class_of: Vec<(u8, Name, usize)>,
    constraint: Vec<Option<Name>>,
}

impl Binder {
    fn class_for(&mut self, side: u8, v: &Name) -> usize {
        if let Some((_, _, c)) = self.class_of.iter().find(|(s, n, _)| *s == side && n == v) {
            return *c;
        }
        let c = self.constraint.len();
        self.constraint.push(None);
        self.class_of.push((side, v.clone(), c));
        c
    }

    fn constrain(&mut self, class: usize, object: &Name) -> bool {
        match &self.constraint[class] {
            Some(existing) => existing == object,
            None => {
                self.constraint[class] = Some(object.clone());
                true
            }
        }
    }

    fn merge(&mut self, c1: usize, c2: usize) -> bool {
        if c1 == c2 {
            return true;
        }
        match (&self.constraint[c1], &self.constraint[c2]) {
            (Some(a), Some(b)) if a != b => return false,
            (None, Some(b)) => self.constraint[c1] = Some(b.clone()),
            _ => {}
        }
        for entry in self.class_of.iter_mut() {
            if entry.2 == c2 {
                entry.2 = c1;
            }
        }
        true
    }
}

/// Variable-consistent unification of two flat atoms. Variables on the
/// two sides are renamed apart; repeated variables within one atom
/// must bind to compatible arguments.
fn unifies(a: &Atom, b: &Atom) -> bool {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return false;
    }
    let mut binder = Binder::default();
    for (x, y) in a.args.iter().zip(&b.args) {
        let ok = match (x, y) {
            (Term::Obj(o1), Term::Obj(o2)) => o1 == o2,
            (Term::Var(v), Term::Obj(o)) => {
                let c = binder.class_for(0, v);
                binder.constrain(c, o)
            }
            (Term::Obj(o), Term::Var(v)) => {
                let c = binder.class_for(1, v);
                binder.constrain(c, o)
            }
            (Term::Var(v1), Term::Var(v2)) => {
                let c1 = binder.class_for(0, v1);
                let c2 = binder.class_for(1, v2);
                binder.merge(c1, c2)
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Builds the causal graph of a domain with deterministic node and
/// edge ordering.
pub fn causal_graph(domain: &Domain) -> CausalGraph {
    let nodes: Vec<Name> = domain.actions.iter().map(|a| a.name.clone()).collect();
    let mut edges = Vec::new();
    for from in &domain.actions {
        for to in &domain.actions {
            for added in &from.add {
                if to.precondition.iter().any(|pre| unifies(added, pre)) {
                    edges.push(CausalEdge {
                        from: from.name.clone(),
                        to: to.name.clone(),
                        label: added.clone(),
                    });
                }
            }
        }
    }
    CausalGraph { nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netadmin::{generate_domain, DomainConfig, Variant, POP_TO_ADMIN, PROTOCOL_SENSOR};
    use crate::num::Num;
    use crate::pddl::{name, object_type, ActionSchema, Param, PredicateSig, Requirements, TypeForest};

    fn two_schema_chain() -> Domain {
        let p = Atom::new(name("p"), vec![Term::Var(name("x"))]);
        let mut types = TypeForest::new();
        types.declare(name("thing"), object_type()).unwrap();
        Domain {
            name: name("chain"),
            requirements: Requirements::default(),
            types,
            predicates: vec![
                PredicateSig {
                    name: name("p"),
                    params: vec![Param { name: name("x"), ty: name("thing") }],
                },
                PredicateSig {
                    name: name("q"),
                    params: vec![Param { name: name("x"), ty: name("thing") }],
                },
            ],
            actions: vec![
                ActionSchema::new(
                    name("a"),
                    vec![Param { name: name("x"), ty: name("thing") }],
                    vec![],
                    vec![p.clone()],
                    vec![],
                    Num::ZERO,
                    Num::ZERO,
                    false,
                ),
                ActionSchema::new(
                    name("b"),
                    vec![Param { name: name("x"), ty: name("thing") }],
                    vec![p],
                    vec![Atom::new(name("q"), vec![Term::Var(name("x"))])],
                    vec![],
                    Num::ZERO,
                    Num::ZERO,
                    false,
                ),
            ],
            has_total_cost: false,
        }
    }

    #[test]
    fn chain_has_single_edge() {
        let g = causal_graph(&two_schema_chain());
        assert_eq!(g.edges.len(), 1);
        let e = &g.edges[0];
        assert_eq!((e.from.as_str(), e.to.as_str()), ("a", "b"));
        assert_eq!(e.label.predicate.as_str(), "p");
    }

    #[test]
    fn no_effects_means_no_out_edges() {
        let mut d = two_schema_chain();
        d.actions[0] = ActionSchema::new(
            name("a"),
            vec![Param { name: name("x"), ty: name("thing") }],
            vec![],
            vec![],
            vec![],
            Num::ZERO,
            Num::ZERO,
            false,
        );
        let g = causal_graph(&d);
        assert_eq!(g.out_degree(&name("a")), 0);
    }

    #[test]
    fn object_arguments_must_match() {
        let add = Atom::new(name("r"), vec![Term::Var(name("s")), Term::Obj(name("http"))]);
        let pre_same = Atom::new(name("r"), vec![Term::Var(name("z")), Term::Obj(name("http"))]);
        let pre_other = Atom::new(name("r"), vec![Term::Var(name("z")), Term::Obj(name("smtp"))]);
        assert!(unifies(&add, &pre_same));
        assert!(!unifies(&add, &pre_other));
    }

    #[test]
    fn repeated_variables_constrain() {
        // (p ?x ?x) does not unify with (p a b).
        let twice = Atom::new(name("p"), vec![Term::Var(name("x")), Term::Var(name("x"))]);
        let distinct = Atom::new(name("p"), vec![Term::Obj(name("a")), Term::Obj(name("b"))]);
        let same = Atom::new(name("p"), vec![Term::Obj(name("a")), Term::Obj(name("a"))]);
        assert!(!unifies(&twice, &distinct));
        assert!(unifies(&twice, &same));
    }

    #[test]
    fn default_domain_splits_and_merges() {
        let d = generate_domain(&DomainConfig::default(), Variant::Metric).unwrap();
        let g = causal_graph(&d);
        assert_eq!(g.out_degree(&name(PROTOCOL_SENSOR)), 3);
        assert_eq!(g.in_degree(&name(POP_TO_ADMIN)), 3);
        // The refinement loop: the branch sensor re-enables the model
        // comparison it consumed.
        assert!(g
            .successors(&name("sense-refine-http"))
            .any(|n| n.as_str() == "compare-model-http"));
    }
}
