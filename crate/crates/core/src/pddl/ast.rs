//! Planning-language data model: identifiers, atoms, action schemas,
//! domains and problems.
//!
//! Values are canonicalized on construction: identifiers are
//! lowercased, and every set-like collection (preconditions, effects,
//! init, goal) is kept sorted and deduplicated. Structural equality is
//! therefore plain `==`, and emission of equal values is byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::Num;

/// Canonical lowercase identifier: `[a-z][a-z0-9-]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(String);

impl Name {
    /// Canonicalizes (lowercases) and validates an identifier.
    pub fn new(raw: &str) -> Result<Name, InvalidName> {
        let lowered = raw.to_ascii_lowercase();
        let mut bytes = lowered.bytes();
        let ok = match bytes.next() {
            Some(b) if b.is_ascii_lowercase() => {
                bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
            }
            _ => false,
        };
        if ok {
            Ok(Name(lowered))
        } else {
            Err(InvalidName(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({})", self.0)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("invalid identifier `{0}`")]
pub struct InvalidName(pub String);

/// Shorthand for identifiers that are known to be valid, e.g. literals
/// inside the domain generator. Panics on invalid input.
pub fn name(raw: &str) -> Name {
    Name::new(raw).expect("static identifier")
}

/// The built-in root of every type forest.
pub fn object_type() -> Name {
    name("object")
}

/// An argument position in a schema atom: a parameter variable or a
/// concrete object reference resolved at grounding time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(Name),
    Obj(Name),
}

impl Term {
    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(n) => Some(n),
            Term::Obj(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) => write!(f, "?{n}"),
            Term::Obj(n) => write!(f, "{n}"),
        }
    }
}

/// A predicate applied to terms; may mention parameter variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: Name, args: Vec<Term>) -> Atom {
        Atom { predicate, args }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A fully instantiated atom: all arguments are objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: Name,
    pub args: Vec<Name>,
}

impl GroundAtom {
    pub fn new(predicate: Name, args: Vec<Name>) -> GroundAtom {
        GroundAtom { predicate, args }
    }

    pub fn to_atom(&self) -> Atom {
        Atom::new(
            self.predicate.clone(),
            self.args.iter().cloned().map(Term::Obj).collect(),
        )
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A typed parameter of a predicate signature or an action schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: Name,
    pub ty: Name,
}

/// Maximum predicate arity accepted by the subset.
pub const MAX_ARITY: usize = 4;

/// A declared predicate with its typed signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSig {
    pub name: Name,
    pub params: Vec<Param>,
}

impl PredicateSig {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// One decision: positive conjunctive precondition, add/delete effects,
/// a compute cost, an execution duration, and a sensing marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: Name,
    pub params: Vec<Param>,
    pub precondition: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
    pub cost: Num,
    pub duration: Num,
    pub sensing: bool,
}

impl ActionSchema {
    /// Builds a schema, canonicalizing its atom sets.
    pub fn new(
        name: Name,
        params: Vec<Param>,
        mut precondition: Vec<Atom>,
        mut add: Vec<Atom>,
        mut del: Vec<Atom>,
        cost: Num,
        duration: Num,
        sensing: bool,
    ) -> ActionSchema {
        for set in [&mut precondition, &mut add, &mut del] {
            set.sort();
            set.dedup();
        }
        ActionSchema {
            name,
            params,
            precondition,
            add,
            del,
            cost,
            duration,
            sensing,
        }
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.precondition
            .iter()
            .chain(self.add.iter())
            .chain(self.del.iter())
    }
}

/// Requirement flags the subset understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Requirements {
    pub strips: bool,
    pub typing: bool,
    pub action_costs: bool,
    pub durative_actions: bool,
}

/// Type declarations as a forest rooted at the built-in `object`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeForest {
    /// Declared types in declaration order with their parent type.
    entries: Vec<(Name, Name)>,
}

impl TypeForest {
    pub fn new() -> TypeForest {
        TypeForest::default()
    }

    /// Declares `ty` with parent `parent` (often `object`).
    pub fn declare(&mut self, ty: Name, parent: Name) -> Result<(), ModelError> {
        if ty == object_type() {
            return Err(ModelError::RedeclaredObjectType);
        }
        if self.entries.iter().any(|(t, _)| *t == ty) {
            return Err(ModelError::DuplicateType(ty));
        }
        self.entries.push((ty, parent));
        Ok(())
    }

    pub fn is_declared(&self, ty: &Name) -> bool {
        *ty == object_type() || self.entries.iter().any(|(t, _)| t == ty)
    }

    pub fn parent(&self, ty: &Name) -> Option<&Name> {
        self.entries.iter().find(|(t, _)| t == ty).map(|(_, p)| p)
    }

    pub fn entries(&self) -> &[(Name, Name)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when `sub` equals `sup` or is a descendant of it.
    pub fn is_subtype(&self, sub: &Name, sup: &Name) -> bool {
        if sub == sup || *sup == object_type() {
            return *sup == object_type() || sub == sup;
        }
        let mut cur = sub.clone();
        // Bounded walk; validation guarantees acyclicity.
        for _ in 0..=self.entries.len() {
            match self.parent(&cur) {
                Some(p) if p == sup => return true,
                Some(p) => cur = p.clone(),
                None => return false,
            }
        }
        false
    }

    /// Verifies every parent is declared and no cycles exist.
    fn validate(&self) -> Result<(), ModelError> {
        for (ty, parent) in &self.entries {
            if !self.is_declared(parent) {
                return Err(ModelError::UndeclaredType {
                    ty: parent.clone(),
                    context: format!("parent of type {ty}"),
                });
            }
        }
        for (ty, _) in &self.entries {
            let mut cur = ty.clone();
            let mut hops = 0;
            while let Some(p) = self.parent(&cur) {
                hops += 1;
                if hops > self.entries.len() {
                    return Err(ModelError::TypeCycle(ty.clone()));
                }
                cur = p.clone();
            }
        }
        Ok(())
    }
}

/// A parsed or generated planning domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: Name,
    pub requirements: Requirements,
    pub types: TypeForest,
    pub predicates: Vec<PredicateSig>,
    pub actions: Vec<ActionSchema>,
    /// Whether the domain declares the `total-cost` fluent.
    pub has_total_cost: bool,
}

impl Domain {
    pub fn predicate(&self, name: &Name) -> Option<&PredicateSig> {
        self.predicates.iter().find(|p| p.name == *name)
    }

    pub fn action(&self, name: &Name) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == *name)
    }

    /// Checks the structural invariants: unique names, declared types,
    /// arity agreement, variable scoping, and disjoint effects.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.types.validate()?;
        let mut preds: BTreeMap<&Name, &PredicateSig> = BTreeMap::new();
        for p in &self.predicates {
            if p.arity() > MAX_ARITY {
                return Err(ModelError::ArityTooLarge(p.name.clone()));
            }
            for param in &p.params {
                if !self.types.is_declared(&param.ty) {
                    return Err(ModelError::UndeclaredType {
                        ty: param.ty.clone(),
                        context: format!("predicate {}", p.name),
                    });
                }
            }
            if preds.insert(&p.name, p).is_some() {
                return Err(ModelError::DuplicatePredicate(p.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &self.actions {
            if !seen.insert(&a.name) {
                return Err(ModelError::DuplicateAction(a.name.clone()));
            }
            let mut param_names = BTreeSet::new();
            for param in &a.params {
                if !self.types.is_declared(&param.ty) {
                    return Err(ModelError::UndeclaredType {
                        ty: param.ty.clone(),
                        context: format!("action {}", a.name),
                    });
                }
                if !param_names.insert(&param.name) {
                    return Err(ModelError::DuplicateParam {
                        action: a.name.clone(),
                        param: param.name.clone(),
                    });
                }
            }
            for atom in a.atoms() {
                let sig = preds.get(&atom.predicate).ok_or_else(|| {
                    ModelError::UnknownPredicate(atom.predicate.clone())
                })?;
                if sig.arity() != atom.args.len() {
                    return Err(ModelError::ArityMismatch {
                        predicate: atom.predicate.clone(),
                        expected: sig.arity(),
                        got: atom.args.len(),
                    });
                }
                for term in &atom.args {
                    if let Term::Var(v) = term {
                        if !param_names.contains(v) {
                            return Err(ModelError::UnboundVariable {
                                action: a.name.clone(),
                                var: v.clone(),
                            });
                        }
                    }
                }
            }
            for added in &a.add {
                if a.del.contains(added) {
                    return Err(ModelError::OverlappingEffects {
                        action: a.name.clone(),
                        atom: added.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Optimization metric of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    MinimizeTotalCost,
    MinimizeMakespan,
    None,
}

/// A parsed or generated problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: Name,
    pub domain: Name,
    /// Objects in declaration order with their types.
    pub objects: Vec<(Name, Name)>,
    pub init: Vec<GroundAtom>,
    /// Present when the init block sets `(= (total-cost) 0)`.
    pub init_total_cost: Option<Num>,
    pub goal: Vec<GroundAtom>,
    pub metric: Metric,
}

impl Problem {
    /// Canonicalizes init and goal (sorted, deduplicated).
    pub fn new(
        name: Name,
        domain: Name,
        objects: Vec<(Name, Name)>,
        mut init: Vec<GroundAtom>,
        init_total_cost: Option<Num>,
        mut goal: Vec<GroundAtom>,
        metric: Metric,
    ) -> Problem {
        init.sort();
        init.dedup();
        goal.sort();
        goal.dedup();
        Problem {
            name,
            domain,
            objects,
            init,
            init_total_cost,
            goal,
            metric,
        }
    }

    pub fn object_type_of(&self, obj: &Name) -> Option<&Name> {
        self.objects.iter().find(|(o, _)| o == obj).map(|(_, t)| t)
    }

    /// Validates objects and atoms against a domain.
    pub fn validate(&self, domain: &Domain) -> Result<(), ModelError> {
        let mut objs: BTreeMap<&Name, &Name> = BTreeMap::new();
        for (obj, ty) in &self.objects {
            if !domain.types.is_declared(ty) {
                return Err(ModelError::UndeclaredType {
                    ty: ty.clone(),
                    context: format!("object {obj}"),
                });
            }
            if objs.insert(obj, ty).is_some() {
                return Err(ModelError::DuplicateObject(obj.clone()));
            }
        }
        for atom in self.init.iter().chain(self.goal.iter()) {
            let sig = domain
                .predicate(&atom.predicate)
                .ok_or_else(|| ModelError::UnknownPredicate(atom.predicate.clone()))?;
            if sig.arity() != atom.args.len() {
                return Err(ModelError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected: sig.arity(),
                    got: atom.args.len(),
                });
            }
            for (arg, param) in atom.args.iter().zip(&sig.params) {
                let ty = objs
                    .get(arg)
                    .ok_or_else(|| ModelError::UnknownObject(arg.clone()))?;
                if !domain.types.is_subtype(ty, &param.ty) {
                    return Err(ModelError::IllTypedArgument {
                        atom: atom.to_string(),
                        arg: arg.clone(),
                        expected: param.ty.clone(),
                        got: (*ty).clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Structural validation failures of domains and problems.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("the built-in type `object` cannot be redeclared")]
    RedeclaredObjectType,
    #[error("type `{0}` declared twice")]
    DuplicateType(Name),
    #[error("type cycle through `{0}`")]
    TypeCycle(Name),
    #[error("undeclared type `{ty}` ({context})")]
    UndeclaredType { ty: Name, context: String },
    #[error("predicate `{0}` declared twice")]
    DuplicatePredicate(Name),
    #[error("predicate `{0}` exceeds the maximum arity of 4")]
    ArityTooLarge(Name),
    #[error("action `{0}` declared twice")]
    DuplicateAction(Name),
    #[error("action `{action}` repeats parameter `?{param}`")]
    DuplicateParam { action: Name, param: Name },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(Name),
    #[error("predicate `{predicate}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        predicate: Name,
        expected: usize,
        got: usize,
    },
    #[error("action `{action}` uses variable `?{var}` outside its parameter list")]
    UnboundVariable { action: Name, var: Name },
    #[error("action `{action}` both adds and deletes {atom}")]
    OverlappingEffects { action: Name, atom: String },
    #[error("unknown object `{0}`")]
    UnknownObject(Name),
    #[error("object `{0}` declared twice")]
    DuplicateObject(Name),
    #[error("in {atom}: argument `{arg}` has type `{got}`, expected `{expected}`")]
    IllTypedArgument {
        atom: String,
        arg: Name,
        expected: Name,
        got: Name,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_canonicalize_case() {
        assert_eq!(Name::new("HostSet").unwrap().as_str(), "hostset");
        assert_eq!(Name::new("sense-refine-HTTP").unwrap().as_str(), "sense-refine-http");
        assert!(Name::new("7up").is_err());
        assert!(Name::new("").is_err());
        assert!(Name::new("has_underscore").is_err());
    }

    #[test]
    fn subtype_walks_the_forest() {
        let mut types = TypeForest::new();
        types.declare(name("hostset"), object_type()).unwrap();
        types.declare(name("smallset"), name("hostset")).unwrap();
        assert!(types.is_subtype(&name("smallset"), &name("hostset")));
        assert!(types.is_subtype(&name("smallset"), &object_type()));
        assert!(!types.is_subtype(&name("hostset"), &name("smallset")));
    }

    #[test]
    fn schema_atom_sets_are_canonical() {
        let p = |n: &str| Atom::new(name(n), vec![]);
        let a = ActionSchema::new(
            name("a"),
            vec![],
            vec![p("zeta"), p("alpha"), p("alpha")],
            vec![],
            vec![],
            Num::ZERO,
            Num::ZERO,
            false,
        );
        assert_eq!(a.precondition.len(), 2);
        assert_eq!(a.precondition[0].predicate, name("alpha"));
    }

    #[test]
    fn overlapping_effects_rejected() {
        let atom = Atom::new(name("p"), vec![]);
        let domain = Domain {
            name: name("d"),
            requirements: Requirements::default(),
            types: TypeForest::new(),
            predicates: vec![PredicateSig { name: name("p"), params: vec![] }],
            actions: vec![ActionSchema::new(
                name("a"),
                vec![],
                vec![],
                vec![atom.clone()],
                vec![atom],
                Num::ZERO,
                Num::ZERO,
                false,
            )],
            has_total_cost: false,
        };
        assert!(matches!(
            domain.validate(),
            Err(ModelError::OverlappingEffects { .. })
        ));
    }
}
