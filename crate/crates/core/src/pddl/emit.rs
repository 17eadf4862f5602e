//! Deterministic text emission. Declaration order is preserved for
//! types, predicates, actions and objects; set-like collections are
//! already kept sorted by the data model, so equal values emit
//! byte-identical text.

use std::fmt::Write;

use crate::pddl::ast::*;

fn write_atom(out: &mut String, atom: &Atom) {
    out.push('(');
    out.push_str(atom.predicate.as_str());
    for term in &atom.args {
        out.push(' ');
        match term {
            Term::Var(v) => {
                out.push('?');
                out.push_str(v.as_str());
            }
            Term::Obj(o) => out.push_str(o.as_str()),
        }
    }
    out.push(')');
}

fn write_params(out: &mut String, params: &[Param]) {
    out.push('(');
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "?{} - {}", p.name, p.ty);
    }
    out.push(')');
}

fn write_conjunction(out: &mut String, atoms: &[Atom], negated: &[Atom], cost: Option<&str>) {
    out.push_str("(and");
    for a in atoms {
        out.push(' ');
        write_atom(out, a);
    }
    for a in negated {
        out.push_str(" (not ");
        write_atom(out, a);
        out.push(')');
    }
    if let Some(c) = cost {
        out.push(' ');
        out.push_str(c);
    }
    out.push(')');
}

fn emit_plain_action(out: &mut String, action: &ActionSchema, with_cost: bool) {
    let _ = write!(out, "  (:action {}\n    :parameters ", action.name);
    write_params(out, &action.params);
    out.push_str("\n    :precondition ");
    write_conjunction(out, &action.precondition, &[], None);
    out.push_str("\n    :effect ");
    let cost_text = with_cost.then(|| format!("(increase (total-cost) {})", action.cost));
    write_conjunction(out, &action.add, &action.del, cost_text.as_deref());
    out.push_str(")\n");
}

fn emit_durative_action(out: &mut String, action: &ActionSchema) {
    let _ = write!(out, "  (:durative-action {}\n    :parameters ", action.name);
    write_params(out, &action.params);
    let _ = write!(out, "\n    :duration (= ?duration {})", action.duration);
    out.push_str("\n    :condition (and");
    for a in &action.precondition {
        out.push_str(" (at start ");
        write_atom(out, a);
        out.push(')');
    }
    out.push(')');
    out.push_str("\n    :effect (and");
    for a in &action.add {
        out.push_str(" (at end ");
        write_atom(out, a);
        out.push(')');
    }
    for a in &action.del {
        out.push_str(" (at end (not ");
        write_atom(out, a);
        out.push_str("))");
    }
    out.push_str("))\n");
}

/// Renders a domain as parseable text.
pub fn emit_domain(domain: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);

    let mut reqs = Vec::new();
    if domain.requirements.strips {
        reqs.push(":strips");
    }
    if domain.requirements.typing {
        reqs.push(":typing");
    }
    if domain.requirements.action_costs {
        reqs.push(":action-costs");
    }
    if domain.requirements.durative_actions {
        reqs.push(":durative-actions");
    }
    if !reqs.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", reqs.join(" "));
    }

    if !domain.types.is_empty() {
        out.push_str("  (:types\n");
        for (ty, parent) in domain.types.entries() {
            let _ = writeln!(out, "    {ty} - {parent}");
        }
        out.push_str("  )\n");
    }

    if !domain.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for pred in &domain.predicates {
            out.push_str("    (");
            out.push_str(pred.name.as_str());
            for p in &pred.params {
                let _ = write!(out, " ?{} - {}", p.name, p.ty);
            }
            out.push_str(")\n");
        }
        out.push_str("  )\n");
    }

    if domain.has_total_cost {
        out.push_str("  (:functions (total-cost))\n");
    }

    for action in &domain.actions {
        if domain.requirements.durative_actions {
            emit_durative_action(&mut out, action);
        } else {
            emit_plain_action(&mut out, action, domain.has_total_cost);
        }
    }

    out.push_str(")\n");
    out
}

/// Renders a problem as parseable text.
pub fn emit_problem(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain);

    out.push_str("  (:objects\n");
    for (obj, ty) in &problem.objects {
        let _ = writeln!(out, "    {obj} - {ty}");
    }
    out.push_str("  )\n");

    out.push_str("  (:init\n");
    for atom in &problem.init {
        out.push_str("    ");
        let ground = atom.to_atom();
        write_atom(&mut out, &ground);
        out.push('\n');
    }
    if let Some(cost) = problem.init_total_cost {
        let _ = writeln!(out, "    (= (total-cost) {cost})");
    }
    out.push_str("  )\n");

    out.push_str("  (:goal (and");
    for atom in &problem.goal {
        out.push(' ');
        write_atom(&mut out, &atom.to_atom());
    }
    out.push_str("))\n");

    match problem.metric {
        Metric::MinimizeTotalCost => out.push_str("  (:metric minimize (total-cost))\n"),
        Metric::MinimizeMakespan => out.push_str("  (:metric minimize (total-time))\n"),
        Metric::None => {}
    }

    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Num;
    use crate::pddl::parser::{parse_domain, parse_problem};

    fn sample_domain() -> Domain {
        let mut types = TypeForest::new();
        types.declare(name("hostset"), object_type()).unwrap();
        Domain {
            name: name("sample"),
            requirements: Requirements {
                strips: true,
                typing: true,
                action_costs: true,
                durative_actions: false,
            },
            types,
            predicates: vec![
                PredicateSig {
                    name: name("raw"),
                    params: vec![Param { name: name("s"), ty: name("hostset") }],
                },
                PredicateSig {
                    name: name("cooked"),
                    params: vec![Param { name: name("s"), ty: name("hostset") }],
                },
            ],
            actions: vec![ActionSchema::new(
                name("cook"),
                vec![Param { name: name("s"), ty: name("hostset") }],
                vec![Atom::new(name("raw"), vec![Term::Var(name("s"))])],
                vec![Atom::new(name("cooked"), vec![Term::Var(name("s"))])],
                vec![Atom::new(name("raw"), vec![Term::Var(name("s"))])],
                Num::from_int(3),
                Num::ZERO,
                false,
            )],
            has_total_cost: true,
        }
    }

    #[test]
    fn domain_round_trips() {
        let d = sample_domain();
        let text = emit_domain(&d);
        let parsed = parse_domain(&text).unwrap();
        assert_eq!(parsed, d);
        assert_eq!(emit_domain(&parsed), text);
    }

    #[test]
    fn problem_round_trips() {
        let d = sample_domain();
        let p = Problem::new(
            name("sample-p"),
            name("sample"),
            vec![(name("h1"), name("hostset"))],
            vec![GroundAtom::new(name("raw"), vec![name("h1")])],
            Some(Num::ZERO),
            vec![GroundAtom::new(name("cooked"), vec![name("h1")])],
            Metric::MinimizeTotalCost,
        );
        let text = emit_problem(&p);
        let parsed = parse_problem(&text, &d).unwrap();
        assert_eq!(parsed, p);
        assert_eq!(emit_problem(&parsed), text);
    }

    #[test]
    fn equal_values_emit_identical_bytes() {
        // Same atoms supplied in a different order: the constructors
        // canonicalize, so the values and their text agree.
        let mut d1 = sample_domain();
        let d2 = sample_domain();
        d1.actions[0] = ActionSchema::new(
            d2.actions[0].name.clone(),
            d2.actions[0].params.clone(),
            d2.actions[0].precondition.iter().rev().cloned().collect(),
            d2.actions[0].add.iter().rev().cloned().collect(),
            d2.actions[0].del.iter().rev().cloned().collect(),
            d2.actions[0].cost,
            d2.actions[0].duration,
            d2.actions[0].sensing,
        );
        assert_eq!(d1, d2);
        assert_eq!(emit_domain(&d1), emit_domain(&d2));
    }
}
