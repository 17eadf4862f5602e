//! Parser for the planning-language subset.
//!
//! The accepted grammar is documented in `docs/pddl-subset.md`:
//! typed STRIPS actions with positive conjunctive preconditions,
//! add/delete effects, an optional `(increase (total-cost) n)` effect,
//! and durative actions normalized to at-start conditions / at-end
//! effects with a constant duration. Everything else is rejected with
//! `UnsupportedFeature` rather than silently mis-read.

use crate::num::Num;
use crate::pddl::ast::*;
use crate::pddl::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: syntax error at `{token}` (expected {expected})")]
    Syntax {
        line: u32,
        col: u32,
        token: String,
        expected: String,
    },
    #[error("line {line}, column {col}: unsupported construct `{what}`")]
    Unsupported { line: u32, col: u32, what: String },
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ParseError {
    pub fn line(&self) -> Option<u32> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Unsupported { line, .. } => Some(*line),
            ParseError::Lex(e) => Some(e.line),
            ParseError::Model(_) => None,
        }
    }
}

/// S-expression tree with source positions.
enum SExpr {
    List { items: Vec<SExpr>, line: u32, col: u32 },
    Leaf(Token),
}

impl SExpr {
    fn pos(&self) -> (u32, u32) {
        match self {
            SExpr::List { line, col, .. } => (*line, *col),
            SExpr::Leaf(t) => (t.line, t.col),
        }
    }
}

fn syntax(pos: (u32, u32), token: impl Into<String>, expected: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: pos.0,
        col: pos.1,
        token: token.into(),
        expected: expected.into(),
    }
}

fn unsupported(pos: (u32, u32), what: impl Into<String>) -> ParseError {
    ParseError::Unsupported {
        line: pos.0,
        col: pos.1,
        what: what.into(),
    }
}

fn build_tree(tokens: &[Token]) -> Result<SExpr, ParseError> {
    let mut idx = 0;
    let expr = build_expr(tokens, &mut idx)?;
    if idx < tokens.len() {
        let t = &tokens[idx];
        return Err(syntax((t.line, t.col), &t.text, "end of input"));
    }
    Ok(expr)
}

fn build_expr(tokens: &[Token], idx: &mut usize) -> Result<SExpr, ParseError> {
    let Some(first) = tokens.get(*idx) else {
        return Err(syntax((0, 0), "<eof>", "an expression"));
    };
    match first.kind {
        TokenKind::LParen => {
            let (line, col) = (first.line, first.col);
            *idx += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*idx) {
                    Some(t) if t.kind == TokenKind::RParen => {
                        *idx += 1;
                        return Ok(SExpr::List { items, line, col });
                    }
                    Some(_) => items.push(build_expr(tokens, idx)?),
                    None => {
                        // Unclosed list: report at its opening paren.
                        return Err(syntax((line, col), "(", "matching `)`"));
                    }
                }
            }
        }
        TokenKind::RParen => Err(syntax((first.line, first.col), ")", "an expression")),
        _ => {
            *idx += 1;
            Ok(SExpr::Leaf(tokens[*idx - 1].clone()))
        }
    }
}

fn as_list<'a>(expr: &'a SExpr, expected: &str) -> Result<&'a [SExpr], ParseError> {
    match expr {
        SExpr::List { items, .. } => Ok(items),
        SExpr::Leaf(t) => Err(syntax((t.line, t.col), &t.text, expected)),
    }
}

fn as_symbol<'a>(expr: &'a SExpr, expected: &str) -> Result<&'a Token, ParseError> {
    match expr {
        SExpr::Leaf(t) if t.kind == TokenKind::Symbol => Ok(t),
        other => Err(syntax(other.pos(), describe(other), expected)),
    }
}

fn describe(expr: &SExpr) -> String {
    match expr {
        SExpr::List { .. } => "(".to_string(),
        SExpr::Leaf(t) => t.text.clone(),
    }
}

fn parse_name(expr: &SExpr, expected: &str) -> Result<Name, ParseError> {
    let t = as_symbol(expr, expected)?;
    Name::new(&t.text).map_err(|_| syntax((t.line, t.col), &t.text, "an identifier"))
}

/// Checks the `(leading ...)` shape and returns the tail.
fn expect_head<'a>(
    items: &'a [SExpr],
    head: &str,
    ctx: &str,
    pos: (u32, u32),
) -> Result<&'a [SExpr], ParseError> {
    match items.first() {
        Some(first) => {
            let t = as_symbol(first, ctx)?;
            if t.text.eq_ignore_ascii_case(head) {
                Ok(&items[1..])
            } else {
                Err(syntax((t.line, t.col), &t.text, format!("`{head}`")))
            }
        }
        None => Err(syntax(pos, "()", format!("`({head} ...)`"))),
    }
}

fn keyword_of(expr: &SExpr) -> Option<&Token> {
    match expr {
        SExpr::Leaf(t) if t.kind == TokenKind::Keyword => Some(t),
        _ => None,
    }
}

/// Parses `name name - type name ...` lists; untyped names default to
/// `object`.
fn parse_typed_names(items: &[SExpr]) -> Result<Vec<(Name, Name)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<Name> = Vec::new();
    let mut idx = 0;
    while idx < items.len() {
        let t = as_symbol(&items[idx], "a name or `-`")?;
        if t.text == "-" {
            idx += 1;
            let ty = parse_name(
                items
                    .get(idx)
                    .ok_or_else(|| syntax((t.line, t.col), "-", "a type name"))?,
                "a type name",
            )?;
            for n in pending.drain(..) {
                out.push((n, ty.clone()));
            }
            idx += 1;
        } else {
            pending.push(parse_name(&items[idx], "a name")?);
            idx += 1;
        }
    }
    for n in pending {
        out.push((n, object_type()));
    }
    Ok(out)
}

fn parse_typed_params(items: &[SExpr]) -> Result<Vec<Param>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<Name> = Vec::new();
    let mut idx = 0;
    while idx < items.len() {
        match &items[idx] {
            SExpr::Leaf(t) if t.kind == TokenKind::Variable => {
                pending.push(
                    Name::new(&t.text)
                        .map_err(|_| syntax((t.line, t.col), &t.text, "a variable name"))?,
                );
                idx += 1;
            }
            SExpr::Leaf(t) if t.kind == TokenKind::Symbol && t.text == "-" => {
                idx += 1;
                let ty = parse_name(
                    items
                        .get(idx)
                        .ok_or_else(|| syntax((t.line, t.col), "-", "a type name"))?,
                    "a type name",
                )?;
                for n in pending.drain(..) {
                    out.push(Param { name: n, ty: ty.clone() });
                }
                idx += 1;
            }
            other => return Err(syntax(other.pos(), describe(other), "`?var` or `- type`")),
        }
    }
    for n in pending {
        out.push(Param { name: n, ty: object_type() });
    }
    Ok(out)
}

/// Parses a schema atom `(pred term*)`; terms may be variables or bare
/// object names (resolved against the problem at grounding time).
fn parse_atom(expr: &SExpr) -> Result<Atom, ParseError> {
    let items = as_list(expr, "an atom")?;
    let pred = parse_name(
        items.first().ok_or_else(|| syntax(expr.pos(), "()", "a predicate name"))?,
        "a predicate name",
    )?;
    let mut args = Vec::new();
    for item in &items[1..] {
        match item {
            SExpr::Leaf(t) if t.kind == TokenKind::Variable => {
                args.push(Term::Var(
                    Name::new(&t.text)
                        .map_err(|_| syntax((t.line, t.col), &t.text, "a variable name"))?,
                ));
            }
            SExpr::Leaf(t) if t.kind == TokenKind::Symbol => {
                args.push(Term::Obj(parse_name(item, "an object name")?));
            }
            other => return Err(syntax(other.pos(), describe(other), "a term")),
        }
    }
    Ok(Atom::new(pred, args))
}

fn parse_ground_atom(expr: &SExpr) -> Result<GroundAtom, ParseError> {
    let atom = parse_atom(expr)?;
    let mut args = Vec::with_capacity(atom.args.len());
    for term in atom.args {
        match term {
            Term::Obj(n) => args.push(n),
            Term::Var(v) => {
                return Err(syntax(expr.pos(), format!("?{v}"), "a ground argument"));
            }
        }
    }
    Ok(GroundAtom::new(atom.predicate, args))
}

const REJECTED_CONNECTIVES: &[&str] = &["or", "forall", "exists", "when", "imply"];

fn head_symbol(items: &[SExpr]) -> Option<&Token> {
    items.first().and_then(|e| match e {
        SExpr::Leaf(t) if t.kind == TokenKind::Symbol => Some(t),
        _ => None,
    })
}

/// Flattens `(and f*)` or a single formula into its conjuncts.
fn conjuncts(expr: &SExpr) -> Result<Vec<&SExpr>, ParseError> {
    let items = as_list(expr, "a formula")?;
    if let Some(head) = head_symbol(items) {
        if head.text.eq_ignore_ascii_case("and") {
            return Ok(items[1..].iter().collect());
        }
        if REJECTED_CONNECTIVES.iter().any(|c| head.text.eq_ignore_ascii_case(c)) {
            return Err(unsupported((head.line, head.col), &head.text));
        }
    }
    Ok(vec![expr])
}

struct EffectBody {
    add: Vec<Atom>,
    del: Vec<Atom>,
    cost: Option<Num>,
}

/// Parses an effect conjunction: positive atoms, `(not atom)` deletes,
/// and at most one `(increase (total-cost) n)`.
fn parse_effects(expr: &SExpr) -> Result<EffectBody, ParseError> {
    let mut body = EffectBody { add: vec![], del: vec![], cost: None };
    for part in conjuncts(expr)? {
        let items = as_list(part, "an effect")?;
        match head_symbol(items) {
            Some(head) if head.text.eq_ignore_ascii_case("not") => {
                let inner = items
                    .get(1)
                    .ok_or_else(|| syntax(part.pos(), "(not)", "an atom"))?;
                body.del.push(parse_atom(inner)?);
            }
            Some(head) if head.text.eq_ignore_ascii_case("increase") => {
                let fluent = as_list(
                    items.get(1).ok_or_else(|| syntax(part.pos(), "(increase)", "a fluent"))?,
                    "a fluent",
                )?;
                let fname = as_symbol(
                    fluent.first().ok_or_else(|| syntax(part.pos(), "()", "a fluent name"))?,
                    "a fluent name",
                )?;
                if !fname.text.eq_ignore_ascii_case("total-cost") {
                    return Err(unsupported((fname.line, fname.col), format!("fluent {}", fname.text)));
                }
                let amount = match items.get(2) {
                    Some(SExpr::Leaf(t)) if t.kind == TokenKind::Number => {
                        Num::parse_decimal(&t.text).map_err(|_| {
                            syntax((t.line, t.col), &t.text, "a decimal with at most 3 fractional digits")
                        })?
                    }
                    other => {
                        let pos = other.map(|e| e.pos()).unwrap_or_else(|| part.pos());
                        return Err(syntax(pos, "increase amount", "a numeric literal"));
                    }
                };
                if body.cost.replace(amount).is_some() {
                    return Err(syntax(part.pos(), "increase", "at most one cost effect"));
                }
            }
            _ => body.add.push(parse_atom(part)?),
        }
    }
    Ok(body)
}

fn parse_precondition(expr: &SExpr) -> Result<Vec<Atom>, ParseError> {
    let mut atoms = Vec::new();
    for part in conjuncts(expr)? {
        let items = as_list(part, "an atom")?;
        if let Some(head) = head_symbol(items) {
            if head.text.eq_ignore_ascii_case("not") {
                return Err(unsupported((head.line, head.col), "negative precondition"));
            }
        }
        atoms.push(parse_atom(part)?);
    }
    Ok(atoms)
}

/// Splits `:keyword value ...` pairs of an action body.
fn keyword_sections<'a>(items: &'a [SExpr], ctx: &str) -> Result<Vec<(&'a Token, &'a SExpr)>, ParseError> {
    let mut out = Vec::new();
    let mut idx = 0;
    while idx < items.len() {
        let kw = keyword_of(&items[idx])
            .ok_or_else(|| syntax(items[idx].pos(), describe(&items[idx]), format!("a `:keyword` in {ctx}")))?;
        let value = items
            .get(idx + 1)
            .ok_or_else(|| syntax((kw.line, kw.col), format!(":{}", kw.text), "a value"))?;
        out.push((kw, value));
        idx += 2;
    }
    Ok(out)
}

fn parse_plain_action(items: &[SExpr], pos: (u32, u32)) -> Result<ActionSchema, ParseError> {
    let name = parse_name(
        items.first().ok_or_else(|| syntax(pos, "(:action)", "an action name"))?,
        "an action name",
    )?;
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut effects = EffectBody { add: vec![], del: vec![], cost: None };
    for (kw, value) in keyword_sections(&items[1..], "action body")? {
        match kw.text.as_str() {
            "parameters" => params = parse_typed_params(as_list(value, "a parameter list")?)?,
            "precondition" => precondition = parse_precondition(value)?,
            "effect" => effects = parse_effects(value)?,
            other => return Err(unsupported((kw.line, kw.col), format!(":{other}"))),
        }
    }
    let sensing = name.as_str().starts_with("sense-");
    Ok(ActionSchema::new(
        name,
        params,
        precondition,
        effects.add,
        effects.del,
        effects.cost.unwrap_or(Num::ZERO),
        Num::ZERO,
        sensing,
    ))
}

/// Unwraps `(at start f)` / `(at end f)`, returning the inner formula.
fn timed<'a>(expr: &'a SExpr, when: &str) -> Result<&'a SExpr, ParseError> {
    let items = as_list(expr, "a timed formula")?;
    let head = head_symbol(items).ok_or_else(|| syntax(expr.pos(), describe(expr), "`at`"))?;
    if !head.text.eq_ignore_ascii_case("at") {
        return Err(unsupported((head.line, head.col), format!("timed qualifier {}", head.text)));
    }
    let marker = as_symbol(
        items.get(1).ok_or_else(|| syntax(expr.pos(), "(at)", "`start` or `end`"))?,
        "`start` or `end`",
    )?;
    if !marker.text.eq_ignore_ascii_case(when) {
        return Err(unsupported(
            (marker.line, marker.col),
            format!("`at {}` here (only `at {when}` is supported)", marker.text),
        ));
    }
    items.get(2).ok_or_else(|| syntax(expr.pos(), "(at ...)", "a formula"))
}

fn parse_durative_action(items: &[SExpr], pos: (u32, u32)) -> Result<ActionSchema, ParseError> {
    let name = parse_name(
        items.first().ok_or_else(|| syntax(pos, "(:durative-action)", "an action name"))?,
        "an action name",
    )?;
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut add = Vec::new();
    let mut del = Vec::new();
    let mut duration = Num::ZERO;
    for (kw, value) in keyword_sections(&items[1..], "durative action body")? {
        match kw.text.as_str() {
            "parameters" => params = parse_typed_params(as_list(value, "a parameter list")?)?,
            "duration" => {
                let items = as_list(value, "`(= ?duration n)`")?;
                let eq = as_symbol(
                    items.first().ok_or_else(|| syntax(value.pos(), "()", "`=`"))?,
                    "`=`",
                )?;
                if eq.text != "=" {
                    return Err(unsupported((eq.line, eq.col), format!("duration constraint {}", eq.text)));
                }
                match items.get(2) {
                    Some(SExpr::Leaf(t)) if t.kind == TokenKind::Number => {
                        duration = Num::parse_decimal(&t.text).map_err(|_| {
                            syntax((t.line, t.col), &t.text, "a decimal with at most 3 fractional digits")
                        })?;
                    }
                    other => {
                        let p = other.map(|e| e.pos()).unwrap_or_else(|| value.pos());
                        return Err(syntax(p, "duration", "a numeric literal"));
                    }
                }
            }
            "condition" => {
                for part in conjuncts(value)? {
                    precondition.extend(parse_precondition(timed(part, "start")?)?);
                }
            }
            "effect" => {
                for part in conjuncts(value)? {
                    let body = parse_effects(timed(part, "end")?)?;
                    if body.cost.is_some() {
                        return Err(unsupported(part.pos(), "cost effect in durative action"));
                    }
                    add.extend(body.add);
                    del.extend(body.del);
                }
            }
            other => return Err(unsupported((kw.line, kw.col), format!(":{other}"))),
        }
    }
    let sensing = name.as_str().starts_with("sense-");
    Ok(ActionSchema::new(
        name, params, precondition, add, del, Num::ZERO, duration, sensing,
    ))
}

const SUPPORTED_REQUIREMENTS: &[&str] = &["strips", "typing", "action-costs", "durative-actions"];

/// Parses a domain definition and validates its structural invariants.
pub fn parse_domain(text: &str) -> Result<Domain, ParseError> {
    let tokens = tokenize(text)?;
    let tree = build_tree(&tokens)?;
    let pos = tree.pos();
    let items = expect_head(as_list(&tree, "`(define ...)`")?, "define", "`define`", pos)?;

    let header = items.first().ok_or_else(|| syntax(pos, "(define)", "`(domain name)`"))?;
    let hpos = header.pos();
    let header_items = expect_head(as_list(header, "`(domain name)`")?, "domain", "`domain`", hpos)?;
    let name = parse_name(
        header_items.first().ok_or_else(|| syntax(hpos, "(domain)", "a domain name"))?,
        "a domain name",
    )?;

    let mut domain = Domain {
        name,
        requirements: Requirements::default(),
        types: TypeForest::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
        has_total_cost: false,
    };

    for section in &items[1..] {
        let spos = section.pos();
        let sitems = as_list(section, "a domain section")?;
        let kw = sitems
            .first()
            .and_then(keyword_of)
            .ok_or_else(|| syntax(spos, describe(section), "a `(:section ...)`"))?;
        let body = &sitems[1..];
        match kw.text.as_str() {
            "requirements" => {
                for flag in body {
                    let t = keyword_of(flag)
                        .ok_or_else(|| syntax(flag.pos(), describe(flag), "a requirement flag"))?;
                    match t.text.as_str() {
                        "strips" => domain.requirements.strips = true,
                        "typing" => domain.requirements.typing = true,
                        "action-costs" => domain.requirements.action_costs = true,
                        "durative-actions" => domain.requirements.durative_actions = true,
                        other => {
                            if SUPPORTED_REQUIREMENTS.contains(&other) {
                                unreachable!()
                            }
                            return Err(unsupported((t.line, t.col), format!(":{other}")));
                        }
                    }
                }
            }
            "types" => {
                for (ty, parent) in parse_typed_names(body)? {
                    domain.types.declare(ty, parent)?;
                }
            }
            "predicates" => {
                for pred in body {
                    let pitems = as_list(pred, "a predicate declaration")?;
                    let pname = parse_name(
                        pitems.first().ok_or_else(|| syntax(pred.pos(), "()", "a predicate name"))?,
                        "a predicate name",
                    )?;
                    let params = parse_typed_params(&pitems[1..])?;
                    domain.predicates.push(PredicateSig { name: pname, params });
                }
            }
            "functions" => {
                for func in body {
                    let fitems = as_list(func, "a function declaration")?;
                    let fname = parse_name(
                        fitems.first().ok_or_else(|| syntax(func.pos(), "()", "a function name"))?,
                        "a function name",
                    )?;
                    if fname.as_str() != "total-cost" || fitems.len() > 1 {
                        return Err(unsupported(func.pos(), format!("function {fname}")));
                    }
                    domain.has_total_cost = true;
                }
            }
            "action" => domain.actions.push(parse_plain_action(body, spos)?),
            "durative-action" => domain.actions.push(parse_durative_action(body, spos)?),
            other => return Err(unsupported((kw.line, kw.col), format!(":{other}"))),
        }
    }

    domain.validate()?;
    Ok(domain)
}

/// Parses a problem definition and validates it against `domain`.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, ParseError> {
    let tokens = tokenize(text)?;
    let tree = build_tree(&tokens)?;
    let pos = tree.pos();
    let items = expect_head(as_list(&tree, "`(define ...)`")?, "define", "`define`", pos)?;

    let header = items.first().ok_or_else(|| syntax(pos, "(define)", "`(problem name)`"))?;
    let hpos = header.pos();
    let header_items = expect_head(as_list(header, "`(problem name)`")?, "problem", "`problem`", hpos)?;
    let name = parse_name(
        header_items.first().ok_or_else(|| syntax(hpos, "(problem)", "a problem name"))?,
        "a problem name",
    )?;

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut init_total_cost = None;
    let mut goal = Vec::new();
    let mut metric = Metric::None;

    for section in &items[1..] {
        let spos = section.pos();
        let sitems = as_list(section, "a problem section")?;
        let kw = sitems
            .first()
            .and_then(keyword_of)
            .ok_or_else(|| syntax(spos, describe(section), "a `(:section ...)`"))?;
        let body = &sitems[1..];
        match kw.text.as_str() {
            "domain" => {
                domain_name = Some(parse_name(
                    body.first().ok_or_else(|| syntax(spos, "(:domain)", "a domain name"))?,
                    "a domain name",
                )?);
            }
            "objects" => objects = parse_typed_names(body)?,
            "init" => {
                for entry in body {
                    let eitems = as_list(entry, "an init entry")?;
                    if let Some(head) = head_symbol(eitems) {
                        if head.text == "=" {
                            let fluent = as_list(
                                eitems.get(1).ok_or_else(|| syntax(entry.pos(), "(=)", "a fluent"))?,
                                "a fluent",
                            )?;
                            let fname = as_symbol(
                                fluent.first().ok_or_else(|| syntax(entry.pos(), "()", "a fluent name"))?,
                                "a fluent name",
                            )?;
                            if fname.text != "total-cost" {
                                return Err(unsupported(
                                    (fname.line, fname.col),
                                    format!("fluent {}", fname.text),
                                ));
                            }
                            match eitems.get(2) {
                                Some(SExpr::Leaf(t)) if t.kind == TokenKind::Number => {
                                    init_total_cost = Some(Num::parse_decimal(&t.text).map_err(|_| {
                                        syntax((t.line, t.col), &t.text, "a decimal literal")
                                    })?);
                                }
                                other => {
                                    let p = other.map(|e| e.pos()).unwrap_or(spos);
                                    return Err(syntax(p, "fluent value", "a numeric literal"));
                                }
                            }
                            continue;
                        }
                    }
                    init.push(parse_ground_atom(entry)?);
                }
            }
            "goal" => {
                let formula = body
                    .first()
                    .ok_or_else(|| syntax(spos, "(:goal)", "a goal formula"))?;
                for part in conjuncts(formula)? {
                    goal.push(parse_ground_atom(part)?);
                }
            }
            "metric" => {
                let direction = as_symbol(
                    body.first().ok_or_else(|| syntax(spos, "(:metric)", "`minimize`"))?,
                    "`minimize`",
                )?;
                if !direction.text.eq_ignore_ascii_case("minimize") {
                    return Err(unsupported((direction.line, direction.col), direction.text.clone()));
                }
                let target = as_list(
                    body.get(1).ok_or_else(|| syntax(spos, "(:metric minimize)", "a fluent"))?,
                    "a fluent",
                )?;
                let tname = as_symbol(
                    target.first().ok_or_else(|| syntax(spos, "()", "a fluent name"))?,
                    "a fluent name",
                )?;
                metric = match tname.text.as_str() {
                    "total-cost" => Metric::MinimizeTotalCost,
                    "total-time" => Metric::MinimizeMakespan,
                    other => {
                        return Err(unsupported((tname.line, tname.col), format!("metric {other}")));
                    }
                };
            }
            other => return Err(unsupported((kw.line, kw.col), format!(":{other}"))),
        }
    }

    let domain_name =
        domain_name.ok_or_else(|| syntax(pos, "(define ...)", "a `(:domain name)` section"))?;
    if domain_name != domain.name {
        return Err(ParseError::Model(ModelError::UnknownObject(domain_name)));
    }

    let problem = Problem::new(name, domain_name, objects, init, init_total_cost, goal, metric);
    problem.validate(domain)?;
    Ok(problem)
}
