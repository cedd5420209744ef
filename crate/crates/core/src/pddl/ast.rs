//! Domain and problem syntax trees for the supported STRIPS fragment, with
//! parsers and a canonical writer.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::sexpr::{read_all, Pos, Sexpr};
use super::{ParseError, ParseErrorKind};

pub const SUPPORTED_REQUIREMENTS: [&str; 3] = [":strips", ":typing", ":action-costs"];

/// A name with its declared type. Untyped declarations get `object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

/// An atom whose arguments are variables (`?x`) or object names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().map(String::as_str).filter(|a| a.starts_with('?'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<Atom>,
    pub add_effects: Vec<Atom>,
    pub delete_effects: Vec<Atom>,
    /// Constant `(increase (total-cost) k)`, if present.
    pub cost: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    /// Whether `(:functions (total-cost) ...)` was declared.
    pub total_cost: bool,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub requirements: Vec<String>,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
    /// `(:metric minimize (total-cost))`.
    pub minimize_total_cost: bool,
}

fn err<T>(pos: Pos, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError::at(pos, kind))
}

fn expected<T>(e: &Sexpr, what: &str) -> Result<T, ParseError> {
    err(e.pos(), ParseErrorKind::Expected(what.to_string()))
}

fn as_list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], ParseError> {
    e.list().map_or_else(|| expected(e, what), Ok)
}

fn as_symbol<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    e.symbol().map_or_else(|| expected(e, what), Ok)
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.starts_with(['?', ':', '-']) && s.chars().all(|c| {
        c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_'
    })
}

fn name<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    let s = as_symbol(e, what)?;
    if !is_name(s) {
        return expected(e, what);
    }
    Ok(s)
}

/// Splits `(define (KIND name) sections...)`.
fn define<'a>(kind: &str, top: &'a [Sexpr]) -> Result<(&'a str, &'a [Sexpr]), ParseError> {
    let root = match top {
        [one] => one,
        [] => return err(Pos { line: 1, col: 1 }, ParseErrorKind::UnexpectedEof),
        [_, second, ..] => return expected(second, "end of input"),
    };
    let items = as_list(root, "(define ...)")?;
    match items.first().and_then(Sexpr::symbol) {
        Some("define") => {}
        _ => return expected(root, "(define ...)"),
    }
    let header = items.get(1).map_or_else(|| expected(root, &format!("({kind} NAME)")), Ok)?;
    let h = as_list(header, &format!("({kind} NAME)"))?;
    if h.len() != 2 || h[0].symbol() != Some(kind) {
        return expected(header, &format!("({kind} NAME)"));
    }
    Ok((name(&h[1], "name")?, &items[2..]))
}

fn parse_requirements(items: &[Sexpr]) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    for r in items {
        let s = as_symbol(r, "requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&s) {
            return err(r.pos(), ParseErrorKind::UnsupportedRequirement(s.to_string()));
        }
        out.push(s.to_string());
    }
    Ok(out)
}

/// `a b - t c` style lists; trailing untyped names are `object`.
fn parse_typed_list(items: &[Sexpr], variables: bool) -> Result<Vec<TypedName>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        let s = as_symbol(e, "name")?;
        if s == "-" {
            let ty_expr = items.get(i + 1).map_or_else(|| expected(e, "type after `-`"), Ok)?;
            if ty_expr.head() == Some("either") {
                return err(ty_expr.pos(), ParseErrorKind::Unsupported("either types".into()));
            }
            let ty = name(ty_expr, "type name")?;
            if pending.is_empty() {
                return expected(e, "name before `-`");
            }
            out.extend(pending.drain(..).map(|n| TypedName {
                name: n,
                ty: ty.to_string(),
            }));
            i += 2;
            continue;
        }
        let ok = if variables {
            s.len() > 1 && s.starts_with('?') && is_name(&s[1..])
        } else {
            is_name(s)
        };
        if !ok {
            return expected(e, if variables { "variable" } else { "name" });
        }
        pending.push(s.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|n| TypedName {
        name: n,
        ty: "object".to_string(),
    }));
    Ok(out)
}

fn parse_atom(e: &Sexpr, allow_variables: bool) -> Result<Atom, ParseError> {
    let items = as_list(e, "atom")?;
    let head = items.first().map_or_else(|| expected(e, "atom"), Ok)?;
    let predicate = as_symbol(head, "predicate name")?;
    match predicate {
        "not" => return err(e.pos(), ParseErrorKind::Unsupported("negative literal".into())),
        "or" | "imply" | "exists" | "forall" | "when" => {
            return err(e.pos(), ParseErrorKind::Unsupported(format!("`{predicate}`")))
        }
        "=" => return err(e.pos(), ParseErrorKind::Unsupported("equality".into())),
        _ => {}
    }
    if !is_name(predicate) {
        return expected(head, "predicate name");
    }
    let mut args = Vec::new();
    for a in &items[1..] {
        let s = as_symbol(a, "argument")?;
        let ok = if let Some(v) = s.strip_prefix('?') {
            allow_variables && is_name(v)
        } else {
            is_name(s)
        };
        if !ok {
            return expected(a, "argument");
        }
        args.push(s.to_string());
    }
    Ok(Atom {
        predicate: predicate.to_string(),
        args,
    })
}

/// Positive conjunction: `(and a b)`, a single atom, or `()`.
fn parse_conjunction(e: &Sexpr, allow_variables: bool) -> Result<Vec<Atom>, ParseError> {
    let items = as_list(e, "condition")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if e.head() == Some("and") {
        items[1..].iter().map(|a| parse_atom(a, allow_variables)).collect()
    } else {
        Ok(vec![parse_atom(e, allow_variables)?])
    }
}

fn is_total_cost(e: &Sexpr) -> bool {
    matches!(e.list(), Some([h]) if h.symbol() == Some("total-cost"))
}

fn parse_effect(e: &Sexpr, schema: &mut ActionSchema) -> Result<(), ParseError> {
    let items = as_list(e, "effect")?;
    if items.is_empty() {
        return Ok(());
    }
    match e.head() {
        Some("and") => {
            for sub in &items[1..] {
                parse_effect(sub, schema)?;
            }
        }
        Some("not") => {
            if items.len() != 2 {
                return expected(e, "(not ATOM)");
            }
            schema.delete_effects.push(parse_atom(&items[1], true)?);
        }
        Some("increase") => {
            if items.len() != 3 || !is_total_cost(&items[1]) {
                return err(e.pos(), ParseErrorKind::Unsupported("numeric effect other than total-cost".into()));
            }
            let k = items[2]
                .symbol()
                .and_then(|s| s.parse::<u64>().ok())
                .map_or_else(
                    || err(items[2].pos(), ParseErrorKind::Unsupported("non-constant action cost".into())),
                    Ok,
                )?;
            if schema.cost.replace(k).is_some() {
                return err(e.pos(), ParseErrorKind::Unsupported("multiple cost effects".into()));
            }
        }
        Some("decrease" | "assign" | "scale-up" | "scale-down" | "when" | "forall") => {
            return err(e.pos(), ParseErrorKind::Unsupported(format!("`{}` effect", e.head().unwrap())));
        }
        _ => schema.add_effects.push(parse_atom(e, true)?),
    }
    Ok(())
}

fn parse_action(items: &[Sexpr], at: &Sexpr) -> Result<ActionSchema, ParseError> {
    let action_name = items.get(1).map_or_else(|| expected(at, "action name"), Ok)?;
    let mut schema = ActionSchema {
        name: name(action_name, "action name")?.to_string(),
        parameters: Vec::new(),
        precondition: Vec::new(),
        add_effects: Vec::new(),
        delete_effects: Vec::new(),
        cost: None,
    };
    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let k = as_symbol(key, "action keyword")?;
        let value = rest.next().map_or_else(|| expected(key, "value"), Ok)?;
        match k {
            ":parameters" => schema.parameters = parse_typed_list(as_list(value, "parameter list")?, true)?,
            ":precondition" => schema.precondition = parse_conjunction(value, true)?,
            ":effect" => parse_effect(value, &mut schema)?,
            _ => return err(key.pos(), ParseErrorKind::Unsupported(format!("action keyword `{k}`"))),
        }
    }
    let params: BTreeSet<&str> = schema.parameters.iter().map(|p| p.name.as_str()).collect();
    if params.len() != schema.parameters.len() {
        return err(at.pos(), ParseErrorKind::Expected(format!("distinct parameters in `{}`", schema.name)));
    }
    let atoms = schema
        .precondition
        .iter()
        .chain(&schema.add_effects)
        .chain(&schema.delete_effects);
    for a in atoms {
        if let Some(v) = a.variables().find(|v| !params.contains(v)) {
            return err(
                at.pos(),
                ParseErrorKind::UnknownVariable {
                    variable: v.to_string(),
                    action: schema.name.clone(),
                },
            );
        }
    }
    Ok(schema)
}

/// Parses a domain file.
pub fn parse_domain(text: &str) -> Result<DomainAst, ParseError> {
    let top = read_all(text)?;
    let (domain_name, sections) = define("domain", &top)?;
    let mut d = DomainAst {
        name: domain_name.to_string(),
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        total_cost: false,
        actions: Vec::new(),
    };
    for s in sections {
        let items = as_list(s, "domain section")?;
        match s.head() {
            Some(":requirements") => d.requirements = parse_requirements(&items[1..])?,
            Some(":types") => d.types = parse_typed_list(&items[1..], false)?,
            Some(":predicates") => {
                for p in &items[1..] {
                    let pi = as_list(p, "predicate declaration")?;
                    let head = pi.first().map_or_else(|| expected(p, "predicate name"), Ok)?;
                    d.predicates.push(PredicateDecl {
                        name: name(head, "predicate name")?.to_string(),
                        params: parse_typed_list(&pi[1..], true)?,
                    });
                }
            }
            Some(":functions") => {
                let mut i = 1;
                while i < items.len() {
                    if !is_total_cost(&items[i]) {
                        return err(items[i].pos(), ParseErrorKind::Unsupported("numeric fluents".into()));
                    }
                    d.total_cost = true;
                    i += 1;
                    if items.get(i).and_then(Sexpr::symbol) == Some("-") {
                        i += 2;
                    }
                }
            }
            Some(":action") => d.actions.push(parse_action(items, s)?),
            Some(other) => {
                return err(s.pos(), ParseErrorKind::Unsupported(format!("domain section `{other}`")))
            }
            None => return expected(s, "domain section"),
        }
    }
    Ok(d)
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemAst, ParseError> {
    let top = read_all(text)?;
    let (problem_name, sections) = define("problem", &top)?;
    let mut p = ProblemAst {
        name: problem_name.to_string(),
        domain: String::new(),
        requirements: Vec::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
        minimize_total_cost: false,
    };
    let mut saw_domain = false;
    for s in sections {
        let items = as_list(s, "problem section")?;
        match s.head() {
            Some(":domain") => {
                if items.len() != 2 {
                    return expected(s, "(:domain NAME)");
                }
                p.domain = name(&items[1], "domain name")?.to_string();
                saw_domain = true;
            }
            Some(":requirements") => p.requirements = parse_requirements(&items[1..])?,
            Some(":objects") => p.objects = parse_typed_list(&items[1..], false)?,
            Some(":init") => {
                for f in &items[1..] {
                    if f.head() == Some("=") {
                        match f.list() {
                            Some([_, lhs, _]) if is_total_cost(lhs) => continue,
                            _ => return err(f.pos(), ParseErrorKind::Unsupported("numeric fluents".into())),
                        }
                    }
                    p.init.push(parse_atom(f, false)?);
                }
            }
            Some(":goal") => {
                if items.len() != 2 {
                    return expected(s, "(:goal CONDITION)");
                }
                p.goal = parse_conjunction(&items[1], false)?;
            }
            Some(":metric") => match items {
                [_, dir, f] if dir.symbol() == Some("minimize") && is_total_cost(f) => {
                    p.minimize_total_cost = true
                }
                _ => return err(s.pos(), ParseErrorKind::Unsupported("metric other than (minimize (total-cost))".into())),
            },
            Some(other) => {
                return err(s.pos(), ParseErrorKind::Unsupported(format!("problem section `{other}`")))
            }
            None => return expected(s, "problem section"),
        }
    }
    if !saw_domain {
        return err(Pos { line: 1, col: 1 }, ParseErrorKind::Expected("(:domain NAME)".into()));
    }
    Ok(p)
}

fn write_typed(out: &mut String, items: &[TypedName]) {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", t.name, t.ty);
    }
}

fn write_atom(out: &mut String, a: &Atom) {
    out.push('(');
    out.push_str(&a.predicate);
    for arg in &a.args {
        out.push(' ');
        out.push_str(arg);
    }
    out.push(')');
}

fn write_conjunction(out: &mut String, atoms: &[Atom]) {
    out.push_str("(and");
    for a in atoms {
        out.push(' ');
        write_atom(out, a);
    }
    out.push(')');
}

/// Canonical domain text. Re-parsing it yields an identical tree.
pub fn write_domain(d: &DomainAst) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("  (:types ");
        write_typed(&mut out, &d.types);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &d.predicates {
        let _ = write!(out, "\n    ({}", p.name);
        if !p.params.is_empty() {
            out.push(' ');
            write_typed(&mut out, &p.params);
        }
        out.push(')');
    }
    out.push_str(")\n");
    if d.total_cost {
        out.push_str("  (:functions (total-cost) - number)\n");
    }
    for a in &d.actions {
        let _ = write!(out, "  (:action {}\n    :parameters (", a.name);
        write_typed(&mut out, &a.parameters);
        out.push_str(")\n    :precondition ");
        write_conjunction(&mut out, &a.precondition);
        out.push_str("\n    :effect (and");
        for e in &a.add_effects {
            out.push(' ');
            write_atom(&mut out, e);
        }
        for e in &a.delete_effects {
            out.push_str(" (not ");
            write_atom(&mut out, e);
            out.push(')');
        }
        if let Some(c) = a.cost {
            let _ = write!(out, " (increase (total-cost) {c})");
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

/// Canonical problem text. Re-parsing it yields an identical tree.
pub fn write_problem(p: &ProblemAst) -> String {
    let mut out = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    if !p.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", p.requirements.join(" "));
    }
    out.push_str("  (:objects ");
    write_typed(&mut out, &p.objects);
    out.push_str(")\n  (:init");
    for a in &p.init {
        out.push_str("\n    ");
        write_atom(&mut out, a);
    }
    out.push_str(")\n  (:goal ");
    write_conjunction(&mut out, &p.goal);
    out.push_str(")\n");
    if p.minimize_total_cost {
        out.push_str("  (:metric minimize (total-cost))\n");
    }
    out.push_str(")\n");
    out
}
