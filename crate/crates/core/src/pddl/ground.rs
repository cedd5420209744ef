//! Full instantiation of action schemas over typed objects.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::ast::{ActionSchema, Atom, DomainAst, ProblemAst};
use crate::model::{Fact, GroundAction, Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("problem is for domain `{problem}` but the domain is `{domain}`")]
    DomainMismatch { domain: String, problem: String },
    #[error("object `{object}` has undeclared type `{ty}`")]
    UndeclaredType { object: String, ty: String },
    #[error("parameter `{parameter}` of `{action}` has undeclared type `{ty}`")]
    UndeclaredParameterType {
        action: String,
        parameter: String,
        ty: String,
    },
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    /// Drop instantiations whose static preconditions are false initially.
    pub prune_static: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { prune_static: true }
    }
}

/// Grounds with static pruning enabled.
pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<Model, GroundError> {
    ground_with(domain, problem, GroundOptions::default())
}

struct TypeTable {
    parent: BTreeMap<String, String>,
}

impl TypeTable {
    fn new(domain: &DomainAst) -> Self {
        let mut parent = BTreeMap::new();
        for t in &domain.types {
            if t.name != "object" {
                parent.insert(t.name.clone(), t.ty.clone());
            }
        }
        for t in &domain.types {
            if t.ty != "object" && !parent.contains_key(&t.ty) {
                parent.insert(t.ty.clone(), "object".to_string());
            }
        }
        TypeTable { parent }
    }

    fn declared(&self, ty: &str) -> bool {
        ty == "object" || self.parent.contains_key(ty)
    }

    fn is_subtype<'a>(&'a self, mut ty: &'a str, of: &str) -> bool {
        for _ in 0..=self.parent.len() {
            if ty == of {
                return true;
            }
            match self.parent.get(ty) {
                Some(p) => ty = p,
                None => return of == "object",
            }
        }
        false
    }
}

fn check_atom(arity: &HashMap<&str, usize>, a: &Atom) -> Result<(), GroundError> {
    let expected = *arity
        .get(a.predicate.as_str())
        .ok_or_else(|| GroundError::UnknownPredicate(a.predicate.clone()))?;
    if expected != a.args.len() {
        return Err(GroundError::ArityMismatch {
            predicate: a.predicate.clone(),
            expected,
            found: a.args.len(),
        });
    }
    Ok(())
}

pub(crate) fn schema_atoms(s: &ActionSchema) -> impl Iterator<Item = &Atom> {
    s.precondition.iter().chain(&s.add_effects).chain(&s.delete_effects)
}

/// Validates predicate usage and object references shared by grounding and
/// the schema-level model.
pub(crate) fn check_task(domain: &DomainAst, problem: &ProblemAst) -> Result<(), GroundError> {
    if domain.name != problem.domain {
        return Err(GroundError::DomainMismatch {
            domain: domain.name.clone(),
            problem: problem.domain.clone(),
        });
    }
    let types = TypeTable::new(domain);
    let arity: HashMap<&str, usize> = domain
        .predicates
        .iter()
        .map(|p| (p.name.as_str(), p.params.len()))
        .collect();
    for s in &domain.actions {
        for p in &s.parameters {
            if !types.declared(&p.ty) {
                return Err(GroundError::UndeclaredParameterType {
                    action: s.name.clone(),
                    parameter: p.name.clone(),
                    ty: p.ty.clone(),
                });
            }
        }
        for a in schema_atoms(s) {
            check_atom(&arity, a)?;
            if a.args.iter().any(|x| !x.starts_with('?')) {
                return Err(GroundError::Unsupported(format!(
                    "constant argument in `{}` of `{}`",
                    a.predicate, s.name
                )));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for o in &problem.objects {
        if !types.declared(&o.ty) {
            return Err(GroundError::UndeclaredType {
                object: o.name.clone(),
                ty: o.ty.clone(),
            });
        }
        if !seen.insert(o.name.as_str()) {
            return Err(GroundError::DuplicateObject(o.name.clone()));
        }
    }
    for a in problem.init.iter().chain(&problem.goal) {
        check_atom(&arity, a)?;
        if let Some(x) = a.args.iter().find(|x| !seen.contains(x.as_str())) {
            return Err(GroundError::UnknownObject(x.clone()));
        }
    }
    Ok(())
}

fn fact_of(a: &Atom, binding: &HashMap<&str, &str>) -> Result<Fact, ModelError> {
    let args = a
        .args
        .iter()
        .map(|x| binding.get(x.as_str()).map_or(x.as_str(), |o| *o).to_string())
        .collect();
    Fact::new(a.predicate.clone(), args)
}

pub(crate) fn problem_fact(a: &Atom) -> Result<Fact, ModelError> {
    Fact::new(a.predicate.clone(), a.args.clone())
}

/// Grounds `problem` against `domain`. Grounded action names are
/// `schema-obj1-obj2`; facts render as `pred(obj1,obj2)`. A fact both added
/// and deleted by one instance is kept as an add effect only.
pub fn ground_with(
    domain: &DomainAst,
    problem: &ProblemAst,
    options: GroundOptions,
) -> Result<Model, GroundError> {
    check_task(domain, problem)?;
    let types = TypeTable::new(domain);

    let init: BTreeSet<Fact> = problem.init.iter().map(problem_fact).collect::<Result<_, _>>()?;
    let goal: BTreeSet<Fact> = problem.goal.iter().map(problem_fact).collect::<Result<_, _>>()?;

    let fluent: BTreeSet<&str> = domain
        .actions
        .iter()
        .flat_map(|s| s.add_effects.iter().chain(&s.delete_effects))
        .map(|a| a.predicate.as_str())
        .collect();

    let mut objects: Vec<(&str, &str)> = problem
        .objects
        .iter()
        .map(|o| (o.name.as_str(), o.ty.as_str()))
        .collect();
    objects.sort();

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let candidates: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| {
                objects
                    .iter()
                    .filter(|(_, ty)| types.is_subtype(ty, &p.ty))
                    .map(|(n, _)| *n)
                    .collect()
            })
            .collect();
        let index: HashMap<&str, usize> = schema
            .parameters
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        // Static preconditions, bucketed by the last parameter they mention.
        let mut checks: Vec<Vec<&Atom>> = vec![Vec::new(); schema.parameters.len() + 1];
        if options.prune_static {
            for a in &schema.precondition {
                if !fluent.contains(a.predicate.as_str()) {
                    let last = a.variables().map(|v| index[v] + 1).max().unwrap_or(0);
                    checks[last].push(a);
                }
            }
        }
        let mut binding: HashMap<&str, &str> = HashMap::new();
        let static_ok = |binding: &HashMap<&str, &str>, level: usize| -> Result<bool, ModelError> {
            for a in &checks[level] {
                if !init.contains(&fact_of(a, binding)?) {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        if !static_ok(&binding, 0)? {
            continue;
        }
        let mut chosen: Vec<usize> = vec![0; schema.parameters.len()];
        let mut depth = 0usize;
        let n = schema.parameters.len();
        // Iterative backtracking over parameter assignments.
        loop {
            if depth == n {
                let objs: Vec<&str> = schema
                    .parameters
                    .iter()
                    .map(|p| binding[p.name.as_str()])
                    .collect();
                actions.push(instantiate(schema, &objs, &binding)?);
                if n == 0 {
                    break;
                }
                depth -= 1;
                chosen[depth] += 1;
                continue;
            }
            let param = schema.parameters[depth].name.as_str();
            if chosen[depth] >= candidates[depth].len() {
                binding.remove(param);
                chosen[depth] = 0;
                if depth == 0 {
                    break;
                }
                depth -= 1;
                chosen[depth] += 1;
                continue;
            }
            binding.insert(param, candidates[depth][chosen[depth]]);
            if static_ok(&binding, depth + 1)? {
                depth += 1;
            } else {
                chosen[depth] += 1;
            }
        }
    }

    Ok(Model::from_parts(actions, init, goal, [])?)
}

fn instantiate(
    schema: &ActionSchema,
    objects: &[&str],
    binding: &HashMap<&str, &str>,
) -> Result<GroundAction, ModelError> {
    let mut name = schema.name.clone();
    for o in objects {
        name.push('-');
        name.push_str(o);
    }
    let facts = |atoms: &[Atom]| -> Result<BTreeSet<Fact>, ModelError> {
        atoms.iter().map(|a| fact_of(a, binding)).collect()
    };
    let add = facts(&schema.add_effects)?;
    let mut del = facts(&schema.delete_effects)?;
    del.retain(|f| !add.contains(f));
    let mut action = GroundAction::new(name, schema.cost.unwrap_or(1))
        .with_pre(facts(&schema.precondition)?)
        .with_add(add)
        .with_del(del);
    let mut signature = vec![schema.name.clone()];
    signature.extend(objects.iter().map(|o| o.to_string()));
    action.signature = Some(signature);
    Ok(action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    const ROVER: &str = include_str!("../../data/rover-domain.pddl");
    const P01: &str = include_str!("../../data/rover-p01.pddl");

    #[test]
    fn zero_parameter_schema_grounds_once() {
        let d = parse_domain("(define (domain d) (:predicates (p) (q)) (:action a :precondition (p) :effect (q)))").unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:init (p)) (:goal (q)))").unwrap();
        let m = ground(&d, &p).unwrap();
        assert_eq!(m.num_actions(), 1);
        let a = m.action("a").unwrap();
        assert_eq!(a.cost, 1);
        assert_eq!(a.signature.as_deref(), Some(&["a".to_string()][..]));
    }

    #[test]
    fn typed_instantiation_and_costs() {
        let d = parse_domain(
            "(define (domain d) (:requirements :typing :action-costs)
               (:types truck - vehicle vehicle place)
               (:predicates (at ?v - vehicle ?p - place) (road ?a ?b - place))
               (:functions (total-cost) - number)
               (:action drive :parameters (?v - vehicle ?a ?b - place)
                 :precondition (and (at ?v ?a) (road ?a ?b))
                 :effect (and (not (at ?v ?a)) (at ?v ?b) (increase (total-cost) 3))))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem x) (:domain d) (:objects t1 - truck l1 l2 l3 - place)
               (:init (at t1 l1) (road l1 l2) (road l2 l3) (= (total-cost) 0)) (:goal (at t1 l3))
               (:metric minimize (total-cost)))",
        )
        .unwrap();
        let m = ground(&d, &p).unwrap();
        let names: Vec<&str> = m.actions().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["drive-t1-l1-l2", "drive-t1-l2-l3"]);
        assert!(m.actions().all(|a| a.cost == 3));
        let unpruned = ground_with(&d, &p, GroundOptions { prune_static: false }).unwrap();
        assert_eq!(unpruned.num_actions(), 9);
    }

    #[test]
    fn undeclared_object_type_names_the_object() {
        let d = parse_domain("(define (domain d) (:types place) (:predicates (at ?p - place)))").unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:objects home - house) (:init) (:goal (and)))").unwrap();
        assert_eq!(
            ground(&d, &p).unwrap_err(),
            GroundError::UndeclaredType {
                object: "home".into(),
                ty: "house".into()
            }
        );
    }

    #[test]
    fn arity_and_domain_errors() {
        let d = parse_domain("(define (domain d) (:predicates (p ?x)))").unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:objects a) (:init (p a a)) (:goal (and)))").unwrap();
        assert!(matches!(ground(&d, &p), Err(GroundError::ArityMismatch { .. })));
        let p = parse_problem("(define (problem x) (:domain other) (:init) (:goal (and)))").unwrap();
        assert!(matches!(ground(&d, &p), Err(GroundError::DomainMismatch { .. })));
    }

    #[test]
    fn rover_p01_grounds() {
        let m = ground(&parse_domain(ROVER).unwrap(), &parse_problem(P01).unwrap()).unwrap();
        let nav: Vec<&str> = m
            .actions()
            .filter(|a| a.name.starts_with("navigate-"))
            .map(|a| a.name.as_str())
            .collect();
        assert_eq!(nav.len(), 6);
        assert!(nav.contains(&"navigate-rover0-waypoint3-waypoint0"));
        // Communication actions both delete and add `available`; the add wins.
        let c = m
            .actions()
            .find(|a| a.name.starts_with("communicate_soil_data-"))
            .unwrap();
        assert!(c.add_effects.contains(&"available(rover0)".parse().unwrap()));
        assert!(!c.delete_effects.contains(&"available(rover0)".parse().unwrap()));
        assert!(m.actions().all(|a| a.cost == 1));
    }
}
