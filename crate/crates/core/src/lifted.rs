//! Schema-level view of a PDDL task.
//!
//! Features name schema atoms with their parameter names rather than grounded
//! facts, e.g. `navigate-has-precondition-visible(y,z)` for
//! `(visible ?y ?z)` in `navigate`. Init and goal features are the problem's
//! ground facts. Every schema carries one cost feature (1 when the domain
//! gives none). Editing a lifted model edits all of a schema's groundings at
//! once; plans are still computed on the grounded task.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{check_identifier, Fact, Feature, FeatureSet, Model, ModelError};
use crate::pddl::{ground, Atom, DomainAst, GroundError, ProblemAst};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedModel {
    domain: DomainAst,
    problem: ProblemAst,
}

fn lifted_fact(a: &Atom) -> Result<Fact, ModelError> {
    let args = a
        .args
        .iter()
        .map(|x| x.strip_prefix('?').unwrap_or(x).to_string())
        .collect();
    Fact::new(a.predicate.clone(), args)
}

fn ground_fact(a: &Atom) -> Result<Fact, ModelError> {
    Fact::new(a.predicate.clone(), a.args.clone())
}

impl LiftedModel {
    pub fn new(domain: DomainAst, problem: ProblemAst) -> Result<Self, GroundError> {
        crate::pddl::check_task(&domain, &problem)?;
        for s in &domain.actions {
            check_identifier(&s.name)?;
            for p in &s.parameters {
                check_identifier(p.name.trim_start_matches('?'))?;
            }
        }
        Ok(LiftedModel { domain, problem })
    }

    pub fn domain(&self) -> &DomainAst {
        &self.domain
    }

    pub fn problem(&self) -> &ProblemAst {
        &self.problem
    }

    pub fn ground(&self) -> Result<Model, GroundError> {
        ground(&self.domain, &self.problem)
    }

    pub fn gamma(&self) -> FeatureSet {
        let mut out = FeatureSet::new();
        for a in &self.problem.init {
            out.insert(Feature::Init(ground_fact(a).expect("checked at construction")));
        }
        for a in &self.problem.goal {
            out.insert(Feature::Goal(ground_fact(a).expect("checked at construction")));
        }
        for s in &self.domain.actions {
            let action = || s.name.clone();
            let fact = |a: &Atom| lifted_fact(a).expect("checked at construction");
            for a in &s.precondition {
                out.insert(Feature::Precondition { action: action(), fact: fact(a) });
            }
            for a in &s.add_effects {
                out.insert(Feature::AddEffect { action: action(), fact: fact(a) });
            }
            for a in &s.delete_effects {
                out.insert(Feature::DeleteEffect { action: action(), fact: fact(a) });
            }
            out.insert(Feature::Cost {
                action: action(),
                cost: s.cost.unwrap_or(1),
            });
        }
        out
    }

    /// Rebuilds the task from a feature set, keeping objects, types,
    /// predicates and parameter lists from `self`.
    pub fn with_features(&self, features: &FeatureSet) -> Result<Self, ModelError> {
        let mut domain = self.domain.clone();
        let mut problem = self.problem.clone();
        problem.init.clear();
        problem.goal.clear();
        let mut schemas: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, s) in domain.actions.iter_mut().enumerate() {
            s.precondition.clear();
            s.add_effects.clear();
            s.delete_effects.clear();
            schemas.insert(&self.domain.actions[i].name, i);
        }
        let mut costed = BTreeSet::new();
        for f in features {
            let atom_of = |fact: &Fact| Atom {
                predicate: fact.name().to_string(),
                args: fact.args().to_vec(),
            };
            let (action, fact) = match f {
                Feature::Init(fact) => {
                    problem.init.push(atom_of(fact));
                    continue;
                }
                Feature::Goal(fact) => {
                    problem.goal.push(atom_of(fact));
                    continue;
                }
                Feature::Cost { action, cost } => {
                    let i = *schemas
                        .get(action.as_str())
                        .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
                    if !costed.insert(i) {
                        return Err(ModelError::DuplicateAction(action.clone()));
                    }
                    let original = self.domain.actions[i].cost;
                    domain.actions[i].cost = match (original, *cost) {
                        (None, 1) => None,
                        (_, c) => Some(c),
                    };
                    continue;
                }
                Feature::Precondition { action, fact }
                | Feature::AddEffect { action, fact }
                | Feature::DeleteEffect { action, fact } => (action, fact),
            };
            let i = *schemas
                .get(action.as_str())
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            let schema = &mut domain.actions[i];
            let mut args = Vec::with_capacity(fact.args().len());
            for x in fact.args() {
                let var = format!("?{x}");
                if !schema.parameters.iter().any(|p| p.name == var) {
                    return Err(ModelError::InvalidEdit {
                        change: f.to_string(),
                        reason: format!("`{x}` is not a parameter of `{action}`"),
                    });
                }
                args.push(var);
            }
            let atom = Atom {
                predicate: fact.name().to_string(),
                args,
            };
            match f {
                Feature::Precondition { .. } => schema.precondition.push(atom),
                Feature::AddEffect { .. } => schema.add_effects.push(atom),
                _ => schema.delete_effects.push(atom),
            }
        }
        if costed.len() != domain.actions.len() {
            let missing = domain
                .actions
                .iter()
                .enumerate()
                .find(|(i, _)| !costed.contains(i))
                .map(|(_, s)| s.name.clone())
                .unwrap_or_default();
            return Err(ModelError::InvalidEdit {
                change: missing,
                reason: "schema has no cost feature".into(),
            });
        }
        crate::pddl::check_task(&domain, &problem).map_err(|e| ModelError::InvalidEdit {
            change: String::new(),
            reason: e.to_string(),
        })?;
        Ok(LiftedModel { domain, problem })
    }
}
