//! Grounded STRIPS models and their feature view.
//!
//! A [`Model`] is flattened into a set of atomic [`Feature`]s (init facts,
//! goal facts, action preconditions/effects and one cost per action). Model
//! differences are expressed as [`FeatureChange`]s over that set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Infix reserved by the feature grammar. Names may not contain it.
pub const RESERVED_INFIX: &str = "-has-";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("malformed fact `{0}`")]
    MalformedFact(String),
    #[error("malformed feature `{0}`")]
    MalformedFeature(String),
    #[error("malformed change `{0}`")]
    MalformedChange(String),
    #[error("fact `{0}` is not in the fact universe")]
    UnknownFact(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("cannot add `{0}`: feature already present")]
    AlreadyPresent(String),
    #[error("cannot remove `{0}`: feature not present")]
    NotPresent(String),
    #[error("invalid edit `{change}`: {reason}")]
    InvalidEdit { change: String, reason: String },
    #[error("models do not share an action universe: {0}")]
    ActionUniverseMismatch(String),
}

/// Checks a name against the identifier rules shared by facts, objects and
/// action names.
pub fn check_identifier(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' => chars
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-'),
        _ => false,
    };
    if !ok || name.contains(RESERVED_INFIX) || name.ends_with('-') {
        return Err(ModelError::InvalidIdentifier(name.to_string()));
    }
    Ok(())
}

/// A ground atom. Renders as `name(arg1,arg2)`, or `name` without arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    name: String,
    args: Vec<String>,
}

impl Fact {
    pub fn new<S: Into<String>>(name: S, args: Vec<String>) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        for a in &args {
            check_identifier(a)?;
        }
        Ok(Fact { name, args })
    }

    /// Zero-arity fact.
    pub fn atom<S: Into<String>>(name: S) -> Result<Self, ModelError> {
        Fact::new(name, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Fact {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::MalformedFact(s.to_string());
        match s.find('(') {
            None => Fact::atom(s).map_err(|_| bad()),
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
                if inner.is_empty() {
                    return Err(bad());
                }
                let args = inner.split(',').map(str::to_string).collect();
                Fact::new(&s[..open], args).map_err(|_| bad())
            }
        }
    }
}

/// One grounded action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    pub name: String,
    pub preconditions: BTreeSet<Fact>,
    pub add_effects: BTreeSet<Fact>,
    pub delete_effects: BTreeSet<Fact>,
    pub cost: u64,
    /// Schema name followed by the objects it was instantiated with. Only
    /// used for presentation; not part of the feature view.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<String>>,
}

impl GroundAction {
    pub fn new<S: Into<String>>(name: S, cost: u64) -> Self {
        GroundAction {
            name: name.into(),
            preconditions: BTreeSet::new(),
            add_effects: BTreeSet::new(),
            delete_effects: BTreeSet::new(),
            cost,
            signature: None,
        }
    }

    pub fn with_pre<I: IntoIterator<Item = Fact>>(mut self, facts: I) -> Self {
        self.preconditions.extend(facts);
        self
    }

    pub fn with_add<I: IntoIterator<Item = Fact>>(mut self, facts: I) -> Self {
        self.add_effects.extend(facts);
        self
    }

    pub fn with_del<I: IntoIterator<Item = Fact>>(mut self, facts: I) -> Self {
        self.delete_effects.extend(facts);
        self
    }

    /// Schema name used when plans are compared by schema rather than by
    /// full grounded name.
    pub fn base_name(&self) -> &str {
        self.signature
            .as_ref()
            .and_then(|s| s.first())
            .map(String::as_str)
            .unwrap_or(&self.name)
    }

    fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.preconditions
            .iter()
            .chain(&self.add_effects)
            .chain(&self.delete_effects)
    }
}

/// A grounded STRIPS task. Immutable once built; edits return new models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    facts: BTreeSet<Fact>,
    actions: BTreeMap<String, GroundAction>,
    init: BTreeSet<Fact>,
    goal: BTreeSet<Fact>,
}

impl Model {
    /// Builds a model, checking every invariant. `facts` is the declared
    /// universe; it must cover everything the actions, init and goal mention.
    pub fn new(
        facts: BTreeSet<Fact>,
        actions: Vec<GroundAction>,
        init: BTreeSet<Fact>,
        goal: BTreeSet<Fact>,
    ) -> Result<Self, ModelError> {
        let mut by_name = BTreeMap::new();
        for a in actions {
            check_identifier(&a.name)?;
            if a.name == "init" || a.name == "goal" {
                return Err(ModelError::InvalidIdentifier(a.name));
            }
            if let Some(f) = a.add_effects.intersection(&a.delete_effects).next() {
                return Err(ModelError::InvalidEdit {
                    change: a.name.clone(),
                    reason: format!("`{f}` is both added and deleted"),
                });
            }
            if let Some(old) = by_name.insert(a.name.clone(), a) {
                return Err(ModelError::DuplicateAction(old.name));
            }
        }
        let model = Model {
            facts,
            actions: by_name,
            init,
            goal,
        };
        let mentioned = model
            .init
            .iter()
            .chain(&model.goal)
            .chain(model.actions.values().flat_map(GroundAction::facts));
        for f in mentioned {
            if !model.facts.contains(f) {
                return Err(ModelError::UnknownFact(f.to_string()));
            }
        }
        Ok(model)
    }

    /// Like [`Model::new`] but the universe is whatever the parts mention,
    /// plus `extra`.
    pub fn from_parts(
        actions: Vec<GroundAction>,
        init: BTreeSet<Fact>,
        goal: BTreeSet<Fact>,
        extra: impl IntoIterator<Item = Fact>,
    ) -> Result<Self, ModelError> {
        let mut facts: BTreeSet<Fact> = extra.into_iter().collect();
        facts.extend(init.iter().cloned());
        facts.extend(goal.iter().cloned());
        for a in &actions {
            facts.extend(a.facts().cloned());
        }
        Model::new(facts, actions, init, goal)
    }

    pub fn empty() -> Self {
        Model {
            facts: BTreeSet::new(),
            actions: BTreeMap::new(),
            init: BTreeSet::new(),
            goal: BTreeSet::new(),
        }
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn init(&self) -> &BTreeSet<Fact> {
        &self.init
    }

    pub fn goal(&self) -> &BTreeSet<Fact> {
        &self.goal
    }

    /// Actions in name order.
    pub fn actions(&self) -> impl ExactSizeIterator<Item = &GroundAction> {
        self.actions.values()
    }

    pub fn action(&self, name: &str) -> Option<&GroundAction> {
        self.actions.get(name)
    }

    pub fn action_names(&self) -> BTreeSet<&str> {
        self.actions.keys().map(String::as_str).collect()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// The feature set of this model.
    pub fn gamma(&self) -> FeatureSet {
        gamma(self)
    }

    /// Rebuilds a model from its features. The fact universe and action
    /// signatures come from `template`; every action must carry a cost
    /// feature.
    pub fn from_features(features: &FeatureSet, template: &Model) -> Result<Model, ModelError> {
        let mut actions: BTreeMap<String, GroundAction> = BTreeMap::new();
        let mut init = BTreeSet::new();
        let mut goal = BTreeSet::new();
        for f in features {
            if let Feature::Cost { action, cost } = f {
                let mut a = GroundAction::new(action.clone(), *cost);
                a.signature = template.action(action).and_then(|t| t.signature.clone());
                if actions.insert(action.clone(), a).is_some() {
                    return Err(ModelError::DuplicateAction(action.clone()));
                }
            }
        }
        for f in features {
            match f {
                Feature::Init(fact) => {
                    init.insert(fact.clone());
                }
                Feature::Goal(fact) => {
                    goal.insert(fact.clone());
                }
                Feature::Cost { .. } => {}
                Feature::Precondition { action, fact }
                | Feature::AddEffect { action, fact }
                | Feature::DeleteEffect { action, fact } => {
                    let a = actions
                        .get_mut(action)
                        .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
                    let set = match f.kind() {
                        FeatureKind::Precondition => &mut a.preconditions,
                        FeatureKind::AddEffect => &mut a.add_effects,
                        _ => &mut a.delete_effects,
                    };
                    set.insert(fact.clone());
                }
            }
        }
        let mut facts = template.facts.clone();
        facts.extend(init.iter().cloned());
        facts.extend(goal.iter().cloned());
        for a in actions.values() {
            facts.extend(a.facts().cloned());
        }
        Model::new(facts, actions.into_values().collect(), init, goal)
    }

    /// Short stable digest of the feature set.
    pub fn digest(&self) -> String {
        digest_features(&self.gamma())
    }

    /// Canonical dump: sorted feature strings, one per line.
    pub fn dump(&self) -> String {
        dump_features(&self.gamma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Init,
    Goal,
    Precondition,
    AddEffect,
    DeleteEffect,
    Cost,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::Init,
        FeatureKind::Goal,
        FeatureKind::Precondition,
        FeatureKind::AddEffect,
        FeatureKind::DeleteEffect,
        FeatureKind::Cost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Init => "init",
            FeatureKind::Goal => "goal",
            FeatureKind::Precondition => "precondition",
            FeatureKind::AddEffect => "add-effect",
            FeatureKind::DeleteEffect => "delete-effect",
            FeatureKind::Cost => "cost",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ModelError::MalformedFeature(s.to_string()))
    }
}

/// One atomic property of a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Init(Fact),
    Goal(Fact),
    Precondition { action: String, fact: Fact },
    AddEffect { action: String, fact: Fact },
    DeleteEffect { action: String, fact: Fact },
    Cost { action: String, cost: u64 },
}

impl Feature {
    pub fn kind(&self) -> FeatureKind {
        match self {
            Feature::Init(_) => FeatureKind::Init,
            Feature::Goal(_) => FeatureKind::Goal,
            Feature::Precondition { .. } => FeatureKind::Precondition,
            Feature::AddEffect { .. } => FeatureKind::AddEffect,
            Feature::DeleteEffect { .. } => FeatureKind::DeleteEffect,
            Feature::Cost { .. } => FeatureKind::Cost,
        }
    }

    /// Owning action, absent for init/goal features.
    pub fn owner(&self) -> Option<&str> {
        match self {
            Feature::Init(_) | Feature::Goal(_) => None,
            Feature::Precondition { action, .. }
            | Feature::AddEffect { action, .. }
            | Feature::DeleteEffect { action, .. }
            | Feature::Cost { action, .. } => Some(action),
        }
    }

    pub fn fact(&self) -> Option<&Fact> {
        match self {
            Feature::Init(f) | Feature::Goal(f) => Some(f),
            Feature::Precondition { fact, .. }
            | Feature::AddEffect { fact, .. }
            | Feature::DeleteEffect { fact, .. } => Some(fact),
            Feature::Cost { .. } => None,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Init(fact) => write!(f, "init-has-{fact}"),
            Feature::Goal(fact) => write!(f, "goal-has-{fact}"),
            Feature::Precondition { action, fact } => {
                write!(f, "{action}-has-precondition-{fact}")
            }
            Feature::AddEffect { action, fact } => write!(f, "{action}-has-add-effect-{fact}"),
            Feature::DeleteEffect { action, fact } => {
                write!(f, "{action}-has-delete-effect-{fact}")
            }
            Feature::Cost { action, cost } => write!(f, "{action}-has-cost-{cost}"),
        }
    }
}

impl FromStr for Feature {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::MalformedFeature(s.to_string());
        let at = s.find(RESERVED_INFIX).ok_or_else(bad)?;
        let (owner, rest) = (&s[..at], &s[at + RESERVED_INFIX.len()..]);
        let fact = |t: &str| t.parse::<Fact>().map_err(|_| bad());
        match owner {
            "init" => return Ok(Feature::Init(fact(rest)?)),
            "goal" => return Ok(Feature::Goal(fact(rest)?)),
            _ => {}
        }
        check_identifier(owner).map_err(|_| bad())?;
        let action = owner.to_string();
        if let Some(t) = rest.strip_prefix("precondition-") {
            Ok(Feature::Precondition { action, fact: fact(t)? })
        } else if let Some(t) = rest.strip_prefix("add-effect-") {
            Ok(Feature::AddEffect { action, fact: fact(t)? })
        } else if let Some(t) = rest.strip_prefix("delete-effect-") {
            Ok(Feature::DeleteEffect { action, fact: fact(t)? })
        } else if let Some(t) = rest.strip_prefix("cost-") {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let cost = t.parse().map_err(|_| bad())?;
            Ok(Feature::Cost { action, cost })
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Feature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Feature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type FeatureSet = BTreeSet<Feature>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Add,
    Remove,
}

/// A unit edit of one feature.
///
/// Cost features are never removed on their own: adding a cost feature
/// replaces whatever cost the action had, so a cost change is one unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureChange {
    pub direction: Direction,
    pub feature: Feature,
}

impl FeatureChange {
    pub fn add(feature: Feature) -> Self {
        FeatureChange {
            direction: Direction::Add,
            feature,
        }
    }

    pub fn remove(feature: Feature) -> Self {
        FeatureChange {
            direction: Direction::Remove,
            feature,
        }
    }
}

impl fmt::Display for FeatureChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Add => write!(f, "add {}", self.feature),
            Direction::Remove => write!(f, "remove {}", self.feature),
        }
    }
}

impl FromStr for FeatureChange {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (dir, rest) = s
            .split_once(char::is_whitespace)
            .ok_or_else(|| ModelError::MalformedChange(s.to_string()))?;
        let feature = rest.trim().parse()?;
        match dir {
            "add" | "+" => Ok(FeatureChange::add(feature)),
            "remove" | "-" => Ok(FeatureChange::remove(feature)),
            _ => Err(ModelError::MalformedChange(s.to_string())),
        }
    }
}

impl Serialize for FeatureChange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureChange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The complete feature set of a grounded model.
pub fn gamma(model: &Model) -> FeatureSet {
    let mut out = FeatureSet::new();
    out.extend(model.init.iter().cloned().map(Feature::Init));
    out.extend(model.goal.iter().cloned().map(Feature::Goal));
    for a in model.actions.values() {
        let action = || a.name.clone();
        out.extend(a.preconditions.iter().map(|f| Feature::Precondition {
            action: action(),
            fact: f.clone(),
        }));
        out.extend(a.add_effects.iter().map(|f| Feature::AddEffect {
            action: action(),
            fact: f.clone(),
        }));
        out.extend(a.delete_effects.iter().map(|f| Feature::DeleteEffect {
            action: action(),
            fact: f.clone(),
        }));
        out.insert(Feature::Cost {
            action: action(),
            cost: a.cost,
        });
    }
    out
}

/// Changes turning a model with features `from` into one with features `to`,
/// sorted by their rendering. A differing cost yields a single add of the
/// target cost feature.
pub fn delta_features(from: &FeatureSet, to: &FeatureSet) -> Vec<FeatureChange> {
    let mut out: Vec<FeatureChange> = Vec::new();
    for f in to.difference(from) {
        out.push(FeatureChange::add(f.clone()));
    }
    for f in from.difference(to) {
        if f.kind() != FeatureKind::Cost {
            out.push(FeatureChange::remove(f.clone()));
        }
    }
    sort_changes(&mut out);
    out
}

pub(crate) fn sort_changes(changes: &mut [FeatureChange]) {
    changes.sort_by_cached_key(|c| c.to_string());
}

fn owners(features: &FeatureSet) -> BTreeSet<&str> {
    features
        .iter()
        .filter(|f| f.kind() == FeatureKind::Cost)
        .filter_map(Feature::owner)
        .collect()
}

pub(crate) fn check_same_actions(a: &FeatureSet, b: &FeatureSet) -> Result<(), ModelError> {
    let (oa, ob) = (owners(a), owners(b));
    if oa != ob {
        let diff: Vec<&str> = oa.symmetric_difference(&ob).copied().take(3).collect();
        return Err(ModelError::ActionUniverseMismatch(diff.join(", ")));
    }
    Ok(())
}

/// Changes transforming `m1` into `m2`.
pub fn delta(m1: &Model, m2: &Model) -> Result<Vec<FeatureChange>, ModelError> {
    let (g1, g2) = (m1.gamma(), m2.gamma());
    check_same_actions(&g1, &g2)?;
    Ok(delta_features(&g1, &g2))
}

/// Number of unit changes between two models.
pub fn model_distance(m1: &Model, m2: &Model) -> Result<usize, ModelError> {
    delta(m1, m2).map(|d| d.len())
}

/// Applies one unit change, returning the edited model.
pub fn apply_change(model: &Model, change: &FeatureChange) -> Result<Model, ModelError> {
    let mut out = model.clone();
    let text = || change.feature.to_string();
    let invalid = |reason: String| ModelError::InvalidEdit {
        change: change.to_string(),
        reason,
    };
    let add = change.direction == Direction::Add;

    fn toggle(
        set: &mut BTreeSet<Fact>,
        fact: &Fact,
        add: bool,
        text: impl Fn() -> String,
    ) -> Result<(), ModelError> {
        if add {
            if !set.insert(fact.clone()) {
                return Err(ModelError::AlreadyPresent(text()));
            }
        } else if !set.remove(fact) {
            return Err(ModelError::NotPresent(text()));
        }
        Ok(())
    }

    match &change.feature {
        Feature::Init(f) => toggle(&mut out.init, f, add, text)?,
        Feature::Goal(f) => toggle(&mut out.goal, f, add, text)?,
        Feature::Precondition { action, fact } => {
            let a = out
                .actions
                .get_mut(action)
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            toggle(&mut a.preconditions, fact, add, text)?;
        }
        Feature::AddEffect { action, fact } => {
            let a = out
                .actions
                .get_mut(action)
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            toggle(&mut a.add_effects, fact, add, text)?;
            if add && a.delete_effects.contains(fact) {
                return Err(invalid(format!("`{fact}` is also a delete effect")));
            }
        }
        Feature::DeleteEffect { action, fact } => {
            let a = out
                .actions
                .get_mut(action)
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            toggle(&mut a.delete_effects, fact, add, text)?;
            if add && a.add_effects.contains(fact) {
                return Err(invalid(format!("`{fact}` is also an add effect")));
            }
        }
        Feature::Cost { action, cost } => {
            if !add {
                return Err(invalid("cost features are replaced, never removed".into()));
            }
            let a = out
                .actions
                .get_mut(action)
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            if a.cost == *cost {
                return Err(ModelError::AlreadyPresent(text()));
            }
            a.cost = *cost;
        }
    }
    if let Some(f) = change.feature.fact() {
        out.facts.insert(f.clone());
    }
    Ok(out)
}

/// Applies one unit change to a bare feature set. Adding a cost feature
/// replaces the owner's current cost feature.
pub fn apply_to_features(
    features: &mut FeatureSet,
    change: &FeatureChange,
) -> Result<(), ModelError> {
    let text = || change.feature.to_string();
    match (change.direction, &change.feature) {
        (Direction::Add, Feature::Cost { action, .. }) => {
            let old = features
                .iter()
                .find(|f| f.kind() == FeatureKind::Cost && f.owner() == Some(action))
                .cloned()
                .ok_or_else(|| ModelError::UnknownAction(action.clone()))?;
            if old == change.feature {
                return Err(ModelError::AlreadyPresent(text()));
            }
            features.remove(&old);
            features.insert(change.feature.clone());
        }
        (Direction::Remove, Feature::Cost { .. }) => {
            return Err(ModelError::InvalidEdit {
                change: change.to_string(),
                reason: "cost features are replaced, never removed".into(),
            });
        }
        (Direction::Add, f) => {
            if !features.insert(f.clone()) {
                return Err(ModelError::AlreadyPresent(text()));
            }
        }
        (Direction::Remove, f) => {
            if !features.remove(f) {
                return Err(ModelError::NotPresent(text()));
            }
        }
    }
    Ok(())
}

pub fn digest_features(features: &FeatureSet) -> String {
    let mut hasher = Sha256::new();
    for f in sorted_strings(features) {
        hasher.update(f.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(&hasher.finalize()[..8])
}

pub fn dump_features(features: &FeatureSet) -> String {
    let mut out = String::new();
    for f in sorted_strings(features) {
        out.push_str(&f);
        out.push('\n');
    }
    out
}

fn sorted_strings(features: &FeatureSet) -> Vec<String> {
    let mut v: Vec<String> = features.iter().map(Feature::to_string).collect();
    v.sort();
    v
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn fact(s: &str) -> Fact {
        s.parse().unwrap()
    }

    fn facts(items: &[&str]) -> BTreeSet<Fact> {
        items.iter().map(|s| fact(s)).collect()
    }

    /// The outlet/park model from the motivating example, unsplit.
    pub(crate) fn amy() -> Model {
        Model::from_parts(
            vec![
                GroundAction::new("outlet-shopping", 5)
                    .with_pre(facts(&["not-holiday"]))
                    .with_add(facts(&["happy"])),
                GroundAction::new("visit-park", 10).with_add(facts(&["happy"])),
            ],
            facts(&["not-holiday"]),
            facts(&["happy"]),
            facts(&["car-ready", "is-sunny"]),
        )
        .unwrap()
    }

    fn feature(s: &str) -> Feature {
        s.parse().unwrap()
    }

    #[test]
    fn fact_rendering() {
        assert_eq!(fact("not-holiday").to_string(), "not-holiday");
        assert_eq!(fact("at(rover0,waypoint3)").to_string(), "at(rover0,waypoint3)");
        assert!("at()".parse::<Fact>().is_err());
        assert!("At(x)".parse::<Fact>().is_err());
        assert!("a-has-b".parse::<Fact>().is_err());
        assert!("p(a,,b)".parse::<Fact>().is_err());
    }

    #[test]
    fn gamma_lists_the_example_features() {
        let g = amy().gamma();
        for s in [
            "init-has-not-holiday",
            "goal-has-happy",
            "outlet-shopping-has-precondition-not-holiday",
            "outlet-shopping-has-add-effect-happy",
            "outlet-shopping-has-cost-5",
            "visit-park-has-cost-10",
        ] {
            assert!(g.contains(&feature(s)), "{s}");
        }
        assert_eq!(g.len(), 7);
    }

    #[test]
    fn gamma_of_empty_model_is_empty() {
        assert!(Model::empty().gamma().is_empty());
    }

    #[test]
    fn feature_strings_round_trip() {
        for s in [
            "init-has-at(rover0,waypoint3)",
            "goal-has-happy",
            "navigate-rover0-waypoint3-waypoint0-has-precondition-visible(waypoint3,waypoint0)",
            "outlet-shopping-cheap-has-add-effect-happy",
            "drop-has-delete-effect-full(x)",
            "a-has-cost-0",
        ] {
            assert_eq!(feature(s).to_string(), s);
        }
        for bad in ["init-has-", "x-has-cost-", "x-has-cost--1", "x-has-effect-p", "nohas"] {
            assert!(bad.parse::<Feature>().is_err(), "{bad}");
        }
    }

    #[test]
    fn delta_and_distance() {
        let m = amy();
        assert!(delta(&m, &m).unwrap().is_empty());
        let mut monica = apply_change(&m, &"remove init-has-not-holiday".parse().unwrap()).unwrap();
        monica = apply_change(&monica, &"add init-has-car-ready".parse().unwrap()).unwrap();
        monica = apply_change(&monica, &"add init-has-is-sunny".parse().unwrap()).unwrap();
        let d: Vec<String> = delta(&m, &monica).unwrap().iter().map(|c| c.to_string()).collect();
        assert_eq!(
            d,
            [
                "add init-has-car-ready",
                "add init-has-is-sunny",
                "remove init-has-not-holiday"
            ]
        );
        assert_eq!(model_distance(&m, &monica).unwrap(), 3);
        let back: Vec<Direction> = delta(&monica, &m).unwrap().iter().map(|c| c.direction).collect();
        assert_eq!(back, [Direction::Add, Direction::Remove, Direction::Remove]);
    }

    #[test]
    fn cost_change_is_one_unit() {
        let m = amy();
        let c: FeatureChange = "add visit-park-has-cost-3".parse().unwrap();
        let m2 = apply_change(&m, &c).unwrap();
        assert_eq!(m2.action("visit-park").unwrap().cost, 3);
        assert_eq!(delta(&m, &m2).unwrap(), vec![c]);
        assert_eq!(model_distance(&m2, &m).unwrap(), 1);
        assert!(apply_change(&m, &"remove visit-park-has-cost-10".parse().unwrap()).is_err());
        assert!(matches!(
            apply_change(&m, &"add visit-park-has-cost-10".parse().unwrap()),
            Err(ModelError::AlreadyPresent(_))
        ));
    }

    #[test]
    fn apply_change_preconditions() {
        let m = amy();
        let removed = apply_change(&m, &"remove init-has-not-holiday".parse().unwrap()).unwrap();
        assert!(removed.init().is_empty());
        assert_eq!(m.init().len(), 1);
        assert!(matches!(
            apply_change(&m, &"add init-has-not-holiday".parse().unwrap()),
            Err(ModelError::AlreadyPresent(_))
        ));
        assert!(matches!(
            apply_change(&m, &"remove goal-has-sad".parse().unwrap()),
            Err(ModelError::NotPresent(_))
        ));
        assert!(matches!(
            apply_change(&m, &"add visit-park-has-delete-effect-happy".parse().unwrap()),
            Err(ModelError::InvalidEdit { .. })
        ));
        assert!(matches!(
            apply_change(&m, &"add fly-has-precondition-happy".parse().unwrap()),
            Err(ModelError::UnknownAction(_))
        ));
    }

    #[test]
    fn add_then_remove_restores() {
        let m = amy();
        let f: Feature = "visit-park-has-precondition-car-ready".parse().unwrap();
        let m2 = apply_change(&m, &FeatureChange::add(f.clone())).unwrap();
        let m3 = apply_change(&m2, &FeatureChange::remove(f)).unwrap();
        assert_eq!(m3, m);
    }

    #[test]
    fn reconstruct_from_features() {
        let m = amy();
        assert_eq!(Model::from_features(&m.gamma(), &m).unwrap(), m);
    }

    #[test]
    fn action_universe_must_match() {
        let m = amy();
        let other = Model::from_parts(
            vec![GroundAction::new("fly", 1)],
            BTreeSet::new(),
            BTreeSet::new(),
            [],
        )
        .unwrap();
        assert!(matches!(delta(&m, &other), Err(ModelError::ActionUniverseMismatch(_))));
    }

    #[test]
    fn model_invariants() {
        let both = GroundAction::new("a", 1)
            .with_add(facts(&["p"]))
            .with_del(facts(&["p"]));
        assert!(Model::from_parts(vec![both], BTreeSet::new(), BTreeSet::new(), []).is_err());
        let dup = vec![GroundAction::new("a", 1), GroundAction::new("a", 2)];
        assert!(matches!(
            Model::from_parts(dup, BTreeSet::new(), BTreeSet::new(), []),
            Err(ModelError::DuplicateAction(_))
        ));
        assert!(matches!(
            Model::new(BTreeSet::new(), vec![], facts(&["p"]), BTreeSet::new()),
            Err(ModelError::UnknownFact(_))
        ));
    }

    #[test]
    fn dump_is_sorted() {
        let d = amy().dump();
        let lines: Vec<&str> = d.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert_eq!(lines[0], "goal-has-happy");
    }
}
