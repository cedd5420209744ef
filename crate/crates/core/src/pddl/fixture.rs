//! Line-oriented model files.
//!
//! ```text
//! [human]                      # optional section header
//! init: not-holiday
//! goal: happy
//! action OUTLET-SHOPPING 5 (1) # base cost, optional reduced cost
//! pre: not-holiday (car-ready is-sunny)
//! eff+: happy
//! eff-: ...
//! ```
//!
//! A parenthesised group on the `pre:` line is the condition under which the
//! reduced cost applies. Such an action is split into two plain actions:
//! `NAME` with the base cost and `NAME-cheap` with the condition added to its
//! preconditions and the reduced cost.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Fact, GroundAction, Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("no section named `{0}`")]
    MissingSection(String),
    #[error("split variant `{0}` collides with an existing action")]
    VariantCollision(String),
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheapVariant {
    pub cost: u64,
    pub condition: Vec<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalAction {
    pub name: String,
    pub cost: u64,
    pub cheap: Option<CheapVariant>,
    pub preconditions: Vec<Fact>,
    pub add_effects: Vec<Fact>,
    pub delete_effects: Vec<Fact>,
}

/// A model whose actions may carry a conditional reduced cost.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionalModel {
    pub init: Vec<Fact>,
    pub goal: Vec<Fact>,
    pub extra_facts: Vec<Fact>,
    pub actions: Vec<ConditionalAction>,
}

/// Replaces every conditional-cost action by its two plain variants.
/// `universe` adds facts to the model's fact universe.
pub fn split_conditional_costs(
    model: &ConditionalModel,
    universe: &BTreeSet<Fact>,
) -> Result<Model, FixtureError> {
    let names: BTreeSet<&str> = model.actions.iter().map(|a| a.name.as_str()).collect();
    let mut actions = Vec::new();
    for a in &model.actions {
        let base = GroundAction::new(a.name.clone(), a.cost)
            .with_pre(a.preconditions.iter().cloned())
            .with_add(a.add_effects.iter().cloned())
            .with_del(a.delete_effects.iter().cloned());
        if let Some(cheap) = &a.cheap {
            let name = format!("{}-cheap", a.name);
            if names.contains(name.as_str()) {
                return Err(FixtureError::VariantCollision(name));
            }
            let mut variant = base.clone().with_pre(cheap.condition.iter().cloned());
            variant.name = name;
            variant.cost = cheap.cost;
            variant.signature = Some(vec![a.name.clone()]);
            actions.push(variant);
        }
        actions.push(base);
    }
    let mut facts = universe.clone();
    facts.extend(model.extra_facts.iter().cloned());
    Ok(Model::from_parts(
        actions,
        model.init.iter().cloned().collect(),
        model.goal.iter().cloned().collect(),
        facts,
    )?)
}

/// Parsed fixture file: one or more named models sharing a fact universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub sections: Vec<(String, ConditionalModel)>,
}

/// Section name used when a file has no `[name]` header.
pub const DEFAULT_SECTION: &str = "model";

impl Fixture {
    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|(n, _)| n.as_str())
    }

    pub fn section(&self, name: &str) -> Option<&ConditionalModel> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    /// Every fact mentioned anywhere in the file.
    pub fn universe(&self) -> BTreeSet<Fact> {
        let mut out = BTreeSet::new();
        for (_, m) in &self.sections {
            out.extend(m.init.iter().cloned());
            out.extend(m.goal.iter().cloned());
            out.extend(m.extra_facts.iter().cloned());
            for a in &m.actions {
                out.extend(a.preconditions.iter().cloned());
                out.extend(a.add_effects.iter().cloned());
                out.extend(a.delete_effects.iter().cloned());
                if let Some(c) = &a.cheap {
                    out.extend(c.condition.iter().cloned());
                }
            }
        }
        out
    }

    /// The named section, split and built over the shared universe.
    pub fn model(&self, name: &str) -> Result<Model, FixtureError> {
        let m = self
            .section(name)
            .ok_or_else(|| FixtureError::MissingSection(name.to_string()))?;
        split_conditional_costs(m, &self.universe())
    }

    /// The single model of a section-less file, or the `robot` section.
    pub fn primary(&self) -> Result<Model, FixtureError> {
        if self.section(DEFAULT_SECTION).is_some() {
            self.model(DEFAULT_SECTION)
        } else {
            self.model("robot")
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FixtureError {
    FixtureError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_fact(token: &str, line: usize) -> Result<Fact, FixtureError> {
    token
        .to_ascii_lowercase()
        .parse()
        .map_err(|source| FixtureError::Model { line, source })
}

fn parse_facts(text: &str, line: usize) -> Result<Vec<Fact>, FixtureError> {
    text.split_whitespace().map(|t| parse_fact(t, line)).collect()
}

/// Splits `a b (c d)` into the plain facts and the parenthesised group.
fn parse_pre(text: &str, line: usize) -> Result<(Vec<Fact>, Option<Vec<Fact>>), FixtureError> {
    let mut plain = String::new();
    let mut group: Option<String> = None;
    let mut rest = text;
    while let Some(open) = rest.find('(') {
        let starts_group = open == 0 || rest[..open].ends_with(char::is_whitespace);
        if !starts_group {
            // `name(args)` fact: copy through its closing paren.
            let close = rest[open..]
                .find(')')
                .ok_or_else(|| syntax(line, "unbalanced parentheses"))?;
            plain.push_str(&rest[..open + close + 1]);
            rest = &rest[open + close + 1..];
            continue;
        }
        if group.is_some() {
            return Err(syntax(line, "at most one condition group per `pre:` line"));
        }
        plain.push_str(&rest[..open]);
        let body = &rest[open + 1..];
        let mut depth = 0usize;
        let mut end = None;
        for (i, c) in body.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    end = Some(i);
                    break;
                }
                ')' => depth -= 1,
                _ => {}
            }
        }
        let end = end.ok_or_else(|| syntax(line, "unbalanced parentheses"))?;
        group = Some(body[..end].to_string());
        plain.push(' ');
        rest = &body[end + 1..];
    }
    plain.push_str(rest);
    let group = group.map(|g| parse_facts(&g, line)).transpose()?;
    Ok((parse_facts(&plain, line)?, group))
}

/// Parses a fixture file.
pub fn parse_fixture(text: &str) -> Result<Fixture, FixtureError> {
    let mut sections: Vec<(String, ConditionalModel)> = Vec::new();
    let mut current: Option<(String, ConditionalModel)> = None;
    let mut pending_group: Option<(usize, Vec<Fact>)> = None;

    let finish_action = |m: &mut ConditionalModel, pending: &mut Option<(usize, Vec<Fact>)>| -> Result<(), FixtureError> {
        if let Some((line, group)) = pending.take() {
            let a = m.actions.last_mut().expect("group belongs to an action");
            match &mut a.cheap {
                Some(c) => c.condition = group,
                None => return Err(syntax(line, "condition group on an action without a reduced cost")),
            }
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if let Some((n, mut m)) = current.take() {
                finish_action(&mut m, &mut pending_group)?;
                sections.push((n, m));
            }
            let name = name.trim().to_ascii_lowercase();
            if name.is_empty() || sections.iter().any(|(n, _)| *n == name) {
                return Err(syntax(line, format!("bad or duplicate section `{name}`")));
            }
            current = Some((name, ConditionalModel::default()));
            continue;
        }
        let (_, model) = current.get_or_insert_with(|| (DEFAULT_SECTION.to_string(), ConditionalModel::default()));
        if let Some(rest) = content.strip_prefix("action") {
            if !rest.starts_with(char::is_whitespace) {
                return Err(syntax(line, format!("unrecognised line `{content}`")));
            }
            finish_action(model, &mut pending_group)?;
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let (name, cost, cheap) = match tokens.as_slice() {
                [name, cost] => (name, cost, None),
                [name, cost, cheap] => (name, cost, Some(cheap)),
                _ => return Err(syntax(line, "expected `action NAME COST [(CHEAP)]`")),
            };
            let cost: u64 = cost
                .parse()
                .map_err(|_| syntax(line, format!("bad cost `{cost}`")))?;
            let cheap = cheap
                .map(|c| {
                    c.strip_prefix('(')
                        .and_then(|c| c.strip_suffix(')'))
                        .and_then(|c| c.parse::<u64>().ok())
                        .ok_or_else(|| syntax(line, format!("bad reduced cost `{c}`")))
                })
                .transpose()?;
            let name = name.to_ascii_lowercase();
            crate::model::check_identifier(&name).map_err(|source| FixtureError::Model { line, source })?;
            model.actions.push(ConditionalAction {
                name,
                cost,
                cheap: cheap.map(|cost| CheapVariant {
                    cost,
                    condition: Vec::new(),
                }),
                preconditions: Vec::new(),
                add_effects: Vec::new(),
                delete_effects: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("unrecognised line `{content}`")))?;
        match key.trim() {
            "init" => model.init.extend(parse_facts(value, line)?),
            "goal" => model.goal.extend(parse_facts(value, line)?),
            "facts" => model.extra_facts.extend(parse_facts(value, line)?),
            k @ ("pre" | "eff+" | "eff-") => {
                let Some(action) = model.actions.last_mut() else {
                    return Err(syntax(line, format!("`{k}:` before any action")));
                };
                match k {
                    "pre" => {
                        let (plain, group) = parse_pre(value, line)?;
                        action.preconditions.extend(plain);
                        if let Some(g) = group {
                            if pending_group.is_some() {
                                return Err(syntax(line, "duplicate condition group"));
                            }
                            pending_group = Some((line, g));
                        }
                    }
                    "eff+" => action.add_effects.extend(parse_facts(value, line)?),
                    _ => action.delete_effects.extend(parse_facts(value, line)?),
                }
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    if let Some((n, mut m)) = current.take() {
        finish_action(&mut m, &mut pending_group)?;
        sections.push((n, m));
    }
    Ok(Fixture { sections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Feature;

    const AMY: &str = include_str!("../../data/amy_monica.model");

    fn has(m: &Model, feature: &str) -> bool {
        m.gamma().contains(&feature.parse::<Feature>().unwrap())
    }

    #[test]
    fn splits_outlet_shopping() {
        let fx = parse_fixture(AMY).unwrap();
        let amy = fx.model("human").unwrap();
        assert_eq!(amy.num_actions(), 4);
        let os = amy.action("outlet-shopping").unwrap();
        assert_eq!(os.cost, 5);
        assert_eq!(os.preconditions.len(), 1);
        let cheap = amy.action("outlet-shopping-cheap").unwrap();
        assert_eq!(cheap.cost, 1);
        let pre: Vec<String> = cheap.preconditions.iter().map(|f| f.to_string()).collect();
        assert_eq!(pre, ["car-ready", "is-sunny", "not-holiday"]);
        assert_eq!(cheap.base_name(), "outlet-shopping");
    }

    #[test]
    fn splits_visit_park() {
        let amy = parse_fixture(AMY).unwrap().model("human").unwrap();
        let vp = amy.action("visit-park").unwrap();
        assert_eq!((vp.cost, vp.preconditions.len()), (10, 0));
        let cheap = amy.action("visit-park-cheap").unwrap();
        assert_eq!((cheap.cost, cheap.preconditions.len()), (9, 2));
    }

    #[test]
    fn gamma_of_split_model() {
        let amy = parse_fixture(AMY).unwrap().model("human").unwrap();
        for f in [
            "init-has-not-holiday",
            "goal-has-happy",
            "outlet-shopping-has-precondition-not-holiday",
            "outlet-shopping-has-add-effect-happy",
            "outlet-shopping-cheap-has-cost-1",
            "outlet-shopping-has-cost-5",
        ] {
            assert!(has(&amy, f), "{f}");
        }
        // init+goal, outlet-shopping, its cheap variant, visit-park, its cheap variant
        assert_eq!(amy.gamma().len(), 2 + 3 + 5 + 2 + 4);
    }

    #[test]
    fn plain_action_is_unchanged() {
        let fx = parse_fixture("action walk 2\npre: a\neff+: b\neff-: a\ninit: a\ngoal: b").unwrap();
        let m = fx.primary().unwrap();
        assert_eq!(m.num_actions(), 1);
        assert_eq!(m.action("walk").unwrap().cost, 2);
    }

    #[test]
    fn shared_universe_across_sections() {
        let fx = parse_fixture(AMY).unwrap();
        assert_eq!(fx.model("robot").unwrap().facts(), fx.model("human").unwrap().facts());
    }

    #[test]
    fn variant_collision() {
        let text = "action a 3 (1)\npre: (p)\naction a-cheap 2\n";
        assert!(matches!(
            parse_fixture(text).unwrap().primary(),
            Err(FixtureError::VariantCollision(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        assert!(matches!(parse_fixture("init: a\nbogus"), Err(FixtureError::Syntax { line: 2, .. })));
        assert!(matches!(parse_fixture("pre: a"), Err(FixtureError::Syntax { line: 1, .. })));
        assert!(matches!(parse_fixture("action a x"), Err(FixtureError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_fixture("action a 1\npre: (p)"),
            Err(FixtureError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn facts_with_arguments() {
        let fx = parse_fixture("init: at(r,w1)\ngoal: at(r,w2)\naction go 1 (0)\npre: at(r,w1) (fast(r))\neff+: at(r,w2)\n").unwrap();
        let m = fx.primary().unwrap();
        let cheap = m.action("go-cheap").unwrap();
        assert_eq!(cheap.preconditions.len(), 2);
    }
}
