//! Optimal STRIPS planning: A* with the h-max heuristic, plan simulation and
//! validation, and the plan text format.
//!
//! Open-list ties are broken by lower h, then by the lexicographically
//! smallest action-name sequence, so a model always yields the same plan.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Fact, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("planner node budget of {budget} expansions exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("malformed plan line {line}: `{text}`")]
    MalformedPlan { line: usize, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    /// Maximum number of expansions before giving up.
    pub node_budget: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            node_budget: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<String>,
    pub cost: u64,
}

impl Plan {
    pub fn empty() -> Self {
        Plan {
            actions: Vec::new(),
            cost: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "plan")]
pub enum Outcome {
    Solved(Plan),
    Unsolvable,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    #[serde(with = "crate::util::seconds")]
    pub wall_time: Duration,
}

impl SearchStats {
    /// `key: value` lines.
    pub fn to_lines(&self) -> String {
        format!(
            "expansions: {}\ngenerated: {}\nwall_time_s: {:.6}\n",
            self.expansions,
            self.generated,
            self.wall_time.as_secs_f64()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Solved(p) => Some(p),
            Outcome::Unsolvable => None,
        }
    }
}

/// Packed fact set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State(Vec<u64>);

// Lets the search probe its state table with a scratch buffer.
impl std::borrow::Borrow<[u64]> for State {
    fn borrow(&self) -> &[u64] {
        &self.0
    }
}

impl State {
    fn empty(n: usize) -> Self {
        State(vec![0; n.div_ceil(64)])
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn insert(&mut self, i: u32) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }

    #[inline]
    fn remove(&mut self, i: u32) {
        self.0[(i / 64) as usize] &= !(1 << (i % 64));
    }
}

struct TaskAction {
    pre: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
    cost: u64,
}

/// Index-based view of a model used by the search. Action indices follow
/// name order, so comparing index sequences compares name sequences.
pub struct Task<'m> {
    model: &'m Model,
    names: Vec<&'m str>,
    facts: Vec<&'m Fact>,
    actions: Vec<TaskAction>,
    pre_of: Vec<Vec<u32>>,
    init: State,
    goal: Vec<u32>,
}

impl<'m> Task<'m> {
    pub fn new(model: &'m Model) -> Self {
        let facts: Vec<&Fact> = model.facts().iter().collect();
        let index: HashMap<&Fact, u32> = facts.iter().enumerate().map(|(i, f)| (*f, i as u32)).collect();
        let ids = |set: &std::collections::BTreeSet<Fact>| -> Vec<u32> { set.iter().map(|f| index[f]).collect() };
        let mut names = Vec::with_capacity(model.num_actions());
        let mut actions = Vec::with_capacity(model.num_actions());
        let mut pre_of = vec![Vec::new(); facts.len()];
        for (i, a) in model.actions().enumerate() {
            names.push(a.name.as_str());
            let pre = ids(&a.preconditions);
            for &p in &pre {
                pre_of[p as usize].push(i as u32);
            }
            actions.push(TaskAction {
                pre,
                add: ids(&a.add_effects),
                del: ids(&a.delete_effects),
                cost: a.cost,
            });
        }
        let mut init = State::empty(facts.len());
        for f in model.init() {
            init.insert(index[f]);
        }
        let goal = model.goal().iter().map(|f| index[f]).collect();
        Task {
            model,
            names,
            facts,
            actions,
            pre_of,
            init,
            goal,
        }
    }

    pub fn initial_state(&self) -> State {
        self.init.clone()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_name(&self, a: u32) -> &'m str {
        self.names[a as usize]
    }

    pub fn action_cost(&self, a: u32) -> u64 {
        self.actions[a as usize].cost
    }

    pub fn action_index(&self, name: &str) -> Option<u32> {
        self.names.binary_search(&name).ok().map(|i| i as u32)
    }

    pub fn is_goal(&self, s: &State) -> bool {
        self.goal.iter().all(|&g| s.contains(g))
    }

    pub fn applicable(&self, s: &State, a: u32) -> bool {
        self.actions[a as usize].pre.iter().all(|&p| s.contains(p))
    }

    pub fn apply(&self, s: &State, a: u32) -> State {
        let mut next = s.clone();
        self.apply_into(s, a, &mut next);
        next
    }

    fn apply_into(&self, s: &State, a: u32, out: &mut State) {
        let act = &self.actions[a as usize];
        out.0.copy_from_slice(&s.0);
        for &d in &act.del {
            out.remove(d);
        }
        for &f in &act.add {
            out.insert(f);
        }
    }

    /// Facts of `s`, for diagnostics and tests.
    pub fn facts_of(&self, s: &State) -> Vec<&'m Fact> {
        (0..self.facts.len() as u32).filter(|&i| s.contains(i)).map(|i| self.facts[i as usize]).collect()
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }
}

pub const INFINITE: u64 = u64::MAX;

/// Largest action cost for which distances are settled with a bucket
/// queue; costlier tasks fall back to a binary heap.
const BUCKET_COST_LIMIT: u64 = 1 << 12;

/// Reusable buffers for h-max evaluation.
pub struct HMax<'t, 'm> {
    task: &'t Task<'m>,
    dist: Vec<u64>,
    unsat: Vec<u32>,
    buckets: Vec<Vec<u32>>,
    heap: Option<BinaryHeap<Reverse<(u64, u32)>>>,
    no_pre: Vec<u32>,
    is_goal: Vec<bool>,
}

impl<'t, 'm> HMax<'t, 'm> {
    pub fn new(task: &'t Task<'m>) -> Self {
        let no_pre = (0..task.actions.len() as u32)
            .filter(|&a| task.actions[a as usize].pre.is_empty())
            .collect();
        let mut is_goal = vec![false; task.facts.len()];
        for &g in &task.goal {
            is_goal[g as usize] = true;
        }
        HMax {
            task,
            dist: vec![INFINITE; task.facts.len()],
            unsat: vec![0; task.actions.len()],
            buckets: Vec::new(),
            heap: (task.actions.iter().any(|a| a.cost > BUCKET_COST_LIMIT)).then(BinaryHeap::new),
            no_pre,
            is_goal,
        }
    }

    fn push(&mut self, d: u64, f: u32) {
        if d < self.dist[f as usize] {
            self.dist[f as usize] = d;
            if let Some(heap) = &mut self.heap {
                heap.push(Reverse((d, f)));
                return;
            }
            let d = d as usize;
            if d >= self.buckets.len() {
                self.buckets.resize_with(d + 1, Vec::new);
            }
            self.buckets[d].push(f);
        }
    }

    /// Max over goal facts of the cheapest relaxed cost to reach each;
    /// [`INFINITE`] when some goal fact is relaxed-unreachable.
    pub fn eval(&mut self, s: &State) -> u64 {
        let task = self.task;
        if task.is_goal(s) {
            return 0;
        }
        self.dist.fill(INFINITE);
        for (a, act) in task.actions.iter().enumerate() {
            self.unsat[a] = act.pre.len() as u32;
        }
        for b in &mut self.buckets {
            b.clear();
        }
        if let Some(heap) = &mut self.heap {
            heap.clear();
        }
        for i in 0..task.facts.len() as u32 {
            if s.contains(i) {
                self.push(0, i);
            }
        }
        for i in 0..self.no_pre.len() {
            let act = &task.actions[self.no_pre[i] as usize];
            for &f in &act.add {
                self.push(act.cost, f);
            }
        }
        let mut goals_left = task.goal.iter().filter(|&&g| !s.contains(g)).count();
        if self.heap.is_some() {
            while let Some(Reverse((d, f))) = self.heap.as_mut().and_then(BinaryHeap::pop) {
                if self.settle(s, d, f, &mut goals_left) {
                    return d;
                }
            }
            return INFINITE;
        }
        let mut d = 0;
        while d < self.buckets.len() {
            let mut i = 0;
            while i < self.buckets[d].len() {
                let f = self.buckets[d][i];
                i += 1;
                if self.settle(s, d as u64, f, &mut goals_left) {
                    return d as u64;
                }
            }
            d += 1;
        }
        INFINITE
    }

    /// Processes fact `f` popped at distance `d`; true once every goal fact
    /// is settled.
    #[inline]
    fn settle(&mut self, s: &State, d: u64, f: u32, goals_left: &mut usize) -> bool {
        let task = self.task;
        if self.dist[f as usize] < d {
            return false;
        }
        if self.is_goal[f as usize] && !s.contains(f) {
            *goals_left -= 1;
            if *goals_left == 0 {
                return true;
            }
        }
        for &a in &task.pre_of[f as usize] {
            let slot = &mut self.unsat[a as usize];
            *slot -= 1;
            if *slot == 0 {
                let act = &task.actions[a as usize];
                let v = d.saturating_add(act.cost);
                for &g in &act.add {
                    self.push(v, g);
                }
            }
        }
        false
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct OpenEntry {
    f: u64,
    h: u64,
    path: Vec<u32>,
    state: u32,
}

/// Optimal plan with the default budget.
pub fn optimal_plan(model: &Model) -> Result<PlanResult, PlanError> {
    optimal_plan_with(model, &PlannerConfig::default())
}

/// A* with h-max. Returns [`Outcome::Unsolvable`] when the reachable space
/// holds no goal state.
pub fn optimal_plan_with(model: &Model, config: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let start = Instant::now();
    let task = Task::new(model);
    let mut hmax = HMax::new(&task);
    let mut stats = SearchStats::default();

    let mut states: Vec<State> = Vec::new();
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut best_g: Vec<u64> = Vec::new();
    let mut h_of: Vec<u64> = Vec::new();
    let mut closed: Vec<bool> = Vec::new();
    let mut open = BinaryHeap::new();

    let init = task.initial_state();
    let mut scratch = init.clone();
    let h0 = hmax.eval(&init);
    if h0 != INFINITE {
        index.insert(init.clone(), 0);
        states.push(init);
        best_g.push(0);
        h_of.push(h0);
        closed.push(false);
        open.push(Reverse(OpenEntry {
            f: h0,
            h: h0,
            path: Vec::new(),
            state: 0,
        }));
    }

    while let Some(Reverse(entry)) = open.pop() {
        let id = entry.state as usize;
        if closed[id] {
            continue;
        }
        let g = entry.f - entry.h;
        if g > best_g[id] {
            continue;
        }
        if task.is_goal(&states[id]) {
            stats.wall_time = start.elapsed();
            let actions = entry.path.iter().map(|&a| task.action_name(a).to_string()).collect();
            return Ok(PlanResult {
                outcome: Outcome::Solved(Plan { actions, cost: g }),
                stats,
            });
        }
        closed[id] = true;
        if stats.expansions >= config.node_budget {
            return Err(PlanError::BudgetExceeded {
                budget: config.node_budget,
            });
        }
        stats.expansions += 1;
        for a in 0..task.actions.len() as u32 {
            if !task.applicable(&states[id], a) {
                continue;
            }
            task.apply_into(&states[id], a, &mut scratch);
            stats.generated += 1;
            let g2 = g + task.action_cost(a);
            let child = match index.get(scratch.0.as_slice()) {
                Some(&c) => {
                    let c = c as usize;
                    if closed[c] || g2 > best_g[c] {
                        continue;
                    }
                    best_g[c] = g2;
                    c
                }
                None => {
                    let c = states.len();
                    index.insert(scratch.clone(), c as u32);
                    states.push(scratch.clone());
                    best_g.push(g2);
                    let h = hmax.eval(&states[c]);
                    h_of.push(h);
                    // Dead ends never enter the open list.
                    closed.push(h == INFINITE);
                    if h == INFINITE {
                        continue;
                    }
                    c
                }
            };
            let h = h_of[child];
            let mut path = Vec::with_capacity(entry.path.len() + 1);
            path.extend_from_slice(&entry.path);
            path.push(a);
            open.push(Reverse(OpenEntry {
                f: g2 + h,
                h,
                path,
                state: child as u32,
            }));
        }
    }
    stats.wall_time = start.elapsed();
    Ok(PlanResult {
        outcome: Outcome::Unsolvable,
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanCost {
    Cost(u64),
    Infeasible,
}

impl PlanCost {
    pub fn cost(self) -> Option<u64> {
        match self {
            PlanCost::Cost(c) => Some(c),
            PlanCost::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Failure {
    /// Step `step` (0-based) had unmet preconditions.
    Inapplicable {
        step: usize,
        action: String,
        missing: Vec<String>,
    },
    GoalUnsatisfied { missing: Vec<String> },
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Inapplicable { step, action, missing } => {
                write!(f, "step {step} `{action}` is not applicable: missing {}", missing.join(", "))
            }
            Failure::GoalUnsatisfied { missing } => {
                write!(f, "goal unsatisfied: missing {}", missing.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub valid: bool,
    pub cost: Option<u64>,
    pub failure: Option<Failure>,
}

/// Simulates `actions` from the initial state.
pub fn validate_plan<S: AsRef<str>>(actions: &[S], model: &Model) -> Result<Validation, PlanError> {
    let mut state: std::collections::BTreeSet<&Fact> = model.init().iter().collect();
    let mut cost = 0u64;
    for (step, name) in actions.iter().enumerate() {
        let name = name.as_ref();
        let a = model
            .action(name)
            .ok_or_else(|| PlanError::UnknownAction(name.to_string()))?;
        let missing: Vec<String> = a
            .preconditions
            .iter()
            .filter(|f| !state.contains(f))
            .map(Fact::to_string)
            .collect();
        if !missing.is_empty() {
            return Ok(Validation {
                valid: false,
                cost: None,
                failure: Some(Failure::Inapplicable {
                    step,
                    action: name.to_string(),
                    missing,
                }),
            });
        }
        for f in &a.delete_effects {
            state.remove(f);
        }
        state.extend(a.add_effects.iter());
        cost += a.cost;
    }
    let missing: Vec<String> = model
        .goal()
        .iter()
        .filter(|f| !state.contains(f))
        .map(Fact::to_string)
        .collect();
    if !missing.is_empty() {
        return Ok(Validation {
            valid: false,
            cost: None,
            failure: Some(Failure::GoalUnsatisfied { missing }),
        });
    }
    Ok(Validation {
        valid: true,
        cost: Some(cost),
        failure: None,
    })
}

/// Cost of executing `actions` in `model`, or [`PlanCost::Infeasible`].
pub fn plan_cost<S: AsRef<str>>(actions: &[S], model: &Model) -> Result<PlanCost, PlanError> {
    let v = validate_plan(actions, model)?;
    Ok(v.cost.map_or(PlanCost::Infeasible, PlanCost::Cost))
}

/// One `(schema arg ...)` line per action and a trailing cost comment.
pub fn write_plan(plan: &Plan, model: &Model) -> String {
    let mut out = String::new();
    for name in &plan.actions {
        let parts = model
            .action(name)
            .and_then(|a| a.signature.clone())
            .filter(|sig| sig.join("-") == *name)
            .unwrap_or_else(|| vec![name.clone()]);
        let _ = writeln!(out, "({})", parts.join(" "));
    }
    let _ = writeln!(out, "; cost = {}", plan.cost);
    out
}

/// Reads action names from plan text; `(a b c)` becomes `a-b-c`.
pub fn read_plan(text: &str) -> Result<Vec<String>, PlanError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let inner = line
            .strip_prefix('(')
            .and_then(|l| l.strip_suffix(')'))
            .ok_or_else(|| PlanError::MalformedPlan {
                line: i + 1,
                text: raw.to_string(),
            })?;
        let parts: Vec<String> = inner.split_whitespace().map(str::to_ascii_lowercase).collect();
        if parts.is_empty() {
            return Err(PlanError::MalformedPlan {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.push(parts.join("-"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{ground, parse_domain, parse_fixture, parse_problem};

    const AMY: &str = include_str!("../data/amy_monica.model");

    fn amy_monica() -> (Model, Model) {
        let fx = parse_fixture(AMY).unwrap();
        (fx.model("human").unwrap(), fx.model("robot").unwrap())
    }

    fn solve(m: &Model) -> Plan {
        optimal_plan(m).unwrap().plan().cloned().expect("solvable")
    }

    #[test]
    fn amy_prefers_the_outlet() {
        let (amy, _) = amy_monica();
        let p = solve(&amy);
        assert_eq!(p.actions, ["outlet-shopping"]);
        assert_eq!(p.cost, 5);
    }

    #[test]
    fn monica_visits_the_park() {
        let (_, monica) = amy_monica();
        let p = solve(&monica);
        assert_eq!(p.actions, ["visit-park-cheap"]);
        assert_eq!(p.cost, 9);
    }

    #[test]
    fn goal_in_init_gives_empty_plan() {
        let fx = parse_fixture("init: a\ngoal: a\naction x 1\neff+: b").unwrap();
        let m = fx.primary().unwrap();
        assert_eq!(solve(&m), Plan::empty());
        assert_eq!(plan_cost::<&str>(&[], &m).unwrap(), PlanCost::Cost(0));
    }

    #[test]
    fn unsolvable_is_not_an_error() {
        let fx = parse_fixture("init: a\ngoal: c\naction x 1\npre: a\neff+: b").unwrap();
        let r = optimal_plan(&fx.primary().unwrap()).unwrap();
        assert_eq!(r.outcome, Outcome::Unsolvable);
    }

    #[test]
    fn budget_exceeded_is_distinct() {
        let fx = parse_fixture("init: a\ngoal: c\naction x 1\npre: a\neff+: b\naction y 1\npre: b\neff+: c").unwrap();
        let m = fx.primary().unwrap();
        let err = optimal_plan_with(&m, &PlannerConfig { node_budget: 1 }).unwrap_err();
        assert_eq!(err, PlanError::BudgetExceeded { budget: 1 });
        assert!(optimal_plan_with(&m, &PlannerConfig { node_budget: 2 }).is_ok());
    }

    #[test]
    fn plan_cost_examples() {
        let (_, monica) = amy_monica();
        assert_eq!(plan_cost(&["visit-park-cheap"], &monica).unwrap(), PlanCost::Cost(9));
        assert_eq!(plan_cost(&["outlet-shopping"], &monica).unwrap(), PlanCost::Infeasible);
        assert_eq!(
            plan_cost(&["teleport"], &monica).unwrap_err(),
            PlanError::UnknownAction("teleport".into())
        );
    }

    #[test]
    fn validation_diagnostics() {
        let fx = parse_fixture("init: a\ngoal: c\naction x 1\npre: a\neff+: b\naction y 2\npre: b\neff+: c").unwrap();
        let m = fx.primary().unwrap();
        let ok = validate_plan(&["x", "y"], &m).unwrap();
        assert!(ok.valid);
        assert_eq!(ok.cost, Some(3));
        let bad = validate_plan(&["x", "x", "y", "y"], &m).unwrap();
        assert!(bad.valid);
        let step = validate_plan(&["y"], &m).unwrap();
        assert!(!step.valid);
        assert!(matches!(step.failure, Some(Failure::Inapplicable { step: 0, .. })));
        let short = validate_plan(&["x"], &m).unwrap();
        assert!(matches!(short.failure, Some(Failure::GoalUnsatisfied { .. })));
        assert!(short.failure.unwrap().to_string().starts_with("goal unsatisfied"));
    }

    #[test]
    fn zero_cost_cycles_terminate() {
        let fx = parse_fixture(
            "init: a\ngoal: d\naction ab 0\npre: a\neff+: b\neff-: a\naction ba 0\npre: b\neff+: a\neff-: b\naction bd 4\npre: b\neff+: d",
        )
        .unwrap();
        let p = solve(&fx.primary().unwrap());
        assert_eq!(p.actions, ["ab", "bd"]);
        assert_eq!(p.cost, 4);
    }

    #[test]
    fn ties_prefer_lexicographically_smaller_plans() {
        let fx = parse_fixture("init: s\ngoal: g\naction zeta 1\npre: s\neff+: g\naction alpha 1\npre: s\neff+: g").unwrap();
        assert_eq!(solve(&fx.primary().unwrap()).actions, ["alpha"]);
    }

    #[test]
    fn deterministic_statistics() {
        let (amy, _) = amy_monica();
        let a = optimal_plan(&amy).unwrap();
        let b = optimal_plan(&amy).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!((a.stats.expansions, a.stats.generated), (b.stats.expansions, b.stats.generated));
    }

    #[test]
    fn rover_p01_plan_round_trips_through_text() {
        let d = parse_domain(include_str!("../data/rover-domain.pddl")).unwrap();
        let p = parse_problem(include_str!("../data/rover-p01.pddl")).unwrap();
        let m = ground(&d, &p).unwrap();
        let plan = solve(&m);
        assert_eq!(plan.cost, 10);
        assert_eq!(plan_cost(&plan.actions, &m).unwrap(), PlanCost::Cost(plan.cost));
        let text = write_plan(&plan, &m);
        assert!(text.lines().next().unwrap().starts_with('('));
        assert!(text.ends_with("; cost = 10\n"));
        assert_eq!(read_plan(&text).unwrap(), plan.actions);
    }

    #[test]
    fn hmax_is_zero_at_goal_and_infinite_when_unreachable() {
        let fx = parse_fixture("init: a\ngoal: c\naction x 3\npre: a\neff+: b\naction y 2\npre: b\neff+: c").unwrap();
        let m = fx.primary().unwrap();
        let task = Task::new(&m);
        let mut h = HMax::new(&task);
        assert_eq!(h.eval(&task.initial_state()), 5);
        let goal_state = task.apply(&task.apply(&task.initial_state(), 0), 1);
        assert_eq!(h.eval(&goal_state), 0);
        let fx = parse_fixture("init: a\ngoal: c\naction x 3\npre: a\neff+: b").unwrap();
        let m = fx.primary().unwrap();
        let task = Task::new(&m);
        assert_eq!(HMax::new(&task).eval(&task.initial_state()), INFINITE);
    }
}
