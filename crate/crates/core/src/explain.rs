//! Concise and progressive explanation search over the space of human models
//! reachable by unit changes toward the robot model.

use std::borrow::Cow;
use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lifted::LiftedModel;
use crate::metrics::{heuristic, rho, HeuristicVariant, MetricKind, PlanPoint, Score};
use crate::model::{
    apply_to_features, check_same_actions, delta_features, digest_features, Direction, Feature,
    FeatureChange, FeatureKind, FeatureSet, Model, ModelError,
};
use crate::pddl::GroundError;
use crate::planner::{optimal_plan_with, plan_cost, Outcome, Plan, PlanCost, PlanError, PlannerConfig, SearchStats};

/// Anything that can be viewed as a feature set and planned on.
pub trait Reconcilable: Clone {
    fn features(&self) -> FeatureSet;
    fn with_features(&self, features: &FeatureSet) -> Result<Self, ModelError>;
    fn grounded(&self) -> Result<Cow<'_, Model>, GroundError>;
}

impl Reconcilable for Model {
    fn features(&self) -> FeatureSet {
        self.gamma()
    }

    fn with_features(&self, features: &FeatureSet) -> Result<Self, ModelError> {
        Model::from_features(features, self)
    }

    fn grounded(&self) -> Result<Cow<'_, Model>, GroundError> {
        Ok(Cow::Borrowed(self))
    }
}

impl Reconcilable for LiftedModel {
    fn features(&self) -> FeatureSet {
        self.gamma()
    }

    fn with_features(&self, features: &FeatureSet) -> Result<Self, ModelError> {
        LiftedModel::with_features(self, features)
    }

    fn grounded(&self) -> Result<Cow<'_, Model>, GroundError> {
        self.ground().map(Cow::Owned)
    }
}

/// Search nodes are keyed by a 64-bit mask over the candidate changes.
pub const MAX_CHANGES: usize = 64;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("the robot model has no plan")]
    RobotUnsolvable,
    #[error("the given plan is not optimal in the robot model (cost {plan_cost}, optimum {optimal})")]
    PlanNotOptimal { plan_cost: String, optimal: u64 },
    #[error("{count} candidate changes exceed the limit of {limit}")]
    TooManyChanges { count: usize, limit: usize },
    #[error("model-space search exceeded its budget of {budget} expansions")]
    BudgetExceeded { budget: u64 },
    #[error("no complete explanation is reachable")]
    NoExplanation,
}

impl ExplainError {
    /// Whether the failure comes from a resource limit rather than the input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            ExplainError::BudgetExceeded { .. } | ExplainError::Plan(PlanError::BudgetExceeded { .. })
        )
    }
}

/// How actions are compared when computing plan edit distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanNaming {
    /// Full grounded names; `x` and `x-cheap` differ.
    #[default]
    Full,
    /// Schema names only.
    Schema,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub planner: PlannerConfig,
    /// Model-space expansions allowed before giving up.
    pub node_budget: u64,
    pub naming: PlanNaming,
    /// Keep every expanded node with its heuristic and outgoing edges.
    pub record_expansions: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            planner: PlannerConfig::default(),
            node_budget: 1_000_000,
            naming: PlanNaming::Full,
            record_expansions: false,
        }
    }
}

/// Default per-change search penalty.
pub fn default_epsilon() -> Score {
    Score::new(1, 1000)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid epsilon `{0}`: expected a nonnegative rational such as 0.001 or 1/1000")]
pub struct EpsilonError(String);

/// Parses `0.001`, `1/1000` or `0` into an exact rational.
pub fn parse_epsilon(s: &str) -> Result<Score, EpsilonError> {
    let bad = || EpsilonError(s.to_string());
    let s = s.trim();
    let value = if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i128.pow(frac.len() as u32);
        let num: i128 = frac.parse().map_err(|_| bad())?;
        Score::new(int * den + num, den)
    } else {
        Score::from_str(s).map_err(|_| bad())?
    };
    if value < Score::from_integer(0) || s.starts_with('-') {
        return Err(bad());
    }
    Ok(value)
}

type Memo = HashMap<(u64, PlanNaming), Option<Arc<Evaluation>>>;

/// The reconciliation setting: robot model, human model, and a robot plan
/// that is optimal in the robot model. Planner results for change masks are
/// cached here, so concise and progressive searches on one problem share
/// them.
#[derive(Debug)]
pub struct ReconciliationProblem<M> {
    robot: M,
    human: M,
    robot_plan: Plan,
    human_features: FeatureSet,
    robot_features: FeatureSet,
    changes: Vec<FeatureChange>,
    memo: Mutex<Memo>,
}

impl<M: Reconcilable> ReconciliationProblem<M> {
    /// Uses the robot model's canonical optimal plan.
    pub fn new(robot: M, human: M, planner: &PlannerConfig) -> Result<Self, ExplainError> {
        let result = optimal_plan_with(robot.grounded()?.as_ref(), planner)?;
        let plan = match result.outcome {
            Outcome::Solved(plan) => plan,
            Outcome::Unsolvable => return Err(ExplainError::RobotUnsolvable),
        };
        Self::assemble(robot, human, plan)
    }

    /// Uses `plan`, which must be optimal in the robot model.
    pub fn with_plan<S: AsRef<str>>(
        robot: M,
        human: M,
        plan: &[S],
        planner: &PlannerConfig,
    ) -> Result<Self, ExplainError> {
        let grounded = robot.grounded()?;
        let optimal = match optimal_plan_with(&grounded, planner)?.outcome {
            Outcome::Solved(p) => p.cost,
            Outcome::Unsolvable => return Err(ExplainError::RobotUnsolvable),
        };
        let cost = plan_cost(plan, &grounded)?;
        if cost != PlanCost::Cost(optimal) {
            return Err(ExplainError::PlanNotOptimal {
                plan_cost: match cost {
                    PlanCost::Cost(c) => c.to_string(),
                    PlanCost::Infeasible => "infeasible".into(),
                },
                optimal,
            });
        }
        drop(grounded);
        let plan = Plan {
            actions: plan.iter().map(|s| s.as_ref().to_string()).collect(),
            cost: optimal,
        };
        Self::assemble(robot, human, plan)
    }

    fn assemble(robot: M, human: M, robot_plan: Plan) -> Result<Self, ExplainError> {
        let robot_features = robot.features();
        let human_features = human.features();
        check_same_actions(&human_features, &robot_features)?;
        let mut changes = delta_features(&human_features, &robot_features);
        changes.sort_by_cached_key(|c| (!raises_costs(c, &human_features), c.feature.clone(), c.direction));
        Ok(ReconciliationProblem {
            robot,
            human,
            robot_plan,
            human_features,
            robot_features,
            changes,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn robot(&self) -> &M {
        &self.robot
    }

    pub fn human(&self) -> &M {
        &self.human
    }

    pub fn robot_plan(&self) -> &Plan {
        &self.robot_plan
    }

    /// Every unit change moving the human model toward the robot model.
    /// Changes that can only raise plan costs come first, then the rest by
    /// feature. Search masks index into this list and ties between equally
    /// good orderings go to the lexicographically smaller index sequence.
    pub fn changes(&self) -> &[FeatureChange] {
        &self.changes
    }

    pub fn human_features(&self) -> &FeatureSet {
        &self.human_features
    }

    pub fn robot_features(&self) -> &FeatureSet {
        &self.robot_features
    }

    /// Human features after applying the changes selected by `mask`.
    pub fn features_of(&self, mask: u64) -> Result<FeatureSet, ModelError> {
        let mut out = self.human_features.clone();
        for (i, c) in self.changes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                apply_to_features(&mut out, c)?;
            }
        }
        Ok(out)
    }

    /// Applies a change sequence to the human model's features. Each change
    /// must be applicable at its position.
    pub fn apply_sequence(&self, changes: &[FeatureChange]) -> Result<FeatureSet, ModelError> {
        let mut out = self.human_features.clone();
        for c in changes {
            apply_to_features(&mut out, c)?;
        }
        Ok(out)
    }

    /// Plans on a feature set. Returns `None` when the features do not form
    /// a valid model.
    pub fn evaluate(
        &self,
        features: &FeatureSet,
        config: &SearchConfig,
    ) -> Result<Option<Evaluation>, ExplainError> {
        match self.human.with_features(features) {
            Ok(model) => self.evaluate_model(&model, features, config).map(Some),
            Err(_) => Ok(None),
        }
    }

    fn evaluate_model(
        &self,
        model: &M,
        features: &FeatureSet,
        config: &SearchConfig,
    ) -> Result<Evaluation, ExplainError> {
        let grounded = model.grounded()?;
        let result = optimal_plan_with(&grounded, &config.planner)?;
        let robot_plan_cost = match plan_cost(&self.robot_plan.actions, &grounded) {
            Ok(c) => c,
            Err(PlanError::UnknownAction(_)) => PlanCost::Infeasible,
            Err(e) => return Err(e.into()),
        };
        let (solvable, cost_star, mut plan) = match result.outcome {
            Outcome::Solved(p) => (true, p.cost, p.actions),
            Outcome::Unsolvable => (false, 0, Vec::new()),
        };
        // Anchor on the robot plan whenever it is one of the optima.
        if solvable && robot_plan_cost == PlanCost::Cost(cost_star) {
            plan = self.robot_plan.actions.clone();
        }
        Ok(Evaluation {
            solvable,
            point: PlanPoint::new(cost_star, plan_key(&plan, &grounded, config.naming)),
            plan,
            robot_plan_cost,
            digest: digest_features(features),
            stats: result.stats,
        })
    }

    /// The robot plan's endpoint: its cost and (normalized) action list.
    pub fn target(&self, config: &SearchConfig) -> Result<PlanPoint, ExplainError> {
        let grounded = self.robot.grounded()?;
        let key = plan_key(&self.robot_plan.actions, &grounded, config.naming);
        Ok(PlanPoint::new(self.robot_plan.cost, key))
    }

    /// Whether an evaluated model makes the robot plan optimal at its
    /// robot-model cost.
    pub fn completes(&self, e: &Evaluation) -> bool {
        e.solvable
            && e.robot_plan_cost == PlanCost::Cost(e.point.cost)
            && e.point.cost == self.robot_plan.cost
    }

    fn gap(&self, e: &Evaluation) -> Gap {
        match e.robot_plan_cost {
            PlanCost::Cost(c) => Gap::Finite(c.saturating_sub(e.point.cost)),
            PlanCost::Infeasible => Gap::Infinite,
        }
    }

    /// Additions come from the robot model and removals take away only
    /// features the robot model lacks.
    fn moves_toward_robot(&self, features: &FeatureSet) -> bool {
        features
            .difference(&self.human_features)
            .all(|f| self.robot_features.contains(f))
            && self
                .human_features
                .difference(features)
                .all(|f| !self.robot_features.contains(f))
    }

    fn evaluate_valid(&self, features: &FeatureSet, config: &SearchConfig) -> Result<Evaluation, ExplainError> {
        let model = self.human.with_features(features)?;
        self.evaluate_model(&model, features, config)
    }

    /// Checks that the changes form an explanation: they move toward the
    /// robot model and strictly shrink the robot plan's optimality gap.
    pub fn is_explanation(&self, changes: &[FeatureChange], config: &SearchConfig) -> Result<bool, ExplainError> {
        let features = self.apply_sequence(changes)?;
        if !self.moves_toward_robot(&features) {
            return Ok(false);
        }
        let before = self.evaluate_valid(&self.human_features, config)?;
        let after = self.evaluate_valid(&features, config)?;
        Ok(self.gap(&after) < self.gap(&before))
    }

    /// Checks that the changes form a complete explanation.
    pub fn is_complete(&self, changes: &[FeatureChange], config: &SearchConfig) -> Result<bool, ExplainError> {
        if !self.is_explanation(changes, config)? {
            return Ok(false);
        }
        let features = self.apply_sequence(changes)?;
        let after = self.evaluate_valid(&features, config)?;
        Ok(self.completes(&after))
    }

    /// A complete explanation is monotonic when adding any further changes
    /// toward the robot model keeps it complete. Exhaustive over the
    /// remaining changes, so limited to 20 of them.
    pub fn is_monotonic(&self, changes: &[FeatureChange], config: &SearchConfig) -> Result<bool, ExplainError> {
        if !self.is_complete(changes, config)? {
            return Ok(false);
        }
        let features = self.apply_sequence(changes)?;
        let rest: Vec<&FeatureChange> = self
            .changes
            .iter()
            .filter(|c| match c.direction {
                Direction::Add => !features.contains(&c.feature),
                Direction::Remove => features.contains(&c.feature),
            })
            .collect();
        if rest.len() > 20 {
            return Err(ExplainError::TooManyChanges {
                count: rest.len(),
                limit: 20,
            });
        }
        for subset in 1u32..(1 << rest.len()) {
            let mut f = features.clone();
            for (i, c) in rest.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    apply_to_features(&mut f, c)?;
                }
            }
            match self.evaluate(&f, config)? {
                Some(e) if self.completes(&e) => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Remaining changes at a node, most promising first: when the node's
    /// optimal cost does not exceed the target, changes that can only raise
    /// plan costs come first; ties fall back to feature order.
    pub fn candidate_changes(&self, mask: u64, cost_star: u64) -> Vec<usize> {
        let raise_first = cost_star <= self.robot_plan.cost;
        let mut out: Vec<usize> = (0..self.changes.len()).filter(|i| mask >> i & 1 == 0).collect();
        out.sort_by(|&a, &b| {
            let (ca, cb) = (&self.changes[a], &self.changes[b]);
            let rank = |c: &FeatureChange| {
                if raise_first && raises_costs(c, &self.human_features) {
                    0
                } else {
                    1
                }
            };
            rank(ca)
                .cmp(&rank(cb))
                .then_with(|| ca.feature.cmp(&cb.feature))
                .then_with(|| ca.direction.cmp(&cb.direction))
        });
        out
    }
}

fn raises_costs(c: &FeatureChange, human: &FeatureSet) -> bool {
    use Direction::*;
    match (c.direction, c.feature.kind()) {
        (Add, FeatureKind::Precondition)
        | (Remove, FeatureKind::AddEffect)
        | (Add, FeatureKind::DeleteEffect)
        | (Remove, FeatureKind::Init)
        | (Add, FeatureKind::Goal) => true,
        (Add, FeatureKind::Cost) => {
            let Feature::Cost { action, cost } = &c.feature else {
                return false;
            };
            human.iter().any(|f| match f {
                Feature::Cost { action: a, cost: old } => a == action && old < cost,
                _ => false,
            })
        }
        _ => false,
    }
}

fn plan_key(plan: &[String], model: &Model, naming: PlanNaming) -> Vec<String> {
    match naming {
        PlanNaming::Full => plan.to_vec(),
        PlanNaming::Schema => plan
            .iter()
            .map(|a| model.action(a).map_or(a.as_str(), |g| g.base_name()).to_string())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Gap {
    Finite(u64),
    Infinite,
}

/// Planner results for one intermediate model.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub solvable: bool,
    /// Optimal cost (0 when unsolvable) and the plan key used by metrics.
    pub point: PlanPoint,
    /// Canonical optimal plan, or the robot plan when that is optimal too.
    pub plan: Vec<String>,
    pub robot_plan_cost: PlanCost,
    pub digest: String,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Concise,
    Peg,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Concise => "concise",
            Mode::Peg => "peg",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concise" => Ok(Mode::Concise),
            "peg" => Ok(Mode::Peg),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub change: Option<FeatureChange>,
    pub model_digest: String,
    pub plan: Vec<String>,
    pub solvable: bool,
    pub cost_star: u64,
    pub rho: u64,
    pub planner: SearchStats,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplainStats {
    /// Model-space nodes expanded.
    pub expansions: u64,
    /// Model-space nodes generated.
    pub generated: u64,
    /// Planner runs made by this search; models already cached by an
    /// earlier search on the same problem are not counted.
    pub planner_calls: u64,
    pub planner_expansions: u64,
    #[serde(with = "crate::util::seconds")]
    pub wall_time: Duration,
}

/// One expanded search node, kept for inspecting heuristic behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedNode {
    pub mask: u64,
    pub h: Score,
    pub edges: Vec<ExpandedEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedEdge {
    pub change: usize,
    pub rho: u64,
    pub child_h: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationTrace {
    pub mode: Mode,
    pub changes: Vec<FeatureChange>,
    /// Step 0 is the human model; step `i` follows the `i`-th change.
    pub steps: Vec<TraceStep>,
    pub sum_rho: u64,
    pub complete: bool,
    pub size: usize,
    pub metric: MetricKind,
    pub variant: HeuristicVariant,
    pub epsilon: String,
    pub stats: ExplainStats,
    #[serde(skip)]
    pub expanded: Vec<ExpandedNode>,
}

impl ExplanationTrace {
    /// `step,cost_star,rho` rows, starting with the human model.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "cost_star", "rho"])?;
        for s in &self.steps {
            w.write_record([s.step.to_string(), s.cost_star.to_string(), s.rho.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Short human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} explanation, {} change(s), sum rho ({}) = {}, complete = {}\n",
            self.mode, self.size, self.metric, self.sum_rho, self.complete
        );
        for s in &self.steps {
            let change = s.change.as_ref().map_or("(human model)".to_string(), |c| c.to_string());
            let cost = if s.solvable { s.cost_star.to_string() } else { "unsolvable".into() };
            out.push_str(&format!("{:>3}  {change}  cost* = {cost}  rho = {}\n", s.step, s.rho));
        }
        out
    }
}

/// Planner calls through the problem's cache, with per-search counters.
struct Evaluator<'p, M> {
    problem: &'p ReconciliationProblem<M>,
    config: &'p SearchConfig,
    planner_calls: u64,
    planner_expansions: u64,
}

impl<'p, M: Reconcilable> Evaluator<'p, M> {
    fn new(problem: &'p ReconciliationProblem<M>, config: &'p SearchConfig) -> Result<Self, ExplainError> {
        let n = problem.changes.len();
        if n > MAX_CHANGES {
            return Err(ExplainError::TooManyChanges {
                count: n,
                limit: MAX_CHANGES,
            });
        }
        Ok(Evaluator {
            problem,
            config,
            planner_calls: 0,
            planner_expansions: 0,
        })
    }

    fn get(&mut self, mask: u64) -> Result<Option<Arc<Evaluation>>, ExplainError> {
        let key = (mask, self.config.naming);
        if let Some(e) = self.problem.memo.lock().expect("memo lock").get(&key) {
            return Ok(e.clone());
        }
        let e = match self.problem.features_of(mask) {
            Ok(features) => self.problem.evaluate(&features, self.config)?.map(Arc::new),
            Err(_) => None,
        };
        if let Some(e) = &e {
            self.planner_calls += 1;
            self.planner_expansions += e.stats.expansions;
        }
        self.problem.memo.lock().expect("memo lock").insert(key, e.clone());
        Ok(e)
    }

    fn trace(
        &mut self,
        mode: Mode,
        path: &[usize],
        metric: MetricKind,
        variant: HeuristicVariant,
        epsilon: Score,
        mut stats: ExplainStats,
        started: Instant,
    ) -> Result<ExplanationTrace, ExplainError> {
        let mut mask = 0u64;
        let mut prev = self.get(0)?.expect("the human model is valid");
        let mut steps = vec![step_record(0, None, &prev, 0)];
        let mut sum_rho = 0;
        for (i, &c) in path.iter().enumerate() {
            mask |= 1 << c;
            let cur = self.get(mask)?.expect("trace steps are valid models");
            let r = rho(metric, &prev.point, &cur.point);
            sum_rho += r;
            steps.push(step_record(i + 1, Some(self.problem.changes[c].clone()), &cur, r));
            prev = cur;
        }
        stats.planner_calls = self.planner_calls;
        stats.planner_expansions = self.planner_expansions;
        stats.wall_time = started.elapsed();
        Ok(ExplanationTrace {
            mode,
            changes: path.iter().map(|&c| self.problem.changes[c].clone()).collect(),
            steps,
            sum_rho,
            complete: self.problem.completes(&prev),
            size: path.len(),
            metric,
            variant,
            epsilon: epsilon.to_string(),
            stats,
            expanded: Vec::new(),
        })
    }
}

fn step_record(step: usize, change: Option<FeatureChange>, e: &Evaluation, rho: u64) -> TraceStep {
    TraceStep {
        step,
        change,
        model_digest: e.digest.clone(),
        plan: e.plan.clone(),
        solvable: e.solvable,
        cost_star: e.point.cost,
        rho,
        planner: e.stats,
    }
}

/// Minimum-cardinality complete explanation, found breadth first. Among sets
/// of the minimum size the one with the smallest sorted change indices wins;
/// its order is the order in which the search first reached it. `metric`
/// only affects the reported ρ values.
pub fn generate_concise<M: Reconcilable>(
    problem: &ReconciliationProblem<M>,
    metric: MetricKind,
    config: &SearchConfig,
) -> Result<ExplanationTrace, ExplainError> {
    let started = Instant::now();
    let mut eval = Evaluator::new(problem, config)?;
    let mut stats = ExplainStats::default();
    let mut level: Vec<(u64, Vec<usize>)> = vec![(0, Vec::new())];
    let mut seen: HashMap<u64, ()> = HashMap::new();
    seen.insert(0, ());
    while !level.is_empty() {
        let mut best: Option<(Vec<usize>, &Vec<usize>)> = None;
        for (mask, path) in &level {
            let e = eval.get(*mask)?.expect("only valid models are queued");
            stats.expansions += 1;
            if stats.expansions > config.node_budget {
                return Err(ExplainError::BudgetExceeded {
                    budget: config.node_budget,
                });
            }
            if problem.completes(&e) {
                let mut sorted = path.clone();
                sorted.sort_unstable();
                if best.as_ref().is_none_or(|(b, _)| sorted < *b) {
                    best = Some((sorted, path));
                }
            }
        }
        if let Some((_, path)) = best {
            let path = path.clone();
            return eval.trace(
                Mode::Concise,
                &path,
                metric,
                HeuristicVariant::default(),
                Score::from_integer(0),
                stats,
                started,
            );
        }
        let mut next = Vec::new();
        for (mask, path) in &level {
            let cost = eval.get(*mask)?.expect("queued").point.cost;
            for c in problem.candidate_changes(*mask, cost) {
                let child = mask | 1 << c;
                if seen.contains_key(&child) {
                    continue;
                }
                seen.insert(child, ());
                stats.generated += 1;
                if eval.get(child)?.is_none() {
                    continue;
                }
                let mut p = path.clone();
                p.push(c);
                next.push((child, p));
            }
        }
        level = next;
    }
    Err(ExplainError::NoExplanation)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpenEntry {
    f: Score,
    h: Score,
    path: Vec<usize>,
    g: Score,
    mask: u64,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f
            .cmp(&other.f)
            .then_with(|| self.h.cmp(&other.h))
            .then_with(|| self.path.len().cmp(&other.path.len()))
            .then_with(|| self.path.cmp(&other.path))
            .then_with(|| self.mask.cmp(&other.mask))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct NodeState {
    g: Score,
    path: Vec<usize>,
    closed: bool,
}

/// A* over change sets. Edges cost ρ plus `epsilon`; a node's g keeps the
/// best ordering found for its set. Returns an ordering of a complete
/// explanation minimizing Σρ + ε·size (exactly, given a consistent
/// heuristic).
pub fn generate_progressive<M: Reconcilable>(
    problem: &ReconciliationProblem<M>,
    metric: MetricKind,
    variant: HeuristicVariant,
    epsilon: Score,
    config: &SearchConfig,
) -> Result<ExplanationTrace, ExplainError> {
    let started = Instant::now();
    let n = problem.changes.len();
    let target = problem.target(config)?;
    let mut eval = Evaluator::new(problem, config)?;
    let mut stats = ExplainStats::default();
    let mut expanded = Vec::new();
    let zero = Score::from_integer(0);

    let root = eval.get(0)?.expect("the human model is valid");
    let h0 = heuristic(metric, variant, &root.point, &target, n);
    let mut nodes: HashMap<u64, NodeState> = HashMap::new();
    nodes.insert(
        0,
        NodeState {
            g: zero,
            path: Vec::new(),
            closed: false,
        },
    );
    let mut open = BinaryHeap::new();
    open.push(Reverse(OpenEntry {
        f: h0,
        h: h0,
        path: Vec::new(),
        g: zero,
        mask: 0,
    }));

    while let Some(Reverse(entry)) = open.pop() {
        let node = nodes.get_mut(&entry.mask).expect("queued nodes are known");
        if node.closed || node.g != entry.g || node.path != entry.path {
            continue;
        }
        node.closed = true;
        let e = eval.get(entry.mask)?.expect("queued nodes are valid");
        if problem.completes(&e) {
            let mut trace = eval.trace(Mode::Peg, &entry.path, metric, variant, epsilon, stats, started)?;
            trace.expanded = expanded;
            return Ok(trace);
        }
        stats.expansions += 1;
        if stats.expansions > config.node_budget {
            return Err(ExplainError::BudgetExceeded {
                budget: config.node_budget,
            });
        }
        let mut edges = Vec::new();
        for c in problem.candidate_changes(entry.mask, e.point.cost) {
            let child = entry.mask | 1 << c;
            let Some(ce) = eval.get(child)? else {
                continue;
            };
            stats.generated += 1;
            let r = rho(metric, &e.point, &ce.point);
            let remaining = n - child.count_ones() as usize;
            let h = heuristic(metric, variant, &ce.point, &target, remaining);
            if config.record_expansions {
                edges.push(ExpandedEdge {
                    change: c,
                    rho: r,
                    child_h: h,
                });
            }
            let g = entry.g + Score::from_integer(i128::from(r)) + epsilon;
            let mut path = entry.path.clone();
            path.push(c);
            let better = match nodes.entry(child) {
                Entry::Vacant(v) => {
                    v.insert(NodeState {
                        g,
                        path: path.clone(),
                        closed: false,
                    });
                    true
                }
                Entry::Occupied(mut o) => {
                    let s = o.get_mut();
                    if g < s.g || (g == s.g && !s.closed && path < s.path) {
                        s.g = g;
                        s.path = path.clone();
                        s.closed = false;
                        true
                    } else {
                        false
                    }
                }
            };
            if better {
                open.push(Reverse(OpenEntry {
                    f: g + h,
                    h,
                    path,
                    g,
                    mask: child,
                }));
            }
        }
        if config.record_expansions {
            expanded.push(ExpandedNode {
                mask: entry.mask,
                h: heuristic(metric, variant, &e.point, &target, n - entry.mask.count_ones() as usize),
                edges,
            });
        }
    }
    Err(ExplainError::NoExplanation)
}
