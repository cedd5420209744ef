use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use peg_core::experiment::{run_comparison, sweep_missing_prob, BenchConfig, Report, DEFAULT_KINDS};
use peg_core::explain::{parse_epsilon, PlanNaming};
use peg_core::model::dump_features;
use peg_core::pddl::{parse_domain, parse_fixture, parse_problem, DomainAst, Fixture, ProblemAst};
use peg_core::planner::{read_plan, write_plan, Outcome};
use peg_core::{
    generate_concise, generate_progressive, optimal_plan_with, FeatureChange, FeatureKind,
    HeuristicVariant, LiftedModel, MetricKind, Mode, Model, PlannerConfig, Reconcilable,
    ReconciliationProblem, Score, SearchConfig,
};

#[derive(Parser)]
#[command(name = "peg", version, about = "Plan explanation by model reconciliation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print an optimal plan of the robot model.
    Plan(PlanArgs),
    /// Explain the robot plan to the human model.
    Explain(ExplainArgs),
    /// Check a change list against the explanation definitions.
    Validate(ValidateArgs),
    /// Compare progressive and concise explanations on perturbed models.
    Bench(BenchArgs),
    /// Progressive explanations over a range of missing probabilities.
    Sweep(SweepArgs),
    /// Print the feature set of a model, one feature per line.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    /// Schema-level features; edits apply to every grounding.
    Schema,
    /// Grounded features.
    Ground,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Robot,
    Human,
}

#[derive(Args)]
struct RobotInputs {
    /// Robot PDDL domain.
    #[arg(long, visible_alias = "domain", value_name = "FILE")]
    robot_domain: Option<PathBuf>,
    /// Robot PDDL problem.
    #[arg(long, visible_alias = "problem", value_name = "FILE")]
    robot_problem: Option<PathBuf>,
    /// Native model file; `[robot]` and `[human]` sections hold the two models.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["robot_domain", "robot_problem"])]
    fixture: Option<PathBuf>,
    /// Feature granularity for PDDL inputs.
    #[arg(long, value_enum, default_value_t = Level::Schema)]
    level: Level,
}

#[derive(Args)]
struct HumanInputs {
    /// Human PDDL domain; defaults to the robot domain.
    #[arg(long, value_name = "FILE", conflicts_with = "fixture")]
    human_domain: Option<PathBuf>,
    /// Human PDDL problem; defaults to the robot problem.
    #[arg(long, value_name = "FILE", conflicts_with = "fixture")]
    human_problem: Option<PathBuf>,
}

#[derive(Args)]
struct Budgets {
    /// Planner expansions allowed per planning call.
    #[arg(long, env = "PEG_NODE_BUDGET", default_value_t = PlannerConfig::default().node_budget)]
    node_budget: u64,
    /// Model-space expansions allowed per explanation search.
    #[arg(long, default_value_t = SearchConfig::default().node_budget)]
    search_budget: u64,
}

impl Budgets {
    fn search(&self, naming: PlanNaming) -> SearchConfig {
        SearchConfig {
            planner: PlannerConfig {
                node_budget: self.node_budget,
            },
            node_budget: self.search_budget,
            naming,
            record_expansions: false,
        }
    }
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long, default_value_t = MetricKind::P2)]
    metric: MetricKind,
    #[arg(long, default_value_t = HeuristicVariant::Safe)]
    variant: HeuristicVariant,
    /// Per-change search penalty, e.g. 0.001 or 1/1000.
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: Option<Score>,
    /// Action names compared by the plan edit distance.
    #[arg(long, value_enum, default_value_t = Naming::Full)]
    naming: Naming,
}

impl MetricArgs {
    fn epsilon(&self) -> Score {
        self.epsilon.unwrap_or_else(peg_core::explain::default_epsilon)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Naming {
    Full,
    Schema,
}

impl From<Naming> for PlanNaming {
    fn from(n: Naming) -> Self {
        match n {
            Naming::Full => PlanNaming::Full,
            Naming::Schema => PlanNaming::Schema,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Write output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    inputs: RobotInputs,
    #[arg(long, env = "PEG_NODE_BUDGET", default_value_t = PlannerConfig::default().node_budget)]
    node_budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    inputs: RobotInputs,
    #[command(flatten)]
    human: HumanInputs,
    #[arg(long, default_value_t = Mode::Peg)]
    mode: Mode,
    /// Plan to explain instead of the robot model's canonical optimum.
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON trace from `explain`, or one change per line.
    #[arg(value_name = "CHANGES")]
    changes: PathBuf,
    #[command(flatten)]
    inputs: RobotInputs,
    #[command(flatten)]
    human: HumanInputs,
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Naming::Full)]
    naming: Naming,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    inputs: RobotInputs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Feature kinds eligible for deletion, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KINDS.map(KindArg))]
    kinds: Vec<KindArg>,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, default_value_t = 0.1)]
    missing_prob: f64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, default_value_t = 0.06)]
    from: f64,
    #[arg(long, default_value_t = 0.14)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    inputs: RobotInputs,
    #[command(flatten)]
    human: HumanInputs,
    #[arg(long, value_enum, default_value_t = Side::Robot)]
    side: Side,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy)]
struct KindArg(FeatureKind);

impl fmt::Display for KindArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.as_str())
    }
}

impl std::str::FromStr for KindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(KindArg).map_err(|_| {
            let names: Vec<_> = FeatureKind::ALL.iter().map(|k| k.as_str()).collect();
            format!("expected one of {}", names.join(", "))
        })
    }
}

/// Bad invocation: exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn domain_file(path: &Path) -> Result<DomainAst> {
    parse_domain(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn problem_file(path: &Path) -> Result<ProblemAst> {
    parse_problem(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn fixture_file(path: &Path) -> Result<Fixture> {
    parse_fixture(&read(path)?).with_context(|| format!("in {}", path.display()))
}

enum Source {
    Fixture(Fixture),
    Pddl {
        domain: DomainAst,
        problem: ProblemAst,
        level: Level,
    },
}

fn robot_source(inputs: &RobotInputs) -> Result<Source> {
    if let Some(path) = &inputs.fixture {
        return Ok(Source::Fixture(fixture_file(path)?));
    }
    match (&inputs.robot_domain, &inputs.robot_problem) {
        (Some(d), Some(p)) => Ok(Source::Pddl {
            domain: domain_file(d)?,
            problem: problem_file(p)?,
            level: inputs.level,
        }),
        (None, None) => Err(usage("give --fixture or both --robot-domain and --robot-problem")),
        _ => Err(usage("--robot-domain and --robot-problem go together")),
    }
}

enum Pair {
    Ground(Model, Model),
    Lifted(LiftedModel, LiftedModel),
}

fn load_pair(inputs: &RobotInputs, human: &HumanInputs) -> Result<Pair> {
    match robot_source(inputs)? {
        Source::Fixture(f) => Ok(Pair::Ground(f.model("robot")?, f.model("human")?)),
        Source::Pddl { domain, problem, level } => {
            if human.human_domain.is_none() && human.human_problem.is_none() {
                return Err(usage("give --human-domain and/or --human-problem"));
            }
            let hd = match &human.human_domain {
                Some(p) => domain_file(p)?,
                None => domain.clone(),
            };
            let hp = match &human.human_problem {
                Some(p) => problem_file(p)?,
                None => problem.clone(),
            };
            let robot = LiftedModel::new(domain, problem)?;
            let human = LiftedModel::new(hd, hp)?;
            Ok(match level {
                Level::Schema => Pair::Lifted(robot, human),
                Level::Ground => Pair::Ground(robot.ground()?, human.ground()?),
            })
        }
    }
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn run_plan(args: &PlanArgs) -> Result<()> {
    let model = match robot_source(&args.inputs)? {
        Source::Fixture(f) => f.primary()?,
        Source::Pddl { domain, problem, .. } => LiftedModel::new(domain, problem)?.ground()?,
    };
    let config = PlannerConfig {
        node_budget: args.node_budget,
    };
    let result = optimal_plan_with(&model, &config)?;
    let text = match args.output.format.unwrap_or(Format::Text) {
        Format::Json => json(&result)?,
        Format::Text => match &result.outcome {
            Outcome::Solved(plan) => write_plan(plan, &model),
            Outcome::Unsolvable => String::new(),
        },
        Format::Csv => return Err(usage("plan output is text or json")),
    };
    emit(&args.output, &text)?;
    eprint!("{}", result.stats.to_lines());
    match result.outcome {
        Outcome::Solved(_) => Ok(()),
        Outcome::Unsolvable => Err(anyhow!("the model has no plan")),
    }
}

fn plan_override(path: &Option<PathBuf>) -> Result<Option<Vec<String>>> {
    match path {
        Some(p) => Ok(Some(read_plan(&read(p)?).with_context(|| format!("in {}", p.display()))?)),
        None => Ok(None),
    }
}

fn problem<M: Reconcilable>(
    robot: M,
    human: M,
    plan: &Option<Vec<String>>,
    config: &SearchConfig,
) -> Result<ReconciliationProblem<M>> {
    Ok(match plan {
        Some(p) => ReconciliationProblem::with_plan(robot, human, p, &config.planner)?,
        None => ReconciliationProblem::new(robot, human, &config.planner)?,
    })
}

fn explain_with<M: Reconcilable>(robot: M, human: M, args: &ExplainArgs) -> Result<()> {
    let config = args.budgets.search(args.metric.naming.into());
    let plan = plan_override(&args.plan)?;
    let problem = problem(robot, human, &plan, &config)?;
    let trace = match args.mode {
        Mode::Peg => generate_progressive(
            &problem,
            args.metric.metric,
            args.metric.variant,
            args.metric.epsilon(),
            &config,
        )?,
        Mode::Concise => generate_concise(&problem, args.metric.metric, &config)?,
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&trace)?,
        Format::Csv => trace.to_csv(),
        Format::Text => trace.to_text(),
    };
    emit(&args.output, &text)
}

fn run_explain(args: &ExplainArgs) -> Result<()> {
    match load_pair(&args.inputs, &args.human)? {
        Pair::Ground(r, h) => explain_with(r, h, args),
        Pair::Lifted(r, h) => explain_with(r, h, args),
    }
}

fn read_changes(path: &Path) -> Result<Vec<FeatureChange>> {
    let text = read(path)?;
    let context = || format!("in {}", path.display());
    if text.trim_start().starts_with('{') {
        #[derive(serde::Deserialize)]
        struct Trace {
            changes: Vec<FeatureChange>,
        }
        let t: Trace = serde_json::from_str(&text).with_context(context)?;
        return Ok(t.changes);
    }
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<FeatureChange>().with_context(context))
        .collect()
}

#[derive(serde::Serialize)]
struct Verdict {
    changes: usize,
    explanation: bool,
    complete: bool,
    already_reconciled: bool,
    valid: bool,
}

fn validate_with<M: Reconcilable>(robot: M, human: M, args: &ValidateArgs) -> Result<()> {
    let changes = read_changes(&args.changes)?;
    let config = args.budgets.search(args.naming.into());
    let plan = plan_override(&args.plan)?;
    let problem = problem(robot, human, &plan, &config)?;
    let root = problem
        .evaluate(problem.human_features(), &config)?
        .ok_or_else(|| anyhow!("the human model is not a valid model"))?;
    let already_reconciled = problem.completes(&root);
    let explanation = problem.is_explanation(&changes, &config)?;
    let complete = explanation && problem.is_complete(&changes, &config)?;
    let valid = complete || (changes.is_empty() && already_reconciled);
    let verdict = Verdict {
        changes: changes.len(),
        explanation,
        complete,
        already_reconciled,
        valid,
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&verdict)?,
        Format::Text => format!(
            "changes: {}\nexplanation: {}\ncomplete: {}\nalready_reconciled: {}\nvalid: {}\n",
            verdict.changes, explanation, complete, already_reconciled, valid
        ),
        Format::Csv => format!(
            "changes,explanation,complete,already_reconciled,valid\n{},{explanation},{complete},{already_reconciled},{valid}\n",
            verdict.changes
        ),
    };
    emit(&args.output, &text)?;
    if valid {
        Ok(())
    } else {
        Err(anyhow!("not a complete explanation"))
    }
}

fn run_validate(args: &ValidateArgs) -> Result<()> {
    match load_pair(&args.inputs, &args.human)? {
        Pair::Ground(r, h) => validate_with(r, h, args),
        Pair::Lifted(r, h) => validate_with(r, h, args),
    }
}

fn bench_config(args: &ExperimentArgs, missing_prob: f64, runs: usize) -> BenchConfig {
    let mut config = BenchConfig::new(missing_prob, args.seed, runs).with_epsilon(args.metric.epsilon());
    config.kinds = args.kinds.iter().map(|k| k.0).collect();
    config.metric = args.metric.metric;
    config.variant = args.metric.variant;
    config.search = args.budgets.search(args.metric.naming.into());
    config
}

fn emit_report(output: &Output, report: &Report) -> Result<()> {
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => json(report)?,
        Format::Text => report.to_text(),
    };
    emit(output, &text)?;
    let errors = report.records.iter().filter(|r| r.error.is_some()).count();
    let unsolvable = report.records.iter().filter(|r| !r.human_solvable).count();
    if errors + unsolvable > 0 {
        eprintln!("{errors} run(s) hit a budget, {unsolvable} perturbed model(s) unsolvable");
    }
    Ok(())
}

fn experiment<F>(args: &ExperimentArgs, run_ground: F, run_lifted: impl FnOnce(&LiftedModel) -> Result<Report>) -> Result<()>
where
    F: FnOnce(&Model) -> Result<Report>,
{
    let report = match robot_source(&args.inputs)? {
        Source::Fixture(f) => run_ground(&f.primary()?)?,
        Source::Pddl { domain, problem, level } => {
            let lifted = LiftedModel::new(domain, problem)?;
            match level {
                Level::Schema => run_lifted(&lifted)?,
                Level::Ground => run_ground(&lifted.ground()?)?,
            }
        }
    };
    emit_report(&args.output, &report)
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let config = bench_config(&args.common, args.missing_prob, args.runs);
    experiment(
        &args.common,
        |m| Ok(run_comparison(m, &config)?),
        |m| Ok(run_comparison(m, &config)?),
    )
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let config = bench_config(&args.common, args.from, 0);
    let (lo, hi, step) = (args.from, args.to, args.step);
    experiment(
        &args.common,
        |m| Ok(sweep_missing_prob(m, lo, hi, step, &config)?),
        |m| Ok(sweep_missing_prob(m, lo, hi, step, &config)?),
    )
}

fn run_dump(args: &DumpArgs) -> Result<()> {
    let features = match args.side {
        Side::Robot => match robot_source(&args.inputs)? {
            Source::Fixture(f) => f.primary()?.gamma(),
            Source::Pddl { domain, problem, level } => {
                let m = LiftedModel::new(domain, problem)?;
                match level {
                    Level::Schema => m.gamma(),
                    Level::Ground => m.ground()?.gamma(),
                }
            }
        },
        Side::Human => match load_pair(&args.inputs, &args.human)? {
            Pair::Ground(_, h) => h.gamma(),
            Pair::Lifted(_, h) => h.gamma(),
        },
    };
    emit(&args.output, &dump_features(&features))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => run_plan(a),
        Command::Explain(a) => run_explain(a),
        Command::Validate(a) => run_validate(a),
        Command::Bench(a) => run_bench(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Dump(a) => run_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
