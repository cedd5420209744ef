//! Synthetic human models and PEG-versus-concise comparisons.
//!
//! A human model is derived from the robot model by deleting each eligible
//! feature independently with the missing probability. Randomness comes from
//! ChaCha8 seeded with `seed + run` (wrapping), drawing exactly one
//! `gen_bool(p)` per eligible feature in feature order, so reports are
//! reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{
    generate_concise, generate_progressive, ExplainError, ExplanationTrace, Reconcilable,
    ReconciliationProblem, SearchConfig,
};
use crate::metrics::{HeuristicVariant, MetricKind, Score};
use crate::model::{digest_features, FeatureKind, FeatureSet, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("missing probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("no eligible feature kinds")]
    NoKinds,
    #[error("cost features cannot be deleted")]
    CostKind,
    #[error("invalid sweep range {lo}..{hi} step {step}")]
    Range { lo: f64, hi: f64, step: f64 },
}

pub const DEFAULT_KINDS: [FeatureKind; 3] = [
    FeatureKind::Precondition,
    FeatureKind::AddEffect,
    FeatureKind::DeleteEffect,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    pub missing_prob: f64,
    pub seed: u64,
    pub kinds: Vec<FeatureKind>,
}

impl PerturbSpec {
    pub fn new(missing_prob: f64, seed: u64) -> Result<Self, ExperimentError> {
        Self::with_kinds(missing_prob, seed, DEFAULT_KINDS.to_vec())
    }

    pub fn with_kinds(missing_prob: f64, seed: u64, kinds: Vec<FeatureKind>) -> Result<Self, ExperimentError> {
        if !(0.0..=1.0).contains(&missing_prob) {
            return Err(ExperimentError::Probability(missing_prob));
        }
        if kinds.is_empty() {
            return Err(ExperimentError::NoKinds);
        }
        if kinds.contains(&FeatureKind::Cost) {
            return Err(ExperimentError::CostKind);
        }
        Ok(PerturbSpec {
            missing_prob,
            seed,
            kinds,
        })
    }

    pub fn eligible(&self, features: &FeatureSet) -> usize {
        features.iter().filter(|f| self.kinds.contains(&f.kind())).count()
    }
}

/// Deletes each eligible feature with probability `spec.missing_prob`.
pub fn perturb_features(features: &FeatureSet, spec: &PerturbSpec) -> FeatureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    features
        .iter()
        .filter(|f| !(spec.kinds.contains(&f.kind()) && rng.gen_bool(spec.missing_prob)))
        .cloned()
        .collect()
}

pub fn perturb_model<M: Reconcilable>(robot: &M, spec: &PerturbSpec) -> Result<M, ModelError> {
    robot.with_features(&perturb_features(&robot.features(), spec))
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub missing_prob: f64,
    pub seed: u64,
    pub kinds: Vec<FeatureKind>,
    pub runs: usize,
    pub metric: MetricKind,
    pub variant: HeuristicVariant,
    pub epsilon: String,
    #[serde(skip)]
    pub search: SearchConfig,
    #[serde(skip)]
    pub epsilon_value: Score,
}

impl BenchConfig {
    pub fn new(missing_prob: f64, seed: u64, runs: usize) -> Self {
        let epsilon_value = crate::explain::default_epsilon();
        BenchConfig {
            missing_prob,
            seed,
            kinds: DEFAULT_KINDS.to_vec(),
            runs,
            metric: MetricKind::P2,
            variant: HeuristicVariant::Safe,
            epsilon: epsilon_value.to_string(),
            search: SearchConfig::default(),
            epsilon_value,
        }
    }

    pub fn with_epsilon(mut self, epsilon: Score) -> Self {
        self.epsilon = epsilon.to_string();
        self.epsilon_value = epsilon;
        self
    }

    fn spec(&self, run: usize, missing_prob: f64) -> Result<PerturbSpec, ExperimentError> {
        PerturbSpec::with_kinds(
            missing_prob,
            self.seed.wrapping_add(run as u64),
            self.kinds.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub size: usize,
    pub time_s: f64,
    pub sum_rho: u64,
    pub expansions: u64,
    pub complete: bool,
}

impl From<&ExplanationTrace> for ModeResult {
    fn from(t: &ExplanationTrace) -> Self {
        ModeResult {
            size: t.size,
            time_s: t.stats.wall_time.as_secs_f64(),
            sum_rho: t.sum_rho,
            expansions: t.stats.expansions,
            complete: t.complete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub missing_prob: f64,
    pub missing_features: usize,
    pub pool_size: usize,
    pub human_solvable: bool,
    /// Set when a search hit its budget; such runs are left out of averages.
    pub error: Option<String>,
    pub peg: Option<ModeResult>,
    pub concise: Option<ModeResult>,
}

impl RunRecord {
    pub fn flagged(&self) -> bool {
        self.error.is_some() || !self.human_solvable
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeAverages {
    pub size: f64,
    pub time_s: f64,
    pub sum_rho: f64,
    pub expansions: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    /// Records that entered the averages.
    pub runs: usize,
    pub missing_features: f64,
    pub pool_size: f64,
    pub peg: Option<ModeAverages>,
    pub concise: Option<ModeAverages>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub robot_digest: String,
    pub config: BenchConfig,
    pub records: Vec<RunRecord>,
    pub averages: Averages,
}

fn mode_averages<'a>(results: impl Iterator<Item = &'a ModeResult>) -> Option<ModeAverages> {
    let v: Vec<&ModeResult> = results.collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = |f: &dyn Fn(&ModeResult) -> f64| v.iter().map(|r| f(r)).sum::<f64>() / n;
    Some(ModeAverages {
        size: mean(&|r| r.size as f64),
        time_s: mean(&|r| r.time_s),
        sum_rho: mean(&|r| r.sum_rho as f64),
        expansions: mean(&|r| r.expansions as f64),
    })
}

/// Means over the records without an error.
pub fn averages(records: &[RunRecord]) -> Averages {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    if ok.is_empty() {
        return Averages::default();
    }
    let n = ok.len() as f64;
    Averages {
        runs: ok.len(),
        missing_features: ok.iter().map(|r| r.missing_features as f64).sum::<f64>() / n,
        pool_size: ok.iter().map(|r| r.pool_size as f64).sum::<f64>() / n,
        peg: mode_averages(ok.iter().filter_map(|r| r.peg.as_ref())),
        concise: mode_averages(ok.iter().filter_map(|r| r.concise.as_ref())),
    }
}

fn run_one<M: Reconcilable>(
    robot: &M,
    config: &BenchConfig,
    run: usize,
    spec: &PerturbSpec,
    with_concise: bool,
) -> Result<RunRecord, ExplainError> {
    let robot_features = robot.features();
    let human_features = perturb_features(&robot_features, spec);
    let human = robot.with_features(&human_features)?;
    let mut record = RunRecord {
        run,
        seed: spec.seed,
        missing_prob: spec.missing_prob,
        missing_features: robot_features.len() - human_features.len(),
        pool_size: spec.eligible(&robot_features),
        human_solvable: true,
        error: None,
        peg: None,
        concise: None,
    };
    // Each mode gets its own problem, and so its own planner cache, so the
    // reported times are comparable.
    let fresh = || ReconciliationProblem::new(robot.clone(), human.clone(), &config.search.planner);
    let outcome = (|| {
        let problem = fresh()?;
        let root = problem
            .evaluate(problem.human_features(), &config.search)?
            .expect("perturbed models are valid");
        record.human_solvable = root.solvable;
        let peg = generate_progressive(&problem, config.metric, config.variant, config.epsilon_value, &config.search)?;
        record.peg = Some(ModeResult::from(&peg));
        if with_concise {
            let concise = generate_concise(&fresh()?, config.metric, &config.search)?;
            record.concise = Some(ModeResult::from(&concise));
        }
        Ok::<(), ExplainError>(())
    })();
    match outcome {
        Ok(()) => Ok(record),
        Err(e) if e.is_budget() => {
            record.error = Some(e.to_string());
            Ok(record)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ExperimentError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

fn collect<M: Reconcilable + Sync>(
    robot: &M,
    config: &BenchConfig,
    jobs: Vec<(usize, f64)>,
    with_concise: bool,
) -> Result<Report, BenchError> {
    let specs = jobs
        .iter()
        .map(|&(run, p)| config.spec(run, p).map(|s| (run, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let records = specs
        .into_par_iter()
        .map(|(run, spec)| run_one(robot, config, run, &spec, with_concise))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        robot_digest: digest_features(&robot.features()),
        config: config.clone(),
        averages: averages(&records),
        records,
    })
}

/// Perturbs the robot model `config.runs` times and explains its optimal
/// plan with both PEG and concise search. Runs execute in parallel; records
/// come back in run order.
pub fn run_comparison<M: Reconcilable + Sync>(robot: &M, config: &BenchConfig) -> Result<Report, BenchError> {
    config.spec(0, config.missing_prob)?;
    let jobs = (0..config.runs).map(|r| (r, config.missing_prob)).collect();
    collect(robot, config, jobs, true)
}

/// Grid of probabilities from `lo` to `hi` inclusive.
pub fn sweep_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, ExperimentError> {
    let bad = || ExperimentError::Range { lo, hi, step };
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(bad());
    }
    if hi == lo {
        return Ok(vec![lo]);
    }
    if step.is_nan() || step <= 0.0 {
        return Err(bad());
    }
    let n = ((hi - lo) / step).round() as usize + 1;
    Ok((0..n)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .map(|p| p.min(1.0))
        .collect())
}

/// One PEG run per probability in the grid, run `i` seeded with
/// `config.seed + i`. `config.missing_prob` and `config.runs` are ignored.
pub fn sweep_missing_prob<M: Reconcilable + Sync>(
    robot: &M,
    lo: f64,
    hi: f64,
    step: f64,
    config: &BenchConfig,
) -> Result<Report, BenchError> {
    let grid = sweep_grid(lo, hi, step)?;
    let jobs = grid.into_iter().enumerate().collect();
    collect(robot, config, jobs, false)
}

fn fmt_f(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

const MODE_COLUMNS: [&str; 4] = ["size", "time_s", "sum_rho", "expansions"];

impl Report {
    /// One row per run and a final `mean` row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "run",
            "seed",
            "missing_prob",
            "missing_features",
            "pool_size",
            "human_solvable",
            "flagged",
        ]
        .map(String::from)
        .to_vec();
        for mode in ["peg", "concise"] {
            header.extend(MODE_COLUMNS.iter().map(|c| format!("{mode}_{c}")));
        }
        header.push("error".into());
        w.write_record(&header)?;
        let mode_cells = |m: &Option<ModeResult>| -> Vec<String> {
            match m {
                Some(m) => vec![
                    m.size.to_string(),
                    fmt_f(m.time_s),
                    m.sum_rho.to_string(),
                    m.expansions.to_string(),
                ],
                None => vec![String::new(); 4],
            }
        };
        for r in &self.records {
            let mut row = vec![
                r.run.to_string(),
                r.seed.to_string(),
                fmt_f(r.missing_prob),
                r.missing_features.to_string(),
                r.pool_size.to_string(),
                r.human_solvable.to_string(),
                r.flagged().to_string(),
            ];
            row.extend(mode_cells(&r.peg));
            row.extend(mode_cells(&r.concise));
            row.push(r.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        let a = &self.averages;
        let avg_cells = |m: &Option<ModeAverages>| -> Vec<String> {
            match m {
                Some(m) => vec![fmt_f(m.size), fmt_f(m.time_s), fmt_f(m.sum_rho), fmt_f(m.expansions)],
                None => vec![String::new(); 4],
            }
        };
        let mut row = vec![
            "mean".to_string(),
            String::new(),
            String::new(),
            fmt_f(a.missing_features),
            fmt_f(a.pool_size),
            String::new(),
            String::new(),
        ];
        row.extend(avg_cells(&a.peg));
        row.extend(avg_cells(&a.concise));
        row.push(String::new());
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:>4} {:>6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            "run", "p", "missing", "peg_size", "peg_rho", "con_size", "con_rho", "peg_exp"
        );
        let opt = |m: &Option<ModeResult>, f: fn(&ModeResult) -> String| m.as_ref().map_or("-".to_string(), f);
        for r in &self.records {
            out.push_str(&format!(
                "{:>4} {:>6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}{}\n",
                r.run,
                fmt_f(r.missing_prob),
                format!("{}/{}", r.missing_features, r.pool_size),
                opt(&r.peg, |m| m.size.to_string()),
                opt(&r.peg, |m| m.sum_rho.to_string()),
                opt(&r.concise, |m| m.size.to_string()),
                opt(&r.concise, |m| m.sum_rho.to_string()),
                opt(&r.peg, |m| m.expansions.to_string()),
                if r.flagged() { "  *" } else { "" },
            ));
        }
        let a = &self.averages;
        let avg = |m: &Option<ModeAverages>, f: fn(&ModeAverages) -> f64| m.as_ref().map_or("-".to_string(), |m| fmt_f(f(m)));
        out.push_str(&format!(
            "{:>4} {:>6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            "mean",
            "",
            fmt_f(a.missing_features),
            avg(&a.peg, |m| m.size),
            avg(&a.peg, |m| m.sum_rho),
            avg(&a.concise, |m| m.size),
            avg(&a.concise, |m| m.sum_rho),
            avg(&a.peg, |m| m.expansions),
        ));
        out
    }
}
