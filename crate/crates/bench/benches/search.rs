use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use peg_bench::{amy_monica, rover_p01};
use peg_core::experiment::{perturb_model, PerturbSpec};
use peg_core::explain::default_epsilon;
use peg_core::metrics::plan_edit_distance;
use peg_core::{
    generate_concise, generate_progressive, optimal_plan, HeuristicVariant, MetricKind, PlannerConfig,
    Reconcilable, ReconciliationProblem, SearchConfig,
};

fn planner(c: &mut Criterion) {
    let rover = rover_p01().ground().unwrap();
    c.bench_function("optimal_plan/rover-p01", |b| b.iter(|| optimal_plan(black_box(&rover)).unwrap()));
    let (robot, _) = amy_monica();
    c.bench_function("optimal_plan/amy", |b| b.iter(|| optimal_plan(black_box(&robot)).unwrap()));
}

fn explain(c: &mut Criterion) {
    let (robot, human) = amy_monica();
    let config = SearchConfig::default();
    for metric in [MetricKind::P1, MetricKind::P2] {
        c.bench_function(&format!("peg/amy/{metric}"), |b| {
            b.iter(|| {
                let p = ReconciliationProblem::new(robot.clone(), human.clone(), &config.planner).unwrap();
                generate_progressive(&p, metric, HeuristicVariant::Safe, default_epsilon(), &config).unwrap()
            })
        });
    }
    c.bench_function("concise/amy", |b| {
        b.iter(|| {
            let p = ReconciliationProblem::new(robot.clone(), human.clone(), &config.planner).unwrap();
            generate_concise(&p, MetricKind::P2, &config).unwrap()
        })
    });

    // Seed 7 at p = 0.05 removes two schema features.
    let rover = rover_p01();
    let human = perturb_model(&rover, &PerturbSpec::new(0.05, 7).unwrap()).unwrap();
    let changes = rover.features().symmetric_difference(&human.features()).count();
    let mut group = c.benchmark_group("rover-p01");
    group.sample_size(10);
    group.bench_function(format!("peg/{changes}-changes"), |b| {
        b.iter(|| {
            let p = ReconciliationProblem::new(rover.clone(), human.clone(), &PlannerConfig::default()).unwrap();
            generate_progressive(&p, MetricKind::P2, HeuristicVariant::Safe, default_epsilon(), &config).unwrap()
        })
    });
    group.finish();
}

fn edit_distance(c: &mut Criterion) {
    let a: Vec<u32> = (0..200).map(|i| i * 7 % 13).collect();
    let b: Vec<u32> = (0..180).map(|i| i * 5 % 11).collect();
    c.bench_function("plan_edit_distance/200x180", |bench| {
        bench.iter(|| plan_edit_distance(black_box(&a), black_box(&b)))
    });
}

criterion_group!(benches, planner, explain, edit_distance);
criterion_main!(benches);
