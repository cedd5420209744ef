//! Inputs shared by the criterion benchmarks.

use peg_core::pddl::{parse_domain, parse_fixture, parse_problem};
use peg_core::{LiftedModel, Model};

pub fn rover_p01() -> LiftedModel {
    let d = parse_domain(include_str!("../../core/data/rover-domain.pddl")).expect("rover domain parses");
    let p = parse_problem(include_str!("../../core/data/rover-p01.pddl")).expect("rover p01 parses");
    LiftedModel::new(d, p).expect("rover p01 is well formed")
}

/// (robot, human) from the outlet-or-park fixture.
pub fn amy_monica() -> (Model, Model) {
    let f = parse_fixture(include_str!("../../core/data/amy_monica.model")).expect("fixture parses");
    (f.model("robot").unwrap(), f.model("human").unwrap())
}
