//! Model-plan distances and the heuristics used to search over them.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact search value. Heuristics divide by 2 or by a step count, so plain
/// integers are not enough.
pub type Score = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Absolute optimal-cost gap between adjacent models.
    P1,
    /// Squared optimal-cost gap.
    P2,
    /// Edit distance between adjacent optimal plans.
    P3,
    /// Squared edit distance.
    P4,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::P1, MetricKind::P2, MetricKind::P3, MetricKind::P4];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::P1 => "p1",
            MetricKind::P2 => "p2",
            MetricKind::P3 => "p3",
            MetricKind::P4 => "p4",
        }
    }

    pub fn is_squared(self) -> bool {
        matches!(self, MetricKind::P2 | MetricKind::P4)
    }

    pub fn uses_plans(self) -> bool {
        matches!(self, MetricKind::P3 | MetricKind::P4)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {what} `{value}`")]
pub struct UnknownName {
    what: &'static str,
    value: String,
}

impl FromStr for MetricKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownName {
                what: "metric",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicVariant {
    /// Half the squared remaining gap for P2/P4. Can overestimate once three
    /// or more steps remain.
    Paper,
    /// Squared remaining gap divided by the number of remaining candidate
    /// changes, which never overestimates.
    #[default]
    Safe,
}

impl HeuristicVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicVariant::Paper => "paper",
            HeuristicVariant::Safe => "safe",
        }
    }
}

impl fmt::Display for HeuristicVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeuristicVariant {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(HeuristicVariant::Paper),
            "safe" => Ok(HeuristicVariant::Safe),
            _ => Err(UnknownName {
                what: "heuristic variant",
                value: s.to_string(),
            }),
        }
    }
}

/// Unit-cost Levenshtein distance.
pub fn plan_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> u64 {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<u64> = (0..=b.len() as u64).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u64 + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + u64::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(diag + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// What the metrics need to know about one model: its optimal cost (0 when
/// unsolvable) and its canonical optimal plan (empty when unsolvable).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanPoint {
    pub cost: u64,
    pub plan: Vec<String>,
}

impl PlanPoint {
    pub fn new(cost: u64, plan: Vec<String>) -> Self {
        PlanPoint { cost, plan }
    }
}

fn base_distance(kind: MetricKind, a: &PlanPoint, b: &PlanPoint) -> u64 {
    if kind.uses_plans() {
        plan_edit_distance(&a.plan, &b.plan)
    } else {
        a.cost.abs_diff(b.cost)
    }
}

/// Distance between two adjacent models.
pub fn rho(kind: MetricKind, prev: &PlanPoint, cur: &PlanPoint) -> u64 {
    let d = base_distance(kind, prev, cur);
    if kind.is_squared() {
        d * d
    } else {
        d
    }
}

/// Estimate of the remaining distance from `node` to `target`, where
/// `remaining` is the number of unit changes still available.
pub fn heuristic(
    kind: MetricKind,
    variant: HeuristicVariant,
    node: &PlanPoint,
    target: &PlanPoint,
    remaining: usize,
) -> Score {
    let d = i128::from(base_distance(kind, node, target));
    if !kind.is_squared() {
        return Score::from_integer(d);
    }
    match variant {
        HeuristicVariant::Paper => Score::new(d * d, 2),
        HeuristicVariant::Safe => Score::new(d * d, remaining.max(1) as i128),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(cost: u64, plan: &[&str]) -> PlanPoint {
        PlanPoint::new(cost, plan.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(plan_edit_distance(&["outlet-shopping"], &["outlet-shopping"]), 0);
        assert_eq!(plan_edit_distance(&["outlet-shopping"], &["visit-park"]), 1);
        assert_eq!(plan_edit_distance(&["a", "b", "c"], &["a", "c"]), 1);
        assert_eq!(plan_edit_distance::<&str>(&[], &["a", "b"]), 2);
        assert_eq!(plan_edit_distance(&["k", "i", "t", "t", "e", "n"], &["s", "i", "t", "t", "i", "n", "g"]), 3);
    }

    #[test]
    fn rho_examples() {
        let a = point(5, &["outlet-shopping"]);
        let b = point(10, &["visit-park"]);
        assert_eq!(rho(MetricKind::P1, &a, &b), 5);
        assert_eq!(rho(MetricKind::P2, &a, &b), 25);
        assert_eq!(rho(MetricKind::P2, &a, &a), 0);
        assert_eq!(rho(MetricKind::P3, &a, &b), 1);
        assert_eq!(rho(MetricKind::P4, &point(0, &[]), &point(3, &["x", "y"])), 4);
    }

    #[test]
    fn heuristic_examples() {
        let target = point(9, &["visit-park-cheap"]);
        let node = point(5, &["outlet-shopping"]);
        let h = |k, v, n| heuristic(k, v, &node, &target, n);
        assert_eq!(h(MetricKind::P1, HeuristicVariant::Paper, 3), Score::from_integer(4));
        assert_eq!(h(MetricKind::P2, HeuristicVariant::Paper, 3), Score::from_integer(8));
        assert_eq!(h(MetricKind::P2, HeuristicVariant::Safe, 3), Score::new(16, 3));
        assert_eq!(h(MetricKind::P4, HeuristicVariant::Paper, 3), Score::new(1, 2));
        for k in MetricKind::ALL {
            for v in [HeuristicVariant::Paper, HeuristicVariant::Safe] {
                assert_eq!(heuristic(k, v, &target, &target, 0), Score::from_integer(0));
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for k in MetricKind::ALL {
            assert_eq!(k.as_str().parse::<MetricKind>().unwrap(), k);
        }
        assert!("p5".parse::<MetricKind>().is_err());
        assert_eq!("safe".parse::<HeuristicVariant>().unwrap(), HeuristicVariant::Safe);
        assert!("greedy".parse::<HeuristicVariant>().is_err());
    }
}
