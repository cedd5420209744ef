use std::collections::BTreeSet;

use peg_core::model::{apply_to_features, delta, model_distance};
use peg_core::{Fact, Feature, FeatureChange, GroundAction, Model};
use proptest::prelude::*;

const FACTS: usize = 4;

fn fact(i: usize) -> Fact {
    Fact::new("p", vec![format!("o{i}")]).unwrap()
}

fn mask(m: u8) -> Vec<Fact> {
    (0..FACTS).filter(|i| m >> i & 1 == 1).map(fact).collect()
}

/// Three actions over four facts; add and delete effects kept disjoint.
fn model() -> impl Strategy<Value = Model> {
    (prop::collection::vec((0u8..16, 0u8..16, 0u8..16, 0u64..6), 3), 0u8..16, 0u8..16).prop_map(
        |(actions, init, goal)| {
            let actions = actions
                .into_iter()
                .enumerate()
                .map(|(i, (pre, add, del, cost))| {
                    GroundAction::new(format!("act{i}"), cost)
                        .with_pre(mask(pre))
                        .with_add(mask(add))
                        .with_del(mask(del & !add))
                })
                .collect();
            Model::from_parts(actions, mask(init).into_iter().collect(), mask(goal).into_iter().collect(), (0..FACTS).map(fact))
                .unwrap()
        },
    )
}

proptest! {
    #[test]
    fn gamma_round_trips(m in model()) {
        let g = m.gamma();
        prop_assert_eq!(Model::from_features(&g, &m).unwrap(), m.clone());
        for f in &g {
            prop_assert_eq!(&f.to_string().parse::<Feature>().unwrap(), f);
        }
    }

    #[test]
    fn delta_applies_in_any_order((a, b, order) in (model(), model()).prop_flat_map(|(a, b)| {
        let n = delta(&a, &b).unwrap().len();
        (Just(a), Just(b), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })) {
        let changes = delta(&a, &b).unwrap();
        let mut g = a.gamma();
        for i in order {
            apply_to_features(&mut g, &changes[i]).unwrap();
        }
        prop_assert_eq!(g, b.gamma());
    }

    #[test]
    fn delta_is_minimal_and_unit(a in model(), b in model()) {
        let changes = delta(&a, &b).unwrap();
        let unique: BTreeSet<&FeatureChange> = changes.iter().collect();
        prop_assert_eq!(unique.len(), changes.len());
        let (ga, gb) = (a.gamma(), b.gamma());
        let plain = ga.symmetric_difference(&gb).filter(|f| !matches!(f, Feature::Cost { .. })).count();
        let costs = ga.difference(&gb).filter(|f| matches!(f, Feature::Cost { .. })).count();
        prop_assert_eq!(changes.len(), plain + costs);
    }

    #[test]
    fn distance_is_a_metric(a in model(), b in model(), c in model()) {
        let d = |x: &Model, y: &Model| model_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b) == 0, a.gamma() == b.gamma());
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }
}
