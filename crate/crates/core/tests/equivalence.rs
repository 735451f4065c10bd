//! The world model and its grounded PDDL task have the same reachable state
//! graph, with world actions matching ground actions edge for edge.

mod common;

use std::collections::{BTreeSet, VecDeque};

use dirtask_core::bridge::{action_of, facts_of};
use dirtask_core::pddl::scenario_task;
use dirtask_core::scenario::{reference_pack, Action, AskVariant, Rules, Scenario};
use dirtask_core::FactSet;
use proptest::prelude::*;

type Edges = BTreeSet<(FactSet, Action, FactSet)>;

fn world_graph(sc: &Scenario, v: AskVariant) -> Edges {
    let task = scenario_task(sc, v);
    let rules = Rules::planning(v);
    let mut seen = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([sc.initial.clone()]);
    seen.insert(sc.initial.clone());
    while let Some(s) = queue.pop_front() {
        let src = facts_of(&s, &task, v).expect("state maps to facts");
        for a in s.applicable_actions(rules) {
            let t = s.apply(&a, rules).expect("listed actions apply");
            edges.insert((src.clone(), a, facts_of(&t, &task, v).unwrap()));
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    edges
}

fn task_graph(sc: &Scenario, v: AskVariant) -> Edges {
    let task = scenario_task(sc, v);
    let mut seen = BTreeSet::from([task.init.clone()]);
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([task.init.clone()]);
    while let Some(s) = queue.pop_front() {
        for (_, ga) in task.applicable(&s) {
            let t = ga.apply(&s);
            edges.insert((s.clone(), action_of(ga).unwrap(), t.clone()));
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    edges
}

#[test]
fn pack_graphs_match() {
    for sc in reference_pack() {
        for v in AskVariant::ALL {
            let w = world_graph(&sc, v);
            let t = task_graph(&sc, v);
            assert!(!w.is_empty());
            assert_eq!(w, t, "{} {v}", sc.id);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_graphs_match(sc in common::scenario(), ask in any::<bool>()) {
        let v = if ask { AskVariant::WithAsk } else { AskVariant::WithoutAsk };
        prop_assert_eq!(world_graph(&sc, v), task_graph(&sc, v));
    }
}
