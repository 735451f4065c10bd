mod common;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use dirtask_core::pddl::scenario_task;
use dirtask_core::scenario::{reference_pack, AskVariant};
use dirtask_core::search::{astar, bfs_distance, hmax, Cost, NodeStatus};
use dirtask_core::{FactSet, GroundedTask};
use proptest::prelude::*;

/// Plain A* with the same tie-breaking and no tree: (expanded states in
/// order, generated count).
fn reference_astar(task: &GroundedTask) -> (Vec<FactSet>, usize) {
    let mut open = BinaryHeap::new();
    let mut best: BTreeMap<FactSet, u32> = BTreeMap::new();
    let mut ordinal = 0usize;
    let mut generated = 0;
    let mut expanded = vec![];
    let h0 = hmax(task, &task.init);
    best.insert(task.init.clone(), 0);
    if h0.is_finite() {
        open.push(Reverse((h0, Reverse(0u32), 0usize, task.init.clone())));
    }
    while let Some(Reverse((_, Reverse(g), _, s))) = open.pop() {
        if best[&s] < g {
            continue;
        }
        expanded.push(s.clone());
        if task.is_goal(&s) {
            break;
        }
        for (_, a) in task.applicable(&s) {
            let t = a.apply(&s);
            ordinal += 1;
            generated += 1;
            let ng = g + a.cost;
            if best.get(&t).is_some_and(|&b| b <= ng) {
                continue;
            }
            best.insert(t.clone(), ng);
            let h = hmax(task, &t);
            if h.is_finite() {
                open.push(Reverse((h.plus(ng), Reverse(ng), ordinal, t)));
            }
        }
    }
    (expanded, generated)
}

fn check_against_reference(task: &GroundedTask) {
    let r = astar(task);
    let (expanded, generated) = reference_astar(task);
    let mut by_order: Vec<_> = r
        .tree
        .nodes
        .iter()
        .filter(|n| n.expansion_order.is_some())
        .collect();
    by_order.sort_by_key(|n| n.expansion_order);
    let got: Vec<FactSet> = by_order.iter().map(|n| n.facts.clone()).collect();
    assert_eq!(got, expanded);
    assert_eq!(r.tree.nodes.len() - 1, generated);
    assert_eq!(r.plan.map(|p| p.cost), bfs_distance(task, &task.init));
}

#[test]
fn pack_matches_reference_search() {
    for sc in reference_pack() {
        for v in AskVariant::ALL {
            check_against_reference(&scenario_task(&sc, v));
        }
    }
}

#[test]
fn optimal_path_is_consistent() {
    for sc in reference_pack() {
        for v in AskVariant::ALL {
            let task = scenario_task(&sc, v);
            let r = astar(&task);
            let plan = r.plan().unwrap();
            let tree = &r.tree;
            let mut s = task.init.clone();
            for &a in &plan.actions {
                assert!(task.actions[a].applicable(&s));
                s = task.actions[a].apply(&s);
            }
            assert!(task.is_goal(&s));
            let goal = tree.goal.unwrap();
            assert_eq!(tree.nodes[goal].facts, s);
            assert_eq!(tree.nodes[goal].status, NodeStatus::Expanded);
            assert_eq!(tree.optimal_path.len(), plan.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_tasks_match_reference(sc in common::scenario(), ask in any::<bool>()) {
        let v = if ask { AskVariant::WithAsk } else { AskVariant::WithoutAsk };
        check_against_reference(&scenario_task(&sc, v));
    }

    #[test]
    fn hmax_never_overestimates(sc in common::scenario()) {
        let task = scenario_task(&sc, AskVariant::WithAsk);
        for n in &astar(&task).tree.nodes {
            match (hmax(&task, &n.facts), bfs_distance(&task, &n.facts)) {
                (Cost::Finite(h), Some(d)) => prop_assert!(h <= d),
                (Cost::Finite(_), None) => {}
                (Cost::Infinite, d) => prop_assert_eq!(d, None),
            }
        }
    }
}
