use std::collections::{BTreeMap, VecDeque};
use std::time::Instant;

use dirtask_core::pddl::scenario_task;
use dirtask_core::scenario::{reference_pack, AskVariant};
use dirtask_core::search::{hmax, Cost};
use dirtask_core::{FactSet, GroundedTask};

/// Every state reachable from the initial state, with its true
/// cost-to-goal (None when the goal is unreachable from it).
fn exact_costs(task: &GroundedTask) -> BTreeMap<FactSet, Option<u32>> {
    let mut index: BTreeMap<FactSet, usize> = BTreeMap::new();
    let mut states = vec![task.init.clone()];
    let mut preds: Vec<Vec<usize>> = vec![vec![]];
    index.insert(task.init.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        for (_, a) in task.applicable(&s) {
            assert_eq!(a.cost, 1);
            let t = a.apply(&s);
            let j = *index.entry(t.clone()).or_insert_with(|| {
                states.push(t);
                preds.push(vec![]);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            preds[j].push(i);
        }
    }
    let mut dist: Vec<Option<u32>> = vec![None; states.len()];
    let mut queue = VecDeque::new();
    for (i, s) in states.iter().enumerate() {
        if task.is_goal(s) {
            dist[i] = Some(0);
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        let d = dist[j].unwrap();
        for &i in &preds[j] {
            if dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(i);
            }
        }
    }
    states.into_iter().zip(dist).collect()
}

#[test]
fn hmax_is_admissible_on_every_reachable_state() {
    let start = Instant::now();
    let mut checked = 0;
    for sc in reference_pack() {
        for variant in AskVariant::ALL {
            let task = scenario_task(&sc, variant);
            let costs = exact_costs(&task);
            assert!(costs.len() < 10_000, "{} {variant:?}: {} states", sc.id, costs.len());
            for (s, exact) in &costs {
                let h = hmax(&task, s);
                match (h, exact) {
                    (Cost::Finite(h), Some(c)) => assert!(h <= *c, "{} {variant:?}: h {h} > h* {c}", sc.id),
                    (Cost::Finite(_), None) | (Cost::Infinite, None) => {}
                    (Cost::Infinite, Some(c)) => panic!("{} {variant:?}: h infinite but h* = {c}", sc.id),
                }
                assert_eq!(h == Cost::ZERO, task.is_goal(s), "{} {variant:?}", sc.id);
                checked += 1;
            }
        }
    }
    assert!(checked > 14);
    assert!(start.elapsed().as_secs() < 30);
}
