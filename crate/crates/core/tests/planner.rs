use dirtask_core::pddl::scenario_task;
use dirtask_core::scenario::{reference_scenario, AskVariant, Family};
use dirtask_core::search::{astar, bfs_distance, NodeStatus};

// (family, plan length, asks) with +ask
const TARGETS: [(Family, usize, usize); 7] = [
    (Family::Persp, 1, 0),
    (Family::Far, 3, 1),
    (Family::Hidd, 2, 0),
    (Family::Not, 3, 1),
    (Family::Dist, 2, 0),
    (Family::Base, 2, 0),
    (Family::Near, 2, 1),
];

#[test]
fn plan_lengths_and_asks() {
    for (fam, len, asks) in TARGETS {
        let t = scenario_task(&reference_scenario(fam), AskVariant::WithAsk);
        let r = astar(&t);
        let p = r.plan().unwrap();
        assert_eq!(p.len(), len, "{fam}");
        assert_eq!(p.names.iter().filter(|n| *n == "ask").count(), asks, "{fam}");
    }
    let total: usize = TARGETS.iter().map(|t| t.1).sum();
    assert_eq!(format!("{:.2}", total as f64 / 7.0), "2.14");
}

#[test]
fn hmax_is_admissible_on_every_tree_node() {
    for fam in Family::ALL {
        for v in AskVariant::ALL {
            let t = scenario_task(&reference_scenario(fam), v);
            let tree = astar(&t).tree;
            for n in &tree.nodes {
                let hstar = bfs_distance(&t, &n.facts);
                match (n.h.finite(), hstar) {
                    (Some(h), Some(d)) => assert!(h <= d, "{fam} {v} node {}", n.id),
                    (None, d) => assert_eq!(d, None, "{fam} {v} node {} marked dead", n.id),
                    (Some(_), None) => {}
                }
                if n.status == NodeStatus::Dead {
                    assert!(hstar.is_none());
                }
            }
        }
    }
}
