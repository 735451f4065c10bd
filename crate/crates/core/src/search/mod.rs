//! Instrumented A* over grounded tasks.
//!
//! Open-list order is `(f, -g, generation order)`, goal test on expansion,
//! duplicate detection on exact fact sets. Every generated child gets an
//! `h` value, duplicates included, and becomes a node of the
//! [`ReasoningTree`].

mod hmax;
mod tree;

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

pub use hmax::{hmax, Cost};
pub use tree::{EdgeId, ImportError, NodeId, NodeStatus, ReasoningTree, SearchEdge, SearchNode, TreeHeader, TreeRecord};

use crate::task::GroundedTask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    /// Ground action indices, in execution order.
    pub actions: Vec<usize>,
    pub names: Vec<String>,
    pub cost: u32,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no plan: the goal is unreachable")]
pub struct NoPlan;

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub plan: Option<Plan>,
    pub tree: ReasoningTree,
}

impl SearchResult {
    pub fn plan(&self) -> Result<&Plan, NoPlan> {
        self.plan.as_ref().ok_or(NoPlan)
    }
}

type OpenKey = Reverse<(Cost, Reverse<u32>, NodeId)>;

/// A* with `h_max`. Always returns the full reasoning tree; `plan` is
/// `None` when the goal is unreachable.
pub fn astar(task: &GroundedTask) -> SearchResult {
    let mut tree = ReasoningTree::new(task.fact_count());
    let mut open: BinaryHeap<OpenKey> = BinaryHeap::new();
    let mut retained: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();

    let root_h = hmax(task, &task.init);
    let root = tree.push_root(task.init.clone(), root_h);
    retained.entry(tree.nodes[root].state_hash).or_default().push(root);
    if root_h.is_finite() {
        open.push(Reverse((root_h, Reverse(0), root)));
    } else {
        tree.nodes[root].status = NodeStatus::Dead;
    }

    let mut expansions = 0u32;
    let mut goal = None;
    while let Some(Reverse((_, _, id))) = open.pop() {
        if tree.nodes[id].status != NodeStatus::Evaluated {
            // superseded by a cheaper path
            continue;
        }
        tree.nodes[id].status = NodeStatus::Expanded;
        tree.nodes[id].expansion_order = Some(expansions);
        expansions += 1;
        if task.is_goal(&tree.nodes[id].facts) {
            goal = Some(id);
            break;
        }
        let g = tree.nodes[id].g;
        let succ: Vec<(usize, u32, crate::FactSet)> = task
            .applicable(&tree.nodes[id].facts)
            .map(|(ai, a)| (ai, a.cost, a.apply(&tree.nodes[id].facts)))
            .collect();
        for (ai, cost, facts) in succ {
            let h = hmax(task, &facts);
            let cg = g + cost;
            let hash = facts.stable_hash();
            let child = tree.push_child(id, ai, &task.actions[ai].name, facts, cg, h);
            let bucket = retained.entry(hash).or_default();
            let prev = bucket
                .iter()
                .position(|&r| tree.nodes[r].facts == tree.nodes[child].facts);
            if let Some(k) = prev {
                let r = bucket[k];
                if tree.nodes[r].g <= cg {
                    tree.nodes[child].status = NodeStatus::DuplicatePruned;
                    tree.nodes[child].duplicate_of = Some(r);
                    continue;
                }
                if tree.nodes[r].status == NodeStatus::Evaluated {
                    tree.nodes[r].status = NodeStatus::DuplicatePruned;
                    tree.nodes[r].duplicate_of = Some(child);
                }
                bucket[k] = child;
            } else {
                bucket.push(child);
            }
            if h.is_finite() {
                open.push(Reverse((h.plus(cg), Reverse(cg), child)));
            } else {
                tree.nodes[child].status = NodeStatus::Dead;
            }
        }
    }

    let plan = goal.map(|gid| {
        let path = tree.path_to(gid);
        tree.goal = Some(gid);
        tree.optimal_path = path.clone();
        let actions: Vec<usize> = path.iter().map(|&e| tree.edges[e].action_index).collect();
        Plan {
            names: actions.iter().map(|&a| task.actions[a].name.clone()).collect(),
            cost: actions.iter().map(|&a| task.actions[a].cost).sum(),
            actions,
        }
    });
    SearchResult { plan, tree }
}

/// Optimal plan cost from the initial state by breadth-first search over
/// unit-cost tasks. Reference for tests and diagnostics.
pub fn bfs_distance(task: &GroundedTask, start: &crate::FactSet) -> Option<u32> {
    let mut seen = BTreeMap::new();
    let mut frontier = vec![start.clone()];
    seen.insert(start.clone(), 0u32);
    let mut depth = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in frontier {
            if task.is_goal(&s) {
                return Some(depth);
            }
            for (_, a) in task.applicable(&s) {
                let t = a.apply(&s);
                if !seen.contains_key(&t) {
                    seen.insert(t.clone(), depth + 1);
                    next.push(t);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    None
}
