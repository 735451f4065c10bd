//! Trajectory extraction from reasoning trees.
//!
//! * G: the optimal path, root to goal.
//! * E: root-to-node paths ending at informative nodes. A node is
//!   informative when, compared with everything observed on the path from
//!   the root to its parent, the Matcher sees a new item, opens a container
//!   or gains knowledge.
//! * L: one decision record per expanded node with two or more children.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bridge::{action_of, facts_of};
use crate::scenario::{
    respond, Action, AskVariant, ContainerId, ItemId, Role, Rules, Scenario, SeenItem, WorldState,
};
use crate::search::{Cost, NodeId, NodeStatus, ReasoningTree};
use crate::task::GroundedTask;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("the reasoning tree has no goal node")]
    NoPlan,
    #[error("ground action `{0}` has no world counterpart")]
    UnknownAction(String),
    #[error("replaying node {node}: {message}")]
    Replay { node: NodeId, message: String },
}

/// Matcher-side summary of one state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSummary {
    pub node: NodeId,
    pub matcher_at: usize,
    pub visible_locations: Vec<usize>,
    pub visible_items: Vec<SeenItem>,
    pub closed_containers: Vec<ContainerId>,
    pub holding: Option<ItemId>,
    pub knows_target: bool,
}

/// What an action changed in the Matcher's view.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationDelta {
    /// Items never seen earlier on the path.
    pub new_items: Vec<ItemId>,
    pub opened: Option<ContainerId>,
    pub knowledge_gained: bool,
}

impl ObservationDelta {
    pub fn is_informative(&self) -> bool {
        !self.new_items.is_empty() || self.opened.is_some() || self.knowledge_gained
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub action: Action,
    /// Ground action name, e.g. `move loc1 loc0`.
    pub ground: String,
    pub after: StateSummary,
    pub delta: ObservationDelta,
    /// The Director's reply when the action is a question.
    pub answer: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    #[serde(rename = "G")]
    Goal,
    #[serde(rename = "E")]
    Informative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub scenario: String,
    pub variant: AskVariant,
    pub start: StateSummary,
    pub steps: Vec<Step>,
    pub end: NodeId,
}

impl Trajectory {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub action: Action,
    pub child: NodeId,
    pub g: u32,
    pub h: Option<u32>,
    pub f: Option<u32>,
    pub status: NodeStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub node: NodeId,
    pub expansion_order: u32,
    pub state: StateSummary,
    /// Actions from the root to `node`.
    pub history: Vec<Action>,
    pub last_action: Option<Action>,
    pub alternatives: Vec<Alternative>,
    pub chosen: Action,
    pub chosen_child: NodeId,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InformativeMode {
    /// Only informative nodes with no informative descendant.
    #[default]
    Maximal,
    All,
}

/// A reasoning tree paired with the world states its nodes denote.
pub struct TreeView<'a> {
    pub scenario: &'a Scenario,
    pub variant: AskVariant,
    pub task: &'a GroundedTask,
    pub tree: &'a ReasoningTree,
    pub states: Vec<WorldState>,
    pub actions: Vec<Option<Action>>,
    pub deltas: Vec<ObservationDelta>,
}

impl<'a> TreeView<'a> {
    /// Replays every edge through the world model and checks that the
    /// resulting state denotes the node's fact set.
    pub fn new(
        scenario: &'a Scenario,
        variant: AskVariant,
        task: &'a GroundedTask,
        tree: &'a ReasoningTree,
    ) -> Result<Self, ExtractError> {
        let rules = Rules::planning(variant);
        let n = tree.nodes.len();
        let mut states: Vec<WorldState> = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        let mut seen: Vec<BTreeSet<ItemId>> = Vec::with_capacity(n);
        let mut deltas = Vec::with_capacity(n);
        for node in &tree.nodes {
            let (state, action, delta, seen_here) = match node.parent_edge {
                None => {
                    let s = scenario.initial.clone();
                    let ids = s.observation_of(Role::Matcher).item_ids();
                    (s, None, ObservationDelta::default(), ids)
                }
                Some(e) => {
                    let edge = &tree.edges[e];
                    let ga = &task.actions[edge.action_index];
                    let action =
                        action_of(ga).ok_or_else(|| ExtractError::UnknownAction(ga.name.clone()))?;
                    let parent = &states[edge.parent];
                    let s = parent.apply(&action, rules).map_err(|err| ExtractError::Replay {
                        node: node.id,
                        message: err.to_string(),
                    })?;
                    let before = &seen[edge.parent];
                    let now = s.observation_of(Role::Matcher).item_ids();
                    let delta = ObservationDelta {
                        new_items: now.difference(before).cloned().collect(),
                        opened: match &action {
                            Action::Open { container } => Some(container.clone()),
                            _ => None,
                        },
                        knowledge_gained: s.knowledge != parent.knowledge
                            && s.knowledge.extends(&parent.knowledge),
                    };
                    let mut all = before.clone();
                    all.extend(now);
                    (s, Some(action), delta, all)
                }
            };
            if facts_of(&state, task, variant).as_ref() != Some(&node.facts) {
                return Err(ExtractError::Replay {
                    node: node.id,
                    message: "world state disagrees with the node's facts".into(),
                });
            }
            states.push(state);
            actions.push(action);
            seen.push(seen_here);
            deltas.push(delta);
        }
        Ok(TreeView {
            scenario,
            variant,
            task,
            tree,
            states,
            actions,
            deltas,
        })
    }

    pub fn summary(&self, node: NodeId) -> StateSummary {
        let s = &self.states[node];
        let obs = s.observation_of(Role::Matcher);
        StateSummary {
            node,
            matcher_at: s.matcher.facing,
            visible_locations: obs.visible_locations.iter().copied().collect(),
            closed_containers: obs
                .containers
                .iter()
                .filter(|c| !c.is_open)
                .map(|c| c.id.clone())
                .collect(),
            visible_items: obs.items,
            holding: s.holding.clone(),
            knows_target: s.knowledge.knows_target_identity,
        }
    }

    /// Informative flag per node. Duplicate-pruned nodes are never
    /// informative.
    pub fn informative(&self) -> Vec<bool> {
        self.tree
            .nodes
            .iter()
            .map(|n| n.status != NodeStatus::DuplicatePruned && self.deltas[n.id].is_informative())
            .collect()
    }

    fn step(&self, node: NodeId) -> Step {
        let e = self.tree.nodes[node].parent_edge.expect("non-root node");
        let edge = &self.tree.edges[e];
        let action = self.actions[node].clone().expect("non-root node");
        let answer = match &action {
            Action::Ask { question } => {
                let parent = &self.states[edge.parent];
                Some(respond(&parent.observation_of(Role::Director), question, self.scenario).text)
            }
            _ => None,
        };
        Step {
            action,
            ground: self.task.actions[edge.action_index].name.clone(),
            after: self.summary(node),
            delta: self.deltas[node].clone(),
            answer,
        }
    }

    fn trajectory(&self, kind: TrajectoryKind, end: NodeId) -> Trajectory {
        let path = self.tree.node_path(end);
        Trajectory {
            kind,
            scenario: self.scenario.id.clone(),
            variant: self.variant,
            start: self.summary(0),
            steps: path[1..].iter().map(|&n| self.step(n)).collect(),
            end,
        }
    }
}

/// Sets `informative` on every node of `tree`.
pub fn mark_informative(tree: &mut ReasoningTree, flags: &[bool]) {
    for (n, &f) in tree.nodes.iter_mut().zip(flags) {
        n.informative = f;
    }
}

pub fn extract_g(view: &TreeView<'_>) -> Result<Trajectory, ExtractError> {
    let goal = view.tree.goal.ok_or(ExtractError::NoPlan)?;
    Ok(view.trajectory(TrajectoryKind::Goal, goal))
}

/// E-type trajectories ordered by the end node's expansion order, then
/// generation order.
pub fn extract_e(view: &TreeView<'_>, mode: InformativeMode) -> Vec<Trajectory> {
    let flags = view.informative();
    let tree = view.tree;
    let mut has_informative_below = alloc::vec![false; tree.nodes.len()];
    for n in tree.nodes.iter().rev() {
        if let Some(p) = n.parent {
            if flags[n.id] || has_informative_below[n.id] {
                has_informative_below[p] = true;
            }
        }
    }
    let mut ends: Vec<NodeId> = (0..tree.nodes.len())
        .filter(|&i| flags[i])
        .filter(|&i| mode == InformativeMode::All || !has_informative_below[i])
        .collect();
    ends.sort_by_key(|&i| (tree.nodes[i].expansion_order.unwrap_or(u32::MAX), i));
    ends.into_iter()
        .map(|i| view.trajectory(TrajectoryKind::Informative, i))
        .collect()
}

/// Decision records in expansion order. The chosen child is the one A*
/// ranks first, `(f, -g, generation order)`, among children that are not
/// dead ends.
pub fn extract_l(view: &TreeView<'_>) -> Vec<DecisionRecord> {
    let tree = view.tree;
    let mut expanded: Vec<NodeId> = tree
        .nodes
        .iter()
        .filter(|n| n.status == NodeStatus::Expanded && n.children.len() >= 2)
        .map(|n| n.id)
        .collect();
    expanded.sort_by_key(|&i| tree.nodes[i].expansion_order);
    let mut out = Vec::new();
    for id in expanded {
        let node = &tree.nodes[id];
        let children: Vec<NodeId> = node.children.iter().map(|&e| tree.edges[e].child).collect();
        let chosen = children
            .iter()
            .copied()
            .filter(|&c| tree.nodes[c].h != Cost::Infinite)
            .min_by_key(|&c| {
                let n = &tree.nodes[c];
                (n.f(), core::cmp::Reverse(n.g), c)
            });
        let Some(chosen) = chosen else { continue };
        let path = tree.node_path(id);
        out.push(DecisionRecord {
            node: id,
            expansion_order: node.expansion_order.unwrap_or(0),
            state: view.summary(id),
            history: path[1..]
                .iter()
                .filter_map(|&n| view.actions[n].clone())
                .collect(),
            last_action: view.actions[id].clone(),
            alternatives: children
                .iter()
                .map(|&c| {
                    let n = &tree.nodes[c];
                    Alternative {
                        action: view.actions[c].clone().expect("child has an action"),
                        child: c,
                        g: n.g,
                        h: n.h.finite(),
                        f: n.f().finite(),
                        status: n.status,
                    }
                })
                .collect(),
            chosen: view.actions[chosen].clone().expect("child has an action"),
            chosen_child: chosen,
        });
    }
    out
}
