use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Cost;
use crate::task::FactSet;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    /// Generated and evaluated, still on the open list (or left there when
    /// search stopped).
    Evaluated,
    Expanded,
    /// `h = inf`; never queued.
    Dead,
    /// Same state reached with no better `g` (or later reached more cheaply).
    DuplicatePruned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub parent_edge: Option<EdgeId>,
    pub facts: FactSet,
    pub state_hash: u64,
    pub g: u32,
    pub h: Cost,
    pub status: NodeStatus,
    pub expansion_order: Option<u32>,
    pub duplicate_of: Option<NodeId>,
    pub children: Vec<EdgeId>,
    pub informative: bool,
}

impl SearchNode {
    pub fn f(&self) -> Cost {
        self.h.plus(self.g)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchEdge {
    pub parent: NodeId,
    pub child: NodeId,
    pub action_index: usize,
    pub label: String,
}

/// Every node A* generated, with the parent edge that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReasoningTree {
    pub fact_count: usize,
    pub nodes: Vec<SearchNode>,
    pub edges: Vec<SearchEdge>,
    pub goal: Option<NodeId>,
    pub optimal_path: Vec<EdgeId>,
}

impl ReasoningTree {
    pub(crate) fn new(fact_count: usize) -> Self {
        ReasoningTree {
            fact_count,
            nodes: Vec::new(),
            edges: Vec::new(),
            goal: None,
            optimal_path: Vec::new(),
        }
    }

    pub(crate) fn push_root(&mut self, facts: FactSet, h: Cost) -> NodeId {
        self.push_node(None, None, facts, 0, h)
    }

    fn push_node(&mut self, parent: Option<NodeId>, parent_edge: Option<EdgeId>, facts: FactSet, g: u32, h: Cost) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(SearchNode {
            id,
            parent,
            parent_edge,
            state_hash: facts.stable_hash(),
            facts,
            g,
            h,
            status: NodeStatus::Evaluated,
            expansion_order: None,
            duplicate_of: None,
            children: Vec::new(),
            informative: false,
        });
        id
    }

    pub(crate) fn push_child(&mut self, parent: NodeId, action_index: usize, label: &str, facts: FactSet, g: u32, h: Cost) -> NodeId {
        let e = self.edges.len();
        let child = self.push_node(Some(parent), Some(e), facts, g, h);
        self.edges.push(SearchEdge {
            parent,
            child,
            action_index,
            label: label.into(),
        });
        self.nodes[parent].children.push(e);
        child
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    /// Edges from the root to `node`.
    pub fn path_to(&self, node: NodeId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some(e) = self.nodes[cur].parent_edge {
            path.push(e);
            cur = self.edges[e].parent;
        }
        path.reverse();
        path
    }

    /// Nodes from the root to `node`, both included.
    pub fn node_path(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = vec![0];
        out.extend(self.path_to(node).into_iter().map(|e| self.edges[e].child));
        out
    }

    pub fn expanded_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.status == NodeStatus::Expanded)
            .count()
    }

    /// Nodes in export order: expanded nodes by expansion order, then the
    /// rest by generation order.
    pub fn export_order(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..self.nodes.len()).collect();
        ids.sort_by_key(|&i| (self.nodes[i].expansion_order.unwrap_or(u32::MAX), i));
        ids
    }

    /// Flat record stream: a header, then each node followed by its parent
    /// edge, in [`export_order`](Self::export_order).
    pub fn to_records(&self) -> Vec<TreeRecord> {
        let mut out = Vec::with_capacity(1 + self.nodes.len() + self.edges.len());
        out.push(TreeRecord::Tree(TreeHeader {
            fact_count: self.fact_count,
            nodes: self.nodes.len(),
            edges: self.edges.len(),
            goal: self.goal,
            optimal_path: self.optimal_path.clone(),
        }));
        for id in self.export_order() {
            let n = &self.nodes[id];
            out.push(TreeRecord::Node {
                id,
                parent: n.parent,
                action: n.parent_edge.map(|e| self.edges[e].label.clone()),
                g: n.g,
                h: n.h.finite(),
                f: n.f().finite(),
                status: n.status,
                expansion_order: n.expansion_order,
                duplicate_of: n.duplicate_of,
                informative: n.informative,
                state: format!("{:016x}", n.state_hash),
                facts: n.facts.iter().collect(),
            });
            if let Some(e) = n.parent_edge {
                let edge = &self.edges[e];
                out.push(TreeRecord::Edge {
                    id: e,
                    parent: edge.parent,
                    child: edge.child,
                    action: edge.label.clone(),
                    action_index: edge.action_index,
                });
            }
        }
        out
    }

    /// Rebuilds a tree from [`to_records`](Self::to_records) output (any
    /// record order after the header).
    pub fn from_records(records: &[TreeRecord]) -> Result<ReasoningTree, ImportError> {
        let mut it = records.iter();
        let header = match it.next() {
            Some(TreeRecord::Tree(h)) => h,
            _ => return Err(ImportError::MissingHeader),
        };
        let mut nodes: Vec<Option<SearchNode>> = vec![None; header.nodes];
        let mut edges: Vec<Option<SearchEdge>> = vec![None; header.edges];
        for r in it {
            match r {
                TreeRecord::Tree(_) => return Err(ImportError::MissingHeader),
                TreeRecord::Node {
                    id,
                    parent,
                    g,
                    h,
                    status,
                    expansion_order,
                    duplicate_of,
                    informative,
                    facts,
                    ..
                } => {
                    let slot = nodes.get_mut(*id).ok_or(ImportError::BadId(*id))?;
                    if slot.is_some() {
                        return Err(ImportError::BadId(*id));
                    }
                    if facts.iter().any(|&f| f >= header.fact_count) {
                        return Err(ImportError::Inconsistent(*id));
                    }
                    let facts = FactSet::from_indices(header.fact_count, facts.iter().copied());
                    *slot = Some(SearchNode {
                        id: *id,
                        parent: *parent,
                        parent_edge: None,
                        state_hash: facts.stable_hash(),
                        facts,
                        g: *g,
                        h: h.map_or(Cost::Infinite, Cost::Finite),
                        status: *status,
                        expansion_order: *expansion_order,
                        duplicate_of: *duplicate_of,
                        children: Vec::new(),
                        informative: *informative,
                    });
                }
                TreeRecord::Edge {
                    id,
                    parent,
                    child,
                    action,
                    action_index,
                } => {
                    let slot = edges.get_mut(*id).ok_or(ImportError::BadId(*id))?;
                    if slot.is_some() {
                        return Err(ImportError::BadId(*id));
                    }
                    *slot = Some(SearchEdge {
                        parent: *parent,
                        child: *child,
                        action_index: *action_index,
                        label: action.clone(),
                    });
                }
            }
        }
        let mut nodes: Vec<SearchNode> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or(ImportError::Missing(i)))
            .collect::<Result<_, _>>()?;
        let edges: Vec<SearchEdge> = edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or(ImportError::Missing(i)))
            .collect::<Result<_, _>>()?;
        for (i, e) in edges.iter().enumerate() {
            let child = nodes.get_mut(e.child).ok_or(ImportError::BadId(e.child))?;
            if child.parent != Some(e.parent) || child.parent_edge.is_some() {
                return Err(ImportError::Inconsistent(e.child));
            }
            child.parent_edge = Some(i);
            nodes
                .get_mut(e.parent)
                .ok_or(ImportError::BadId(e.parent))?
                .children
                .push(i);
        }
        if let Some(n) = nodes.iter().find(|n| n.parent.is_some() != n.parent_edge.is_some()) {
            return Err(ImportError::Inconsistent(n.id));
        }
        Ok(ReasoningTree {
            fact_count: header.fact_count,
            nodes,
            edges,
            goal: header.goal,
            optimal_path: header.optimal_path.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeHeader {
    pub fact_count: usize,
    pub nodes: usize,
    pub edges: usize,
    pub goal: Option<NodeId>,
    pub optimal_path: Vec<EdgeId>,
}

/// One line of the JSONL tree export. `h`/`f` are `null` when infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeRecord {
    Tree(TreeHeader),
    Node {
        id: NodeId,
        parent: Option<NodeId>,
        action: Option<String>,
        g: u32,
        h: Option<u32>,
        f: Option<u32>,
        status: NodeStatus,
        expansion_order: Option<u32>,
        duplicate_of: Option<NodeId>,
        #[serde(default)]
        informative: bool,
        state: String,
        facts: Vec<usize>,
    },
    Edge {
        id: EdgeId,
        parent: NodeId,
        child: NodeId,
        action: String,
        action_index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ImportError {
    #[error("tree export must start with a single header record")]
    MissingHeader,
    #[error("record id {0} is out of range or repeated")]
    BadId(usize),
    #[error("record {0} is missing")]
    Missing(usize),
    #[error("node {0} disagrees with its parent edge")]
    Inconsistent(usize),
}
