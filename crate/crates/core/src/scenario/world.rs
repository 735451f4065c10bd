use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    Action, AgentPose, ContainerId, ItemId, KnowledgeFacts, Question, Role, Rules, ScenarioError,
    WorldState,
};
use crate::hash::{fnv1a64, CanonicalWriter};

/// Where an item currently is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    Surface(usize),
    InContainer { location: usize, container: ContainerId },
    Held,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeenItem {
    pub item: ItemId,
    pub location: usize,
    pub container: Option<ContainerId>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeenContainer {
    pub id: ContainerId,
    pub location: usize,
    pub is_open: bool,
}

/// One agent's view of the world.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub role: Role,
    pub facing: usize,
    pub visible_locations: BTreeSet<usize>,
    /// Sorted by (location, container, item).
    pub items: Vec<SeenItem>,
    pub containers: Vec<SeenContainer>,
    pub knowledge: KnowledgeFacts,
    pub holding: Option<ItemId>,
}

impl Observation {
    pub fn sees(&self, item: &ItemId) -> bool {
        self.items.iter().any(|s| &s.item == item)
    }

    pub fn item_ids(&self) -> BTreeSet<ItemId> {
        self.items.iter().map(|s| s.item.clone()).collect()
    }
}

/// `{facing-1, facing, facing+1}` clipped to the row, minus the mask. The
/// facing location itself is never masked.
pub(crate) fn visible_set(
    facing: usize,
    len: usize,
    mask: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    let lo = facing.saturating_sub(1);
    let hi = (facing + 1).min(len.saturating_sub(1));
    (lo..=hi)
        .filter(|&i| i == facing || !mask.contains(&i))
        .collect()
}

impl WorldState {
    pub fn pose(&self, role: Role) -> &AgentPose {
        match role {
            Role::Director => &self.director,
            Role::Matcher => &self.matcher,
        }
    }

    pub fn visible_locations(&self, role: Role) -> BTreeSet<usize> {
        visible_set(
            self.pose(role).facing,
            self.locations.len(),
            self.occlusion.for_role(role),
        )
    }

    pub fn placement(&self, item: &ItemId) -> Option<Placement> {
        if self.holding.as_ref() == Some(item) {
            return Some(Placement::Held);
        }
        for loc in &self.locations {
            if loc.surface_items.contains(item) {
                return Some(Placement::Surface(loc.index));
            }
            for c in &loc.containers {
                if c.contents.contains(item) {
                    return Some(Placement::InContainer {
                        location: loc.index,
                        container: c.id.clone(),
                    });
                }
            }
        }
        None
    }

    /// Location index of an item that is not held.
    pub fn location_of(&self, item: &ItemId) -> Option<usize> {
        match self.placement(item)? {
            Placement::Surface(l) | Placement::InContainer { location: l, .. } => Some(l),
            Placement::Held => None,
        }
    }

    /// All item ids present anywhere, including the held one.
    pub fn all_items(&self) -> Vec<ItemId> {
        let mut out: Vec<ItemId> = Vec::new();
        for loc in &self.locations {
            out.extend(loc.surface_items.iter().cloned());
            for c in &loc.containers {
                out.extend(c.contents.iter().cloned());
            }
        }
        out.extend(self.holding.iter().cloned());
        out.sort();
        out
    }

    pub fn container_location(&self, id: &ContainerId) -> Option<usize> {
        self.locations
            .iter()
            .find(|l| l.containers.iter().any(|c| &c.id == id))
            .map(|l| l.index)
    }

    pub fn observation_of(&self, role: Role) -> Observation {
        let visible = self.visible_locations(role);
        let mut items = Vec::new();
        let mut containers = Vec::new();
        for &i in &visible {
            let loc = &self.locations[i];
            for it in &loc.surface_items {
                items.push(SeenItem {
                    item: it.clone(),
                    location: i,
                    container: None,
                });
            }
            for c in &loc.containers {
                containers.push(SeenContainer {
                    id: c.id.clone(),
                    location: i,
                    is_open: c.is_open,
                });
                if c.is_open {
                    for it in &c.contents {
                        items.push(SeenItem {
                            item: it.clone(),
                            location: i,
                            container: Some(c.id.clone()),
                        });
                    }
                }
            }
        }
        items.sort();
        let (knowledge, holding) = match role {
            Role::Matcher => (self.knowledge.clone(), self.holding.clone()),
            Role::Director => (
                KnowledgeFacts {
                    knows_target_identity: true,
                    revealed_locations: BTreeSet::new(),
                },
                None,
            ),
        };
        Observation {
            role,
            facing: self.pose(role).facing,
            visible_locations: visible,
            items,
            containers,
            knowledge,
            holding,
        }
    }

    /// Applicable Matcher actions in canonical order: move left, move right,
    /// opens, takes, ask.
    pub fn applicable_actions(&self, rules: Rules) -> Vec<Action> {
        let mut out = Vec::new();
        let f = self.matcher.facing;
        if f > 0 {
            out.push(Action::Move { to: f - 1 });
        }
        if f + 1 < self.locations.len() {
            out.push(Action::Move { to: f + 1 });
        }
        let here = &self.locations[f];
        for c in &here.containers {
            if !c.is_open {
                out.push(Action::Open {
                    container: c.id.clone(),
                });
            }
        }
        if self.take_allowed(rules) {
            for it in &here.surface_items {
                out.push(Action::Take { item: it.clone() });
            }
            for c in here.containers.iter().filter(|c| c.is_open) {
                for it in &c.contents {
                    out.push(Action::Take { item: it.clone() });
                }
            }
        }
        if rules.ask {
            out.push(Action::ask());
        }
        out
    }

    fn take_allowed(&self, rules: Rules) -> bool {
        self.holding.is_none()
            && (!rules.gate_take_on_knowledge
                || !self.ambiguous
                || self.knowledge.knows_target_identity)
    }

    /// `Ok(())` if `action` may be applied, otherwise the reason it may not.
    pub fn check_applicable(&self, action: &Action, rules: Rules) -> Result<(), &'static str> {
        let f = self.matcher.facing;
        match action {
            Action::Move { to } => {
                if *to >= self.locations.len() {
                    Err("no such location")
                } else if to.abs_diff(f) != 1 {
                    Err("can only move to an adjacent location")
                } else {
                    Ok(())
                }
            }
            Action::Open { container } => {
                match self.locations[f].containers.iter().find(|c| &c.id == container) {
                    None => Err("no such container in front of the matcher"),
                    Some(c) if c.is_open => Err("container is already open"),
                    Some(_) => Ok(()),
                }
            }
            Action::Take { item } => {
                if self.holding.is_some() {
                    return Err("already holding an item");
                }
                if !self.take_allowed(rules) {
                    return Err("target identity unknown under an ambiguous request");
                }
                let here = &self.locations[f];
                if here.surface_items.contains(item) {
                    return Ok(());
                }
                match here.containers.iter().find(|c| c.contents.contains(item)) {
                    Some(c) if c.is_open => Ok(()),
                    Some(_) => Err("item is inside a closed container"),
                    None => Err("item is not in front of the matcher"),
                }
            }
            Action::Ask { question } => {
                if !rules.ask {
                    return Err("asking is not available");
                }
                match question {
                    Question::Which => Ok(()),
                    Question::AtLocation(i) if !rules.location_questions => {
                        let _ = i;
                        Err("location questions are not available")
                    }
                    Question::AtLocation(i) if *i >= self.locations.len() => {
                        Err("no such location")
                    }
                    Question::AtLocation(_) => Ok(()),
                }
            }
        }
    }

    /// Pure transition. The Director's answer to an Ask is produced separately
    /// by [`super::respond`]; here Ask only updates knowledge facts.
    pub fn apply(&self, action: &Action, rules: Rules) -> Result<WorldState, ScenarioError> {
        self.check_applicable(action, rules)
            .map_err(|reason| ScenarioError::InapplicableAction {
                action: action.to_string(),
                reason,
            })?;
        let mut next = self.clone();
        let f = next.matcher.facing;
        match action {
            Action::Move { to } => next.matcher.facing = *to,
            Action::Open { container } => {
                if let Some(c) = next.locations[f]
                    .containers
                    .iter_mut()
                    .find(|c| &c.id == container)
                {
                    c.is_open = true;
                }
            }
            Action::Take { item } => {
                let here = &mut next.locations[f];
                if !here.surface_items.remove(item) {
                    for c in &mut here.containers {
                        if c.contents.remove(item) {
                            break;
                        }
                    }
                }
                next.holding = Some(item.clone());
            }
            Action::Ask { question } => match question {
                Question::Which => next.knowledge.knows_target_identity = true,
                Question::AtLocation(i) => {
                    if self.visible_locations(Role::Director).contains(i) {
                        next.knowledge.revealed_locations.insert(*i);
                    }
                }
            },
        }
        Ok(next)
    }

    /// Canonical byte layout (all integers little-endian):
    ///
    /// ```text
    /// "DTWS" u8=1
    /// u32 n_locations
    ///   per location: u32 index
    ///                 u32 n_surface, then n_surface strings (sorted)
    ///                 u32 n_containers, per container: string id, u8 open,
    ///                     u32 n_contents, then strings (sorted)
    /// u32 director.facing, u32 matcher.facing
    /// u32 |director mask|, u32... ; u32 |matcher mask|, u32...
    /// u8 ambiguous
    /// u8 knows_target_identity, u32 |revealed|, u32...
    /// u8 has_holding, [string holding]
    /// ```
    ///
    /// Strings are `u32 byte length` + UTF-8 bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::new();
        w.bytes(b"DTWS");
        w.u8(1);
        w.u32(self.locations.len() as u32);
        for loc in &self.locations {
            w.u32(loc.index as u32);
            w.u32(loc.surface_items.len() as u32);
            for it in &loc.surface_items {
                w.str(it.as_str());
            }
            w.u32(loc.containers.len() as u32);
            for c in &loc.containers {
                w.str(c.id.as_str());
                w.u8(c.is_open as u8);
                w.u32(c.contents.len() as u32);
                for it in &c.contents {
                    w.str(it.as_str());
                }
            }
        }
        w.u32(self.director.facing as u32);
        w.u32(self.matcher.facing as u32);
        for mask in [&self.occlusion.director, &self.occlusion.matcher] {
            w.u32(mask.len() as u32);
            for &i in mask {
                w.u32(i as u32);
            }
        }
        w.u8(self.ambiguous as u8);
        w.u8(self.knowledge.knows_target_identity as u8);
        w.u32(self.knowledge.revealed_locations.len() as u32);
        for &i in &self.knowledge.revealed_locations {
            w.u32(i as u32);
        }
        match &self.holding {
            Some(h) => {
                w.u8(1);
                w.str(h.as_str());
            }
            None => w.u8(0),
        }
        w.finish()
    }

    /// FNV-1a 64 of [`Self::canonical_bytes`].
    pub fn state_hash(&self) -> u64 {
        fnv1a64(&self.canonical_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{reference_scenario, AskVariant, Family, Location};

    fn row(n: usize) -> WorldState {
        WorldState {
            locations: (0..n)
                .map(|index| Location {
                    index,
                    surface_items: BTreeSet::new(),
                    containers: Vec::new(),
                })
                .collect(),
            director: AgentPose {
                role: Role::Director,
                facing: 1,
                mobile: false,
            },
            matcher: AgentPose {
                role: Role::Matcher,
                facing: 0,
                mobile: true,
            },
            occlusion: Default::default(),
            ambiguous: false,
            knowledge: Default::default(),
            holding: None,
        }
    }

    #[test]
    fn visibility_clips_at_row_ends() {
        let none = BTreeSet::new();
        assert_eq!(visible_set(0, 3, &none), [0, 1].into());
        assert_eq!(visible_set(1, 3, &none), [0, 1, 2].into());
        assert_eq!(visible_set(2, 3, &none), [1, 2].into());
        assert_eq!(visible_set(0, 1, &none), [0].into());
        assert_eq!(visible_set(3, 5, &none), [2, 3, 4].into());
    }

    #[test]
    fn mask_never_hides_facing_location() {
        let mask: BTreeSet<usize> = [0, 1].into();
        assert_eq!(visible_set(1, 3, &mask), [1, 2].into());
        assert_eq!(visible_set(0, 3, &mask), [0].into());
    }

    #[test]
    fn boundary_cell_actions() {
        let s = row(3);
        assert_eq!(
            s.applicable_actions(Rules::RUNTIME),
            alloc::vec![Action::Move { to: 1 }, Action::ask()]
        );
    }

    #[test]
    fn one_open_and_one_take() {
        let mut s = row(3);
        s.locations[0].surface_items.insert("cup".into());
        s.locations[0].containers.push(super::super::Container {
            id: "drawer".into(),
            contents: ["sock".into()].into(),
            is_open: false,
        });
        let acts = s.applicable_actions(Rules::RUNTIME);
        assert_eq!(acts.iter().filter(|a| matches!(a, Action::Open { .. })).count(), 1);
        assert_eq!(acts.iter().filter(|a| a.is_take()).count(), 1);
        assert!(acts.contains(&Action::Take { item: "cup".into() }));
    }

    #[test]
    fn closed_container_blocks_take() {
        let mut s = row(2);
        s.locations[0].containers.push(super::super::Container {
            id: "drawer".into(),
            contents: ["sock".into()].into(),
            is_open: false,
        });
        let take = Action::Take { item: "sock".into() };
        assert!(s.apply(&take, Rules::RUNTIME).is_err());
        let opened = s
            .apply(&Action::Open { container: "drawer".into() }, Rules::RUNTIME)
            .unwrap();
        assert!(opened.observation_of(Role::Matcher).sees(&"sock".into()));
        let held = opened.apply(&take, Rules::RUNTIME).unwrap();
        assert_eq!(held.holding, Some("sock".into()));
        assert_eq!(held.all_items(), s.all_items());
    }

    #[test]
    fn open_outside_director_view_stays_hidden_from_director() {
        let mut s = row(3);
        s.director.facing = 2;
        s.occlusion.director.insert(1);
        s.locations[0].containers.push(super::super::Container {
            id: "drawer".into(),
            contents: ["sock".into()].into(),
            is_open: false,
        });
        let s = s
            .apply(&Action::Open { container: "drawer".into() }, Rules::RUNTIME)
            .unwrap();
        assert!(s.observation_of(Role::Matcher).sees(&"sock".into()));
        assert!(!s.observation_of(Role::Director).sees(&"sock".into()));
    }

    #[test]
    fn move_is_reversible() {
        let sc = reference_scenario(Family::Near);
        let s = &sc.initial;
        let there = s.apply(&Action::Move { to: 0 }, Rules::RUNTIME).unwrap();
        let back = there.apply(&Action::Move { to: 1 }, Rules::RUNTIME).unwrap();
        assert_eq!(&back, s);
        assert_eq!(back.canonical_bytes(), s.canonical_bytes());
    }

    #[test]
    fn ask_sets_knowledge_only_when_enabled() {
        let sc = reference_scenario(Family::Near);
        let s = &sc.initial;
        assert!(s
            .apply(&Action::ask(), Rules::planning(AskVariant::WithoutAsk))
            .is_err());
        let asked = s.apply(&Action::ask(), Rules::RUNTIME).unwrap();
        assert!(asked.knowledge.knows_target_identity);
        assert!(asked.knowledge.extends(&s.knowledge));
    }

    #[test]
    fn gated_take_requires_knowledge_under_ambiguity() {
        let sc = reference_scenario(Family::Near);
        let rules = Rules::planning(AskVariant::WithAsk);
        let take = Action::Take {
            item: sc.target.clone(),
        };
        assert!(sc.initial.apply(&take, rules).is_err());
        assert!(sc.initial.apply(&take, Rules::RUNTIME).is_ok());
        let asked = sc.initial.apply(&Action::ask(), rules).unwrap();
        let done = asked.apply(&take, rules).unwrap();
        assert!(sc.is_goal(&done));
    }

    #[test]
    fn canonical_hash_is_stable() {
        let sc = reference_scenario(Family::Base);
        assert_eq!(sc.initial.state_hash(), sc.initial.clone().state_hash());
        let moved = sc
            .initial
            .apply(&Action::Move { to: 0 }, Rules::RUNTIME)
            .unwrap();
        assert_ne!(sc.initial.state_hash(), moved.state_hash());
    }
}
