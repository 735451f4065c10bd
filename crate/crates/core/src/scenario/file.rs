//! On-disk scenario schema.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    AgentPose, Container, ContainerId, Family, Item, ItemId, KnowledgeFacts, Location, Occlusion,
    Role, Scenario, ScenarioError, Utterance, WorldState,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationSpec {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub surface_items: Vec<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainerSpec {
    pub id: ContainerId,
    pub location: usize,
    #[serde(default)]
    pub contents: Vec<ItemId>,
    #[serde(default)]
    pub is_open: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoseSpec {
    pub director: usize,
    pub matcher: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcclusionSpec {
    #[serde(default)]
    pub director: Vec<usize>,
    #[serde(default)]
    pub matcher: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceSpec {
    pub text: String,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
}

/// JSON scenario file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub locations: Vec<LocationSpec>,
    pub items: Vec<Item>,
    #[serde(default)]
    pub containers: Vec<ContainerSpec>,
    pub poses: PoseSpec,
    #[serde(default)]
    pub occlusion_masks: OcclusionSpec,
    pub target_id: ItemId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distractor_id: Option<ItemId>,
    pub director_utterance: UtteranceSpec,
}

impl ScenarioFile {
    /// Builds and structurally validates a [`Scenario`].
    pub fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let n = self.locations.len();
        if n == 0 {
            return Err(invalid("scenario needs at least one location"));
        }
        let mut locs = self.locations;
        locs.sort_by_key(|l| l.index);
        for (i, l) in locs.iter().enumerate() {
            if l.index != i {
                return Err(invalid(format!(
                    "location indices must be contiguous from 0 (found {} at position {i})",
                    l.index
                )));
            }
        }
        let mut locations: Vec<Location> = locs
            .iter()
            .map(|l| Location {
                index: l.index,
                surface_items: l.surface_items.iter().cloned().collect(),
                containers: Vec::new(),
            })
            .collect();
        for c in &self.containers {
            let loc = locations
                .get_mut(c.location)
                .ok_or_else(|| invalid(format!("container {} at unknown location {}", c.id, c.location)))?;
            loc.containers.push(Container {
                id: c.id.clone(),
                contents: c.contents.iter().cloned().collect(),
                is_open: c.is_open,
            });
        }
        let pose = |role, facing, mobile| AgentPose {
            role,
            facing,
            mobile,
        };
        let initial = WorldState {
            locations,
            director: pose(Role::Director, self.poses.director, false),
            matcher: pose(Role::Matcher, self.poses.matcher, true),
            occlusion: Occlusion {
                director: self.occlusion_masks.director.iter().copied().collect(),
                matcher: self.occlusion_masks.matcher.iter().copied().collect(),
            },
            ambiguous: false,
            knowledge: KnowledgeFacts::default(),
            holding: None,
        };
        let mut sc = Scenario {
            id: self.id,
            family: self.family,
            location_labels: locs
                .iter()
                .map(|l| l.label.clone().unwrap_or_else(|| format!("location {}", l.index)))
                .collect(),
            items: self.items,
            initial,
            target: self.target_id,
            distractor: self.distractor_id,
            utterance: Utterance {
                text: self.director_utterance.text,
                category: self.director_utterance.category,
                attribute: self.director_utterance.attribute,
            },
        };
        super::validate_structure(&sc)?;
        sc.initial.ambiguous = sc.compute_ambiguity();
        Ok(sc)
    }

    pub fn from_scenario(sc: &Scenario) -> ScenarioFile {
        let s = &sc.initial;
        ScenarioFile {
            id: sc.id.clone(),
            family: sc.family,
            locations: s
                .locations
                .iter()
                .map(|l| LocationSpec {
                    index: l.index,
                    label: sc.location_labels.get(l.index).cloned(),
                    surface_items: l.surface_items.iter().cloned().collect(),
                })
                .collect(),
            items: sc.items.clone(),
            containers: s
                .locations
                .iter()
                .flat_map(|l| {
                    l.containers.iter().map(move |c| ContainerSpec {
                        id: c.id.clone(),
                        location: l.index,
                        contents: c.contents.iter().cloned().collect(),
                        is_open: c.is_open,
                    })
                })
                .collect(),
            poses: PoseSpec {
                director: s.director.facing,
                matcher: s.matcher.facing,
            },
            occlusion_masks: OcclusionSpec {
                director: s.occlusion.director.iter().copied().collect(),
                matcher: s.occlusion.matcher.iter().copied().collect(),
            },
            target_id: sc.target.clone(),
            distractor_id: sc.distractor.clone(),
            director_utterance: UtteranceSpec {
                text: sc.utterance.text.clone(),
                category: sc.utterance.category.clone(),
                attribute: sc.utterance.attribute.clone(),
            },
        }
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// Used by the structural validator: ids must be unique across items and
/// containers because both become PDDL objects.
pub(crate) fn duplicate_names<'a>(names: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let mut seen = BTreeSet::new();
    names.into_iter().find(|&n| !seen.insert(n))
}
