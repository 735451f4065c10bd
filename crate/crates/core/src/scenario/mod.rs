//! World model for the Director/Matcher task.
//!
//! A scenario is a row of locations. Each location has surface items and
//! containers. The Director is fixed; the Matcher moves along the row, opens
//! containers, takes items in front of it, and may ask the Director which
//! object is meant. Both agents see the location they face plus the adjacent
//! ones, minus a per-agent occlusion mask.

mod director;
mod file;
mod pack;
mod validate;
mod world;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use director::{respond, AnswerContent, AnswerEvent, RelativePosition};
pub use file::{
    ContainerSpec, LocationSpec, OcclusionSpec, PoseSpec, ScenarioFile, UtteranceSpec,
};
pub use pack::{reference_file, reference_pack, reference_scenario};
pub use validate::{check_family_predicates, validate_structure, Unrealizable};
pub use world::{Observation, SeenContainer, SeenItem};

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.into())
            }
        }
    };
}

id_newtype!(ItemId);
id_newtype!(ContainerId);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    /// Noun class, e.g. `shirt`.
    pub category: String,
    /// Distinguishing adjective, e.g. `gold`.
    pub attribute: String,
}

impl Item {
    pub fn describe(&self) -> String {
        alloc::format!("{} {}", self.attribute, self.category)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Container {
    pub id: ContainerId,
    pub contents: BTreeSet<ItemId>,
    pub is_open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub index: usize,
    pub surface_items: BTreeSet<ItemId>,
    pub containers: Vec<Container>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Director,
    Matcher,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Director => "director",
            Role::Matcher => "matcher",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentPose {
    pub role: Role,
    pub facing: usize,
    pub mobile: bool,
}

/// What the Matcher has learned through dialogue. Only ever grows.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KnowledgeFacts {
    pub knows_target_identity: bool,
    pub revealed_locations: BTreeSet<usize>,
}

impl KnowledgeFacts {
    /// `self` contains every fact of `earlier`.
    pub fn extends(&self, earlier: &KnowledgeFacts) -> bool {
        (self.knows_target_identity || !earlier.knows_target_identity)
            && earlier.revealed_locations.is_subset(&self.revealed_locations)
    }
}

/// Per-agent sets of locations that are structurally blocked from view.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occlusion {
    pub director: BTreeSet<usize>,
    pub matcher: BTreeSet<usize>,
}

impl Occlusion {
    pub fn for_role(&self, role: Role) -> &BTreeSet<usize> {
        match role {
            Role::Director => &self.director,
            Role::Matcher => &self.matcher,
        }
    }
}

/// Full world state. The occlusion masks and the ambiguity flag are static
/// within an episode but live here so transitions need nothing else.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub locations: Vec<Location>,
    pub director: AgentPose,
    pub matcher: AgentPose,
    pub occlusion: Occlusion,
    /// The Director's request matches two or more items the Director can see.
    pub ambiguous: bool,
    pub knowledge: KnowledgeFacts,
    pub holding: Option<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "location", rename_all = "snake_case")]
pub enum Question {
    /// "Which one do you mean?"
    Which,
    /// "What can you see at location i?"
    AtLocation(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Move { to: usize },
    Open { container: ContainerId },
    Take { item: ItemId },
    Ask { question: Question },
}

impl Action {
    pub fn ask() -> Self {
        Action::Ask {
            question: Question::Which,
        }
    }

    pub fn is_ask(&self) -> bool {
        matches!(self, Action::Ask { .. })
    }

    pub fn is_take(&self) -> bool {
        matches!(self, Action::Take { .. })
    }
}

impl fmt::Display for Action {
    /// Canonical action syntax, accepted back by [`crate::agent::parse_action`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Move { to } => write!(f, "move {to}"),
            Action::Open { container } => write!(f, "open {container}"),
            Action::Take { item } => write!(f, "take {item}"),
            Action::Ask {
                question: Question::Which,
            } => f.write_str("ask which"),
            Action::Ask {
                question: Question::AtLocation(i),
            } => write!(f, "ask about {i}"),
        }
    }
}

/// Planning-domain variant: with (`+ask`) or without (`-ask`) clarification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AskVariant {
    #[serde(rename = "+ask")]
    WithAsk,
    #[serde(rename = "-ask")]
    WithoutAsk,
}

impl AskVariant {
    pub const ALL: [AskVariant; 2] = [AskVariant::WithoutAsk, AskVariant::WithAsk];

    /// `+ask` / `-ask`
    pub fn sign(self) -> &'static str {
        match self {
            AskVariant::WithAsk => "+ask",
            AskVariant::WithoutAsk => "-ask",
        }
    }

    /// File-name friendly tag: `ask` / `noask`.
    pub fn slug(self) -> &'static str {
        match self {
            AskVariant::WithAsk => "ask",
            AskVariant::WithoutAsk => "noask",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+ask" | "ask" | "with-ask" => Some(AskVariant::WithAsk),
            "-ask" | "noask" | "no-ask" | "without-ask" => Some(AskVariant::WithoutAsk),
            _ => None,
        }
    }
}

impl fmt::Display for AskVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.sign())
    }
}

/// Which transitions are legal. Planning domains and the agent runtime use
/// different rule sets over the same world.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rules {
    pub ask: bool,
    /// `ask about <i>` is accepted (runtime only; planners only ask "which").
    pub location_questions: bool,
    /// Under ambiguity, Take requires `knows_target_identity`.
    pub gate_take_on_knowledge: bool,
}

impl Rules {
    pub const RUNTIME: Rules = Rules {
        ask: true,
        location_questions: true,
        gate_take_on_knowledge: false,
    };

    pub fn planning(variant: AskVariant) -> Rules {
        let ask = variant == AskVariant::WithAsk;
        Rules {
            ask,
            location_questions: false,
            gate_take_on_knowledge: ask,
        }
    }
}

/// The seven environment families, in the column order used by the tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Persp,
    Far,
    Hidd,
    Not,
    Dist,
    Base,
    Near,
}

/// Cognitive-demand tags attached to families as report metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Demand {
    /// Common-ground filtering.
    F1,
    /// Imagining Director-privileged space.
    F2,
    /// Cost-benefit evaluation of epistemic actions.
    F3,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Persp,
        Family::Far,
        Family::Hidd,
        Family::Not,
        Family::Dist,
        Family::Base,
        Family::Near,
    ];

    /// Short column header (`Persp`, `Far`, ...).
    pub fn short(self) -> &'static str {
        match self {
            Family::Persp => "Persp",
            Family::Far => "Far",
            Family::Hidd => "Hidd",
            Family::Not => "Not",
            Family::Dist => "Dist",
            Family::Base => "Base",
            Family::Near => "Near",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Family::Persp => "persp",
            Family::Far => "far",
            Family::Hidd => "hidd",
            Family::Not => "not",
            Family::Dist => "dist",
            Family::Base => "base",
            Family::Near => "near",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Family::Persp => "Perspective Taking",
            Family::Far => "Far",
            Family::Hidd => "Hidden",
            Family::Not => "Not That",
            Family::Dist => "Distractor",
            Family::Base => "Base",
            Family::Near => "Near",
        }
    }

    pub fn demands(self) -> &'static [Demand] {
        match self {
            Family::Base | Family::Persp => &[Demand::F1],
            Family::Near => &[Demand::F1, Demand::F3],
            Family::Dist | Family::Hidd | Family::Not => &[Demand::F2],
            Family::Far => &[Demand::F3],
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        let lower = s.trim().to_ascii_lowercase();
        Some(match lower.as_str() {
            "persp" | "perspective" | "perspective-taking" => Family::Persp,
            "far" => Family::Far,
            "hidd" | "hidden" => Family::Hidd,
            "not" | "not-that" | "notthat" | "not_that" => Family::Not,
            "dist" | "distractor" => Family::Dist,
            "base" => Family::Base,
            "near" => Family::Near,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// The Director's request. `attribute` is set when the Director names the
/// target explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub category: String,
    pub attribute: Option<String>,
}

impl Utterance {
    pub fn matches(&self, item: &Item) -> bool {
        item.category == self.category
            && self.attribute.as_ref().is_none_or(|a| *a == item.attribute)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub family: Option<Family>,
    pub location_labels: Vec<String>,
    pub items: Vec<Item>,
    pub initial: WorldState,
    pub target: ItemId,
    pub distractor: Option<ItemId>,
    pub utterance: Utterance,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("inapplicable action `{action}`: {reason}")]
    InapplicableAction { action: String, reason: &'static str },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    pub fn item(&self, id: &ItemId) -> Option<&Item> {
        self.items.iter().find(|i| &i.id == id)
    }

    pub fn target_item(&self) -> &Item {
        self.item(&self.target)
            .expect("validated scenario has its target in the catalog")
    }

    pub fn location_count(&self) -> usize {
        self.initial.locations.len()
    }

    pub fn label(&self, index: usize) -> &str {
        self.location_labels
            .get(index)
            .map(String::as_str)
            .unwrap_or("location")
    }

    /// Whether the request is ambiguous from the Director's point of view:
    /// two or more items the Director can see fit the utterance.
    pub fn compute_ambiguity(&self) -> bool {
        let view = self.initial.observation_of(Role::Director);
        view.items
            .iter()
            .filter_map(|s| self.item(&s.item))
            .filter(|it| self.utterance.matches(it))
            .count()
            >= 2
    }

    pub fn is_goal(&self, state: &WorldState) -> bool {
        state.holding.as_ref() == Some(&self.target)
    }

    pub fn applicable_actions(&self, state: &WorldState, rules: Rules) -> Vec<Action> {
        state.applicable_actions(rules)
    }

    /// Every object name the scenario declares (locations excluded).
    pub fn object_names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.id.as_str()).chain(
            self.initial
                .locations
                .iter()
                .flat_map(|l| l.containers.iter().map(|c| c.id.as_str())),
        )
    }
}
