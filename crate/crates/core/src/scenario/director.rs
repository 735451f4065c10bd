use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ItemId, Observation, Question, Role, Scenario};

/// Position of a location relative to the Director's own facing location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativePosition {
    Left,
    InFront,
    Right,
}

impl RelativePosition {
    fn of(location: usize, facing: usize) -> Self {
        use core::cmp::Ordering::*;
        match location.cmp(&facing) {
            Less => RelativePosition::Left,
            Equal => RelativePosition::InFront,
            Greater => RelativePosition::Right,
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            RelativePosition::Left => "to my left",
            RelativePosition::InFront => "right in front of me",
            RelativePosition::Right => "to my right",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnswerContent {
    /// The Director names the target and where it is.
    Identify {
        item: ItemId,
        attribute: String,
        category: String,
        location: usize,
        relative: RelativePosition,
    },
    /// The target is not among the things the Director can see.
    TargetNotVisible,
    /// The asked-about location is outside the Director's view.
    CannotSee { location: usize },
    /// What the Director sees at a location, and whether the target is there.
    Describe {
        location: usize,
        items: Vec<ItemId>,
        target_here: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerEvent {
    pub question: Question,
    pub content: AnswerContent,
    /// Natural-language rendering handed to LLM agents.
    pub text: String,
}

/// Scripted, truthful Director. Only facts in `view` (the Director's own
/// observation) are used; the Director's pose never changes so identical
/// questions get identical answers.
pub fn respond(view: &Observation, question: &Question, scenario: &Scenario) -> AnswerEvent {
    debug_assert_eq!(view.role, Role::Director);
    let content = match question {
        Question::Which => match view.items.iter().find(|s| s.item == scenario.target) {
            Some(seen) => {
                let item = scenario.target_item();
                AnswerContent::Identify {
                    item: item.id.clone(),
                    attribute: item.attribute.clone(),
                    category: item.category.clone(),
                    location: seen.location,
                    relative: RelativePosition::of(seen.location, view.facing),
                }
            }
            None => AnswerContent::TargetNotVisible,
        },
        Question::AtLocation(loc) => {
            if view.visible_locations.contains(loc) {
                let items: Vec<ItemId> = view
                    .items
                    .iter()
                    .filter(|s| s.location == *loc)
                    .map(|s| s.item.clone())
                    .collect();
                let target_here = items.contains(&scenario.target);
                AnswerContent::Describe {
                    location: *loc,
                    items,
                    target_here,
                }
            } else {
                AnswerContent::CannotSee { location: *loc }
            }
        }
    };
    let text = render_answer(&content, scenario);
    AnswerEvent {
        question: question.clone(),
        content,
        text,
    }
}

fn render_answer(content: &AnswerContent, scenario: &Scenario) -> String {
    match content {
        AnswerContent::Identify {
            attribute,
            category,
            location,
            relative,
            ..
        } => format!(
            "I mean the {attribute} {category}. It is at the {} (location {location}), {}.",
            scenario.label(*location),
            relative.phrase()
        ),
        AnswerContent::TargetNotVisible => {
            String::from("I can't see the object I mean from where I am.")
        }
        AnswerContent::CannotSee { location } => format!(
            "I cannot see the {} (location {location}) from where I am.",
            scenario.label(*location)
        ),
        AnswerContent::Describe {
            location,
            items,
            target_here,
        } => {
            let names: Vec<String> = items
                .iter()
                .map(|id| match scenario.item(id) {
                    Some(it) => format!("the {}", it.describe()),
                    None => format!("{id}"),
                })
                .collect();
            let seen = if names.is_empty() {
                String::from("nothing")
            } else {
                names.join(", ")
            };
            let verdict = if *target_here {
                "The one I mean is there."
            } else {
                "The one I mean is not there."
            };
            format!(
                "At the {} (location {location}) I can see {seen}. {verdict}",
                scenario.label(*location)
            )
        }
    }
}
