use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{ExampleKind, PackSource, PromptPack};
use crate::extract::{DecisionRecord, StateSummary, Step};
use crate::scenario::{Action, ItemId, Question, Scenario};

fn name(sc: &Scenario, id: &ItemId) -> String {
    sc.item(id).map_or_else(|| id.to_string(), |i| i.describe())
}

fn place(sc: &Scenario, loc: usize) -> String {
    format!("the {} (location {loc})", sc.label(loc))
}

fn matching_seen(sc: &Scenario, s: &StateSummary) -> Vec<(ItemId, usize)> {
    s.visible_items
        .iter()
        .filter(|i| sc.item(&i.item).is_some_and(|it| sc.utterance.matches(it)))
        .map(|i| (i.item.clone(), i.location))
        .collect()
}

/// Reason for taking `action` in `before`. Only what `before` shows is used.
fn reason(sc: &Scenario, kind: ExampleKind, before: &StateSummary, action: &Action, step: Option<&Step>) -> String {
    let target = &sc.target;
    let target_loc = before.visible_items.iter().find(|i| i.item == *target).map(|i| i.location);
    let request = &sc.utterance.category;
    match action {
        Action::Move { to } => {
            let seen = matching_seen(sc, before);
            let toward_target = target_loc.is_some_and(|t| t.abs_diff(*to) < t.abs_diff(before.matcher_at));
            let mut s = if !before.visible_locations.contains(to) {
                format!("I cannot see {} from here, so I move there to look.", place(sc, *to))
            } else if toward_target && kind == ExampleKind::G {
                format!("The {request} I need is at {}; I have to stand there to reach it.", place(sc, target_loc.unwrap_or(*to)))
            } else {
                format!("Moving to {} brings new things into view and gets me closer.", place(sc, *to))
            };
            if seen.len() >= 2 {
                s.push_str(&format!(" I can see {} items that fit the request.", seen.len()));
            }
            if let Some(st) = step {
                if !st.delta.new_items.is_empty() {
                    let names: Vec<String> = st.delta.new_items.iter().map(|i| name(sc, i)).collect();
                    let _ = write!(s, " This reveals the {}.", names.join(" and the "));
                }
            }
            s
        }
        Action::Open { container } => {
            let mut s = format!("The {container} is closed and could hold something I have not seen yet, so I open it.");
            if let Some(st) = step {
                if !st.delta.new_items.is_empty() {
                    let names: Vec<String> = st.delta.new_items.iter().map(|i| name(sc, i)).collect();
                    let _ = write!(s, " Inside there is the {}.", names.join(" and the "));
                }
            }
            s
        }
        Action::Ask { question } => {
            let mut s = match question {
                Question::Which => format!(
                    "More than one {request} could be the one the director means from where they stand, so I ask which one."
                ),
                Question::AtLocation(l) => format!("I ask the director what they see at {}.", place(sc, *l)),
            };
            if let Some(a) = step.and_then(|st| st.answer.as_ref()) {
                let _ = write!(s, " The director says: {a}");
            }
            s
        }
        Action::Take { item } => {
            if item == target {
                format!(
                    "The {} is in front of me and it is the one the director can see and means, so I take it.",
                    name(sc, item)
                )
            } else {
                format!("The {} is in front of me, so I take it.", name(sc, item))
            }
        }
    }
}

fn decision_thought(sc: &Scenario, d: &DecisionRecord) -> String {
    let mut s = match &d.last_action {
        Some(a) => format!("After `{a}` I am at {}.", place(sc, d.state.matcher_at)),
        None => format!("I start at {}.", place(sc, d.state.matcher_at)),
    };
    s.push(' ');
    s.push_str(&reason(sc, ExampleKind::L, &d.state, &d.chosen, None));
    let others: Vec<String> = d
        .alternatives
        .iter()
        .filter(|a| a.action != d.chosen)
        .map(|a| {
            if a.f.is_none() {
                format!("`{}` can never lead to the right object", a.action)
            } else {
                format!("`{}` would take longer", a.action)
            }
        })
        .collect();
    if !others.is_empty() {
        let _ = write!(s, " Instead, {}.", others.join(", and "));
    }
    s
}

/// Templated explanation for a prompt pack, in the required format.
pub(crate) fn synthesize(pack: &PromptPack) -> String {
    let sc = &pack.scenario;
    let mut out = String::new();
    match &pack.source {
        PackSource::Steps { start, steps } => {
            let mut before = start;
            for st in steps {
                let _ = writeln!(out, "Thought: {}", reason(sc, pack.kind, before, &st.action, Some(st)));
                let _ = writeln!(out, "Action: {}", st.action);
                before = &st.after;
            }
        }
        PackSource::Decisions(ds) => {
            for d in ds {
                let _ = writeln!(out, "Thought: {}", decision_thought(sc, d));
                let _ = writeln!(out, "Action: {}", d.chosen);
            }
        }
    }
    out
}
