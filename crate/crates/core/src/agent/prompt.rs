use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::scenario::{Action, Observation, Scenario};

pub const MATCHER_SYSTEM: &str = "You are the matcher in a two-player game. The director can see some \
of the locations in a room and asks you for an object. You see the room from your own position, which \
may differ from what the director sees. Reply with one line `Thought: ...` and then one line \
`Action: ...` using exactly one of the available actions.";

/// Text description of what the Matcher currently sees.
pub fn describe_observation(sc: &Scenario, obs: &Observation) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "You are at the {} (location {}).",
        sc.label(obs.facing),
        obs.facing
    );
    for &l in &obs.visible_locations {
        let here: Vec<String> = obs
            .items
            .iter()
            .filter(|i| i.location == l)
            .map(|i| {
                let name = sc.item(&i.item).map_or_else(|| i.item.to_string(), |it| it.describe());
                match &i.container {
                    Some(c) => format!("{name} [{}] in the {c}", i.item),
                    None => format!("{name} [{}]", i.item),
                }
            })
            .collect();
        let closed: Vec<String> = obs
            .containers
            .iter()
            .filter(|c| c.location == l && !c.is_open)
            .map(|c| format!("a closed {}", c.id))
            .collect();
        let mut all = here;
        all.extend(closed);
        let _ = write!(s, " At the {} (location {l}): ", sc.label(l));
        if all.is_empty() {
            s.push_str("nothing.");
        } else {
            s.push_str(&all.join(", "));
            s.push('.');
        }
    }
    let hidden: Vec<String> = (0..sc.location_count())
        .filter(|l| !obs.visible_locations.contains(l))
        .map(|l| format!("{} (location {l})", sc.label(l)))
        .collect();
    if !hidden.is_empty() {
        let _ = write!(s, " You cannot see the {}.", hidden.join(" or the "));
    }
    if let Some(h) = &obs.holding {
        let _ = write!(s, " You are holding {h}.");
    }
    s
}

pub fn render_actions(actions: &[Action]) -> String {
    let v: Vec<String> = actions.iter().map(|a| format!("`{a}`")).collect();
    v.join(", ")
}

/// One completed turn, as shown back to the policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub action: Option<Action>,
    pub raw: String,
    pub feedback: String,
}

pub struct PromptInput<'a> {
    pub scenario: &'a Scenario,
    pub examples: &'a [String],
    pub history: &'a [HistoryEntry],
    pub observation: &'a Observation,
    pub available: &'a [Action],
}

pub fn render_prompt(p: &PromptInput<'_>) -> String {
    let mut s = String::new();
    if !p.examples.is_empty() {
        s.push_str("Examples:\n\n");
        for (i, e) in p.examples.iter().enumerate() {
            let _ = writeln!(s, "Example {}:\n{}\n", i + 1, e.trim_end());
        }
    }
    let _ = writeln!(s, "Director: \"{}\"", p.scenario.utterance.text);
    for h in p.history {
        match &h.action {
            Some(a) => {
                let _ = writeln!(s, "Action: {a}");
            }
            None => {
                let _ = writeln!(s, "Action: {}", h.raw.trim());
            }
        }
        let _ = writeln!(s, "Observation: {}", h.feedback);
    }
    let _ = writeln!(
        s,
        "Current observation: {}",
        describe_observation(p.scenario, p.observation)
    );
    let _ = writeln!(s, "Available actions: {}", render_actions(p.available));
    s
}
