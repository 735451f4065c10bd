//! Correspondence between the world model and grounded tasks built by
//! [`crate::pddl::scenario_task`]: world states map to fact sets, ground
//! actions map back to world actions.

use alloc::format;
use alloc::string::String;

use crate::pddl::location_object;
use crate::scenario::{Action, AskVariant, ContainerId, ItemId, WorldState};
use crate::task::{FactSet, GroundAction, GroundedTask};

/// Fact set a world state denotes in `task` (which must be the grounding of
/// the same scenario under `variant`). Returns `None` if a fact is missing
/// from the universe.
pub fn facts_of(state: &WorldState, task: &GroundedTask, variant: AskVariant) -> Option<FactSet> {
    let mut out = FactSet::empty(task.fact_count());
    let mut add = |name: String| -> Option<()> {
        out.insert(task.fact_index(&name)?);
        Some(())
    };
    let loc = location_object;
    add(format!("(at-matcher {})", loc(state.matcher.facing)))?;
    for i in 0..state.locations.len().saturating_sub(1) {
        add(format!("(adjacent {} {})", loc(i), loc(i + 1)))?;
        add(format!("(adjacent {} {})", loc(i + 1), loc(i)))?;
    }
    for l in &state.locations {
        for it in &l.surface_items {
            add(format!("(on {it} {})", loc(l.index)))?;
        }
        for c in &l.containers {
            add(format!("(container-at {} {})", c.id, loc(l.index)))?;
            for it in &c.contents {
                add(format!("(in {it} {})", c.id))?;
            }
            if c.is_open {
                add(format!("(open {})", c.id))?;
            }
        }
    }
    match &state.holding {
        Some(h) => add(format!("(holding {h})"))?,
        None => add("(hand-empty)".into())?,
    }
    if variant == AskVariant::WithAsk {
        if state.ambiguous {
            add("(ambiguous)".into())?;
        }
        if state.knowledge.knows_target_identity {
            add("(knows-target)".into())?;
        }
    }
    Some(out)
}

fn location_index(obj: &str) -> Option<usize> {
    obj.strip_prefix("loc")?.parse().ok()
}

/// World action for a ground action of the matcher domain.
pub fn action_of(ga: &GroundAction) -> Option<Action> {
    match ga.schema.as_str() {
        "move" => Some(Action::Move {
            to: location_index(ga.args.get(1)?)?,
        }),
        "open" => Some(Action::Open {
            container: ContainerId::new(ga.args.first()?.clone()),
        }),
        "take" | "take-known" | "take-from" | "take-from-known" => Some(Action::Take {
            item: ItemId::new(ga.args.first()?.clone()),
        }),
        "ask" => Some(Action::ask()),
        _ => None,
    }
}
