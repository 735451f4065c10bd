use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Policy, PolicyError, Turn, MATCHER_SYSTEM};
use crate::bridge::{action_of, facts_of};
use crate::forge::{Backend, CompletionRequest};
use crate::pddl::scenario_task;
use crate::scenario::{Action, AskVariant};
use crate::search::astar;
use crate::task::GroundedTask;

fn reply(thought: &str, action: &Action) -> String {
    format!("Thought: {thought}\nAction: {action}")
}

/// Replans from the true state each turn with the `+ask` planning model.
#[derive(Default)]
pub struct PlannerOracle {
    cache: Option<(String, GroundedTask)>,
}

impl Policy for PlannerOracle {
    fn name(&self) -> String {
        "planner".into()
    }

    fn act(&mut self, turn: &Turn<'_>) -> Result<String, PolicyError> {
        let sc = turn.scenario;
        if self.cache.as_ref().is_none_or(|(id, _)| *id != sc.id) {
            self.cache = Some((sc.id.clone(), scenario_task(sc, AskVariant::WithAsk)));
        }
        let task = &mut self.cache.as_mut().expect("just filled").1;
        let next = facts_of(turn.state, task, AskVariant::WithAsk).and_then(|facts| {
            task.init = facts;
            let r = astar(task);
            let first = *r.plan.as_ref()?.actions.first()?;
            action_of(&task.actions[first])
        });
        Ok(match next {
            Some(a) => reply("Following the optimal plan.", &a),
            None => reply("No plan from here; asking.", &Action::ask()),
        })
    }
}

/// Replays a fixed action list.
pub struct Scripted {
    actions: Vec<Action>,
    next: usize,
}

impl Scripted {
    pub fn new(actions: Vec<Action>) -> Self {
        Scripted { actions, next: 0 }
    }
}

impl Policy for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn act(&mut self, _turn: &Turn<'_>) -> Result<String, PolicyError> {
        let a = self.actions.get(self.next).ok_or(PolicyError::Exhausted)?;
        self.next += 1;
        Ok(reply("Scripted.", a))
    }
}

/// Naive baseline: takes the nearest visible item that fits the request,
/// ignoring what the Director can see. With nothing matching it explores
/// unseen locations, then asks.
#[derive(Default)]
pub struct NearestMatch {
    seen: BTreeSet<usize>,
    scenario: Option<String>,
    asked: bool,
}

impl Policy for NearestMatch {
    fn name(&self) -> String {
        "nearest-match".into()
    }

    fn act(&mut self, turn: &Turn<'_>) -> Result<String, PolicyError> {
        let sc = turn.scenario;
        if self.scenario.as_deref() != Some(sc.id.as_str()) {
            *self = NearestMatch {
                scenario: Some(sc.id.clone()),
                ..NearestMatch::default()
            };
        }
        let obs = turn.observation;
        self.seen.extend(obs.visible_locations.iter().copied());
        let here = obs.facing;
        let step_toward = |to: usize| Action::Move {
            to: if to < here { here - 1 } else { here + 1 },
        };
        let nearest = obs
            .items
            .iter()
            .filter(|s| sc.item(&s.item).is_some_and(|it| sc.utterance.matches(it)))
            .min_by_key(|s| (s.location.abs_diff(here), s.location, s.item.clone()));
        if let Some(s) = nearest {
            let take = Action::Take { item: s.item.clone() };
            if s.location == here && turn.available.contains(&take) {
                return Ok(reply("That one fits and is right here.", &take));
            }
            if s.location != here {
                return Ok(reply("The closest match is over there.", &step_toward(s.location)));
            }
        }
        if let Some(l) = (0..sc.location_count()).find(|l| !self.seen.contains(l)) {
            return Ok(reply("I have not looked there yet.", &step_toward(l)));
        }
        let ask = Action::ask();
        if !self.asked && turn.available.contains(&ask) {
            self.asked = true;
            return Ok(reply("I do not see it anywhere.", &ask));
        }
        let fallback = turn.available.first().cloned().unwrap_or(ask);
        Ok(reply("Trying something.", &fallback))
    }
}

/// Uniform choice among the available actions.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn act(&mut self, turn: &Turn<'_>) -> Result<String, PolicyError> {
        let a = if turn.available.is_empty() {
            Action::ask()
        } else {
            turn.available[self.rng.random_range(0..turn.available.len())].clone()
        };
        Ok(reply("Random choice.", &a))
    }
}

/// Sends each turn's prompt to a completion backend.
pub struct LlmPolicy<B> {
    pub backend: B,
}

impl<B: Backend> LlmPolicy<B> {
    pub fn new(backend: B) -> Self {
        LlmPolicy { backend }
    }
}

impl<B: Backend> Policy for LlmPolicy<B> {
    fn name(&self) -> String {
        format!("llm:{}", self.backend.name())
    }

    fn act(&mut self, turn: &Turn<'_>) -> Result<String, PolicyError> {
        let user = match turn.repair {
            None => String::from(turn.prompt),
            Some(e) => format!(
                "{}\nYour previous reply could not be read ({}). Reply with `Thought: ...` then `Action: ...`.",
                turn.prompt, e.message
            ),
        };
        Ok(self.backend.complete(&CompletionRequest {
            system: MATCHER_SYSTEM,
            user: &user,
            pack: None,
        })?)
    }
}
