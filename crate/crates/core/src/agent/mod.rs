//! The Matcher's ReAct loop.
//!
//! Each turn the policy sees the rendered prompt (request, few-shot
//! examples, history, current observation, available actions) and replies
//! with `Thought:` / `Action:` text. An unparsable reply gets one repair
//! round. Inapplicable actions are rejected and still count as a turn. The
//! trial ends at the first Take or after `max_steps` turns.

mod parse;
mod policy;
mod prompt;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use parse::{parse_action, parse_reply, reply_thought, ParseError};
pub use policy::{LlmPolicy, NearestMatch, PlannerOracle, RandomPolicy, Scripted};
pub use prompt::{describe_observation, render_actions, render_prompt, HistoryEntry, PromptInput, MATCHER_SYSTEM};

use crate::forge::BackendError;
use crate::hash::fnv1a64;
use crate::scenario::{respond, Action, Family, ItemId, Observation, Role, Rules, Scenario, WorldState};

pub const DEFAULT_MAX_STEPS: u32 = 12;

/// What a policy gets to see on one turn.
pub struct Turn<'a> {
    pub scenario: &'a Scenario,
    /// Full world state. Only the planner oracle may look at it.
    pub state: &'a WorldState,
    pub observation: &'a Observation,
    pub available: &'a [Action],
    pub history: &'a [HistoryEntry],
    pub prompt: &'a str,
    /// Set on the repair round after an unparsable reply.
    pub repair: Option<&'a ParseError>,
    pub step: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("the scripted policy has no more actions")]
    Exhausted,
}

pub trait Policy {
    fn name(&self) -> String;
    fn act(&mut self, turn: &Turn<'_>) -> Result<String, PolicyError>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum TurnResult {
    Applied,
    Rejected { reason: String },
    Unparsed { error: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnLog {
    pub step: u32,
    pub prompt: String,
    pub prompt_hash: String,
    pub raw: String,
    pub repaired: bool,
    pub thought: Option<String>,
    pub action: Option<Action>,
    #[serde(flatten)]
    pub result: TurnResult,
    /// Observation text returned to the policy.
    pub feedback: String,
    pub answer: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialOutcome {
    Success,
    WrongTakeFirst,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLog {
    pub scenario: String,
    pub family: Option<Family>,
    pub policy: String,
    pub max_steps: u32,
    pub examples: usize,
    pub turns: Vec<TurnLog>,
    pub outcome: TrialOutcome,
    /// Number of turns taken, rejected and unparsed ones included.
    pub steps: u32,
    /// Number of applied Ask actions.
    pub asks: u32,
    pub first_take: Option<ItemId>,
}

impl TrialLog {
    pub fn first_take_correct(&self) -> bool {
        self.outcome == TrialOutcome::Success
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    pub max_steps: u32,
    /// Rendered few-shot examples.
    pub examples: Vec<String>,
    pub rules: Rules,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            max_steps: DEFAULT_MAX_STEPS,
            examples: Vec::new(),
            rules: Rules::RUNTIME,
        }
    }
}

/// Runs one episode of `sc` with `policy`.
pub fn run_trial(sc: &Scenario, policy: &mut dyn Policy, cfg: &TrialConfig) -> Result<TrialLog, PolicyError> {
    let mut state = sc.initial.clone();
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut turns = Vec::new();
    let mut asks = 0;
    let mut outcome = TrialOutcome::StepLimit;
    let mut first_take = None;

    for step in 1..=cfg.max_steps {
        let obs = state.observation_of(Role::Matcher);
        let available = state.applicable_actions(cfg.rules);
        let prompt = render_prompt(&PromptInput {
            scenario: sc,
            examples: &cfg.examples,
            history: &history,
            observation: &obs,
            available: &available,
        });
        let turn = |repair| Turn {
            scenario: sc,
            state: &state,
            observation: &obs,
            available: &available,
            history: &history,
            prompt: &prompt,
            repair,
            step,
        };
        let mut raw = match policy.act(&turn(None)) {
            Ok(r) => r,
            Err(PolicyError::Exhausted) => break,
            Err(e) => return Err(e),
        };
        let mut repaired = false;
        let parsed = match parse_reply(&raw) {
            Ok(a) => Ok(a),
            Err(e) => {
                repaired = true;
                raw = match policy.act(&turn(Some(&e))) {
                    Ok(r) => r,
                    Err(PolicyError::Exhausted) => break,
                    Err(e) => return Err(e),
                };
                parse_reply(&raw)
            }
        };
        let prompt_hash = format!("{:016x}", fnv1a64(prompt.as_bytes()));
        let mut answer = None;
        let (action, result, feedback, done) = match parsed {
            Err(e) => (
                None,
                TurnResult::Unparsed { error: e.to_string() },
                format!("Invalid action ({}). Use one of the available actions.", e.message),
                false,
            ),
            Ok(action) => match state.apply(&action, cfg.rules) {
                Err(e) => {
                    let reason = match e {
                        crate::scenario::ScenarioError::InapplicableAction { reason, .. } => reason.to_string(),
                        other => other.to_string(),
                    };
                    let fb = format!("`{action}` is not possible: {reason}.");
                    (Some(action), TurnResult::Rejected { reason }, fb, false)
                }
                Ok(next) => {
                    let mut done = false;
                    let fb = match &action {
                        Action::Ask { question } => {
                            asks += 1;
                            let ans = respond(&state.observation_of(Role::Director), question, sc);
                            let fb = format!("Director: \"{}\"", ans.text);
                            answer = Some(ans.text);
                            fb
                        }
                        Action::Take { item } => {
                            done = true;
                            first_take = Some(item.clone());
                            outcome = if *item == sc.target {
                                TrialOutcome::Success
                            } else {
                                TrialOutcome::WrongTakeFirst
                            };
                            format!("You take the {item}.")
                        }
                        _ => describe_observation(sc, &next.observation_of(Role::Matcher)),
                    };
                    state = next;
                    (Some(action), TurnResult::Applied, fb, done)
                }
            },
        };
        history.push(HistoryEntry {
            action: action.clone(),
            raw: raw.clone(),
            feedback: feedback.clone(),
        });
        turns.push(TurnLog {
            step,
            prompt,
            prompt_hash,
            thought: reply_thought(&raw),
            raw,
            repaired,
            action,
            result,
            feedback,
            answer,
        });
        if done {
            break;
        }
    }
    Ok(TrialLog {
        scenario: sc.id.clone(),
        family: sc.family,
        policy: policy.name(),
        max_steps: cfg.max_steps,
        examples: cfg.examples.len(),
        steps: turns.len() as u32,
        turns,
        outcome,
        asks,
        first_take,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::CannedBackend;
    use crate::scenario::{reference_scenario, Question};
    use alloc::vec;

    fn scripted(actions: &[&str]) -> Scripted {
        Scripted::new(actions.iter().map(|a| parse_action(a).unwrap()).collect())
    }

    #[test]
    fn oracle_succeeds_everywhere() {
        for fam in Family::ALL {
            let sc = reference_scenario(fam);
            let log = run_trial(&sc, &mut PlannerOracle::default(), &TrialConfig::default()).unwrap();
            assert_eq!(log.outcome, TrialOutcome::Success, "{fam}");
        }
    }

    #[test]
    fn rejected_action_counts_as_step() {
        let sc = reference_scenario(Family::Base);
        let mut p = scripted(&["take gold_shirt", "move 0", "take gold_shirt"]);
        let log = run_trial(&sc, &mut p, &TrialConfig::default()).unwrap();
        assert_eq!(log.steps, 3);
        assert!(matches!(log.turns[0].result, TurnResult::Rejected { .. }));
        assert_eq!(log.outcome, TrialOutcome::Success);
    }

    #[test]
    fn step_limit() {
        let sc = reference_scenario(Family::Base);
        let mut p = scripted(&["move 0", "move 1", "move 0", "move 1"]);
        let cfg = TrialConfig {
            max_steps: 3,
            ..TrialConfig::default()
        };
        let log = run_trial(&sc, &mut p, &cfg).unwrap();
        assert_eq!((log.steps, log.outcome), (3, TrialOutcome::StepLimit));
    }

    #[test]
    fn wrong_take_ends_trial() {
        let sc = reference_scenario(Family::Not);
        let mut p = scripted(&["ask which", "take blue_tie", "move 0"]);
        let log = run_trial(&sc, &mut p, &TrialConfig::default()).unwrap();
        assert_eq!(log.outcome, TrialOutcome::WrongTakeFirst);
        assert_eq!((log.steps, log.asks), (2, 1));
        assert!(log.turns[0].feedback.contains("red tie"));
    }

    #[test]
    fn llm_reply_repaired_once() {
        let sc = reference_scenario(Family::Persp);
        let b = CannedBackend::queue(vec![
            "I will take the mug".into(),
            "Thought: the blue mug is shared.\nAction: take blue_mug".into(),
        ]);
        let mut p = LlmPolicy::new(b);
        let log = run_trial(&sc, &mut p, &TrialConfig::default()).unwrap();
        assert!(log.turns[0].repaired);
        assert_eq!(log.outcome, TrialOutcome::Success);
    }

    #[test]
    fn location_question_answer() {
        let sc = reference_scenario(Family::Dist);
        let mut p = Scripted::new(vec![Action::Ask {
            question: Question::AtLocation(1),
        }]);
        let log = run_trial(&sc, &mut p, &TrialConfig::default()).unwrap();
        assert!(log.turns[0].feedback.contains("cannot see"), "{}", log.turns[0].feedback);
    }
}
