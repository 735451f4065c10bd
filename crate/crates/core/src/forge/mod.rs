//! Thought-action example generation.
//!
//! A [`PromptPack`] pairs one of three fixed instructions with a rendered
//! trajectory (or decision list). A [`Backend`] answers it, and the answer
//! must be strictly alternating `Thought:` / `Action:` lines whose actions
//! equal the source actions. One repair round is allowed.

mod backend;
mod synth;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

pub use backend::{Backend, BackendError, CannedBackend, CompletionRequest, RuleBasedBackend};

use crate::agent::{parse_action, ParseError};
use crate::extract::{
    extract_e, extract_g, extract_l, DecisionRecord, ExtractError, InformativeMode, StateSummary,
    Step, TreeView,
};
use crate::hash::{fnv1a64, CanonicalWriter};
use crate::pddl::scenario_task;
use crate::scenario::{Action, AskVariant, Family, Scenario};
use crate::search::astar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExampleKind {
    G,
    E,
    L,
}

impl ExampleKind {
    pub const ALL: [ExampleKind; 3] = [ExampleKind::G, ExampleKind::E, ExampleKind::L];

    pub fn letter(self) -> &'static str {
        match self {
            ExampleKind::G => "G",
            ExampleKind::E => "E",
            ExampleKind::L => "L",
        }
    }

    pub fn parse(s: &str) -> Option<ExampleKind> {
        match s.trim().to_ascii_uppercase().as_str() {
            "G" | "GOAL" => Some(ExampleKind::G),
            "E" | "INFORMATIVE" => Some(ExampleKind::E),
            "L" | "DECISION" => Some(ExampleKind::L),
            _ => None,
        }
    }

    pub fn instruction(self) -> &'static str {
        match self {
            ExampleKind::G => PROMPT_G,
            ExampleKind::E => PROMPT_E,
            ExampleKind::L => PROMPT_L,
        }
    }
}

impl core::fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.letter())
    }
}

pub const PROMPT_G: &str = "Given the sequence of actions the agent executed until reaching its goal in a specific scenario, reconstruct the agent\u{2019}s reasoning step by step. Explain how each action contributed to achieving the goal.";
pub const PROMPT_E: &str = "Given a sequence of actions taken until the agent reaches an informative state (i.e., a state that provides new information), reconstruct the agent\u{2019}s reasoning step by step. Describe how each action led to gaining information.";
pub const PROMPT_L: &str = "Given the agent\u{2019}s last action, the set of possible actions, and the correct action in a specific scenario, explain the agent\u{2019}s reasoning behind selecting that particular action over the alternatives.";

const FORMAT_NOTE: &str = "Answer with alternating lines, one pair per action, in order:\nThought: <reasoning before the action>\nAction: <the action, written exactly as given>";

/// Source material for one prompt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PackSource {
    Steps { start: StateSummary, steps: Vec<Step> },
    Decisions(Vec<DecisionRecord>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptPack {
    pub kind: ExampleKind,
    pub variant: AskVariant,
    pub scenario: Scenario,
    pub instruction: String,
    pub user: String,
    pub source: PackSource,
    /// E-type pack built from the goal path because the tree had no
    /// informative node.
    pub fallback_to_goal: bool,
}

impl PromptPack {
    /// The actions the answer must reproduce, in order.
    pub fn expected_actions(&self) -> Vec<Action> {
        match &self.source {
            PackSource::Steps { steps, .. } => steps.iter().map(|s| s.action.clone()).collect(),
            PackSource::Decisions(ds) => ds.iter().map(|d| d.chosen.clone()).collect(),
        }
    }

    pub fn request(&self) -> CompletionRequest<'_> {
        CompletionRequest {
            system: &self.instruction,
            user: &self.user,
            pack: Some(self),
        }
    }
}

/// Matcher view of a state summary, in the same words the agent sees.
pub fn describe_summary(sc: &Scenario, s: &StateSummary) -> String {
    let mut out = format!("at the {} (location {})", sc.label(s.matcher_at), s.matcher_at);
    let seen: Vec<String> = s
        .visible_items
        .iter()
        .map(|i| match &i.container {
            Some(c) => format!("{} in the {c} at location {}", i.item, i.location),
            None => format!("{} at location {}", i.item, i.location),
        })
        .collect();
    if seen.is_empty() {
        out.push_str("; sees no objects");
    } else {
        let _ = write!(out, "; sees {}", seen.join(", "));
    }
    for c in &s.closed_containers {
        let _ = write!(out, "; the {c} is closed");
    }
    let hidden: Vec<String> = (0..sc.location_count())
        .filter(|l| !s.visible_locations.contains(l))
        .map(|l| l.to_string())
        .collect();
    if !hidden.is_empty() {
        let _ = write!(out, "; cannot see location {}", hidden.join(", "));
    }
    if let Some(h) = &s.holding {
        let _ = write!(out, "; holding {h}");
    }
    out
}

fn header(sc: &Scenario) -> String {
    let labels: Vec<String> = (0..sc.location_count())
        .map(|i| format!("{} (location {i})", sc.label(i)))
        .collect();
    format!(
        "Scenario: the locations are {}. The director says: \"{}\"\n",
        labels.join(", "),
        sc.utterance.text
    )
}

fn render_steps(sc: &Scenario, start: &StateSummary, steps: &[Step]) -> String {
    let mut s = header(sc);
    let _ = writeln!(s, "Start: the agent is {}.", describe_summary(sc, start));
    s.push_str("Actions:\n");
    for (i, st) in steps.iter().enumerate() {
        let _ = write!(s, "{}. {} -> agent is {}", i + 1, st.action, describe_summary(sc, &st.after));
        if let Some(a) = &st.answer {
            let _ = write!(s, "; director answers \"{a}\"");
        }
        s.push('\n');
    }
    s.push('\n');
    s.push_str(FORMAT_NOTE);
    s
}

fn render_decisions(sc: &Scenario, ds: &[DecisionRecord]) -> String {
    let mut s = header(sc);
    for (i, d) in ds.iter().enumerate() {
        let _ = writeln!(s, "Decision {}:", i + 1);
        match &d.last_action {
            Some(a) => {
                let _ = writeln!(s, "Last action: {a}");
            }
            None => s.push_str("Last action: none (start)\n"),
        }
        let _ = writeln!(s, "State: agent is {}", describe_summary(sc, &d.state));
        let alts: Vec<String> = d.alternatives.iter().map(|a| a.action.to_string()).collect();
        let _ = writeln!(s, "Possible actions: {}", alts.join(", "));
        let _ = writeln!(s, "Correct action: {}", d.chosen);
    }
    s.push('\n');
    s.push_str(FORMAT_NOTE);
    s
}

pub fn build_steps_prompt(
    kind: ExampleKind,
    variant: AskVariant,
    sc: &Scenario,
    start: StateSummary,
    steps: Vec<Step>,
) -> Result<PromptPack, ForgeError> {
    if kind == ExampleKind::L {
        return Err(ForgeError::StrategyMismatch { kind, payload: "action sequence" });
    }
    if steps.is_empty() {
        return Err(ForgeError::EmptySource);
    }
    Ok(PromptPack {
        kind,
        variant,
        scenario: sc.clone(),
        instruction: kind.instruction().into(),
        user: render_steps(sc, &start, &steps),
        source: PackSource::Steps { start, steps },
        fallback_to_goal: false,
    })
}

pub fn build_decision_prompt(variant: AskVariant, sc: &Scenario, ds: Vec<DecisionRecord>) -> Result<PromptPack, ForgeError> {
    if ds.is_empty() {
        return Err(ForgeError::EmptySource);
    }
    Ok(PromptPack {
        kind: ExampleKind::L,
        variant,
        scenario: sc.clone(),
        instruction: PROMPT_L.into(),
        user: render_decisions(sc, &ds),
        source: PackSource::Decisions(ds),
        fallback_to_goal: false,
    })
}

/// Plans `sc` under `variant`, extracts the trajectory for `kind` and
/// renders its prompt. E uses the earliest-expanded maximal informative
/// node, or the goal path when there is none.
pub fn source_pack(sc: &Scenario, variant: AskVariant, kind: ExampleKind) -> Result<PromptPack, ForgeError> {
    let task = scenario_task(sc, variant);
    let tree = astar(&task).tree;
    let view = TreeView::new(sc, variant, &task, &tree)?;
    Ok(match kind {
        ExampleKind::G => {
            let g = extract_g(&view)?;
            build_steps_prompt(kind, variant, sc, g.start, g.steps)?
        }
        ExampleKind::E => match extract_e(&view, InformativeMode::Maximal).into_iter().next() {
            Some(e) => build_steps_prompt(kind, variant, sc, e.start, e.steps)?,
            None => {
                let g = extract_g(&view)?;
                let mut p = build_steps_prompt(kind, variant, sc, g.start, g.steps)?;
                p.fallback_to_goal = true;
                p
            }
        },
        ExampleKind::L => build_decision_prompt(variant, sc, extract_l(&view))?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThoughtAction {
    pub thought: String,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("action {index} drifted: expected `{expected}`, found `{found}`")]
    ActionDrift {
        index: usize,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("nothing to explain: the source has no actions")]
    EmptySource,
    #[error("{kind}-type prompts cannot be built from an {payload}")]
    StrategyMismatch { kind: ExampleKind, payload: &'static str },
}

/// Strict `Thought:` / `Action:` alternation, starting with a thought.
/// Blank lines are skipped.
pub fn parse_thought_actions(text: &str) -> Result<Vec<ThoughtAction>, ForgeError> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        last_line = i + 1;
        let bad = |message: String| ForgeError::Parse { line: i + 1, message };
        match pending.take() {
            None => {
                let t = line
                    .strip_prefix("Thought:")
                    .ok_or_else(|| bad("expected a `Thought:` line".into()))?
                    .trim();
                if t.is_empty() {
                    return Err(bad("empty thought".into()));
                }
                pending = Some(t.into());
            }
            Some(thought) => {
                let a = line
                    .strip_prefix("Action:")
                    .ok_or_else(|| bad("expected an `Action:` line".into()))?;
                let action = parse_action(a).map_err(|e: ParseError| bad(e.message))?;
                out.push(ThoughtAction { thought, action });
            }
        }
    }
    if pending.is_some() {
        return Err(ForgeError::Parse {
            line: last_line,
            message: "thought without an action".into(),
        });
    }
    if out.is_empty() {
        return Err(ForgeError::Parse {
            line: 0,
            message: "no thought-action pairs".into(),
        });
    }
    Ok(out)
}

pub fn validate_answer(text: &str, expected: &[Action]) -> Result<Vec<ThoughtAction>, ForgeError> {
    let pairs = parse_thought_actions(text)?;
    for i in 0..pairs.len().max(expected.len()) {
        let (e, f) = (expected.get(i), pairs.get(i).map(|p| &p.action));
        if e != f {
            let show = |a: Option<&Action>| a.map_or_else(|| "nothing".into(), |a| a.to_string());
            return Err(ForgeError::ActionDrift {
                index: i,
                expected: show(e),
                found: show(f),
            });
        }
    }
    Ok(pairs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forged {
    pub steps: Vec<ThoughtAction>,
    pub repaired: bool,
    pub prompt_hash: u64,
}

/// Asks `backend` for the pack's explanation, with one repair round.
pub fn forge(backend: &mut dyn Backend, pack: &PromptPack) -> Result<Forged, ForgeError> {
    let expected = pack.expected_actions();
    if expected.is_empty() {
        return Err(ForgeError::EmptySource);
    }
    let req = pack.request();
    let prompt_hash = req.prompt_hash();
    let first = backend.complete(&req)?;
    let err = match validate_answer(&first, &expected) {
        Ok(steps) => {
            return Ok(Forged {
                steps,
                repaired: false,
                prompt_hash,
            })
        }
        Err(e) => e,
    };
    let user = format!(
        "{}\n\nYour previous answer was rejected ({err}). Previous answer:\n{first}\n\nAnswer again, keeping every action exactly as given.",
        pack.user
    );
    let second = backend.complete(&CompletionRequest {
        system: &pack.instruction,
        user: &user,
        pack: Some(pack),
    })?;
    let steps = validate_answer(&second, &expected)?;
    Ok(Forged {
        steps,
        repaired: true,
        prompt_hash,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub backend: String,
    pub prompt_hash: String,
    pub fallback_to_goal: bool,
    pub repaired: bool,
    /// Unix seconds; only set for remote backends.
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThoughtActionExample {
    /// Content hash of everything except provenance.
    pub id: String,
    pub scenario: String,
    pub family: Option<Family>,
    pub kind: ExampleKind,
    pub variant: AskVariant,
    pub utterance: String,
    pub steps: Vec<ThoughtAction>,
    pub provenance: Provenance,
}

impl ThoughtActionExample {
    pub fn new(pack: &PromptPack, forged: Forged, backend: &str, timestamp: Option<u64>) -> Self {
        let mut ex = ThoughtActionExample {
            id: String::new(),
            scenario: pack.scenario.id.clone(),
            family: pack.scenario.family,
            kind: pack.kind,
            variant: pack.variant,
            utterance: pack.scenario.utterance.text.clone(),
            steps: forged.steps,
            provenance: Provenance {
                backend: backend.into(),
                prompt_hash: format!("{:016x}", forged.prompt_hash),
                fallback_to_goal: pack.fallback_to_goal,
                repaired: forged.repaired,
                timestamp,
            },
        };
        ex.id = ex.content_id();
        ex
    }

    pub fn content_id(&self) -> String {
        let mut w = CanonicalWriter::new();
        w.bytes(b"DTEX");
        w.str(&self.scenario);
        w.str(self.family.map_or("", |f| f.slug()));
        w.str(self.kind.letter());
        w.str(self.variant.sign());
        w.str(&self.utterance);
        w.u32(self.steps.len() as u32);
        for s in &self.steps {
            w.str(&s.thought);
            w.str(&s.action.to_string());
        }
        format!("{:016x}", fnv1a64(&w.finish()))
    }

    /// Few-shot rendering used in agent prompts.
    pub fn render(&self) -> String {
        let mut s = format!("Director: \"{}\"\n", self.utterance);
        for st in &self.steps {
            let _ = writeln!(s, "Thought: {}", st.thought);
            let _ = writeln!(s, "Action: {}", st.action);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("no {kind}{variant} example for family {family} (need {needed})")]
    MissingFamily {
        family: Family,
        kind: ExampleKind,
        variant: AskVariant,
        needed: usize,
    },
}

/// Few-shot set for one held-out family: `per_family` examples of the
/// given kind and variant from each of the other families, in family order.
pub fn select_examples<'a>(
    pool: &'a [ThoughtActionExample],
    held_out: Family,
    kind: ExampleKind,
    variant: AskVariant,
    per_family: usize,
) -> Result<Vec<&'a ThoughtActionExample>, SelectError> {
    let mut out = Vec::new();
    for fam in Family::ALL.into_iter().filter(|&f| f != held_out) {
        let mut found: Vec<&ThoughtActionExample> = pool
            .iter()
            .filter(|e| e.family == Some(fam) && e.kind == kind && e.variant == variant)
            .collect();
        found.sort_by(|a, b| (&a.scenario, &a.id).cmp(&(&b.scenario, &b.id)));
        if found.len() < per_family {
            return Err(SelectError::MissingFamily {
                family: fam,
                kind,
                variant,
                needed: per_family,
            });
        }
        out.extend(found.into_iter().take(per_family));
    }
    Ok(out)
}

/// Forges one example per (scenario, kind, variant) with `backend`.
pub fn forge_example(
    backend: &mut dyn Backend,
    sc: &Scenario,
    variant: AskVariant,
    kind: ExampleKind,
    timestamp: Option<u64>,
) -> Result<ThoughtActionExample, ForgeError> {
    let pack = source_pack(sc, variant, kind)?;
    let forged = forge(backend, &pack)?;
    let ts = if backend.is_remote() { timestamp } else { None };
    Ok(ThoughtActionExample::new(&pack, forged, &backend.name(), ts))
}
