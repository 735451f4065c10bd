use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use super::synth::synthesize;
use super::PromptPack;
use crate::hash::fnv1a64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend request failed: {0}")]
    Request(String),
    #[error("backend returned an unusable response: {0}")]
    Response(String),
    #[error("no canned response for prompt {0:016x}")]
    NoCannedResponse(u64),
    #[error("backend `{0}` needs a structured prompt pack")]
    NeedsPack(&'static str),
}

pub struct CompletionRequest<'a> {
    pub system: &'a str,
    pub user: &'a str,
    /// Structured form of the request, when it comes from the forge.
    pub pack: Option<&'a PromptPack>,
}

impl CompletionRequest<'_> {
    /// FNV-1a over `system`, a NUL byte and `user`.
    pub fn prompt_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.system.len() + self.user.len() + 1);
        bytes.extend_from_slice(self.system.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(self.user.as_bytes());
        fnv1a64(&bytes)
    }
}

/// A text-completion backend.
pub trait Backend {
    /// Identifier recorded in provenance, e.g. `rule-based` or
    /// `http:gpt-4o`.
    fn name(&self) -> String;

    /// Whether responses come from a remote service.
    fn is_remote(&self) -> bool {
        false
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for alloc::boxed::Box<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn is_remote(&self) -> bool {
        (**self).is_remote()
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(req)
    }
}

/// Replays recorded responses, keyed by prompt hash, falling back to a
/// queue consumed in order and then to `default`.
#[derive(Clone, Debug, Default)]
pub struct CannedBackend {
    pub by_prompt: BTreeMap<u64, String>,
    pub queue: VecDeque<String>,
    pub default: Option<String>,
}

impl CannedBackend {
    pub fn queue(responses: impl IntoIterator<Item = String>) -> Self {
        CannedBackend {
            by_prompt: BTreeMap::new(),
            queue: responses.into_iter().collect(),
            default: None,
        }
    }
}

impl Backend for CannedBackend {
    fn name(&self) -> String {
        "canned".into()
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let h = req.prompt_hash();
        if let Some(r) = self.by_prompt.get(&h) {
            return Ok(r.clone());
        }
        self.queue
            .pop_front()
            .or_else(|| self.default.clone())
            .ok_or(BackendError::NoCannedResponse(h))
    }
}

/// Deterministic offline backend: writes one templated thought per step
/// of the structured prompt pack.
#[derive(Clone, Copy, Debug, Default)]
pub struct RuleBasedBackend;

impl Backend for RuleBasedBackend {
    fn name(&self) -> String {
        "rule-based".into()
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let pack = req.pack.ok_or(BackendError::NeedsPack("rule-based"))?;
        Ok(synthesize(pack))
    }
}

