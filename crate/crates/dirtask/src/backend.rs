//! Backend configuration, the HTTP chat-completion client and canned
//! response files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::sleep;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dirtask_core::forge::{Backend, BackendError, CannedBackend, CompletionRequest, RuleBasedBackend};

use crate::error::{Error, Result};
use crate::io::{read_json, read_text, write_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Http,
    Canned,
    RuleBased,
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    2
}

fn default_backoff() -> u64 {
    500
}

fn default_concurrency() -> usize {
    4
}

fn default_max_tokens() -> u32 {
    1024
}

/// File-based backend settings. Credentials are never stored here, only
/// the name of the environment variable holding them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub temperature: f32,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
    /// Cap on simultaneous requests to a remote backend.
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    /// Canned response file, for `kind = "canned"`. Relative paths resolve
    /// against the config file.
    #[serde(default)]
    pub canned: Option<PathBuf>,
}

impl BackendConfig {
    pub fn rule_based() -> Self {
        BackendConfig {
            kind: BackendKind::RuleBased,
            endpoint: None,
            model: None,
            api_key_env: None,
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            retry_backoff_ms: default_backoff(),
            max_concurrency: default_concurrency(),
            canned: None,
        }
    }

    pub fn canned(path: impl Into<PathBuf>) -> Self {
        BackendConfig {
            kind: BackendKind::Canned,
            canned: Some(path.into()),
            ..BackendConfig::rule_based()
        }
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut cfg: BackendConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let (Some(c), Some(dir)) = (&cfg.canned, path.parent()) {
            if c.is_relative() {
                cfg.canned = Some(dir.join(c));
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        match self.kind {
            BackendKind::Http if self.endpoint.is_none() || self.model.is_none() => {
                Err(Error::Config("http backend needs `endpoint` and `model`".into()))
            }
            BackendKind::Canned if self.canned.is_none() => Err(Error::Config("canned backend needs `canned`".into())),
            _ if self.max_concurrency == 0 => Err(Error::Config("`max_concurrency` must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn is_remote(&self) -> bool {
        self.kind == BackendKind::Http
    }

    /// A fresh backend instance. Canned backends start from the file's
    /// full queue each time.
    pub fn build(&self) -> Result<Box<dyn Backend + Send>> {
        self.check()?;
        Ok(match self.kind {
            BackendKind::RuleBased => Box::new(RuleBasedBackend),
            BackendKind::Canned => {
                let path = self.canned.as_deref().expect("checked");
                Box::new(CannedFile::load(path)?.into_backend())
            }
            BackendKind::Http => Box::new(HttpBackend::new(self)?),
        })
    }
}

/// On-disk canned responses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CannedFile {
    /// Keyed by the 16-digit hex prompt hash.
    #[serde(default)]
    pub responses: BTreeMap<String, String>,
    #[serde(default)]
    pub queue: Vec<String>,
    #[serde(default)]
    pub default: Option<String>,
}

impl CannedFile {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn into_backend(self) -> CannedBackend {
        CannedBackend {
            by_prompt: self
                .responses
                .into_iter()
                .filter_map(|(k, v)| u64::from_str_radix(&k, 16).ok().map(|h| (h, v)))
                .collect(),
            queue: self.queue.into(),
            default: self.default,
        }
    }
}

/// Passes requests through and remembers every response by prompt hash,
/// for turning a live or rule-based run into a canned file.
pub struct Recorder<B> {
    inner: B,
    log: Arc<Mutex<BTreeMap<String, String>>>,
}

impl<B: Backend> Recorder<B> {
    pub fn new(inner: B, log: Arc<Mutex<BTreeMap<String, String>>>) -> Self {
        Recorder { inner, log }
    }
}

impl<B: Backend> Backend for Recorder<B> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn is_remote(&self) -> bool {
        self.inner.is_remote()
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let r = self.inner.complete(req)?;
        self.log
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(format!("{:016x}", req.prompt_hash()), r.clone());
        Ok(r)
    }
}

/// OpenAI-compatible chat-completions client.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    temperature: f32,
    max_tokens: u32,
    max_retries: u32,
    backoff: Duration,
}

impl HttpBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self> {
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| Error::Config(format!("environment variable `{var}` is not set")))?,
            ),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend {
            agent,
            endpoint: cfg.endpoint.clone().unwrap_or_default(),
            model: cfg.model.clone().unwrap_or_default(),
            api_key,
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
            max_retries: cfg.max_retries,
            backoff: Duration::from_millis(cfg.retry_backoff_ms),
        })
    }

    fn attempt(&self, body: &Value) -> Result<String, (bool, BackendError)> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| (true, BackendError::Request(e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| (true, BackendError::Request(e.to_string())))?;
        if status == 429 || status >= 500 {
            return Err((true, BackendError::Request(format!("HTTP {status}: {text}"))));
        }
        if status >= 400 {
            return Err((false, BackendError::Request(format!("HTTP {status}: {text}"))));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| (false, BackendError::Response(e.to_string())))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| (false, BackendError::Response("missing choices[0].message.content".into())))
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> String {
        format!("http:{}", self.model)
    }

    fn is_remote(&self) -> bool {
        true
    }

    fn complete(&mut self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        });
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Ok(s) => return Ok(s),
                Err((retry, e)) => {
                    if !retry || tries >= self.max_retries {
                        return Err(e);
                    }
                    log::warn!("backend request failed ({e}); retrying");
                    sleep(self.backoff * 2u32.saturating_pow(tries));
                    tries += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves one canned HTTP response per entry of `replies`, recording
    /// each request body.
    fn serve(replies: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let h = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut r = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                let mut auth = String::new();
                loop {
                    let mut line = String::new();
                    r.read_line(&mut line).unwrap();
                    let l = line.trim_end().to_ascii_lowercase();
                    if l.is_empty() {
                        break;
                    }
                    if let Some(v) = l.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if l.starts_with("authorization:") {
                        auth = line.trim_end().to_string();
                    }
                }
                let mut buf = vec![0; len];
                r.read_exact(&mut buf).unwrap();
                bodies.push(format!("{auth}\n{}", String::from_utf8(buf).unwrap()));
                let mut s = stream;
                write!(
                    s,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (url, h)
    }

    fn http_config(url: &str) -> BackendConfig {
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: Some(url.into()),
            model: Some("test-model".into()),
            api_key_env: Some("DIRTASK_TEST_KEY".into()),
            retry_backoff_ms: 1,
            ..BackendConfig::rule_based()
        }
    }

    #[test]
    fn http_backend_retries_then_parses() {
        std::env::set_var("DIRTASK_TEST_KEY", "sk-test");
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"Thought: t\nAction: ask which"}}]}"#;
        let (url, h) = serve(vec![(503, "{}".into()), (200, ok.into())]);
        let mut b = http_config(&url).build().unwrap();
        assert!(b.is_remote());
        let out = b
            .complete(&CompletionRequest {
                system: "sys",
                user: "hello",
                pack: None,
            })
            .unwrap();
        assert_eq!(out, "Thought: t\nAction: ask which");
        let bodies = h.join().unwrap();
        assert_eq!(bodies.len(), 2);
        assert!(bodies[1].to_ascii_lowercase().starts_with("authorization: bearer sk-test"), "{}", bodies[1]);
        let v: Value = serde_json::from_str(bodies[1].split_once('\n').unwrap().1).unwrap();
        assert_eq!(v["model"], "test-model");
        assert_eq!(v["messages"][1]["content"], "hello");
    }

    #[test]
    fn http_client_errors_are_not_retried() {
        std::env::set_var("DIRTASK_TEST_KEY", "sk-test");
        let (url, h) = serve(vec![(401, r#"{"error":"bad key"}"#.into())]);
        let mut b = http_config(&url).build().unwrap();
        let e = b
            .complete(&CompletionRequest {
                system: "s",
                user: "u",
                pack: None,
            })
            .unwrap_err();
        assert!(matches!(e, BackendError::Request(m) if m.contains("401")));
        assert_eq!(h.join().unwrap().len(), 1);
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let mut cfg = http_config("http://127.0.0.1:9/");
        cfg.api_key_env = Some("DIRTASK_TEST_UNSET_KEY".into());
        assert!(matches!(cfg.build(), Err(Error::Config(_))));
    }

    #[test]
    fn config_files_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("backend.toml");
        std::fs::write(&p, "kind = \"canned\"\ncanned = \"responses.json\"\n").unwrap();
        let cfg = BackendConfig::load(&p).unwrap();
        assert_eq!(cfg.canned, Some(dir.path().join("responses.json")));
        std::fs::write(&p, "kind = \"http\"\n").unwrap();
        assert!(matches!(BackendConfig::load(&p), Err(Error::Config(_))));
        std::fs::write(&p, "kind = [").unwrap();
        assert!(matches!(BackendConfig::load(&p), Err(Error::Config(_))));
    }

    #[test]
    fn canned_file_prefers_hash_then_queue_then_default() {
        let req = CompletionRequest {
            system: "s",
            user: "u",
            pack: None,
        };
        let mut f = CannedFile {
            queue: vec!["q".into()],
            default: Some("d".into()),
            ..CannedFile::default()
        };
        f.responses.insert(format!("{:016x}", req.prompt_hash()), "h".into());
        let mut b = f.into_backend();
        let other = CompletionRequest {
            system: "x",
            user: "y",
            pack: None,
        };
        assert_eq!(b.complete(&req).unwrap(), "h");
        assert_eq!(b.complete(&other).unwrap(), "q");
        assert_eq!(b.complete(&other).unwrap(), "d");
    }
}
