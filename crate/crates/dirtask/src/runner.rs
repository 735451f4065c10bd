//! Policies by name, experiment plan files and the resumable experiment
//! runner.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dirtask_core::agent::{
    parse_action, run_trial, LlmPolicy, NearestMatch, PlannerOracle, Policy, RandomPolicy, Scripted, TrialConfig,
    TrialLog,
};
use dirtask_core::eval::{Cell, Condition, ExperimentPlan, TrialRecord};
use dirtask_core::forge::ThoughtActionExample;
use dirtask_core::scenario::reference_scenario;
use dirtask_core::{Action, Family, Scenario};

use crate::backend::BackendConfig;
use crate::error::{Error, Result};
use crate::io::{read_json, read_text, write_json, write_text};

/// Matcher policy selected by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    Planner,
    Nearest,
    /// Seeded per trial from the plan seed.
    Random,
    Llm,
    Scripted(Vec<Action>),
}

impl PolicySpec {
    /// `planner`, `nearest`, `random`, `llm` or `scripted=a|b|...`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "planner" => PolicySpec::Planner,
            "nearest" | "nearest-match" => PolicySpec::Nearest,
            "random" => PolicySpec::Random,
            "llm" => PolicySpec::Llm,
            _ => {
                let Some(list) = s.strip_prefix("scripted=") else {
                    return Err(Error::Usage(format!("unknown policy `{s}`")));
                };
                let actions = list
                    .split('|')
                    .map(|a| parse_action(a).map_err(|e| Error::Usage(format!("scripted action `{a}`: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                PolicySpec::Scripted(actions)
            }
        })
    }

    pub fn needs_backend(&self) -> bool {
        matches!(self, PolicySpec::Llm)
    }

    pub fn build(&self, seed: u64, backend: Option<&BackendConfig>) -> Result<Box<dyn Policy + Send>> {
        Ok(match self {
            PolicySpec::Planner => Box::new(PlannerOracle::default()),
            PolicySpec::Nearest => Box::new(NearestMatch::default()),
            PolicySpec::Random => Box::new(RandomPolicy::new(seed)),
            PolicySpec::Scripted(a) => Box::new(Scripted::new(a.clone())),
            PolicySpec::Llm => {
                let cfg = backend.ok_or_else(|| Error::Usage("the llm policy needs --backend-config".into()))?;
                Box::new(LlmPolicy::new(cfg.build()?))
            }
        })
    }
}

fn default_trials() -> u32 {
    5
}

fn default_max_steps() -> u32 {
    dirtask_core::agent::DEFAULT_MAX_STEPS
}

fn default_per_family() -> usize {
    1
}

fn default_policy() -> String {
    "llm".into()
}

/// Experiment plan as written in a TOML or JSON file. Omitted fields take
/// the defaults of the full protocol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    /// Condition slugs (`g_ask`, `e_noask`, `none`, `planner`, ...).
    #[serde(default)]
    pub conditions: Vec<String>,
    /// Adds the No Examples and Planner rows.
    #[serde(default)]
    pub baselines: bool,
    #[serde(default)]
    pub held_out: Vec<String>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
    #[serde(default = "default_per_family")]
    pub examples_per_family: usize,
    #[serde(default = "default_policy")]
    pub policy: String,
}

impl Default for PlanFile {
    fn default() -> Self {
        PlanFile {
            conditions: Vec::new(),
            baselines: false,
            held_out: Vec::new(),
            trials: default_trials(),
            seed: 0,
            max_steps: default_max_steps(),
            examples_per_family: default_per_family(),
            policy: default_policy(),
        }
    }
}

impl PlanFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    pub fn to_plan(&self) -> Result<ExperimentPlan> {
        let mut plan = ExperimentPlan::default();
        if !self.conditions.is_empty() {
            plan.conditions = self
                .conditions
                .iter()
                .map(|c| Condition::parse(c).ok_or_else(|| Error::Config(format!("unknown condition `{c}`"))))
                .collect::<Result<_>>()?;
        }
        if self.baselines {
            plan = plan.with_baselines();
        }
        if !self.held_out.is_empty() {
            plan.held_out = self
                .held_out
                .iter()
                .map(|f| Family::parse(f).ok_or_else(|| Error::Config(format!("unknown family `{f}`"))))
                .collect::<Result<_>>()?;
        }
        if self.trials == 0 || self.max_steps == 0 {
            return Err(Error::Config("`trials` and `max_steps` must be at least 1".into()));
        }
        PolicySpec::parse(&self.policy).map_err(|e| Error::Config(e.to_string()))?;
        plan.trials = self.trials;
        plan.seed = self.seed;
        plan.max_steps = self.max_steps;
        plan.examples_per_family = self.examples_per_family;
        plan.policy = self.policy.clone();
        Ok(plan)
    }

    pub fn from_plan(plan: &ExperimentPlan) -> Self {
        PlanFile {
            conditions: plan.conditions.iter().map(|c| c.slug()).collect(),
            baselines: false,
            held_out: plan.held_out.iter().map(|f| f.slug().to_string()).collect(),
            trials: plan.trials,
            seed: plan.seed,
            max_steps: plan.max_steps,
            examples_per_family: plan.examples_per_family,
            policy: plan.policy.clone(),
        }
    }
}

/// Resolved settings stamped into every results directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStamp {
    pub tool_version: String,
    pub plan_hash: String,
    pub plan: PlanFile,
    pub backend: Option<BackendConfig>,
    pub examples: Vec<String>,
}

pub const STAMP_FILE: &str = "run-config.json";

pub struct Experiment<'a> {
    pub plan: &'a ExperimentPlan,
    /// Parent of the per-plan directories.
    pub results: PathBuf,
    pub backend: Option<BackendConfig>,
    pub pool: Vec<ThoughtActionExample>,
    pub jobs: usize,
    /// Mirror each trial's prompts and replies into `<trial>.txt`.
    pub transcripts: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub written: usize,
    pub skipped: usize,
}

pub fn trial_path(dir: &Path, cell: &Cell, trial: u32) -> PathBuf {
    dir.join(cell.dir()).join(format!("{trial}.json"))
}

fn scenario_for(family: Family) -> Scenario {
    reference_scenario(family)
}

pub fn transcript(log: &TrialLog) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}\npolicy: {}\noutcome: {:?}\n", log.scenario, log.policy, log.outcome);
    for t in &log.turns {
        let _ = writeln!(s, "=== step {} prompt ===\n{}", t.step, t.prompt);
        let _ = writeln!(s, "=== step {} reply ===\n{}", t.step, t.raw);
        let _ = writeln!(s, "=== step {} observation ===\n{}\n", t.step, t.feedback);
    }
    s
}

fn existing(path: &Path, cell: &Cell, trial: u32) -> bool {
    matches!(read_json::<TrialRecord>(path), Ok(r) if r.cell == *cell && r.trial == trial)
}

impl Experiment<'_> {
    pub fn dir(&self) -> PathBuf {
        self.results.join(self.plan.plan_hash())
    }

    /// Runs every missing trial of the plan. Trials already on disk are
    /// kept; failed trials leave no file, so a rerun retries them.
    pub fn run(&self) -> Result<RunSummary> {
        let spec = PolicySpec::parse(&self.plan.policy)?;
        let needs_backend = spec.needs_backend() && self.plan.conditions.iter().any(|c| *c != Condition::Planner);
        if needs_backend && self.backend.is_none() {
            return Err(Error::Usage("the llm policy needs --backend-config".into()));
        }
        let dir = self.dir();
        let mut configs = Vec::new();
        for cell in self.plan.cells() {
            configs.push((cell, self.plan.trial_config(&cell, &self.pool)?));
        }
        write_json(
            &dir.join(STAMP_FILE),
            &RunStamp {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                plan_hash: self.plan.plan_hash(),
                plan: PlanFile::from_plan(self.plan),
                backend: self.backend.clone(),
                examples: self.pool.iter().map(|e| e.id.clone()).collect(),
            },
        )?;

        let mut todo: Vec<(Cell, u32, &TrialConfig)> = Vec::new();
        let mut skipped = 0;
        for (cell, cfg) in &configs {
            for trial in 0..self.plan.trials {
                if existing(&trial_path(&dir, cell, trial), cell, trial) {
                    skipped += 1;
                } else {
                    todo.push((*cell, trial, cfg));
                }
            }
        }
        let mut jobs = self.jobs.max(1);
        if let Some(b) = self.backend.as_ref().filter(|b| b.is_remote()) {
            jobs = jobs.min(b.max_concurrency);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let written = AtomicUsize::new(0);
        let results: Vec<Result<()>> = pool.install(|| {
            todo.par_iter()
                .map(|(cell, trial, cfg)| {
                    let seed = self.plan.trial_seed(cell, *trial);
                    let mut policy = match cell.condition {
                        Condition::Planner => PolicySpec::Planner.build(seed, None)?,
                        _ => spec.build(seed, self.backend.as_ref())?,
                    };
                    let sc = scenario_for(cell.family);
                    let log = run_trial(&sc, policy.as_mut(), cfg).map_err(|e| match e {
                        dirtask_core::agent::PolicyError::Backend(b) => Error::Backend(b),
                        other => Error::Usage(other.to_string()),
                    })?;
                    let path = trial_path(&dir, cell, *trial);
                    if self.transcripts {
                        write_text(&path.with_extension("txt"), &transcript(&log))?;
                    }
                    write_json(
                        &path,
                        &TrialRecord {
                            cell: *cell,
                            trial: *trial,
                            seed,
                            log,
                        },
                    )?;
                    written.fetch_add(1, Ordering::Relaxed);
                    log::info!("{} trial {trial} done", cell.dir());
                    Ok(())
                })
                .collect()
        });
        let written = written.into_inner();
        if let Some(e) = results.into_iter().find_map(Result::err) {
            log::error!("{written} trials written before the failure");
            return Err(e);
        }
        Ok(RunSummary { dir, written, skipped })
    }
}

/// Every trial record under a plan directory, in (cell, trial) order.
pub fn load_records(dir: &Path, plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for cell in plan.cells() {
        for trial in 0..plan.trials {
            let p = trial_path(dir, &cell, trial);
            if p.exists() {
                out.push(read_json(&p)?);
            }
        }
    }
    Ok(out)
}

/// Plan recorded in a results directory's stamp.
pub fn load_stamp(dir: &Path) -> Result<(RunStamp, ExperimentPlan)> {
    let stamp: RunStamp = read_json(&dir.join(STAMP_FILE))?;
    let plan = stamp.plan.to_plan()?;
    if plan.plan_hash() != stamp.plan_hash {
        return Err(Error::format(dir.join(STAMP_FILE), "plan hash does not match the plan"));
    }
    Ok((stamp, plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirtask_core::agent::TrialOutcome;

    #[test]
    fn policy_specs_parse() {
        assert_eq!(PolicySpec::parse("planner").unwrap(), PolicySpec::Planner);
        assert_eq!(
            PolicySpec::parse("scripted=move 0|take gold_shirt").unwrap(),
            PolicySpec::Scripted(vec![
                Action::Move { to: 0 },
                Action::Take {
                    item: "gold_shirt".into()
                }
            ])
        );
        assert!(matches!(PolicySpec::parse("greedy"), Err(Error::Usage(_))));
        assert!(matches!(PolicySpec::parse("scripted=fly"), Err(Error::Usage(_))));
    }

    #[test]
    fn plan_file_defaults_match_protocol() {
        let plan: PlanFile = toml::from_str("").unwrap();
        assert_eq!(plan.to_plan().unwrap(), ExperimentPlan::default());
        let p: PlanFile = toml::from_str("conditions = [\"planner\"]\nheld_out = [\"base\"]\ntrials = 2").unwrap();
        let plan = p.to_plan().unwrap();
        assert_eq!(PlanFile::from_plan(&plan).to_plan().unwrap(), plan);
        assert!(toml::from_str::<PlanFile>("trails = 3").is_err());
    }

    #[test]
    fn planner_run_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let plan = ExperimentPlan {
            conditions: vec![Condition::Planner],
            trials: 2,
            policy: "planner".into(),
            ..ExperimentPlan::default()
        };
        let exp = Experiment {
            plan: &plan,
            results: dir.path().into(),
            backend: None,
            pool: vec![],
            jobs: 3,
            transcripts: true,
        };
        let first = exp.run().unwrap();
        assert_eq!((first.written, first.skipped), (14, 0));
        let again = exp.run().unwrap();
        assert_eq!((again.written, again.skipped), (0, 14));
        let recs = load_records(&first.dir, &plan).unwrap();
        assert_eq!(recs.len(), 14);
        assert!(recs.iter().all(|r| r.log.outcome == TrialOutcome::Success));
        let cell = plan.cells()[0];
        std::fs::remove_file(trial_path(&first.dir, &cell, 1)).unwrap();
        assert_eq!(exp.run().unwrap().written, 1);
        assert_eq!(load_records(&first.dir, &plan).unwrap(), recs);
        assert!(trial_path(&first.dir, &cell, 0).with_extension("txt").exists());
        let (_, loaded) = load_stamp(&first.dir).unwrap();
        assert_eq!(loaded, plan);
    }
}
