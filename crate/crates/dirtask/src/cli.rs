//! Command-line interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use dirtask_core::agent::{run_trial, TrialConfig};
use dirtask_core::eval::{aggregate_plan, Condition, ExperimentPlan};
use dirtask_core::extract::{extract_e, extract_g, extract_l, mark_informative, InformativeMode, TreeView};
use dirtask_core::forge::{forge_example, select_examples, Backend, ExampleKind, ThoughtActionExample};
use dirtask_core::pddl::scenario_task;
use dirtask_core::scenario::reference_pack;
use dirtask_core::search::SearchResult;
use dirtask_core::{astar, AskVariant, Rules, Scenario};

use crate::backend::{BackendConfig, CannedFile, Recorder};
use crate::error::{Error, Result};
use crate::io::{
    extract_file_name, load_scenario, load_task, print_lines, read_text, read_tree, write_json, write_pack,
    write_tree, DecisionFile, TrajectoryFile, TRAJECTORY_SCHEMA,
};
use crate::report::{write_reports, Format};
use crate::runner::{load_records, load_stamp, Experiment, PlanFile, PolicySpec};
use crate::store::ExampleStore;

#[derive(Debug, Parser)]
#[command(name = "dirtask", version, about = "Director/Matcher task: planning, example forging and agent evaluation")]
pub struct Cli {
    /// Settings file (TOML) supplying defaults for paths, seed and the experiment plan.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the validated reference scenarios and their PDDL files.
    Scenarios(ScenariosArgs),
    /// Plan one scenario with A* and h_max; print the plan and export the search tree.
    Plan(PlanArgs),
    /// Extract G/E trajectories or L decision records from a search tree.
    Extract(ExtractArgs),
    /// Turn trajectories into thought-action examples with a completion backend.
    Forge(ForgeArgs),
    /// Run Matcher trials on one scenario.
    Run(RunArgs),
    /// Run the leave-one-family-out experiment and write the tables.
    Eval(EvalArgs),
    /// Aggregate a results directory into tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct Variant {
    /// Use the planning model with Ask actions.
    #[arg(long, conflicts_with = "no_ask")]
    pub ask: bool,
    /// Use the planning model without Ask actions.
    #[arg(long)]
    pub no_ask: bool,
}

impl Variant {
    fn one(&self) -> AskVariant {
        if self.no_ask {
            AskVariant::WithoutAsk
        } else {
            AskVariant::WithAsk
        }
    }

    fn all(&self) -> Vec<AskVariant> {
        match (self.ask, self.no_ask) {
            (true, _) => vec![AskVariant::WithAsk],
            (_, true) => vec![AskVariant::WithoutAsk],
            _ => AskVariant::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ScenariosArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Family name or scenario JSON file.
    #[arg(long, required_unless_present = "domain")]
    pub scenario: Option<String>,
    #[command(flatten)]
    pub variant: Variant,
    /// PDDL domain file, planned instead of a scenario.
    #[arg(long, requires = "problem", conflicts_with = "scenario", value_name = "FILE")]
    pub domain: Option<PathBuf>,
    /// PDDL problem file, used with --domain.
    #[arg(long, requires = "domain", value_name = "FILE")]
    pub problem: Option<PathBuf>,
    /// Directory for the plan and tree files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Family name or scenario JSON file.
    #[arg(long)]
    pub scenario: String,
    #[command(flatten)]
    pub variant: Variant,
    /// Trajectory type: G, E or L.
    #[arg(long, value_parser = parse_kind)]
    pub kind: ExampleKind,
    /// Search tree exported by `plan`; searched afresh when omitted.
    #[arg(long, value_name = "FILE")]
    pub tree: Option<PathBuf>,
    /// E type: keep every informative node, not only the maximal ones.
    #[arg(long)]
    pub all_informative: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForgeArgs {
    /// Family names or scenario files; the whole reference pack when omitted.
    #[arg(long)]
    pub scenario: Vec<String>,
    /// Example types to forge; all three when omitted.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Vec<ExampleKind>,
    #[command(flatten)]
    pub variant: Variant,
    /// Backend settings file; the offline rule-based backend when omitted.
    #[arg(long, value_name = "FILE")]
    pub backend_config: Option<PathBuf>,
    /// Example store directory.
    #[arg(long, value_name = "DIR")]
    pub examples: Option<PathBuf>,
    /// Also save every backend response to this canned-response file.
    #[arg(long, value_name = "FILE")]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Family name or scenario JSON file.
    #[arg(long)]
    pub scenario: String,
    /// Matcher policy: planner, nearest, random, llm or scripted=ACTION|ACTION|...
    #[arg(long, default_value = "nearest")]
    pub policy: String,
    /// Few-shot example type drawn from the example store (with --examples).
    #[arg(long, value_parser = parse_kind, requires = "examples")]
    pub kind: Option<ExampleKind>,
    #[command(flatten)]
    pub variant: Variant,
    /// Example store directory.
    #[arg(long, value_name = "DIR")]
    pub examples: Option<PathBuf>,
    /// Number of trials.
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
    /// Seed for the random policy.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Turn limit per trial.
    #[arg(long)]
    pub max_steps: Option<u32>,
    /// Backend settings file for the llm policy.
    #[arg(long, value_name = "FILE")]
    pub backend_config: Option<PathBuf>,
    /// Directory for trial logs.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Conditions to run (g_ask, g_noask, ..., none, planner); the six example types when omitted.
    #[arg(long)]
    pub condition: Vec<String>,
    /// Restrict example conditions to these types.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Vec<ExampleKind>,
    /// Held-out families to test; all seven when omitted.
    #[arg(long)]
    pub held_out: Vec<String>,
    /// Add the No Examples and Planner rows.
    #[arg(long)]
    pub baselines: bool,
    /// Matcher policy for non-planner conditions.
    #[arg(long)]
    pub policy: Option<String>,
    /// Trials per cell.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Plan seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Turn limit per trial.
    #[arg(long)]
    pub max_steps: Option<u32>,
    /// Few-shot examples per source family.
    #[arg(long)]
    pub examples_per_family: Option<usize>,
    /// Backend settings file for the llm policy.
    #[arg(long, value_name = "FILE")]
    pub backend_config: Option<PathBuf>,
    /// Example store directory.
    #[arg(long, value_name = "DIR")]
    pub examples: Option<PathBuf>,
    /// Results root; trials go under <results>/<plan-hash>/.
    #[arg(long, value_name = "DIR")]
    pub results: Option<PathBuf>,
    /// Parallel trials.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Mirror prompts and replies to a .txt file next to each trial log.
    #[arg(long)]
    pub transcripts: bool,
    /// Report format: md, csv or both.
    #[arg(long, default_value = "both", value_parser = parse_format)]
    pub format: Format,
    /// Also write tables grouped by demand tag.
    #[arg(long)]
    pub by_demand: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A plan directory, <results>/<plan-hash>.
    #[arg(long, value_name = "DIR")]
    pub results: PathBuf,
    /// Where to write the tables; the plan directory when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report format: md, csv or both.
    #[arg(long, default_value = "both", value_parser = parse_format)]
    pub format: Format,
    /// Also write tables grouped by demand tag.
    #[arg(long)]
    pub by_demand: bool,
}

fn parse_kind(s: &str) -> std::result::Result<ExampleKind, String> {
    ExampleKind::parse(s).ok_or_else(|| format!("expected G, E or L, got `{s}`"))
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("expected md, csv or both, got `{s}`"))
}

/// Contents of the `--config` file. Command-line flags win.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub out: Option<PathBuf>,
    pub examples: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub backend_config: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub plan: Option<PlanFile>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path).map_err(|e| Error::Config(e.to_string()))?;
        let mut s: Settings = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut s.out, &mut s.examples, &mut s.results, &mut s.backend_config].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }
}

struct Ctx {
    settings: Settings,
}

impl Ctx {
    fn out(&self, flag: &Option<PathBuf>, default: &str) -> PathBuf {
        flag.clone()
            .or_else(|| self.settings.out.clone())
            .unwrap_or_else(|| default.into())
    }

    fn examples(&self, flag: &Option<PathBuf>) -> PathBuf {
        flag.clone()
            .or_else(|| self.settings.examples.clone())
            .unwrap_or_else(|| "examples-store".into())
    }

    fn backend(&self, flag: &Option<PathBuf>) -> Result<Option<BackendConfig>> {
        match flag.as_ref().or(self.settings.backend_config.as_ref()) {
            Some(p) => Ok(Some(BackendConfig::load(p)?)),
            None => Ok(None),
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let ctx = Ctx { settings };
    match cli.command {
        Command::Scenarios(a) => cmd_scenarios(&ctx, a),
        Command::Plan(a) => cmd_plan(&ctx, a),
        Command::Extract(a) => cmd_extract(&ctx, a),
        Command::Forge(a) => cmd_forge(&ctx, a),
        Command::Run(a) => cmd_run(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Report(a) => cmd_report(a),
    }
}

fn cmd_scenarios(ctx: &Ctx, a: ScenariosArgs) -> Result<()> {
    let out = ctx.out(&a.out, "pack/v1");
    let files = write_pack(&out, &reference_pack())?;
    print_lines(files.iter().map(|p| p.display().to_string()))
}

fn stem_of(sc: &Scenario) -> String {
    sc.family.map_or_else(|| sc.id.clone(), |f| f.slug().to_string())
}

fn cmd_plan(ctx: &Ctx, a: PlanArgs) -> Result<()> {
    let variant = a.variant.one();
    let (task, stem, sc) = match (&a.scenario, &a.domain, &a.problem) {
        (Some(s), _, _) => {
            let sc = load_scenario(s)?;
            let stem = format!("{}_{}", stem_of(&sc), variant.slug());
            (scenario_task(&sc, variant), stem, Some(sc))
        }
        (None, Some(d), Some(p)) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("task");
            (load_task(d, p)?, stem.trim_end_matches(".problem").to_string(), None)
        }
        _ => return Err(Error::Usage("give --scenario or --domain with --problem".into())),
    };
    let out = ctx.out(&a.out, "plans");
    let SearchResult { plan, mut tree } = astar(&task);
    if let Some(sc) = &sc {
        let flags = TreeView::new(sc, variant, &task, &tree)?.informative();
        mark_informative(&mut tree, &flags);
    }
    write_tree(&out.join(format!("{stem}.tree.jsonl")), &tree)?;
    let plan = plan.ok_or(dirtask_core::search::NoPlan)?;
    write_json(&out.join(format!("{stem}.plan.json")), &plan.names)?;
    let mut lines = plan.names.clone();
    lines.push(format!(
        "; cost {} ({} nodes, {} expanded)",
        plan.cost,
        tree.nodes.len(),
        tree.expanded_count()
    ));
    print_lines(lines)
}

fn cmd_extract(ctx: &Ctx, a: ExtractArgs) -> Result<()> {
    let variant = a.variant.one();
    let sc = load_scenario(&a.scenario)?;
    let task = scenario_task(&sc, variant);
    let tree = match &a.tree {
        Some(p) => {
            let t = read_tree(p)?;
            if t.fact_count != task.fact_count() || t.nodes.first().is_none_or(|n| n.facts != task.init) {
                return Err(Error::format(p, "tree does not belong to this scenario and variant"));
            }
            t
        }
        None => astar(&task).tree,
    };
    let view = TreeView::new(&sc, variant, &task, &tree)?;
    let path = ctx.out(&a.out, "trajectories").join(extract_file_name(&sc, a.kind, variant));
    let count = match a.kind {
        ExampleKind::L => {
            let decisions = extract_l(&view);
            let n = decisions.len();
            write_json(
                &path,
                &DecisionFile {
                    schema: TRAJECTORY_SCHEMA,
                    scenario: sc.id.clone(),
                    variant,
                    decisions,
                },
            )?;
            n
        }
        kind => {
            let trajectories = if kind == ExampleKind::G {
                vec![extract_g(&view)?]
            } else {
                let mode = if a.all_informative {
                    InformativeMode::All
                } else {
                    InformativeMode::Maximal
                };
                extract_e(&view, mode)
            };
            let n = trajectories.len();
            write_json(
                &path,
                &TrajectoryFile {
                    schema: TRAJECTORY_SCHEMA,
                    scenario: sc.id.clone(),
                    kind,
                    variant,
                    trajectories,
                },
            )?;
            n
        }
    };
    print_lines([format!("{} ({count} records)", path.display())])
}

fn now() -> Option<u64> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn cmd_forge(ctx: &Ctx, a: ForgeArgs) -> Result<()> {
    let scenarios = if a.scenario.is_empty() {
        reference_pack()
    } else {
        a.scenario.iter().map(|s| load_scenario(s)).collect::<Result<_>>()?
    };
    let kinds = if a.kind.is_empty() { ExampleKind::ALL.to_vec() } else { a.kind.clone() };
    let cfg = ctx.backend(&a.backend_config)?.unwrap_or_else(BackendConfig::rule_based);
    let store = ExampleStore::new(ctx.examples(&a.examples));
    let recorded = Arc::new(Mutex::new(BTreeMap::new()));
    let mut backend: Box<dyn Backend> = match &a.record {
        Some(_) => Box::new(Recorder::new(cfg.build()?, recorded.clone())),
        None => cfg.build()?,
    };
    let mut lines = Vec::new();
    for sc in &scenarios {
        for variant in a.variant.all() {
            for &kind in &kinds {
                let ex = forge_example(backend.as_mut(), sc, variant, kind, now())?;
                let (path, _) = store.put(&ex)?;
                lines.push(format!("{} {}{} {}", stem_of(sc), kind, variant.sign(), path.display()));
            }
        }
    }
    if let Some(p) = &a.record {
        let responses = recorded.lock().unwrap_or_else(|e| e.into_inner()).clone();
        CannedFile {
            responses,
            ..CannedFile::default()
        }
        .save(p)?;
    }
    print_lines(lines)
}

fn cmd_run(ctx: &Ctx, a: RunArgs) -> Result<()> {
    let sc = load_scenario(&a.scenario)?;
    let spec = PolicySpec::parse(&a.policy)?;
    let backend = ctx.backend(&a.backend_config)?;
    let mut cfg = TrialConfig {
        max_steps: a.max_steps.unwrap_or(dirtask_core::agent::DEFAULT_MAX_STEPS),
        examples: Vec::new(),
        rules: Rules::RUNTIME,
    };
    if cfg.max_steps == 0 {
        return Err(Error::Usage("--max-steps must be at least 1".into()));
    }
    if let Some(kind) = a.kind {
        let pool = ExampleStore::new(ctx.examples(&a.examples)).load_all()?;
        let held_out = sc.family.ok_or_else(|| Error::Usage("few-shot selection needs a family scenario".into()))?;
        cfg.examples = select_examples(&pool, held_out, kind, a.variant.one(), 1)?
            .into_iter()
            .map(ThoughtActionExample::render)
            .collect();
    }
    let seed = a.seed.or(ctx.settings.seed).unwrap_or(0);
    let out = ctx.out(&a.out, "runs");
    let mut lines = Vec::new();
    for trial in 0..a.trials {
        let mut policy = spec.build(seed.wrapping_add(trial as u64), backend.as_ref())?;
        let log = run_trial(&sc, policy.as_mut(), &cfg).map_err(|e| match e {
            dirtask_core::agent::PolicyError::Backend(b) => Error::Backend(b),
            other => Error::Usage(other.to_string()),
        })?;
        let p = out.join(format!("{}_{trial}.json", stem_of(&sc)));
        write_json(&p, &log)?;
        lines.push(format!(
            "trial {trial}: {:?} steps={} asks={} first_take={}",
            log.outcome,
            log.steps,
            log.asks,
            log.first_take.as_ref().map_or("-", |i| i.as_str())
        ));
    }
    print_lines(lines)
}

fn eval_plan(ctx: &Ctx, a: &EvalArgs) -> Result<ExperimentPlan> {
    let mut pf = ctx.settings.plan.clone().unwrap_or_default();
    if !a.condition.is_empty() {
        pf.conditions = a.condition.clone();
    }
    if !a.held_out.is_empty() {
        pf.held_out = a.held_out.clone();
    }
    pf.baselines |= a.baselines;
    if let Some(p) = &a.policy {
        pf.policy = p.clone();
    }
    if let Some(t) = a.trials {
        pf.trials = t;
    }
    if let Some(s) = a.seed.or(ctx.settings.seed) {
        pf.seed = s;
    }
    if let Some(m) = a.max_steps {
        pf.max_steps = m;
    }
    if let Some(n) = a.examples_per_family {
        pf.examples_per_family = n;
    }
    let mut plan = pf.to_plan().map_err(|e| match e {
        Error::Config(m) => Error::Usage(m),
        e => e,
    })?;
    if !a.kind.is_empty() {
        plan.conditions.retain(|c| match c {
            Condition::Examples { kind, .. } => a.kind.contains(kind),
            _ => true,
        });
    }
    Ok(plan)
}

fn cmd_eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let plan = eval_plan(ctx, &a)?;
    let pool = if plan.conditions.iter().any(|c| c.is_example_type()) {
        ExampleStore::new(ctx.examples(&a.examples)).load_all()?
    } else {
        Vec::new()
    };
    let exp = Experiment {
        plan: &plan,
        results: a
            .results
            .clone()
            .or_else(|| ctx.settings.results.clone())
            .unwrap_or_else(|| "results".into()),
        backend: ctx.backend(&a.backend_config)?,
        pool,
        jobs: a.jobs.or(ctx.settings.jobs).unwrap_or(1),
        transcripts: a.transcripts,
    };
    let summary = exp.run()?;
    let records = load_records(&summary.dir, &plan)?;
    let tables = aggregate_plan(&records, &plan)?;
    let mut lines = vec![format!(
        "{}: {} trials run, {} already present",
        summary.dir.display(),
        summary.written,
        summary.skipped
    )];
    for p in write_reports(&summary.dir, &tables, a.format, a.by_demand)? {
        lines.push(p.display().to_string());
    }
    print_lines(lines)
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let (_, plan) = load_stamp(&a.results)?;
    let records = load_records(&a.results, &plan)?;
    let tables = aggregate_plan(&records, &plan)?;
    let out = a.out.unwrap_or_else(|| a.results.clone());
    let files = write_reports(&out, &tables, a.format, a.by_demand)?;
    print_lines(files.iter().map(|p| p.display().to_string()))
}
