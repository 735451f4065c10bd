//! Experiment plans, metric aggregation and table rendering.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::agent::{TrialConfig, TrialLog, DEFAULT_MAX_STEPS};
use crate::forge::{select_examples, ExampleKind, SelectError, ThoughtActionExample};
use crate::hash::{fnv1a64, CanonicalWriter};
use crate::scenario::{AskVariant, Demand, Family, Rules};

/// What a trial's prompt is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Condition {
    Examples { kind: ExampleKind, variant: AskVariant },
    NoExamples,
    /// Runs the planner oracle instead of the configured policy.
    Planner,
}

impl Condition {
    /// The six example types in table row order.
    pub const EXAMPLE_TYPES: [Condition; 6] = [
        Condition::Examples { kind: ExampleKind::G, variant: AskVariant::WithAsk },
        Condition::Examples { kind: ExampleKind::G, variant: AskVariant::WithoutAsk },
        Condition::Examples { kind: ExampleKind::E, variant: AskVariant::WithAsk },
        Condition::Examples { kind: ExampleKind::E, variant: AskVariant::WithoutAsk },
        Condition::Examples { kind: ExampleKind::L, variant: AskVariant::WithAsk },
        Condition::Examples { kind: ExampleKind::L, variant: AskVariant::WithoutAsk },
    ];

    pub fn label(self) -> String {
        match self {
            Condition::Examples { kind, variant } => format!("{kind} ({})", variant.sign()),
            Condition::NoExamples => "No Examples".into(),
            Condition::Planner => "Planner".into(),
        }
    }

    /// Directory-safe name, e.g. `g_ask`, `l_noask`, `none`, `planner`.
    pub fn slug(self) -> String {
        match self {
            Condition::Examples { kind, variant } => {
                format!("{}_{}", kind.letter().to_ascii_lowercase(), variant.slug())
            }
            Condition::NoExamples => "none".into(),
            Condition::Planner => "planner".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Condition> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "none" | "no-examples" => return Some(Condition::NoExamples),
            "planner" => return Some(Condition::Planner),
            _ => {}
        }
        let s: String = s.chars().filter(|c| !matches!(c, ' ' | '(' | ')')).collect();
        let kind = ExampleKind::parse(s.get(..1)?)?;
        let rest = &s[1..];
        let variant = match rest.strip_prefix('_') {
            Some(slug) => AskVariant::parse(slug)?,
            None => AskVariant::parse(rest)?,
        };
        Some(Condition::Examples { kind, variant })
    }

    pub fn is_example_type(self) -> bool {
        matches!(self, Condition::Examples { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub condition: Condition,
    pub family: Family,
}

impl Cell {
    /// Relative results directory, `<condition>/<family>`.
    pub fn dir(&self) -> String {
        format!("{}/{}", self.condition.slug(), self.family.slug())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub conditions: Vec<Condition>,
    pub held_out: Vec<Family>,
    pub trials: u32,
    pub seed: u64,
    pub max_steps: u32,
    pub examples_per_family: usize,
    /// Policy used for every condition except [`Condition::Planner`].
    pub policy: String,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            conditions: Condition::EXAMPLE_TYPES.to_vec(),
            held_out: Family::ALL.to_vec(),
            trials: 5,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            examples_per_family: 1,
            policy: "llm".into(),
        }
    }
}

impl ExperimentPlan {
    /// Default plan plus the No Examples and Planner rows.
    pub fn with_baselines(mut self) -> Self {
        for c in [Condition::NoExamples, Condition::Planner] {
            if !self.conditions.contains(&c) {
                self.conditions.push(c);
            }
        }
        self
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &condition in &self.conditions {
            for &family in &self.held_out {
                out.push(Cell { condition, family });
            }
        }
        out
    }

    pub fn trial_count(&self) -> usize {
        self.conditions.len() * self.held_out.len() * self.trials as usize
    }

    fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::new();
        w.bytes(b"DTXP");
        w.u32(self.conditions.len() as u32);
        for c in &self.conditions {
            w.str(&c.slug());
        }
        w.u32(self.held_out.len() as u32);
        for f in &self.held_out {
            w.str(f.slug());
        }
        w.u32(self.trials);
        w.u64(self.seed);
        w.u32(self.max_steps);
        w.u64(self.examples_per_family as u64);
        w.str(&self.policy);
        w.finish()
    }

    /// Hex digest identifying the plan; names the results directory.
    pub fn plan_hash(&self) -> String {
        format!("{:016x}", fnv1a64(&self.canonical_bytes()))
    }

    /// Per-trial seed derived from the plan seed, cell and trial index.
    pub fn trial_seed(&self, cell: &Cell, trial: u32) -> u64 {
        let mut w = CanonicalWriter::new();
        w.u64(self.seed);
        w.str(&cell.dir());
        w.u32(trial);
        fnv1a64(&w.finish())
    }

    /// Prompt configuration for a cell. Example conditions draw their
    /// few-shot set from the other six families.
    pub fn trial_config(&self, cell: &Cell, pool: &[ThoughtActionExample]) -> Result<TrialConfig, SelectError> {
        let examples = match cell.condition {
            Condition::Examples { kind, variant } => {
                select_examples(pool, cell.family, kind, variant, self.examples_per_family)?
                    .into_iter()
                    .map(ThoughtActionExample::render)
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(TrialConfig {
            max_steps: self.max_steps,
            examples,
            rules: Rules::RUNTIME,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell: Cell,
    pub trial: u32,
    pub seed: u64,
    pub log: TrialLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Percentage of trials whose first Take was the target.
    FirstTake,
    Steps,
    Asks,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::FirstTake, Metric::Steps, Metric::Asks];

    fn of(self, log: &TrialLog) -> f64 {
        match self {
            Metric::FirstTake => {
                if log.first_take_correct() {
                    100.0
                } else {
                    0.0
                }
            }
            Metric::Steps => log.steps as f64,
            Metric::Asks => log.asks as f64,
        }
    }

    /// Steps and asks tables carry an AVG column and an AVG row.
    pub fn has_averages(self) -> bool {
        !matches!(self, Metric::FirstTake)
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::FirstTake => "First Take on Correct Target (%)",
            Metric::Steps => "Average Number of Steps",
            Metric::Asks => "Average Number of Ask Actions",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Metric::FirstTake => "first_take",
            Metric::Steps => "steps",
            Metric::Asks => "asks",
        }
    }

    /// Report file stem: `table3`, `table4`, `table5`.
    pub fn table_name(self) -> &'static str {
        match self {
            Metric::FirstTake => "table3",
            Metric::Steps => "table4",
            Metric::Asks => "table5",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL
            .into_iter()
            .find(|m| m.slug() == s || m.table_name() == s || m.title() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cell {} has {found} of {expected} trials", cell.dir())]
pub struct IncompleteCell {
    pub cell: Cell,
    pub expected: u32,
    pub found: u32,
}

/// Fails on the first cell of `plan` without exactly `plan.trials` distinct
/// trial records.
pub fn check_complete(records: &[TrialRecord], plan: &ExperimentPlan) -> Result<(), IncompleteCell> {
    for cell in plan.cells() {
        let mut seen: Vec<u32> = records.iter().filter(|r| r.cell == cell).map(|r| r.trial).collect();
        seen.sort_unstable();
        seen.dedup();
        let found = seen.iter().filter(|&&t| t < plan.trials).count() as u32;
        if found != plan.trials {
            return Err(IncompleteCell {
                cell,
                expected: plan.trials,
                found,
            });
        }
    }
    Ok(())
}

/// The three tables for a finished plan, in report order.
pub fn aggregate_plan(records: &[TrialRecord], plan: &ExperimentPlan) -> Result<Vec<MetricsTable>, IncompleteCell> {
    check_complete(records, plan)?;
    let mut columns: Vec<Family> = Family::ALL.into_iter().filter(|f| plan.held_out.contains(f)).collect();
    columns.dedup();
    Ok(Metric::ALL
        .into_iter()
        .map(|m| aggregate(records, &plan.conditions, &columns, m))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub values: Vec<Option<f64>>,
    pub avg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub metric: Metric,
    pub columns: Vec<Family>,
    pub rows: Vec<Row>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Per-cell means of `metric`. Rows follow `conditions`; with averages, an
/// AVG row over the example types goes after the last example-type row.
pub fn aggregate(records: &[TrialRecord], conditions: &[Condition], columns: &[Family], metric: Metric) -> MetricsTable {
    let row_for = |c: Condition| -> Row {
        let values: Vec<Option<f64>> = columns
            .iter()
            .map(|&f| {
                mean(
                    records
                        .iter()
                        .filter(|r| r.cell.condition == c && r.cell.family == f)
                        .map(|r| metric.of(&r.log)),
                )
            })
            .collect();
        let avg = if metric.has_averages() {
            mean(values.iter().flatten().copied())
        } else {
            None
        };
        Row {
            label: c.label(),
            values,
            avg,
        }
    };
    let mut rows = Vec::new();
    let types: Vec<Condition> = conditions.iter().copied().filter(|c| c.is_example_type()).collect();
    let mut type_rows = Vec::new();
    for c in &types {
        let r = row_for(*c);
        type_rows.push(r.clone());
        rows.push(r);
    }
    if metric.has_averages() && !type_rows.is_empty() {
        let values: Vec<Option<f64>> = (0..columns.len())
            .map(|i| mean(type_rows.iter().filter_map(|r| r.values[i])))
            .collect();
        let avg = mean(values.iter().flatten().copied());
        rows.push(Row {
            label: "AVG".into(),
            values,
            avg,
        });
    }
    for &c in conditions.iter().filter(|c| !c.is_example_type()) {
        rows.push(row_for(c));
    }
    MetricsTable {
        metric,
        columns: columns.to_vec(),
        rows,
    }
}

/// Two decimals with trailing zeros (and a bare point) removed.
pub fn format_value(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Caption line, blank line, then a pipe table.
pub fn render_markdown(t: &MetricsTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}\n", t.metric.title());
    let mut head = vec![String::from("")];
    head.extend(t.columns.iter().map(|f| f.short().to_string()));
    if t.metric.has_averages() {
        head.push("AVG".into());
    }
    let _ = writeln!(s, "| {} |", head.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(head.len()));
    for r in &t.rows {
        let mut cells = vec![r.label.clone()];
        cells.extend(r.values.iter().map(|v| v.map_or_else(|| "n/a".into(), format_value)));
        if t.metric.has_averages() {
            cells.push(r.avg.map_or_else(|| "n/a".into(), format_value));
        }
        let _ = writeln!(s, "| {} |", cells.join(" | "));
    }
    s
}

/// Means of `t`'s family cells grouped by demand tag. Families with two
/// tags count toward both.
pub fn demand_groups(t: &MetricsTable) -> Vec<(String, [Option<f64>; 3])> {
    let demands = [Demand::F1, Demand::F2, Demand::F3];
    t.rows
        .iter()
        .map(|r| {
            let mut out = [None; 3];
            for (slot, d) in out.iter_mut().zip(demands) {
                *slot = mean(
                    t.columns
                        .iter()
                        .zip(&r.values)
                        .filter(|(f, _)| f.demands().contains(&d))
                        .filter_map(|(_, v)| *v),
                );
            }
            (r.label.clone(), out)
        })
        .collect()
}

pub fn render_demand_markdown(t: &MetricsTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} by demand\n", t.metric.title());
    let _ = writeln!(s, "|  | F1 | F2 | F3 |");
    let _ = writeln!(s, "|---|---|---|---|");
    for (label, vals) in demand_groups(t) {
        let cells: Vec<String> = vals.iter().map(|v| v.map_or_else(|| "n/a".into(), format_value)).collect();
        let _ = writeln!(s, "| {label} | {} |", cells.join(" | "));
    }
    s
}
