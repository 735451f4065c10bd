//! File formats: scenario JSON, the PDDL pack, tree JSON-lines, plan and
//! trajectory files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use dirtask_core::extract::{DecisionRecord, Trajectory};
use dirtask_core::forge::ExampleKind;
use dirtask_core::pddl::{domain_file_name, emit_scenario, ground, parse_domain, parse_problem, problem_file_name};
use dirtask_core::scenario::{check_family_predicates, reference_file, reference_scenario, ScenarioFile};
use dirtask_core::search::TreeRecord;
use dirtask_core::{AskVariant, Family, GroundedTask, ReasoningTree, Scenario};

use crate::error::{Error, Result};

/// Version tag written into trajectory and decision files.
pub const TRAJECTORY_SCHEMA: u32 = 1;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    s.push('\n');
    write_text(path, &s)
}

/// Resolves `spec` as a family name (`base`, `not-that`, ...) or a path to
/// a scenario JSON file. Family scenarios are checked against their
/// family predicates.
pub fn load_scenario(spec: &str) -> Result<Scenario> {
    if let Some(f) = Family::parse(spec) {
        if !Path::new(spec).exists() {
            return Ok(reference_scenario(f));
        }
    }
    let path = Path::new(spec);
    let file: ScenarioFile = read_json(path)?;
    let sc = file.into_scenario()?;
    if sc.family.is_some() {
        check_family_predicates(&sc)?;
    }
    Ok(sc)
}

pub fn scenario_file_name(sc: &Scenario) -> String {
    format!("{}.json", sc.family.map_or(sc.id.as_str(), |f| f.slug()))
}

fn stem(sc: &Scenario) -> &str {
    sc.family.map_or(sc.id.as_str(), |f| f.slug())
}

/// Writes the scenario JSON and both PDDL variants for each scenario.
/// Returns the written paths in order.
pub fn write_pack(dir: &Path, scenarios: &[Scenario]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for sc in scenarios {
        let file = match sc.family {
            Some(f) if reference_scenario(f) == *sc => reference_file(f),
            _ => ScenarioFile::from_scenario(sc),
        };
        let p = dir.join(scenario_file_name(sc));
        write_json(&p, &file)?;
        out.push(p);
        for variant in AskVariant::ALL {
            let (domain, problem) = emit_scenario(sc, variant)?;
            let d = dir.join(domain_file_name(stem(sc), variant));
            write_text(&d, &domain)?;
            let p = dir.join(problem_file_name(stem(sc), variant));
            write_text(&p, &problem)?;
            out.extend([d, p]);
        }
    }
    Ok(out)
}

/// Parses and grounds a domain/problem pair.
pub fn load_task(domain: &Path, problem: &Path) -> Result<GroundedTask> {
    let d = parse_domain(&read_text(domain)?).map_err(|source| Error::Pddl {
        path: domain.into(),
        source,
    })?;
    let p = parse_problem(&read_text(problem)?, &d).map_err(|source| Error::Pddl {
        path: problem.into(),
        source,
    })?;
    Ok(ground(&d, &p))
}

pub fn write_tree(path: &Path, tree: &ReasoningTree) -> Result<()> {
    let mut s = String::new();
    for r in tree.to_records() {
        s.push_str(&serde_json::to_string(&r).map_err(|e| Error::format(path, e))?);
        s.push('\n');
    }
    write_text(path, &s)
}

pub fn read_tree(path: &Path) -> Result<ReasoningTree> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TreeRecord =
            serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        records.push(r);
    }
    Ok(ReasoningTree::from_records(&records)?)
}

/// One G or E trajectory file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub schema: u32,
    pub scenario: String,
    pub kind: ExampleKind,
    pub variant: AskVariant,
    pub trajectories: Vec<Trajectory>,
}

/// One L-type decision record file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionFile {
    pub schema: u32,
    pub scenario: String,
    pub variant: AskVariant,
    pub decisions: Vec<DecisionRecord>,
}

pub fn extract_file_name(sc: &Scenario, kind: ExampleKind, variant: AskVariant) -> String {
    format!("{}_{}_{}.json", stem(sc), kind.letter(), variant.slug())
}

/// Writes `lines` to stdout, one per line.
pub fn print_lines<I: IntoIterator<Item = S>, S: AsRef<str>>(lines: I) -> Result<()> {
    let stdout = std::io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for l in lines {
        writeln!(w, "{}", l.as_ref()).map_err(|e| Error::io("<stdout>", e))?;
    }
    w.flush().map_err(|e| Error::io("<stdout>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirtask_core::astar;
    use dirtask_core::pddl::scenario_task;
    use dirtask_core::scenario::reference_pack;

    #[test]
    fn pack_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_pack(dir.path(), &reference_pack()).unwrap();
        assert_eq!(files.len(), 7 * 5);
        for sc in reference_pack() {
            let path = dir.path().join(scenario_file_name(&sc));
            assert_eq!(load_scenario(path.to_str().unwrap()).unwrap(), sc);
            for v in AskVariant::ALL {
                let task = load_task(
                    &dir.path().join(domain_file_name(stem(&sc), v)),
                    &dir.path().join(problem_file_name(stem(&sc), v)),
                )
                .unwrap();
                assert_eq!(task, scenario_task(&sc, v));
            }
        }
    }

    #[test]
    fn tree_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let task = scenario_task(&reference_scenario(Family::Far), AskVariant::WithAsk);
        let tree = astar(&task).tree;
        let p = dir.path().join("far.jsonl");
        write_tree(&p, &tree).unwrap();
        assert_eq!(read_tree(&p).unwrap(), tree);
        let text = read_text(&p).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("\"kind\":\"node\""));
    }

    #[test]
    fn family_names_resolve() {
        assert_eq!(load_scenario("not-that").unwrap().family, Some(Family::Not));
        assert!(matches!(load_scenario("/nonexistent.json"), Err(Error::Io { .. })));
    }
}
