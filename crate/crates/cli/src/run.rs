use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use zonemerge_core::explorer::{ExplorationLimits, HeuristicConfig, RunStatus, ZoneGraph};
use zonemerge_core::model::{parse_model_document, LocId, Pta};
use zonemerge_core::synthesis::{ef_synth_with_graph, SynthesisResult};

use crate::HarnessError;

/// One benchmark cell: a synthesis run of one model, goal and heuristic.
/// Field order matches the CSV column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub goal: String,
    pub heuristic: String,
    pub status: String,
    pub time_ms: u64,
    pub states: u64,
    pub transitions: u64,
    pub merges: u64,
    pub mergeability_tests: u64,
    pub result: String,
}

/// Everything a single run produces beyond its record.
pub struct RunOutput {
    pub record: RunRecord,
    pub synthesis: SynthesisResult,
    pub graph: ZoneGraph,
    pub pta: Pta,
}

/// Reads a model document from disk: the automaton plus its declared goal
/// locations.
pub fn load_model(path: &Path) -> Result<(Pta, Vec<LocId>), HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_model_document(&text)?)
}

/// The goal set of a run: the override when given, the model's own `goal`
/// field otherwise.
pub fn resolve_goal(
    pta: &Pta,
    file_goals: &[LocId],
    override_names: Option<&[String]>,
) -> Result<BTreeSet<LocId>, HarnessError> {
    let mut goals = BTreeSet::new();
    match override_names {
        Some(names) => {
            for name in names {
                let loc = pta
                    .loc_by_name(name)
                    .ok_or_else(|| HarnessError::UnknownGoal(name.clone()))?;
                goals.insert(loc);
            }
        }
        None => goals.extend(file_goals.iter().copied()),
    }
    if goals.is_empty() {
        return Err(HarnessError::NoGoal(pta.name().to_string()));
    }
    Ok(goals)
}

/// Executes one synthesis run and packages its record.
///
/// Per the timeout accounting rule, a timed-out run reports exactly the
/// timeout as its execution time, and no unfinished run reports more.
pub fn run_single(
    model_path: &Path,
    goal_override: Option<&[String]>,
    heuristic: &str,
    limits: ExplorationLimits,
) -> Result<RunOutput, HarnessError> {
    let (pta, file_goals) = load_model(model_path)?;
    let goal = resolve_goal(&pta, &file_goals, goal_override)?;
    let config = HeuristicConfig::parse(heuristic)?;
    let (synthesis, graph) = ef_synth_with_graph(&pta, &goal, config, limits)?;

    let mut time_ms = synthesis.stats.wall_time.as_millis() as u64;
    if let Some(timeout) = limits.wall_timeout {
        let timeout_ms = timeout.as_millis() as u64;
        if synthesis.stats.status == RunStatus::Timeout {
            time_ms = timeout_ms;
        } else if !synthesis.complete {
            time_ms = time_ms.min(timeout_ms);
        }
    }
    let goal_names: Vec<&str> = goal
        .iter()
        .map(|l| pta.location(*l).name.as_str())
        .collect();
    let record = RunRecord {
        model: pta.name().to_string(),
        goal: goal_names.join(","),
        heuristic: heuristic.to_string(),
        status: synthesis.stats.status.to_string(),
        time_ms,
        states: synthesis.stats.states_final as u64,
        transitions: synthesis.stats.transitions_final as u64,
        merges: synthesis.stats.merges_performed,
        mergeability_tests: synthesis.stats.mergeability_tests,
        result: synthesis.result.render(),
    };
    Ok(RunOutput {
        record,
        synthesis,
        graph,
        pta,
    })
}

/// Model documents (`*.json`) in a directory, sorted by file name.
pub fn model_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::NoModels(dir.display().to_string()));
    }
    Ok(files)
}

/// Runs every (model, heuristic) cell of the matrix. Cells run concurrently
/// up to `jobs` workers, each owning its model copy; failures become rows
/// with status `Error` and the matrix continues. Row order is deterministic:
/// models sorted by file name, heuristics in the given order.
pub fn run_matrix(
    models_dir: &Path,
    heuristics: &[String],
    limits: ExplorationLimits,
    jobs: usize,
) -> Result<Vec<RunRecord>, HarnessError> {
    if heuristics.is_empty() {
        return Err(HarnessError::EmptyHeuristics);
    }
    let files = model_files(models_dir)?;
    let cells: Vec<(usize, &PathBuf, &String)> = files
        .iter()
        .flat_map(|f| heuristics.iter().map(move |h| (f, h)))
        .enumerate()
        .map(|(i, (f, h))| (i, f, h))
        .collect();

    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (_, path, heuristic) = cells[i];
                let record = run_cell(path, heuristic, limits);
                results.lock().expect("no poisoned workers")[i] = Some(record);
            });
        }
    });
    Ok(results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect())
}

fn run_cell(path: &Path, heuristic: &str, limits: ExplorationLimits) -> RunRecord {
    match run_single(path, None, heuristic, limits) {
        Ok(out) => out.record,
        Err(err) => RunRecord {
            model: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            goal: String::new(),
            heuristic: heuristic.to_string(),
            status: "Error".to_string(),
            time_ms: 0,
            states: 0,
            transitions: 0,
            merges: 0,
            mergeability_tests: 0,
            result: err.to_string(),
        },
    }
}

/// Writes a zone graph to disk as graph-description text.
pub fn export_graph(zg: &ZoneGraph, pta: &Pta, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, zg.to_graph_text(pta)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes records as CSV with the fixed column header.
pub fn write_csv(records: &[RunRecord]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().expect("in-memory writer");
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn read_csv(text: &str) -> Result<Vec<RunRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
    }

    #[test]
    fn single_run_on_the_branching_model() {
        let out = run_single(
            &models_dir().join("threshold.json"),
            None,
            "OQM",
            ExplorationLimits::default(),
        )
        .unwrap();
        assert_eq!(out.record.status, "Completed");
        assert_eq!(out.record.result, "0 <= p AND p <= 1");
        assert_eq!(out.record.model, "threshold");
        assert_eq!(out.record.goal, "l4");

        let nomerge = run_single(
            &models_dir().join("threshold.json"),
            None,
            "Nomerge",
            ExplorationLimits::default(),
        )
        .unwrap();
        assert_eq!(nomerge.record.states, 7);
        assert_eq!(nomerge.record.merges, 0);
    }

    #[test]
    fn goal_override_replaces_the_file_goal() {
        let out = run_single(
            &models_dir().join("threshold.json"),
            Some(&["l2".to_string()]),
            "Nomerge",
            ExplorationLimits::default(),
        )
        .unwrap();
        assert_eq!(out.record.goal, "l2");
        // the two goal zones p <= 1 and p > 1 cover the nonnegative half-line
        use zonemerge_core::synthesis::{result_equal, ParamConstraint};
        use zonemerge_core::{parse_atom, Polyhedron};
        let space = out.pta.space();
        let whole = ParamConstraint::new(
            space.clone(),
            [Polyhedron::from_atoms(
                space.clone(),
                [parse_atom("p >= 0", space).unwrap()],
            )],
        );
        assert!(result_equal(&out.synthesis.result, &whole).unwrap());
    }

    #[test]
    fn unknown_goal_and_heuristic_are_errors() {
        let path = models_dir().join("threshold.json");
        assert!(matches!(
            run_single(&path, Some(&["nowhere".into()]), "OQM", Default::default()),
            Err(HarnessError::UnknownGoal(_))
        ));
        assert!(run_single(&path, None, "XQM", Default::default()).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let out = run_single(
            &models_dir().join("threshold.json"),
            None,
            "OQM",
            ExplorationLimits::default(),
        )
        .unwrap();
        let text = write_csv(std::slice::from_ref(&out.record)).unwrap();
        assert!(text.starts_with(
            "model,goal,heuristic,status,time_ms,states,transitions,merges,mergeability_tests,result"
        ));
        let back = read_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].result, out.record.result);
        assert_eq!(back[0].states, out.record.states);
    }

    #[test]
    fn matrix_runs_every_cell() {
        let dir = tempdir();
        for name in ["threshold.json", "diamond.json"] {
            std::fs::copy(models_dir().join(name), dir.join(name)).unwrap();
        }
        let heuristics = vec!["Nomerge".to_string(), "OQM".to_string(), "RVMr".to_string()];
        let rows = run_matrix(&dir, &heuristics, ExplorationLimits::default(), 2).unwrap();
        assert_eq!(rows.len(), 6);
        // deterministic order: models sorted by file name, heuristics as given
        assert_eq!(rows[0].model, "diamond");
        assert_eq!(rows[0].heuristic, "Nomerge");
        assert_eq!(rows[3].model, "threshold");
        assert!(rows.iter().all(|r| r.status == "Completed"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn empty_heuristic_list_is_an_error() {
        assert!(matches!(
            run_matrix(&models_dir(), &[], ExplorationLimits::default(), 1),
            Err(HarnessError::EmptyHeuristics)
        ));
    }

    fn tempdir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "zonemerge-test-{}-{:?}",
            std::process::id(),
            std::thread::current().id()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }
}
