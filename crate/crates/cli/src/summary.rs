use std::collections::BTreeMap;

use crate::run::RunRecord;
use crate::HarnessError;

/// Aggregated metrics for one heuristic over a set of executions.
///
/// An execution is one (model, goal) pair. The merge subset contains the
/// executions where at least one heuristic performed a merge; averages over
/// an empty subset are absent. Normalized averages are means of per-execution
/// ratios against the Nomerge baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicSummary {
    pub heuristic: String,
    pub wins_time: u64,
    pub avg_time_ms: f64,
    pub avg_time_ms_merge: Option<f64>,
    pub avg_time_ms_no_merge: Option<f64>,
    pub median_time_ms: f64,
    pub norm_avg_time: f64,
    pub wins_states: u64,
    pub avg_states: f64,
    pub avg_states_merge: Option<f64>,
    pub avg_states_no_merge: Option<f64>,
    pub median_states: f64,
    pub norm_avg_states: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<HeuristicSummary>,
}

const COLUMNS: [&str; 13] = [
    "heuristic",
    "wins_time",
    "avg_time_ms",
    "avg_time_ms_merge",
    "avg_time_ms_no_merge",
    "median_time_ms",
    "norm_avg_time",
    "wins_states",
    "avg_states",
    "avg_states_merge",
    "avg_states_no_merge",
    "median_states",
    "norm_avg_states",
];

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.heuristic,
                r.wins_time,
                fmt(r.avg_time_ms),
                opt(r.avg_time_ms_merge),
                opt(r.avg_time_ms_no_merge),
                fmt(r.median_time_ms),
                fmt(r.norm_avg_time),
                r.wins_states,
                fmt(r.avg_states),
                opt(r.avg_states_merge),
                opt(r.avg_states_no_merge),
                fmt(r.median_states),
                fmt(r.norm_avg_states),
            ));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n", COLUMNS.join(" | "));
        out.push_str(&format!("|{}\n", " --- |".repeat(COLUMNS.len())));
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                r.heuristic,
                r.wins_time,
                fmt(r.avg_time_ms),
                opt_md(r.avg_time_ms_merge),
                opt_md(r.avg_time_ms_no_merge),
                fmt(r.median_time_ms),
                fmt(r.norm_avg_time),
                r.wins_states,
                fmt(r.avg_states),
                opt_md(r.avg_states_merge),
                opt_md(r.avg_states_no_merge),
                fmt(r.median_states),
                fmt(r.norm_avg_states),
            ));
        }
        out
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn opt_md(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "-".to_string())
}

/// Computes the summary table from benchmark records.
///
/// Rules: wins count every heuristic attaining the minimum of its execution
/// (ties award all minimizers); a non-completed run already carries the
/// timeout as its time; normalized ratios clamp both sides to at least 1 ms
/// so sub-millisecond integer times stay finite. Rows with status `Error`
/// are ignored. Every execution must keep a Nomerge baseline.
pub fn summarize(records: &[RunRecord]) -> Result<SummaryTable, HarnessError> {
    let usable: Vec<&RunRecord> = records.iter().filter(|r| r.status != "Error").collect();

    // executions keyed by (model, goal); heuristic order of first appearance
    let mut heuristics: Vec<String> = Vec::new();
    let mut executions: BTreeMap<(String, String), BTreeMap<String, &RunRecord>> = BTreeMap::new();
    for r in &usable {
        if !heuristics.contains(&r.heuristic) {
            heuristics.push(r.heuristic.clone());
        }
        executions
            .entry((r.model.clone(), r.goal.clone()))
            .or_default()
            .insert(r.heuristic.clone(), r);
    }
    if let Some(pos) = heuristics.iter().position(|h| h == "Nomerge") {
        let nomerge = heuristics.remove(pos);
        heuristics.insert(0, nomerge);
    }
    for ((model, goal), cells) in &executions {
        if !cells.contains_key("Nomerge") {
            return Err(HarnessError::MissingNomerge {
                model: model.clone(),
                goal: goal.clone(),
            });
        }
    }

    let mut rows = Vec::new();
    for h in &heuristics {
        let mut wins_time = 0u64;
        let mut wins_states = 0u64;
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut times_merge = Vec::new();
        let mut times_no_merge = Vec::new();
        let mut states_merge = Vec::new();
        let mut states_no_merge = Vec::new();
        let mut time_ratios = Vec::new();
        let mut state_ratios = Vec::new();
        for cells in executions.values() {
            let Some(r) = cells.get(h) else { continue };
            let min_time = cells.values().map(|c| c.time_ms).min().expect("nonempty");
            let min_states = cells.values().map(|c| c.states).min().expect("nonempty");
            if r.time_ms == min_time {
                wins_time += 1;
            }
            if r.states == min_states {
                wins_states += 1;
            }
            let merge_subset = cells.values().any(|c| c.merges > 0);
            let t = r.time_ms as f64;
            let s = r.states as f64;
            times.push(t);
            states.push(s);
            if merge_subset {
                times_merge.push(t);
                states_merge.push(s);
            } else {
                times_no_merge.push(t);
                states_no_merge.push(s);
            }
            let baseline = cells["Nomerge"];
            time_ratios.push(r.time_ms.max(1) as f64 / baseline.time_ms.max(1) as f64);
            state_ratios.push(r.states.max(1) as f64 / baseline.states.max(1) as f64);
        }
        rows.push(HeuristicSummary {
            heuristic: h.clone(),
            wins_time,
            avg_time_ms: mean(&times),
            avg_time_ms_merge: mean_opt(&times_merge),
            avg_time_ms_no_merge: mean_opt(&times_no_merge),
            median_time_ms: median(&times),
            norm_avg_time: mean(&time_ratios),
            wins_states,
            avg_states: mean(&states),
            avg_states_merge: mean_opt(&states_merge),
            avg_states_no_merge: mean_opt(&states_no_merge),
            median_states: median(&states),
            norm_avg_states: mean(&state_ratios),
        });
    }
    Ok(SummaryTable { rows })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_opt(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(mean(xs))
    }
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}
