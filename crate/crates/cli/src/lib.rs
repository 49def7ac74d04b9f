//! Benchmark harness around the synthesis engine: single runs, benchmark
//! matrices with CSV output, a result summarizer, a random model generator
//! and a concrete-valuation reachability oracle.

mod gen;
mod oracle;
mod run;
mod summary;

pub use gen::{gen_random_pta, GenParams, SplitMix64};
pub use oracle::{concrete_oracle, param_point, sample_valuations, OracleOutcome};
pub use run::{
    export_graph, load_model, model_files, read_csv, resolve_goal, run_matrix, run_single,
    write_csv, RunOutput, RunRecord,
};
pub use summary::{summarize, HeuristicSummary, SummaryTable};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] zonemerge_core::ModelError),
    #[error(transparent)]
    Explore(#[from] zonemerge_core::explorer::ExploreError),
    #[error(transparent)]
    Geometry(#[from] zonemerge_core::GeometryError),
    #[error("goal location `{0}` does not exist in the model")]
    UnknownGoal(String),
    #[error("model `{0}` declares no goal and none was given")]
    NoGoal(String),
    #[error("the heuristic list is empty")]
    EmptyHeuristics,
    #[error("no model documents (*.json) found in `{0}`")]
    NoModels(String),
    #[error("missing Nomerge baseline for model `{model}`, goal `{goal}`")]
    MissingNomerge { model: String, goal: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid generator sizes: {0}")]
    BadGenParams(String),
}
