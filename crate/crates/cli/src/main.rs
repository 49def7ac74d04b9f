//! Command-line front end: single synthesis runs, benchmark matrices,
//! summaries and random model generation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use zonemerge::{
    export_graph, gen_random_pta, read_csv, run_matrix, run_single, summarize, write_csv, GenParams,
};
use zonemerge_core::explorer::ExplorationLimits;

#[derive(Parser)]
#[command(name = "zonemerge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the parameter valuations reaching a goal location.
    Synth {
        /// Model document to analyze.
        #[arg(long)]
        model: PathBuf,
        /// Goal locations, comma separated (defaults to the model's `goal`).
        #[arg(long, value_delimiter = ',')]
        goal: Option<Vec<String>>,
        /// Merging heuristic code (e.g. OQM, RVMr, Nomerge).
        #[arg(long)]
        heuristic: String,
        /// Wall-clock timeout in seconds.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        timeout: Option<u64>,
        /// Stop after this many states.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_states: Option<u64>,
        /// Stop after this many BFS layers.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_layers: Option<u64>,
        /// Write the run record as a flat JSON object.
        #[arg(long)]
        stats_json: Option<PathBuf>,
        /// Write the final zone graph as graph-description text.
        #[arg(long = "export-graph")]
        graph_out: Option<PathBuf>,
    },
    /// Run a directory of models against a list of heuristics.
    Bench {
        /// Directory of model documents (each with a `goal` field).
        #[arg(long)]
        models: PathBuf,
        /// Heuristic codes, comma separated.
        #[arg(long, value_delimiter = ',')]
        heuristics: Vec<String>,
        /// Per-cell wall-clock timeout in seconds.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        timeout: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Stop each cell after this many states.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_states: Option<u64>,
        /// Concurrent worker count.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Aggregate a benchmark CSV into per-heuristic metrics.
    Summarize {
        /// Input CSV produced by `bench`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output format, printed to stdout.
        #[arg(long, value_enum)]
        out: SummaryFormat,
    },
    /// Generate random model documents.
    Gen {
        /// Base seed; model i uses seed + i.
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Number of models to generate.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 6)]
        max_locations: u64,
        #[arg(long, default_value_t = 2)]
        max_clocks: u64,
        #[arg(long, default_value_t = 2)]
        max_params: u64,
        #[arg(long, default_value_t = 5)]
        max_const: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SummaryFormat {
    Csv,
    Markdown,
}

const EXIT_ERROR: u8 = 2;
const EXIT_LIMIT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Synth {
            model,
            goal,
            heuristic,
            timeout,
            max_states,
            max_layers,
            stats_json,
            graph_out,
        } => {
            let limits = ExplorationLimits {
                max_layers: max_layers.map(|n| n as usize),
                max_states: max_states.map(|n| n as usize),
                wall_timeout: timeout.map(Duration::from_secs),
            };
            let out = run_single(&model, goal.as_deref(), &heuristic, limits)?;
            println!("result: {}", out.record.result);
            println!("status: {}", out.record.status);
            println!("states: {}", out.record.states);
            println!("transitions: {}", out.record.transitions);
            println!("merges: {}", out.record.merges);
            println!("mergeability_tests: {}", out.record.mergeability_tests);
            println!("time_ms: {}", out.record.time_ms);
            if let Some(path) = stats_json {
                std::fs::write(&path, serde_json::to_string_pretty(&out.record)?)?;
            }
            if let Some(path) = graph_out {
                export_graph(&out.graph, &out.pta, &path)?;
            }
            if out.synthesis.complete {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_LIMIT))
            }
        }
        Command::Bench {
            models,
            heuristics,
            timeout,
            out,
            max_states,
            jobs,
        } => {
            let limits = ExplorationLimits {
                max_layers: None,
                max_states: max_states.map(|n| n as usize),
                wall_timeout: Some(Duration::from_secs(timeout)),
            };
            let records = run_matrix(&models, &heuristics, limits, jobs)?;
            std::fs::write(&out, write_csv(&records)?)?;
            eprintln!("wrote {} rows to {}", records.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let records = read_csv(&text)?;
            let table = summarize(&records)?;
            match out {
                SummaryFormat::Csv => print!("{}", table.to_csv()),
                SummaryFormat::Markdown => print!("{}", table.to_markdown()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            seed,
            out,
            count,
            max_locations,
            max_clocks,
            max_params,
            max_const,
        } => {
            let sizes = GenParams {
                max_locations,
                max_clocks,
                max_params,
                max_const,
            };
            std::fs::create_dir_all(&out)?;
            for i in 0..count {
                let s = seed + i;
                let text = gen_random_pta(s, &sizes)?;
                std::fs::write(out.join(format!("gen{s}.json")), text)?;
            }
            eprintln!("wrote {count} model(s) to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
