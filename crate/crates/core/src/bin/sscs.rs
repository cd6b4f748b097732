use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sscs::dims::{sscs_dim_with, DimsError, LayerAnalysis, ZeroabilityMode};
use sscs::dot::to_dot;
use sscs::graph::{layering, parse_graph, validate, StructuredGraph};
use sscs::oracle::Budget;
use sscs::report::{analyze, AnalyzeError, AnalyzeOptions};

#[derive(Parser)]
#[command(name = "sscs", version, about = "Controllable subspace dimensions of layered networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the JSON analysis report.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Cross-check every answer against the rank oracle; exit 3 on failure.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points tried per vanishing pattern.
        #[arg(long)]
        budget: Option<usize>,
        /// Include the symbolic matrix, one line per nonzero cell.
        #[arg(long)]
        dump_symcm: bool,
        /// Compact JSON (the default).
        #[arg(long, conflicts_with = "pretty")]
        json: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Print a layered Graphviz drawing.
    ExportDot {
        path: PathBuf,
        /// Dash the edges removed when pruning at the first zeroable layer.
        #[arg(long)]
        subgraph: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Paper,
    Exact,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<ZeroabilityMode> {
        match self {
            ModeArg::Paper => vec![ZeroabilityMode::PaperLiteral],
            ModeArg::Exact => vec![ZeroabilityMode::ExactAlgebraic],
            ModeArg::Both => vec![ZeroabilityMode::PaperLiteral, ZeroabilityMode::ExactAlgebraic],
        }
    }
}

fn load(path: &PathBuf) -> Result<StructuredGraph, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })?;
    parse_graph(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

/// Writes to stdout; false when the reader went away.
fn emit(text: &str) -> bool {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_ok()
}

fn fail(e: &AnalyzeError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        _ if e.is_input_error() => ExitCode::from(2),
        AnalyzeError::Dims(DimsError::Undecided { .. }) => ExitCode::from(1),
        _ => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Analyze {
            path,
            mode,
            verify,
            seed,
            budget,
            dump_symcm,
            json: _,
            pretty,
        } => {
            let g = match load(&path) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let mut b = Budget::default();
            if let Some(points) = budget {
                b.grid_points = points;
            }
            let opts = AnalyzeOptions {
                modes: mode.modes(),
                seed,
                budget: b,
                verify,
                dump_symcm,
            };
            let report = match analyze(&g, &opts) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let text = if pretty {
                serde_json::to_string_pretty(&report)
            } else {
                serde_json::to_string(&report)
            }
            .expect("report serializes");
            if !emit(&format!("{text}\n")) {
                return ExitCode::SUCCESS;
            }
            let failed = report.failed_checks();
            if !failed.is_empty() {
                for c in failed {
                    eprintln!("check {} failed: {}", c.name, c.detail);
                }
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Command::ExportDot { path, subgraph, mode } => {
            let g = match load(&path) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let layers = layering(&g).ok();
            let mut dashed = BTreeSet::new();
            if subgraph {
                let mode = match mode {
                    ModeArg::Paper => ZeroabilityMode::PaperLiteral,
                    ModeArg::Exact => ZeroabilityMode::ExactAlgebraic,
                    ModeArg::Both => {
                        eprintln!("error: --subgraph needs --mode paper or --mode exact");
                        return ExitCode::from(2);
                    }
                };
                let pruned = LayerAnalysis::new(&g).and_then(|la| sscs_dim_with(&g, &la, mode));
                match pruned {
                    Ok(r) => dashed.extend(r.removed_edges),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else if !validate(&g).is_input_connected() {
                eprintln!("error: graph is not input-connected");
                return ExitCode::from(2);
            }
            emit(&to_dot(&g, layers.as_ref(), &dashed));
            ExitCode::SUCCESS
        }
    }
}
