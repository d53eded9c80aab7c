//! `pacvd`: primitive-API abstraction and context-enhanced vulnerability
//! detection pipeline.
//!
//! Exit codes: 0 on success, 1 on domain errors (unparseable input, missing
//! target, provider failures), 2 on usage errors.

mod commands;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "pacvd",
    version,
    about = "Primitive-API abstraction and context-enhanced vulnerability detection",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print and validate the primitive-API catalog
    Catalog(CatalogArgs),
    /// Abstract a target function's callees into an API usage report
    Abstract(AbstractArgs),
    /// Preview the prompt a strategy would send, without dispatching
    Prompt(PromptArgs),
    /// Run one detection dialogue and print the verdict
    Detect(DetectArgs),
    /// Evaluate a dataset across abstraction levels and prompt strategies
    Eval(EvalArgs),
}

#[derive(Args)]
pub(crate) struct CatalogArgs {
    /// Catalog document to load instead of the built-in one
    #[arg(long, value_name = "FILE")]
    pub(crate) catalog: Option<PathBuf>,
    /// Report unpaired release APIs as warnings
    #[arg(long)]
    pub(crate) lint: bool,
    /// Output format
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    pub(crate) format: String,
}

#[derive(Args)]
pub(crate) struct AnalysisArgs {
    /// C source files, preprocessor already expanded
    #[arg(value_name = "PATHS", required = true)]
    pub(crate) paths: Vec<PathBuf>,
    /// Function to analyze
    #[arg(long, value_name = "NAME")]
    pub(crate) target: String,
    /// Abstraction level
    #[arg(long, default_value = "A3", value_parser = ["A1", "A2", "A3", "A4"])]
    pub(crate) level: String,
    /// Call-graph depth limit (direct callees of the target are layer 1)
    #[arg(long, default_value_t = 3)]
    pub(crate) depth: usize,
    /// Catalog document to load instead of the built-in one
    #[arg(long, value_name = "FILE")]
    pub(crate) catalog: Option<PathBuf>,
    /// Cap on enumerated acyclic paths per function before the
    /// edge-coverage fallback kicks in
    #[arg(long, default_value_t = 4096)]
    pub(crate) path_cap: usize,
    /// Also emit fuzzy branch lines at levels above A1
    #[arg(long)]
    include_fuzzy_at_a2: bool,
}

#[derive(Args)]
pub(crate) struct AbstractArgs {
    #[command(flatten)]
    pub(crate) analysis: AnalysisArgs,
    /// Output format
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    pub(crate) format: String,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub(crate) out: Option<PathBuf>,
    /// Write CFG and call-graph debug text here
    #[arg(long, value_name = "FILE")]
    pub(crate) dump_graphs: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct PromptishArgs {
    #[command(flatten)]
    pub(crate) analysis: AnalysisArgs,
    /// Prompt strategy
    #[arg(
        long,
        default_value = "basic",
        value_parser = [
            "basic",
            "role-playing",
            "chain-of-thought",
            "in-context",
            "few-shot-random",
            "few-shot-contrastive",
        ]
    )]
    pub(crate) strategy: String,
    /// Exemplar store, line-delimited JSON
    #[arg(long, value_name = "FILE")]
    pub(crate) exemplars: Option<PathBuf>,
    /// Seed for exemplar sampling
    #[arg(long, default_value_t = 0)]
    pub(crate) seed: u64,
    /// Few-shot exemplar count (strategy default when omitted)
    #[arg(long, value_name = "N")]
    pub(crate) k: Option<usize>,
    /// Omit the API information sections entirely
    #[arg(long)]
    pub(crate) no_api: bool,
}

#[derive(Args)]
pub(crate) struct PromptArgs {
    #[command(flatten)]
    pub(crate) promptish: PromptishArgs,
    /// Output format
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    pub(crate) format: String,
}

#[derive(Args)]
pub(crate) struct DetectArgs {
    #[command(flatten)]
    pub(crate) promptish: PromptishArgs,
    /// Provider configuration file (TOML); falls back to $PACVD_CONFIG
    #[arg(long, value_name = "FILE")]
    pub(crate) provider_config: Option<PathBuf>,
    /// Inline mock provider, e.g. mock:yes-if-contains:<needle>,
    /// mock:always:<text>, mock:replay:<transcript.json>
    #[arg(long, value_name = "SPEC")]
    pub(crate) provider: Option<String>,
    /// Write the dialogue transcript here
    #[arg(long, value_name = "FILE")]
    pub(crate) out: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct EvalArgs {
    /// Dataset: line-delimited JSON samples
    #[arg(long, value_name = "FILE")]
    pub(crate) dataset: PathBuf,
    /// Comma-separated abstraction levels, or "all"
    #[arg(long, default_value = "A3")]
    pub(crate) levels: String,
    /// Comma-separated prompt strategies, or "all"
    #[arg(long, default_value = "basic")]
    pub(crate) strategies: String,
    /// Context selection: pacvd or a raw-code baseline
    #[arg(
        long,
        default_value = "pacvd",
        value_parser = ["pacvd", "all-callees", "api-guided", "similarity", "random", "hierarchy"]
    )]
    pub(crate) context: String,
    /// Call-graph depth limit for the abstraction context
    #[arg(long, default_value_t = 3)]
    pub(crate) depth: usize,
    /// Catalog document to load instead of the built-in one
    #[arg(long, value_name = "FILE")]
    pub(crate) catalog: Option<PathBuf>,
    /// Seed for samplers and exemplar selection
    #[arg(long, default_value_t = 0)]
    pub(crate) seed: u64,
    /// Few-shot exemplar count (strategy default when omitted)
    #[arg(long, value_name = "N")]
    pub(crate) k: Option<usize>,
    /// Provider configuration file (TOML); falls back to $PACVD_CONFIG
    #[arg(long, value_name = "FILE")]
    pub(crate) provider_config: Option<PathBuf>,
    /// Inline mock provider, e.g. mock:yes-if-contains:<needle>
    #[arg(long, value_name = "SPEC")]
    pub(crate) provider: Option<String>,
    /// Run directory for run.json and per-sample verdicts
    #[arg(long, value_name = "DIR")]
    pub(crate) out: PathBuf,
    /// Reuse cached verdicts from a previous run in the same directory
    #[arg(long)]
    pub(crate) resume: bool,
    /// Concurrent samples in flight
    #[arg(long, default_value_t = 1)]
    pub(crate) workers: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Catalog(args) => commands::catalog(args),
        Command::Abstract(args) => commands::abstract_cmd(args),
        Command::Prompt(args) => commands::prompt(args),
        Command::Detect(args) => commands::detect(args),
        Command::Eval(args) => commands::eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

