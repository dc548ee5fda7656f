mod commands;
mod io;
mod selfcheck;
mod server;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use qalign_core::DEFAULT_TAU;

use crate::io::ReportFormat;

#[derive(Debug, Parser)]
#[command(name = "align", about = "Align predicate-argument propositions across related sentences")]
struct Cli {
    /// Seed for every random choice (selfcheck instance generation).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Layout of JSON reports.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Pretty)]
    report_format: ReportFormat,

    /// Worker threads for per-pair work (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lemma baseline: align QAs whose predicates and answer heads share lemmas.
    Lemma {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-token dependency heads (JSONL: pair_id, a, b).
        #[arg(long)]
        heads: Option<PathBuf>,
    },
    /// Score every cross-side QA pair and decode a maximum-weight matching.
    Decode(DecodeArgs),
    /// Write every cross-side candidate in scorer encoding, labelled when gold is given.
    ExportCandidates {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        heads: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact-match precision, recall and F1 against gold alignments.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Report path (standard output when absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Derive alignments from event and entity coreference.
    InduceEcb {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        coref: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Gold alignments to compare the induced ones against.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Coverage report path, used with --gold (standard output when absent).
        #[arg(long, requires = "gold")]
        report: Option<PathBuf>,
        /// Skip pairs whose documents no annotation covers instead of failing.
        #[arg(long)]
        skip_uncovered: bool,
    },
    /// Assemble sentence pairs from raw corpus records.
    BuildDataset(BuildArgs),
    /// Mark aligned spans in fusion inputs with indexed markup.
    AugmentFusion {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Emit the plain separator-joined input instead.
        #[arg(long)]
        no_markup: bool,
    },
    /// Consolidation rate of fusion outputs, per system.
    AnalyzeConsolidation {
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long)]
        instances: PathBuf,
        /// Report path (standard output when absent).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Per-output classification details (JSONL).
        #[arg(long)]
        details: Option<PathBuf>,
    },
    /// Run the bundled fixture suite; one PASS/FAIL line per criterion.
    Selfcheck,
    /// Answer scorer-protocol requests on standard input, or on TCP with --listen.
    #[command(hide = true)]
    ScoreServer(server::ServerArgs),
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// lemma | constant:X | external:ADDR | gold:PATH
    #[arg(long)]
    scorer: String,
    /// Edges scoring below tau are discarded; tau itself survives.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long)]
    out: PathBuf,
    /// Per-token dependency heads for the lemma scorer.
    #[arg(long)]
    heads: Option<PathBuf>,
    /// Candidates per scorer request.
    #[arg(long, default_value_t = qalign_core::scorer::DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    /// Seconds to wait on an external scorer.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Overrides the address of an external scorer.
    #[arg(long, env = "ALIGN_SCORER_ADDR", hide_env_values = true)]
    scorer_addr: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Ecb,
    Duc,
    Mn,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    source: Source,
    /// Raw sentence records (JSONL), in document order.
    #[arg(long)]
    sentences: PathBuf,
    /// Coreference annotations (ecb).
    #[arg(long)]
    coref: Option<PathBuf>,
    /// Topic ids to build, comma separated (ecb; default all).
    #[arg(long, value_delimiter = ',')]
    topics: Vec<String>,
    /// SCU clusters (duc).
    #[arg(long)]
    scu_clusters: Option<PathBuf>,
    /// Document-to-summary span alignments (mn).
    #[arg(long)]
    span_alignments: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn version() -> String {
    let schemas: Vec<String> = qalign_core::SCHEMA_VERSIONS
        .iter()
        .map(|(name, v)| format!("{name} v{v}"))
        .collect();
    format!("{} (schemas: {})", env!("CARGO_PKG_VERSION"), schemas.join(", "))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let version: &'static str = Box::leak(version().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
