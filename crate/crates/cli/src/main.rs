mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use obsinfo::{FusionKind, MetricId, MuMode, SynthConfig};

/// Observational information toolkit for retrieval evaluation and rank fusion.
#[derive(Debug, Parser)]
#[command(name = "obsinfo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score runs against qrels and write per-topic and mean scores as CSV.
    Evaluate(EvaluateArgs),
    /// Fuse run files into one TREC run.
    Fuse(FuseArgs),
    /// Compute Metric Unanimity for a metric set over runs and qrels.
    Mu(MuArgs),
    /// Check metrics against the five formal constraints.
    Constraints(ConstraintsArgs),
    /// Run a synthetic or file-based experiment and write its trials as CSV.
    Experiment(ExperimentArgs),
    /// Write a synthetic collection as qrels and run files.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// TREC run files; the run id is the file's tag, or its stem when untagged.
    #[arg(long = "runs", num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    /// TREC qrels file.
    #[arg(long)]
    qrels: PathBuf,
    /// Nominal collection size |D| (default: documents seen in runs and qrels, per topic).
    #[arg(long)]
    collection_size: Option<u64>,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Metric spec `NAME[:key=value]*`, e.g. `OIE:beta=1.2:cutoff=100`, `DCG:cutoff=20`, `RBP:p=0.8`.
    /// Repeatable; defaults to the 15-metric reference set.
    #[arg(long = "metric")]
    metrics: Vec<MetricId>,
}

impl MetricArgs {
    fn resolve(&self) -> Vec<MetricId> {
        if self.metrics.is_empty() {
            MetricId::reference_set()
        } else {
            self.metrics.clone()
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[arg(long, value_parser = parse_kind)]
    method: FusionKind,
    #[arg(long, default_value_t = obsinfo::fusion::DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Nominal collection size |D| (default: documents seen in the runs, per topic).
    #[arg(long)]
    collection_size: Option<u64>,
    /// Run tag of the output (default: the method name).
    #[arg(long)]
    tag: Option<String>,
    /// Run files to fuse.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_kind(s: &str) -> Result<FusionKind, String> {
    s.parse().map_err(|e: obsinfo::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MuModeArg {
    PerTopic,
    Mean,
}

impl From<MuModeArg> for MuMode {
    fn from(m: MuModeArg) -> Self {
        match m {
            MuModeArg::PerTopic => MuMode::PerTopic,
            MuModeArg::Mean => MuMode::Mean,
        }
    }
}

#[derive(Debug, Args)]
struct MuArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[arg(long, value_enum, default_value = "per-topic")]
    mu_mode: MuModeArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ConstraintsArgs {
    #[command(flatten)]
    metrics: MetricArgs,
    /// Write one row per generated case instead of the verdict matrix.
    #[arg(long)]
    cases: bool,
    /// Swap depths for the priority and deepness suites.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    /// n of the deepness threshold case.
    #[arg(long)]
    deepth_n: Option<usize>,
    /// n values of the closeness threshold cases.
    #[arg(long, value_delimiter = ',')]
    closeth_n: Option<Vec<usize>>,
    /// Tail lengths of the confidence cases.
    #[arg(long, value_delimiter = ',')]
    conf_tails: Option<Vec<usize>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentName {
    /// y = agreement with the gold of the OIQ of five runs, x = of one run.
    Cumulative,
    /// y = OIE of the OIQ ranking, x = OIE of one run, on a fine-grained subset.
    Mergeability,
    /// Mean OIE of every system and of Borda and Borda-log fusion.
    Fusion,
}

#[derive(Debug, Args)]
struct SynthConfigArgs {
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SynthConfig::default().topics)]
    topics: usize,
    #[arg(long, default_value_t = SynthConfig::default().runs_per_topic)]
    runs_per_topic: usize,
    #[arg(long, default_value_t = SynthConfig::default().docs_per_run)]
    docs_per_run: usize,
    /// Collection size of synthetic topics.
    #[arg(long, default_value_t = SynthConfig::default().collection_size)]
    synth_collection_size: u64,
    #[arg(long, default_value_t = SynthConfig::default().relevant_per_topic)]
    relevant_per_topic: usize,
    #[arg(long, default_value_t = SynthConfig::default().system_quality)]
    quality: f64,
    #[arg(long, default_value_t = SynthConfig::default().quality_spread)]
    quality_spread: f64,
    #[arg(long, default_value_t = SynthConfig::default().correlation)]
    correlation: f64,
}

impl From<&SynthConfigArgs> for SynthConfig {
    fn from(a: &SynthConfigArgs) -> Self {
        SynthConfig {
            seed: a.seed,
            topics: a.topics,
            runs_per_topic: a.runs_per_topic,
            docs_per_run: a.docs_per_run,
            collection_size: a.synth_collection_size,
            relevant_per_topic: a.relevant_per_topic,
            system_quality: a.quality,
            quality_spread: a.quality_spread,
            correlation: a.correlation,
        }
    }
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    #[command(flatten)]
    synth: SynthConfigArgs,
    /// Use these run files instead of synthetic data (requires --qrels).
    #[arg(long = "runs", num_args = 1.., requires = "qrels")]
    runs: Vec<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Nominal collection size |D| for file-based data.
    #[arg(long)]
    collection_size: Option<u64>,
    /// Number of trials (default: 200 for cumulative, 2000 for mergeability).
    #[arg(long)]
    trials: Option<u64>,
    /// Runs drawn per cumulative-evidence trial.
    #[arg(long, default_value_t = 5)]
    signals: usize,
    #[arg(long, default_value_t = 1.2)]
    beta: f64,
    /// Truncation depth of systems and fused runs in the fusion experiment.
    #[arg(long, default_value_t = 100)]
    cutoff: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    synth: SynthConfigArgs,
    /// Directory receiving qrels.txt and runs/<run>.run.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OBSINFO_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
