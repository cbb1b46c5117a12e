use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use botdna_cli::config::PipelineConfig;
use botdna_cli::error::{CliError, Result};
use botdna_cli::formats;
use botdna_cli::pipeline::{self, RunReport};
use botdna_cli::synth::generate_synthetic;

#[derive(Parser)]
#[command(
    name = "botdna",
    version,
    about = "Behavioural digital-DNA encoding, family clustering, alignment, and mutation analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// JSON pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory (read and written by the stages).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; overrides the config value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Number of families; overrides the config value.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the raw trace into the corpus artifact.
    Ingest(StageArgs),
    /// Encode the corpus into behavioural sequences.
    Encode(StageArgs),
    /// Build block-frequency vectors and the cosine similarity matrix.
    Similarity(StageArgs),
    /// Cluster accounts into families and export the dendrogram.
    Cluster(ClusterArgs),
    /// Compute per-family profiles and life-cycle segment trends.
    Profile(StageArgs),
    /// Align each family's sequences at block granularity.
    Align(StageArgs),
    /// Classify aligned-pair mutations and compute their statistics.
    Mutations(StageArgs),
    /// Run the mutation-sharing and transferability analyses.
    Evolve(StageArgs),
    /// Run the configured trigger-event studies.
    Events(StageArgs),
    /// Generate a synthetic population from the config's synthetic spec.
    Synth(StageArgs),
    /// Run every stage end to end with a manifest.
    Pipeline(StageArgs),
}

fn load_config(args: &StageArgs) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::InvalidConfig("threads must be >= 1".into()));
        }
        config.threads = threads;
    }
    Ok(config)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pipeline(args) => {
            let config = load_config(&args)?;
            pipeline::run_pipeline(&config, &args.out)?;
            println!("pipeline complete: artifacts in {}", args.out.display());
        }
        Command::Synth(args) => {
            let config = load_config(&args)?;
            let spec = config
                .synthetic
                .ok_or_else(|| CliError::InvalidConfig("config has no synthetic spec".into()))?;
            let population = generate_synthetic(&spec)?;
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
            formats::write_string(&args.out.join("trace.jsonl"), &population.trace_jsonl())?;
            formats::write_json(&args.out.join("ground_truth.json"), &population.truth)?;
            println!(
                "synthetic population: {} accounts, {} rows",
                population.truth.labels.len(),
                population.records.len()
            );
        }
        Command::Ingest(args) => {
            let config = load_config(&args)?;
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
            let corpus = pipeline::stage_ingest(&config, &args.out)?;
            println!(
                "ingested {} accounts / {} records",
                corpus.n_accounts(),
                corpus.n_records()
            );
        }
        Command::Encode(args) => {
            let config = load_config(&args)?;
            let _ = config;
            let corpus = pipeline::load_corpus(&args.out)?;
            let sequences = pipeline::stage_encode(&corpus, &args.out)?;
            println!("encoded {} sequences", sequences.len());
        }
        Command::Similarity(args) => {
            let config = load_config(&args)?;
            let sequences = pipeline::load_sequences(&args.out)?;
            let (_, matrix) = pipeline::stage_similarity(&sequences, config.threads, &args.out)?;
            println!("similarity matrix: {} accounts", matrix.len());
        }
        Command::Cluster(args) => {
            let mut config = load_config(&args.stage)?;
            if let Some(k) = args.k {
                if k == 0 {
                    return Err(CliError::InvalidConfig("k must be >= 1".into()));
                }
                config.k = k;
            }
            let sequences = pipeline::load_sequences(&args.stage.out)?;
            let matrix = formats::load_similarity(&args.stage.out.join(pipeline::SIMILARITY_BIN))?;
            let vectors = sequences
                .iter()
                .map(botdna_core::similarity::vectorize)
                .collect::<botdna_core::Result<Vec<_>>>()?;
            let assignment = pipeline::stage_cluster(&matrix, &vectors, &config, &args.stage.out)?;
            println!("cut {} families over {} accounts", assignment.k, matrix.len());
        }
        Command::Profile(args) => {
            let config = load_config(&args)?;
            let sequences = pipeline::load_sequences(&args.out)?;
            let ids: Vec<String> = sequences.iter().map(|s| s.account_id.clone()).collect();
            let assignment = pipeline::load_assignment(&args.out, &ids)?;
            let mut report = RunReport::default();
            pipeline::stage_profile(&sequences, &assignment, &config, &args.out, &mut report)?;
            println!("profiled {} families", assignment.members().len());
        }
        Command::Align(args) => {
            let config = load_config(&args)?;
            let sequences = pipeline::load_sequences(&args.out)?;
            let ids: Vec<String> = sequences.iter().map(|s| s.account_id.clone()).collect();
            let assignment = pipeline::load_assignment(&args.out, &ids)?;
            let mut report = RunReport::default();
            let aligned =
                pipeline::stage_align(&sequences, &assignment, &config, &args.out, &mut report)?;
            println!("aligned {} families", aligned.len());
        }
        Command::Mutations(args) => {
            let config = load_config(&args)?;
            let _ = config;
            let aligned = pipeline::load_aligned(&args.out)?;
            let mut report = RunReport::default();
            let scans = pipeline::stage_mutations(&aligned, &args.out, &mut report)?;
            let events: usize = scans.iter().map(|s| s.events.len()).sum();
            println!("classified {} mutation events", events);
        }
        Command::Evolve(args) => {
            let config = load_config(&args)?;
            let sequences = pipeline::load_sequences(&args.out)?;
            let ids: Vec<String> = sequences.iter().map(|s| s.account_id.clone()).collect();
            let assignment = pipeline::load_assignment(&args.out, &ids)?;
            let matrix = formats::load_similarity(&args.out.join(pipeline::SIMILARITY_BIN))?;
            let mut report = RunReport::default();
            pipeline::stage_evolve(&sequences, &assignment, &matrix, &config, &args.out, &mut report)?;
            println!("evolution analyses written");
        }
        Command::Events(args) => {
            let config = load_config(&args)?;
            if config.events.is_empty() {
                return Err(CliError::InvalidConfig("config has no events".into()));
            }
            let corpus = pipeline::load_corpus(&args.out)?;
            let sequences = pipeline::load_sequences(&args.out)?;
            let ids: Vec<String> = sequences.iter().map(|s| s.account_id.clone()).collect();
            let assignment = pipeline::load_assignment(&args.out, &ids)?;
            let matrix = formats::load_similarity(&args.out.join(pipeline::SIMILARITY_BIN))?;
            let files = pipeline::stage_events(&corpus, &matrix, &assignment, &config, &args.out)?;
            println!("event studies written: {}", files.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Argument errors (including unknown flags) exit 1 with usage text.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render();
            if err.use_stderr() {
                eprint!("{}", rendered);
                return ExitCode::from(1);
            }
            // --help / --version print to stdout and succeed.
            print!("{}", rendered);
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
