//! Single-binary orchestration of the triage toolkit.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use signaal_core::Error;

#[derive(Parser)]
#[command(
    name = "signaal",
    version,
    about = "Case-file triage: ingest, explore, train, evaluate, serve"
)]
struct Cli {
    /// Worker-thread cap for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus in the standard file layout.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 13_170)]
        children: usize,
        #[arg(long, default_value_t = 0.05)]
        positive_rate: f64,
        #[arg(long, default_value_t = 0.30)]
        registration_rate: f64,
        #[arg(long, default_value_t = 0.5)]
        signal_strength: f64,
        #[arg(long, default_value_t = 1.3)]
        length_boost: f64,
        #[arg(long, default_value_t = 14.8)]
        consults_mean: f64,
        #[arg(long, default_value_t = 600)]
        vocab_size: usize,
        #[arg(long, default_value_t = 0.5)]
        structured_strength: f64,
    },
    /// Validate a corpus directory and report ingest statistics.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        /// Also rank abbreviation candidates (top N).
        #[arg(long)]
        abbreviations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics (consult counts, lexical diversity).
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1000)]
        sample_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-means clusters with per-cluster top terms, plus an elbow curve.
    Cluster {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Elbow scan "min..max" (inclusive).
        #[arg(long)]
        k_range: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 15)]
        top_terms: usize,
        #[arg(long, default_value_t = 2000)]
        vocab: usize,
        /// Cosine-normalized distance instead of plain Euclidean.
        #[arg(long)]
        cosine: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mann-Whitney screen of a summarizing feature per age interval.
    Screen {
        #[arg(long)]
        data: PathBuf,
        /// avg_soc_length | consult_count
        #[arg(long)]
        feature: String,
        /// 0-1 | 1-2 | 2-3 | 3-4 | all
        #[arg(long, default_value = "all")]
        interval: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model from a pipeline config and write the artifact.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeated-split cross validation of a pipeline config.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Ground-truth label file for synthetic corpora.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search over the [grid] axes of the config file.
    Grid {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the prediction/feedback API on a trained pipeline.
    /// Defaults come from the config's [service] table; environment
    /// variables override the file, flags override both.
    Serve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "SIGNAAL_JOURNAL_DIR")]
        journal: Option<PathBuf>,
        #[arg(long, env = "SIGNAAL_BIND")]
        bind: Option<String>,
        #[arg(long, env = "SIGNAAL_THRESHOLD")]
        threshold: Option<f64>,
        /// Seconds between retraining cycles (0 = manual only).
        #[arg(long, env = "SIGNAAL_RETRAIN_INTERVAL")]
        retrain_interval: Option<u64>,
        #[arg(long, env = "SIGNAAL_BEARER_TOKEN")]
        bearer_token: Option<String>,
        /// Acknowledge a fronting TLS terminator for non-loopback binds.
        #[arg(long)]
        allow_remote_plaintext: bool,
    },
    /// Score one payload JSON file against a model artifact.
    PredictFile {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Training(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .with_target(false)
        .init();

    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("warning: could not cap worker threads: {e}");
        }
    }

    let result = match cli.command {
        Command::Synth {
            out,
            seed,
            children,
            positive_rate,
            registration_rate,
            signal_strength,
            length_boost,
            consults_mean,
            vocab_size,
            structured_strength,
        } => commands::synth(commands::SynthArgs {
            out,
            seed,
            children,
            positive_rate,
            registration_rate,
            signal_strength,
            length_boost,
            consults_mean,
            vocab_size,
            structured_strength,
        }),
        Command::Ingest {
            data,
            abbreviations,
            out,
        } => commands::ingest(&data, abbreviations, out.as_deref()),
        Command::Stats {
            data,
            sample_size,
            seed,
            out,
        } => commands::stats(&data, sample_size, seed, out.as_deref()),
        Command::Cluster {
            data,
            k,
            k_range,
            seed,
            restarts,
            top_terms,
            vocab,
            cosine,
            out,
        } => commands::cluster(commands::ClusterArgs {
            data,
            k,
            k_range,
            seed,
            restarts,
            top_terms,
            vocab,
            cosine,
            out,
        }),
        Command::Screen {
            data,
            feature,
            interval,
            out,
        } => commands::screen(&data, &feature, &interval, out.as_deref()),
        Command::Train {
            data,
            config,
            out,
            seed,
        } => commands::train(&data, &config, &out, seed),
        Command::Eval {
            data,
            config,
            folds,
            truth,
            seed,
            out,
        } => commands::eval(&data, &config, folds, truth.as_deref(), seed, out.as_deref()),
        Command::Grid {
            data,
            config,
            folds,
            truth,
            seed,
            out,
        } => commands::grid(&data, &config, folds, truth.as_deref(), seed, out.as_deref()),
        Command::Serve {
            data,
            config,
            journal,
            bind,
            threshold,
            retrain_interval,
            bearer_token,
            allow_remote_plaintext,
        } => commands::serve(commands::ServeArgs {
            data,
            config,
            journal,
            bind,
            threshold,
            retrain_interval,
            bearer_token,
            allow_remote_plaintext,
        }),
        Command::PredictFile {
            model,
            input,
            threshold,
        } => commands::predict_file(&model, &input, threshold),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
