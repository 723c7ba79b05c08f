use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use imgseek::{emit_report, read_features_csv, run_experiment, ExperimentConfig, HarnessError, ReportFormat, SchemeSelection};

/// Run the image-search schemes end to end and report client-side costs.
#[derive(Debug, Parser)]
#[command(name = "imgseek", version)]
struct Args {
    /// 1, 2, revised or all
    #[arg(long, default_value = "all")]
    scheme: String,
    #[arg(long, default_value_t = 100)]
    num_images: usize,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 2048)]
    key_bits: u64,
    /// Fixed-point scale S
    #[arg(long, default_value_t = 10_000)]
    scale: u64,
    /// Match radius on feature distance
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Scheme 2 decoy count [default: ceil(N/10)]
    #[arg(long)]
    pad_count: Option<usize>,
    #[arg(long, default_value_t = 4096)]
    image_bytes: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timed query repetitions; the median is reported
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// table, json or csv
    #[arg(long, default_value = "table")]
    format: String,
    /// CSV of feature vectors, one per row
    #[arg(long)]
    features: Option<PathBuf>,
    /// Derive the key pair from --seed for reproducible runs
    #[arg(long)]
    test_key: bool,
    /// Generated components are uniform in [-range, range]
    #[arg(long, default_value_t = 1.0)]
    value_range: f64,
    /// Largest per-component offset of the query from a stored vector
    #[arg(long, default_value_t = 0.01)]
    query_noise: f64,
}

fn run(args: Args) -> Result<String, HarnessError> {
    let format: ReportFormat = args.format.parse()?;
    let schemes: SchemeSelection = args.scheme.parse()?;
    let features = args.features.as_deref().map(read_features_csv).transpose()?;
    let cfg = ExperimentConfig {
        schemes,
        num_images: args.num_images,
        dim: args.dim,
        key_bits: args.key_bits,
        scale: args.scale,
        threshold: args.threshold,
        pad_count: args.pad_count,
        image_bytes: args.image_bytes,
        seed: args.seed,
        repeats: args.repeats,
        test_key: args.test_key,
        value_range: args.value_range,
        query_noise: args.query_noise,
        features,
    };
    let rows = run_experiment(&cfg)?;
    emit_report(&rows, format)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("imgseek: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
