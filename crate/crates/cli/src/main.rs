//! Command-line interface: sampling, score training, mean/log-map/distance
//! estimation, clustering, regression and the desk-scale benchmark table.

mod commands;
mod points;

use clap::{Parser, Subcommand};
use scoremeans::Error;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "scoremeans",
    about = "Means, log maps and distances on Riemannian manifolds from Brownian-motion scores",
    version
)]
struct Cli {
    /// Thread count for parallel sections (results are identical for any
    /// value; 1 is the canonical reference).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate Brownian paths and write a JSON-lines training corpus.
    Sample(commands::SampleArgs),
    /// Train a score (or potential) network by denoising score matching.
    TrainScore(commands::TrainScoreArgs),
    /// Jointly estimate the diffusion mean and diffusion variance.
    DiffusionMean(commands::DiffusionMeanArgs),
    /// Estimate the Fréchet mean through the score-based log map.
    FrechetMean(commands::FrechetMeanArgs),
    /// Score-based logarithmic map between two points.
    Logmap(commands::LogmapArgs),
    /// Varadhan distance between two points.
    Dist(commands::DistArgs),
    /// Riemannian k-means clustering.
    Kmeans(commands::KmeansArgs),
    /// Maximum likelihood Riemannian regression.
    Regress(commands::RegressArgs),
    /// Reproduce the mean-estimation benchmark table at desk scale.
    Benchmark(commands::BenchmarkArgs),
}

/// Replace `--config FILE` with the arguments stored in the JSON file:
/// `{"command": "sample", "manifold": "s2", ...}`. Explicit command-line
/// flags are appended afterwards and win on conflict where clap allows
/// overrides.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Error> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| Error::InvalidInput("--config needs a file path".into()))?;
    let text = std::fs::read_to_string(PathBuf::from(path))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config {path}: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidInput(format!("config {path}: expected a JSON object")))?;
    let command = obj
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            Error::InvalidInput(format!("config {path}: missing string field `command`"))
        })?;
    let mut out = vec![args[0].clone(), command.to_string()];
    for (key, val) in obj {
        if key == "command" {
            continue;
        }
        match val {
            serde_json::Value::Bool(true) => out.push(format!("--{key}")),
            serde_json::Value::Bool(false) => {}
            serde_json::Value::String(s) => {
                out.push(format!("--{key}"));
                out.push(s.clone());
            }
            other => {
                out.push(format!("--{key}"));
                out.push(other.to_string());
            }
        }
    }
    // Keep any extra explicit flags (besides the consumed pair).
    for (i, a) in args.iter().enumerate().skip(1) {
        if i == pos || i == pos + 1 {
            continue;
        }
        out.push(a.clone());
    }
    Ok(out)
}

fn run() -> Result<(), Error> {
    let args = expand_config(std::env::args().collect())?;
    let cli = Cli::try_parse_from(args).map_err(|e| {
        // Help/version are not errors.
        if e.use_stderr() {
            Error::InvalidInput(e.to_string())
        } else {
            print!("{e}");
            std::process::exit(0);
        }
    })?;
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::TrainScore(a) => commands::train_score(a),
        Command::DiffusionMean(a) => commands::diffusion_mean(a),
        Command::FrechetMean(a) => commands::frechet_mean(a),
        Command::Logmap(a) => commands::logmap(a),
        Command::Dist(a) => commands::dist(a),
        Command::Kmeans(a) => commands::kmeans(a),
        Command::Regress(a) => commands::regress(a),
        Command::Benchmark(a) => commands::benchmark(a),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_validation() { 1 } else { 2 };
            std::process::exit(code);
        }
    }
}
