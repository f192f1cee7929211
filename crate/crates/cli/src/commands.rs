//! Command implementations. Every command echoes its resolved
//! configuration and seed into the output for reproducibility.

use crate::points::{parse_point, point_json};
use clap::Args;
use nalgebra::DVector;
use scoremeans::estimators::{self, Method, OptimizerConfig};
use scoremeans::io;
use scoremeans::kmeans::{riemannian_kmeans, KMeansConfig};
use scoremeans::manifold::{self, ManifoldId, Point};
use scoremeans::net::{self, DsmMode, NetKind, NetProvider, TrainConfig};
use scoremeans::oracle::{oracle_provider, ScoreProvider, SeriesTruncation};
use scoremeans::regression::{self, RegressionConfig, SigmaMode, SigmaParams};
use scoremeans::sampler::{self, SampleAlgorithm, SamplingConfig};
use scoremeans::{Error, Result};
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

fn parse_manifold(s: &str) -> Result<ManifoldId> {
    s.parse()
}

fn make_provider(
    spec: &str,
    manifold: ManifoldId,
) -> Result<Box<dyn ScoreProvider<f64>>> {
    if spec == "oracle" {
        return oracle_provider(manifold, SeriesTruncation::default());
    }
    let ckpt = io::read_checkpoint(&PathBuf::from(spec))?;
    if ckpt.manifold != manifold {
        return Err(Error::InvalidInput(format!(
            "checkpoint {spec} is for {}, expected {manifold}",
            ckpt.manifold
        )));
    }
    Ok(Box::new(NetProvider::<f64>::from_checkpoint(&ckpt)?))
}

fn parse_algorithm(s: &str) -> Result<SampleAlgorithm> {
    match s {
        "coords" => Ok(SampleAlgorithm::LocalCoords),
        "tangent" => Ok(SampleAlgorithm::TangentSpace),
        other => Err(Error::InvalidInput(format!(
            "unknown sampling algorithm `{other}` (expected coords or tangent)"
        ))),
    }
}

fn parse_method(s: &str) -> Result<Method> {
    match s {
        "plain" => Ok(Method::Plain),
        "adam" => Ok(Method::Adam),
        other => Err(Error::InvalidInput(format!(
            "unknown method `{other}` (expected plain or adam)"
        ))),
    }
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn config_echo<A: Serialize>(command: &str, args: &A) -> serde_json::Value {
    json!({ "command": command, "config": serde_json::to_value(args).unwrap() })
}

fn trace_json(est: &estimators::MeanEstimate<f64>) -> serde_json::Value {
    json!(est
        .trace
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            obj.insert("iter".into(), json!(row.iter));
            obj.insert(
                "mu".into(),
                json!(row.mu.iter().copied().collect::<Vec<f64>>()),
            );
            if let Some(t) = row.t {
                obj.insert("t".into(), json!(t));
            }
            obj.insert("grad_mu".into(), json!(row.grad_mu_norm));
            if let Some(g) = row.grad_t_abs {
                obj.insert("grad_t".into(), json!(g));
            }
            serde_json::Value::Object(obj)
        })
        .collect::<Vec<_>>())
}

// ---------------------------------------------------------------- sample

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Manifold identifier (r<n>, s<n>, sym<n>, spd<n>, lm<k>x<a>).
    #[arg(long)]
    manifold: String,
    /// Starting points per batch.
    #[arg(long, default_value_t = 1024)]
    paths: usize,
    /// Paths per starting point.
    #[arg(long, default_value_t = 1)]
    samples_per_x0: usize,
    /// Batches; endpoints of one batch start the next.
    #[arg(long, default_value_t = 1)]
    batches: usize,
    /// Path horizon.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Steps per path.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Sampling scheme: coords (Euler–Maruyama in the chart) or tangent
    /// (geodesic random walk).
    #[arg(long, default_value = "coords")]
    algorithm: String,
    /// Starting point (named or JSON); the canonical basepoint if absent.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 2712)]
    seed: u64,
    /// JSON-lines dataset output.
    #[arg(long)]
    out: PathBuf,
    /// Also write path endpoints as an observation CSV.
    #[arg(long)]
    endpoints: Option<PathBuf>,
}

pub fn sample(args: SampleArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let cfg = SamplingConfig {
        x0: args.x0.as_deref().map(|s| parse_point(s, id)).transpose()?,
        n_x0: args.paths,
        samples_per_x0: args.samples_per_x0,
        n_batches: args.batches,
        t_horizon: args.t,
        n_steps: args.steps,
        algorithm: parse_algorithm(&args.algorithm)?,
        seed: args.seed,
    };
    let dataset = sampler::build_dataset(m.as_ref(), &cfg)?;
    io::write_dataset(&args.out, &dataset)?;
    if let Some(endpoints) = &args.endpoints {
        let ends: Vec<Point<f64>> = dataset
            .records
            .chunks(args.steps)
            .map(|path| path.last().unwrap().y.clone())
            .collect();
        io::write_points_csv(endpoints, &ends)?;
    }
    println!(
        "sampled {} records on {} (seed {}) -> {}",
        dataset.records.len(),
        id,
        args.seed,
        args.out.display()
    );
    Ok(())
}

// ----------------------------------------------------------- train-score

#[derive(Debug, Args, Serialize)]
pub struct TrainScoreArgs {
    /// JSON-lines dataset from `sample`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    manifold: String,
    /// Hidden layers: `512x5` or a comma list like `128,128,128`;
    /// per-family default if absent.
    #[arg(long)]
    arch: Option<String>,
    #[arg(long, default_value_t = 5000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 1000)]
    warmup: usize,
    #[arg(long, default_value_t = 256)]
    batch: usize,
    /// Denoising target: isotropic or metric-weighted.
    #[arg(long, default_value = "isotropic")]
    mode: String,
    /// Model kind: score (vector output) or potential (scalar output whose
    /// gradient is the score).
    #[arg(long, default_value = "score")]
    kind: String,
    /// Override the per-family embedded-representation default.
    #[arg(long)]
    embedded: Option<bool>,
    #[arg(long, default_value_t = 2712)]
    seed: u64,
    /// Checkpoint output (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Optional loss-curve output (JSON array).
    #[arg(long)]
    loss_out: Option<PathBuf>,
}

fn parse_arch(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("bad architecture `{s}`"));
    if let Some((w, d)) = s.split_once('x') {
        let width: usize = w.parse().map_err(|_| bad())?;
        let depth: usize = d.parse().map_err(|_| bad())?;
        if width == 0 || depth == 0 {
            return Err(bad());
        }
        return Ok(vec![width; depth]);
    }
    let dims: std::result::Result<Vec<usize>, _> =
        s.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let dims = dims.map_err(|_| bad())?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(bad());
    }
    Ok(dims)
}

pub fn train_score(args: TrainScoreArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let dataset = io::read_dataset::<f64>(&args.data, id, args.seed)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        lr: args.lr,
        warmup_epochs: args.warmup,
        batch_size: args.batch,
        dsm_mode: match args.mode.as_str() {
            "isotropic" => DsmMode::Isotropic,
            "metric-weighted" | "metric_weighted" => DsmMode::MetricWeighted,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown dsm mode `{other}`"
                )))
            }
        },
        kind: match args.kind.as_str() {
            "score" => NetKind::Score,
            "potential" => NetKind::Potential,
            other => return Err(Error::InvalidInput(format!("unknown net kind `{other}`"))),
        },
        hidden: args.arch.as_deref().map(parse_arch).transpose()?,
        embedded: args.embedded,
        seed: args.seed,
    };
    let outcome = net::train(m.as_ref(), &dataset, &cfg)?;
    io::write_checkpoint(&args.out, &outcome.checkpoint)?;
    if let Some(loss_out) = &args.loss_out {
        write_json(loss_out, &json!(outcome.loss_curve))?;
    }
    println!(
        "trained {:?} on {} for {} epochs (seed {}), final loss {} -> {}",
        outcome.checkpoint.layer_dims,
        id,
        outcome.checkpoint.epochs,
        args.seed,
        outcome.checkpoint.final_loss,
        args.out.display()
    );
    Ok(())
}

// -------------------------------------------------- mean estimation

#[derive(Debug, Args, Serialize)]
pub struct DiffusionMeanArgs {
    /// Observation CSV: one row per point, chart coordinates (plus anchor
    /// columns for anchored charts).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    manifold: String,
    /// `oracle` or a checkpoint path.
    #[arg(long, default_value = "oracle")]
    provider: String,
    /// Step size for the location (and variance unless --alpha-t).
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long)]
    alpha_t: Option<f64>,
    /// Initial diffusion variance.
    #[arg(long, default_value_t = 0.2)]
    t0: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// plain or adam; per-family default if absent.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
    /// Initial location (named or JSON); first observation if absent.
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn optimizer_config(
    id: ManifoldId,
    alpha: f64,
    alpha_t: Option<f64>,
    t0: f64,
    iters: usize,
    method: Option<&str>,
    grad_tol: f64,
    mu0: Option<&str>,
) -> Result<OptimizerConfig<f64>> {
    let mut cfg = OptimizerConfig::for_manifold(id);
    cfg.step = alpha;
    cfg.step_t = alpha_t;
    cfg.t0 = t0;
    cfg.iters = iters;
    cfg.grad_tol = grad_tol;
    if let Some(m) = method {
        cfg.method = parse_method(m)?;
    }
    cfg.mu0 = mu0.map(|s| parse_point(s, id)).transpose()?;
    Ok(cfg)
}

pub fn diffusion_mean(args: DiffusionMeanArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let data = io::read_points_csv::<f64>(&args.data, id)?;
    io::check_points(m.as_ref(), &data)?;
    let provider = make_provider(&args.provider, id)?;
    let cfg = optimizer_config(
        id,
        args.alpha,
        args.alpha_t,
        args.t0,
        args.iters,
        args.method.as_deref(),
        args.grad_tol,
        args.mu0.as_deref(),
    )?;
    let est = estimators::diffusion_mean(provider.as_ref(), m.as_ref(), &data, &cfg)?;
    println!(
        "diffusion mean on {} ({} observations): t = {}, converged = {}, iterations = {}",
        id,
        data.len(),
        est.t.unwrap(),
        est.converged,
        est.iters_used
    );
    if let Some(out) = &args.out {
        let mut doc = config_echo("diffusion-mean", &args);
        doc["mu"] = point_json(&est.mu);
        doc["t"] = json!(est.t.unwrap());
        doc["converged"] = json!(est.converged);
        doc["iters_used"] = json!(est.iters_used);
        doc["trace"] = trace_json(&est);
        write_json(out, &doc)?;
    }
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct FrechetMeanArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    manifold: String,
    #[arg(long, default_value = "oracle")]
    provider: String,
    /// Step size; per-family default if absent (0.1, spheres 0.01).
    #[arg(long)]
    alpha: Option<f64>,
    /// Diffusion time of the log-map approximation.
    #[arg(long, default_value_t = 0.05)]
    t_small: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn frechet_default_step(id: ManifoldId) -> f64 {
    match id {
        ManifoldId::Sphere(_) => 0.01,
        _ => 0.1,
    }
}

pub fn frechet_mean(args: FrechetMeanArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let data = io::read_points_csv::<f64>(&args.data, id)?;
    io::check_points(m.as_ref(), &data)?;
    let provider = make_provider(&args.provider, id)?;
    let cfg = optimizer_config(
        id,
        args.alpha.unwrap_or_else(|| frechet_default_step(id)),
        None,
        0.2,
        args.iters,
        args.method.as_deref(),
        args.grad_tol,
        args.mu0.as_deref(),
    )?;
    let est = estimators::frechet_mean(provider.as_ref(), m.as_ref(), &data, &cfg, args.t_small)?;
    println!(
        "Frechet mean on {} ({} observations): converged = {}, iterations = {}",
        id,
        data.len(),
        est.converged,
        est.iters_used
    );
    if let Some(out) = &args.out {
        let mut doc = config_echo("frechet-mean", &args);
        doc["mu"] = point_json(&est.mu);
        doc["converged"] = json!(est.converged);
        doc["iters_used"] = json!(est.iters_used);
        doc["trace"] = trace_json(&est);
        write_json(out, &doc)?;
    }
    Ok(())
}

// ---------------------------------------------------- logmap and dist

#[derive(Debug, Args, Serialize)]
pub struct LogmapArgs {
    #[arg(long)]
    manifold: String,
    /// Point whose log is taken (the map estimates Log_y(x)).
    #[arg(long)]
    x: String,
    /// Base point of the tangent vector.
    #[arg(long)]
    y: String,
    #[arg(long, default_value = "oracle")]
    provider: String,
    #[arg(long, default_value_t = 0.05)]
    t_small: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn logmap(args: LogmapArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let x = parse_point(&args.x, id)?;
    let y = parse_point(&args.y, id)?;
    m.check_point(&x)?;
    m.check_point(&y)?;
    let provider = make_provider(&args.provider, id)?;
    let v = estimators::log_map_score(provider.as_ref(), &x, &y, args.t_small)?;
    let norm = m.norm(&v)?;
    println!(
        "Log_y(x) ~ {:?} (metric norm {norm})",
        v.components.iter().copied().collect::<Vec<f64>>()
    );
    if let Some(out) = &args.out {
        let mut doc = config_echo("logmap", &args);
        doc["base"] = point_json(&y);
        doc["components"] = json!(v.components.iter().copied().collect::<Vec<f64>>());
        doc["norm"] = json!(norm);
        write_json(out, &doc)?;
    }
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value = "oracle")]
    provider: String,
    /// Diffusion time of the Varadhan approximation.
    #[arg(long, default_value_t = 0.05)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn dist(args: DistArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let x = parse_point(&args.x, id)?;
    let y = parse_point(&args.y, id)?;
    m.check_point(&x)?;
    m.check_point(&y)?;
    let provider = make_provider(&args.provider, id)?;
    let v = estimators::varadhan_distance(provider.as_ref(), m.as_ref(), &x, &y, args.t)?;
    if v.clamped {
        eprintln!("note: negative radicand clamped to zero");
    }
    println!("{}", v.distance);
    if let Some(out) = &args.out {
        let mut doc = config_echo("dist", &args);
        doc["distance"] = json!(v.distance);
        doc["clamped"] = json!(v.clamped);
        write_json(out, &doc)?;
    }
    Ok(())
}

// ------------------------------------------------------------- kmeans

#[derive(Debug, Args, Serialize)]
pub struct KmeansArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "oracle")]
    provider: String,
    /// Outer iterations.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Diffusion time of the ranking distance.
    #[arg(long, default_value_t = 0.1)]
    t_rank: f64,
    /// Diffusion time of the log map in centroid updates.
    #[arg(long, default_value_t = 0.05)]
    t_small: f64,
    /// Fréchet iterations per centroid update.
    #[arg(long, default_value_t = 100)]
    frechet_iters: usize,
    /// Fréchet step size.
    #[arg(long, default_value_t = 0.1)]
    frechet_step: f64,
    #[arg(long, default_value_t = 2712)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn kmeans(args: KmeansArgs) -> Result<()> {
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let data = io::read_points_csv::<f64>(&args.data, id)?;
    io::check_points(m.as_ref(), &data)?;
    let provider = make_provider(&args.provider, id)?;
    let mut cfg = KMeansConfig::new(id, args.k);
    cfg.iters = args.iters;
    cfg.t_rank = args.t_rank;
    cfg.t_small = args.t_small;
    cfg.frechet.iters = args.frechet_iters;
    cfg.frechet.step = args.frechet_step;
    cfg.seed = args.seed;
    let result = riemannian_kmeans(provider.as_ref(), m.as_ref(), &data, &cfg, None)?;
    println!(
        "k-means on {} ({} observations, k = {}): final inertia {}",
        id,
        data.len(),
        args.k,
        result.inertia_trace.last().unwrap()
    );
    let mut doc = config_echo("kmeans", &args);
    doc["centroids"] = json!(result.centroids.iter().map(point_json).collect::<Vec<_>>());
    doc["assignments"] = json!(result.one_hot());
    doc["labels"] = json!(result.assignments);
    doc["inertia_trace"] = json!(result.inertia_trace);
    write_json(&args.out, &doc)?;
    Ok(())
}

// ------------------------------------------------------------ regress

#[derive(Debug, Args, Serialize)]
pub struct RegressArgs {
    /// Covariate CSV: one row per observation.
    #[arg(long)]
    covariates: PathBuf,
    /// Response CSV: one row per point.
    #[arg(long)]
    responses: PathBuf,
    #[arg(long)]
    manifold: String,
    #[arg(long, default_value = "oracle")]
    provider: String,
    /// Regression family; only the geodesic model is supported.
    #[arg(long, default_value = "geodesic")]
    mode: String,
    /// Dispersion model: constant or learned.
    #[arg(long, default_value = "constant")]
    sigma: String,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma0: f64,
    #[arg(long, default_value_t = 2712)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn read_covariates(path: &PathBuf) -> Result<Vec<DVector<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!(
                        "covariates line {}: `{}` is not a number",
                        lineno + 1,
                        f.trim()
                    ))
                })
            })
            .collect();
        out.push(DVector::from_vec(vals?));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!(
            "covariate file {} is empty",
            path.display()
        )));
    }
    Ok(out)
}

pub fn regress(args: RegressArgs) -> Result<()> {
    if args.mode != "geodesic" {
        return Err(Error::InvalidInput(format!(
            "unsupported regression mode `{}` (only geodesic)",
            args.mode
        )));
    }
    let id = parse_manifold(&args.manifold)?;
    let m = manifold::make::<f64>(id);
    let covariates = read_covariates(&args.covariates)?;
    let responses = io::read_points_csv::<f64>(&args.responses, id)?;
    io::check_points(m.as_ref(), &responses)?;
    let provider = make_provider(&args.provider, id)?;
    let cfg = RegressionConfig {
        iters: args.iters,
        lr: args.lr,
        sigma_mode: match args.sigma.as_str() {
            "constant" => SigmaMode::Constant,
            "learned" => SigmaMode::Learned,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown sigma mode `{other}`"
                )))
            }
        },
        sigma0: args.sigma0,
        seed: args.seed,
        ..RegressionConfig::default()
    };
    let model = regression::mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg)?;
    if model.sigma_clamped {
        eprintln!("note: the dispersion hit its lower clamp during fitting");
    }
    println!(
        "regression on {} ({} observations, {} covariates): converged = {}",
        id,
        covariates.len(),
        covariates[0].len(),
        model.converged
    );
    let sigma_doc = match &model.sigma {
        SigmaParams::Constant { rho } => json!({
            "kind": "constant",
            "sigma": regression::softplus(*rho),
        }),
        SigmaParams::Net(netp) => json!({
            "kind": "net",
            "layer_dims": netp.layer_dims,
            "params": netp.to_flat(),
        }),
    };
    let mut doc = config_echo("regress", &args);
    doc["mu"] = point_json(&model.mu);
    doc["v"] = json!((0..model.v.ncols())
        .map(|c| model.v.column(c).iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>());
    doc["sigma"] = sigma_doc;
    doc["converged"] = json!(model.converged);
    doc["trace"] = json!(model
        .trace
        .iter()
        .map(|row| json!({
            "iter": row.iter,
            "grad_norm": row.grad_norm,
            "mean_sigma": row.mean_sigma,
            "polish": row.polish,
        }))
        .collect::<Vec<_>>());
    write_json(&args.out, &doc)?;
    Ok(())
}

// ---------------------------------------------------------- benchmark

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    /// Benchmark suite; only `table1-desk` is defined.
    #[arg(long, default_value = "table1-desk")]
    suite: String,
    /// Rows to run (defaults to r2,r3,s2,s3,sym2).
    #[arg(long)]
    manifolds: Option<String>,
    /// Observations per row.
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    /// Diffusion horizon of the synthetic data.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Steps per path.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 2712)]
    seed: u64,
    /// Skip trained-provider rows entirely.
    #[arg(long, default_value_t = false)]
    oracle_only: bool,
    /// Trained checkpoints per manifold: `s2=ckpt.json` (repeatable).
    #[arg(long = "ckpt")]
    ckpts: Vec<String>,
    /// Benchmark CSV output.
    #[arg(long)]
    out: PathBuf,
}

pub fn benchmark(args: BenchmarkArgs) -> Result<()> {
    if args.suite != "table1-desk" {
        return Err(Error::InvalidInput(format!(
            "unknown benchmark suite `{}`",
            args.suite
        )));
    }
    let rows: Vec<ManifoldId> = match &args.manifolds {
        Some(list) => list
            .split(',')
            .map(|s| parse_manifold(s.trim()))
            .collect::<Result<_>>()?,
        None => vec![
            ManifoldId::Euclidean(2),
            ManifoldId::Euclidean(3),
            ManifoldId::Sphere(2),
            ManifoldId::Sphere(3),
            ManifoldId::Sym(2),
        ],
    };
    let mut ckpts = std::collections::HashMap::new();
    for spec in &args.ckpts {
        let (mid, path) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("--ckpt expects manifold=path, got `{spec}`"))
        })?;
        ckpts.insert(parse_manifold(mid.trim())?, path.trim().to_string());
    }

    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    writeln!(out, "manifold,provider,mu_err,t_err,iters,seed")?;
    for id in rows {
        let m = manifold::make::<f64>(id);
        let x0 = manifold::canonical_basepoint::<f64>(id);
        let data = sampler::sample_endpoints(
            m.as_ref(),
            SampleAlgorithm::LocalCoords,
            &x0,
            args.t,
            args.steps,
            args.paths,
            args.seed,
        )?;
        let mut run = |provider: &dyn ScoreProvider<f64>, label: &str| -> Result<()> {
            let cfg = OptimizerConfig::for_manifold(id);
            let est = estimators::diffusion_mean(provider, m.as_ref(), &data, &cfg)?;
            let mu_err = (m.embed(&est.mu)? - m.embed(&x0)?).norm();
            let t_err = (est.t.unwrap() - args.t).abs();
            writeln!(
                out,
                "{id},{label},{mu_err},{t_err},{},{}",
                est.iters_used, args.seed
            )?;
            println!("{id} [{label}]: |mu - x0| = {mu_err:.6}, |t - {}| = {t_err:.6}", args.t);
            Ok(())
        };
        let oracle = oracle_provider::<f64>(id, SeriesTruncation::default())?;
        run(oracle.as_ref(), "oracle")?;
        if !args.oracle_only {
            match ckpts.get(&id) {
                Some(path) => {
                    let provider = make_provider(path, id)?;
                    run(provider.as_ref(), "trained")?;
                }
                None => {
                    eprintln!("note: no checkpoint for {id}; skipping the trained row");
                }
            }
        }
    }
    out.flush()?;
    println!("benchmark written to {}", args.out.display());
    Ok(())
}
