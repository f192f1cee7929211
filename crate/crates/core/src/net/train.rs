//! Denoising-score-matching trainer.
//!
//! Each record of the corpus contributes a regression pair: the network
//! input `(x0, y, t)` and the one-step transition score target
//! `(prev_drifted - y) / delta`, where `prev_drifted` applies the chart
//! drift of the sampling scheme to the previous path point. In
//! metric-weighted mode the target carries the one-step inverse covariance
//! `g(prev)` and the network learns coordinate partials instead of the
//! raised vector. On embedded manifolds targets live in the ambient space,
//! projected onto the tangent space at `y`.
//!
//! One epoch is one Adam step on one minibatch. The learning rate ramps
//! linearly over the warmup epochs, then follows cosine decay to zero at
//! the epoch cap.

use super::mlp::{Adam, Mlp};
use super::potential::potential_dsm_grads;
use super::Checkpoint;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldId, Point};
use crate::sampler::{chart_drift_component, PathDataset};
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Denoising-target convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DsmMode {
    /// Plain residual against `(prev_drifted - y) / delta`.
    Isotropic,
    /// Target weighted by the one-step inverse covariance `g(prev)`
    /// (exact one-step Gaussian score in chart coordinates). Coincides
    /// with `Isotropic` for embedded representations, where the one-step
    /// covariance is the tangent projector.
    MetricWeighted,
}

/// First-order score network, or scalar potential whose input gradient is
/// the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Score,
    Potential,
}

/// Training controls.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Optimizer steps (cap 50 000).
    pub epochs: usize,
    pub lr: f64,
    /// Linear warmup length.
    pub warmup_epochs: usize,
    pub batch_size: usize,
    pub dsm_mode: DsmMode,
    pub kind: NetKind,
    /// Hidden-layer widths; per-family default when `None`.
    pub hidden: Option<Vec<usize>>,
    /// Embedded representation; per-family default when `None`.
    pub embedded: Option<bool>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5000,
            lr: 0.001,
            warmup_epochs: 1000,
            batch_size: 256,
            dsm_mode: DsmMode::Isotropic,
            kind: NetKind::Score,
            hidden: None,
            embedded: None,
            seed: 2712,
        }
    }
}

pub const EPOCH_CAP: usize = 50_000;

/// Per-family defaults: spheres use a five-layer 512 net on embedded
/// coordinates, Euclidean space a three-layer 128 net, other families a
/// three-layer 512 net, all in chart coordinates.
pub fn default_hidden(id: ManifoldId) -> Vec<usize> {
    match id {
        ManifoldId::Sphere(_) => vec![512; 5],
        ManifoldId::Euclidean(_) => vec![128; 3],
        _ => vec![512; 3],
    }
}

pub fn default_embedded(id: ManifoldId) -> bool {
    matches!(id, ManifoldId::Sphere(_))
}

/// Learning rate at `epoch`: linear ramp to `lr` at `warmup`, cosine decay
/// to zero at `cap` afterwards.
pub fn lr_schedule(epoch: usize, lr: f64, warmup: usize, cap: usize) -> f64 {
    if warmup > 0 && epoch <= warmup {
        return lr * epoch as f64 / warmup as f64;
    }
    if cap <= warmup {
        return lr;
    }
    let progress = (epoch - warmup) as f64 / (cap - warmup) as f64;
    lr * 0.5 * (1.0 + (std::f64::consts::PI * progress.min(1.0)).cos())
}

/// Training result: the serializable checkpoint and the loss curve.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub loss_curve: Vec<f64>,
}

/// Regression pairs compiled from a dataset.
pub struct TrainingPairs<T: Scalar> {
    /// (in_dim x n) network inputs.
    pub inputs: DMatrix<T>,
    /// (out_dim x n) targets.
    pub targets: DMatrix<T>,
    /// Ambient y per record (embedded mode only), for output projection.
    pub y_embed: Option<DMatrix<T>>,
    pub t_min: f64,
    pub t_max: f64,
}

pub fn compile_training_pairs<T: Scalar>(
    m: &dyn Manifold<T>,
    dataset: &PathDataset<T>,
    embedded: bool,
    mode: DsmMode,
) -> Result<TrainingPairs<T>> {
    if dataset.records.is_empty() {
        return Err(Error::InvalidInput("dataset has no records".into()));
    }
    let d = m.dim();
    let n = dataset.records.len();
    let amb = m.ambient_dim();
    let in_dim = if embedded { 2 * amb + 1 } else { 2 * d + 1 };
    let out_dim = if embedded { amb } else { d };
    let mut inputs = DMatrix::zeros(in_dim, n);
    let mut targets = DMatrix::zeros(out_dim, n);
    let mut y_embed = if embedded {
        Some(DMatrix::zeros(amb, n))
    } else {
        None
    };
    let mut t_min = f64::INFINITY;
    let mut t_max = 0.0f64;

    for (col, rec) in dataset.records.iter().enumerate() {
        t_min = t_min.min(rec.t.as_f64());
        t_max = t_max.max(rec.t.as_f64());
        // One-step drift at prev, in the shared chart of the record.
        let md = m.metric_at(&rec.prev)?;
        let mut drifted = rec.prev.coords.clone();
        for i in 0..d {
            drifted[i] += chart_drift_component(&md, i) * rec.dt;
        }
        if embedded {
            let xe = m.embed(&rec.x0)?;
            let ye = m.embed(&rec.y)?;
            let prev_drifted = Point {
                coords: drifted,
                anchor: rec.prev.anchor.clone(),
            };
            let pe = m.embed(&prev_drifted)?;
            let raw = (&pe - &ye) / rec.dt;
            // Project onto the tangent space at y (ambient representation).
            let tangential = &raw - &ye * ye.dot(&raw);
            for r in 0..amb {
                inputs[(r, col)] = xe[r];
                inputs[(amb + r, col)] = ye[r];
                targets[(r, col)] = tangential[r];
                y_embed.as_mut().unwrap()[(r, col)] = ye[r];
            }
            inputs[(2 * amb, col)] = rec.t;
        } else {
            let mut tau = (&drifted - &rec.y.coords) / rec.dt;
            if mode == DsmMode::MetricWeighted {
                tau = &md.g * tau;
            }
            for r in 0..d {
                inputs[(r, col)] = rec.x0.coords[r];
                inputs[(d + r, col)] = rec.y.coords[r];
                targets[(r, col)] = tau[r];
            }
            inputs[(2 * d, col)] = rec.t;
        }
    }
    Ok(TrainingPairs {
        inputs,
        targets,
        y_embed,
        t_min,
        t_max,
    })
}

/// Gather columns `idx` of `mat` into a fresh matrix.
pub(crate) fn gather_columns<T: Scalar>(mat: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(mat.nrows(), idx.len());
    for (k, &i) in idx.iter().enumerate() {
        out.set_column(k, &mat.column(i));
    }
    out
}

/// Project each column of `v` onto the tangent space at the corresponding
/// unit column of `y`: `v - y (y . v)`.
pub(crate) fn project_columns<T: Scalar>(v: &mut DMatrix<T>, y: &DMatrix<T>) {
    for c in 0..v.ncols() {
        let dot = y.column(c).dot(&v.column(c));
        let mut col = v.column_mut(c);
        col.axpy(-dot, &y.column(c), T::one());
    }
}

/// Mean DSM loss and parameter gradients of a score network over one batch.
pub fn dsm_loss_and_grads<T: Scalar>(
    net: &Mlp<T>,
    inputs: &DMatrix<T>,
    targets: &DMatrix<T>,
    y_embed: Option<&DMatrix<T>>,
) -> Result<(T, super::mlp::MlpGrads<T>)> {
    let b = inputs.ncols();
    let cache = net.forward_cached(inputs)?;
    let mut out = cache.activations.last().unwrap().clone();
    if let Some(y) = y_embed {
        project_columns(&mut out, y);
    }
    let residual = out - targets;
    let loss = residual.norm_squared() * T::of(0.5 / b as f64);
    let mut upstream = residual * T::of(1.0 / b as f64);
    if let Some(y) = y_embed {
        // Projection is symmetric; pull the upstream gradient back through it.
        project_columns(&mut upstream, y);
    }
    let (grads, _) = net.backward(&cache, &upstream);
    Ok((loss, grads))
}

/// Train a score (or potential) network on a sampled corpus.
pub fn train<T: Scalar>(
    m: &dyn Manifold<T>,
    dataset: &PathDataset<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.epochs > EPOCH_CAP {
        return Err(Error::InvalidInput(format!(
            "epochs {} above the cap {EPOCH_CAP}",
            cfg.epochs
        )));
    }
    if cfg.lr <= 0.0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("lr and batch_size must be positive".into()));
    }
    if dataset.manifold != m.id() {
        return Err(Error::InvalidInput(format!(
            "dataset is for {}, manifold is {}",
            dataset.manifold,
            m.id()
        )));
    }
    let embedded = cfg.embedded.unwrap_or_else(|| default_embedded(m.id()));
    let hidden = cfg.hidden.clone().unwrap_or_else(|| default_hidden(m.id()));
    let pairs = compile_training_pairs(m, dataset, embedded, cfg.dsm_mode)?;
    let out_dim = match cfg.kind {
        NetKind::Score => pairs.targets.nrows(),
        NetKind::Potential => 1,
    };
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(pairs.inputs.nrows());
    dims.extend_from_slice(&hidden);
    dims.push(out_dim);

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut net: Mlp<T> = Mlp::init(&dims, &mut rng);
    let mut adam = Adam::new(&net);
    let n = pairs.inputs.ncols();
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    let mut last_good = net.clone();

    let make_ckpt = |net: &Mlp<T>, epochs: usize, final_loss: f64| Checkpoint {
        manifold: m.id(),
        layer_dims: dims.clone(),
        params: net.to_flat(),
        seed: cfg.seed,
        epochs,
        final_loss,
        embedded,
        dsm_mode: cfg.dsm_mode,
        kind: cfg.kind,
        t_range: (pairs.t_min, pairs.t_max),
    };

    for epoch in 0..cfg.epochs {
        let idx: Vec<usize> = (0..cfg.batch_size).map(|_| rng.gen_range(0..n)).collect();
        let bin = gather_columns(&pairs.inputs, &idx);
        let btg = gather_columns(&pairs.targets, &idx);
        let by = pairs.y_embed.as_ref().map(|y| gather_columns(y, &idx));
        let (loss, grads) = match cfg.kind {
            NetKind::Score => dsm_loss_and_grads(&net, &bin, &btg, by.as_ref())?,
            NetKind::Potential => potential_dsm_grads(&net, &bin, &btg, by.as_ref())?,
        };
        let loss64 = loss.as_f64();
        if !loss64.is_finite() {
            return Err(Error::TrainingFailure {
                epoch,
                last_good: Box::new(make_ckpt(&last_good, epoch, f64::NAN)),
            });
        }
        loss_curve.push(loss64);
        let lr = lr_schedule(epoch + 1, cfg.lr, cfg.warmup_epochs, cfg.epochs);
        adam.step(&mut net, &grads, T::of(lr));
        if !net.params_finite() {
            return Err(Error::TrainingFailure {
                epoch,
                last_good: Box::new(make_ckpt(&last_good, epoch, loss64)),
            });
        }
        if epoch % 50 == 0 {
            last_good = net.clone();
        }
    }
    let final_loss = loss_curve.last().copied().unwrap_or(f64::NAN);
    Ok(TrainOutcome {
        checkpoint: make_ckpt(&net, cfg.epochs, final_loss),
        loss_curve,
    })
}
