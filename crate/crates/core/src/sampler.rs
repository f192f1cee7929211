//! Simulation of Riemannian Brownian motion and construction of training
//! corpora.
//!
//! Two samplers are provided: a geodesic random walk in the tangent space
//! (each step maps an isotropic Gaussian through the exponential map) and
//! an Euler–Maruyama scheme in local coordinates with the chart drift
//! `-1/2 g^{jk} Gamma^i_{jk}`. Both draw the raw Gaussian through a factor
//! of the inverse metric so the step is isotropic with respect to the
//! metric. Charts are re-centered whenever the coordinates leave the unit
//! ball.

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldId, Point, TangentVector};
use crate::scalar::Scalar;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// One simulated Brownian path on a uniform time grid.
#[derive(Debug, Clone)]
pub struct BrownianPath<T: Scalar> {
    pub start: Point<T>,
    /// Times `0, delta, ..., T`.
    pub times: Vec<T>,
    /// Path points, `n_steps + 1` entries starting at `start`.
    pub points: Vec<Point<T>>,
    /// Standard-normal draws used per step.
    pub noises: Vec<DVector<T>>,
}

impl<T: Scalar> BrownianPath<T> {
    pub fn endpoint(&self) -> &Point<T> {
        self.points.last().expect("non-empty path")
    }
}

/// One training record: observation triple plus the denoising pair.
/// All points are expressed in the chart of `y`.
#[derive(Debug, Clone)]
pub struct DatasetRecord<T: Scalar> {
    /// Starting point of the path this record was taken from.
    pub x0: Point<T>,
    /// Path point after elapsed time `t`.
    pub y: Point<T>,
    /// Path point one step before `y`.
    pub prev: Point<T>,
    /// Elapsed time from the path start to `y`.
    pub t: T,
    /// Step size of the path.
    pub dt: T,
}

/// Training corpus of path records.
#[derive(Debug, Clone)]
pub struct PathDataset<T: Scalar> {
    pub manifold: ManifoldId,
    pub seed: u64,
    pub records: Vec<DatasetRecord<T>>,
}

/// Which sampling scheme generates paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleAlgorithm {
    /// Geodesic random walk in the tangent space.
    TangentSpace,
    /// Euler–Maruyama in local coordinates (default).
    LocalCoords,
}

/// Dataset-generation controls.
#[derive(Debug, Clone)]
pub struct SamplingConfig<T: Scalar> {
    /// Starting point; the family's canonical basepoint when `None`.
    pub x0: Option<Point<T>>,
    /// Starting points per batch.
    pub n_x0: usize,
    /// Paths per starting point.
    pub samples_per_x0: usize,
    /// Batches; endpoints of one batch start the next.
    pub n_batches: usize,
    /// Path horizon.
    pub t_horizon: T,
    /// Steps per path.
    pub n_steps: usize,
    pub algorithm: SampleAlgorithm,
    pub seed: u64,
}

impl<T: Scalar> Default for SamplingConfig<T> {
    fn default() -> Self {
        SamplingConfig {
            x0: None,
            n_x0: 1024,
            samples_per_x0: 1,
            n_batches: 1,
            t_horizon: T::one(),
            n_steps: 100,
            algorithm: SampleAlgorithm::LocalCoords,
            seed: 2712,
        }
    }
}

fn check_args<T: Scalar>(t: T, n_steps: usize) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::Domain("path horizon must be positive".into()));
    }
    if n_steps == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    Ok(())
}

/// Geodesic random walk: `W_k = Exp_{W_{k-1}}(sqrt(delta) S v_k)` with
/// `v_k ~ N(0, I_d)` and `S S^T = g^{-1}` at the current point.
pub fn sample_path_tangent<T: Scalar, R: Rng + ?Sized>(
    m: &dyn Manifold<T>,
    x0: &Point<T>,
    t_horizon: T,
    n_steps: usize,
    rng: &mut R,
) -> Result<BrownianPath<T>> {
    check_args(t_horizon, n_steps)?;
    m.check_point(x0)?;
    let d = m.dim();
    let delta = t_horizon / T::of(n_steps as f64);
    let sqrt_delta = delta.sqrt();
    let mut current = x0.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut noises = Vec::with_capacity(n_steps);
    times.push(T::zero());
    points.push(current.clone());
    for k in 1..=n_steps {
        let s = m.sqrt_g_inv(&current)?;
        let v = DVector::from_fn(d, |_, _| T::std_normal(rng));
        let step = &s * &v * sqrt_delta;
        current = m.exp(&TangentVector::new(current, step))?;
        if m.needs_recenter(&current) {
            current = m.recenter(&current);
        }
        noises.push(v);
        times.push(delta * T::of(k as f64));
        points.push(current.clone());
    }
    Ok(BrownianPath {
        start: x0.clone(),
        times,
        points,
        noises,
    })
}

/// Euler–Maruyama in the chart:
/// `du^i = -1/2 g^{jk} Gamma^i_{jk} delta + sqrt(delta) (S v)^i`.
pub fn sample_path_coords<T: Scalar, R: Rng + ?Sized>(
    m: &dyn Manifold<T>,
    x0: &Point<T>,
    t_horizon: T,
    n_steps: usize,
    rng: &mut R,
) -> Result<BrownianPath<T>> {
    check_args(t_horizon, n_steps)?;
    m.check_point(x0)?;
    let d = m.dim();
    let delta = t_horizon / T::of(n_steps as f64);
    let sqrt_delta = delta.sqrt();
    let mut current = x0.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut noises = Vec::with_capacity(n_steps);
    times.push(T::zero());
    points.push(current.clone());
    for k in 1..=n_steps {
        let md = m.metric_at(&current)?;
        let v = DVector::from_fn(d, |_, _| T::std_normal(rng));
        let mut increment = &md.sqrt_g_inv * &v * sqrt_delta;
        for i in 0..d {
            increment[i] += chart_drift_component(&md, i) * delta;
        }
        current = Point {
            coords: &current.coords + increment,
            anchor: current.anchor.clone(),
        };
        if !current.is_finite() {
            return Err(Error::IntegrationFailure(
                "non-finite chart coordinates during sampling".into(),
            ));
        }
        if m.needs_recenter(&current) {
            current = m.recenter(&current);
        }
        noises.push(v);
        times.push(delta * T::of(k as f64));
        points.push(current.clone());
    }
    Ok(BrownianPath {
        start: x0.clone(),
        times,
        points,
        noises,
    })
}

/// Drift component `-1/2 g^{jk} Gamma^i_{jk}` of the chart SDE.
pub fn chart_drift_component<T: Scalar>(md: &crate::manifold::MetricData<T>, i: usize) -> T {
    let d = md.g_inv.nrows();
    let mut acc = T::zero();
    for j in 0..d {
        for k in 0..d {
            acc += md.g_inv[(j, k)] * md.christoffel[i][(j, k)];
        }
    }
    -acc * T::of(0.5)
}

/// RNG stream for one path: `ChaCha12(seed)` on stream `path_index + 1`,
/// so parallel generation is deterministic in path order.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path_index + 1);
    rng
}

fn sample_one<T: Scalar>(
    m: &dyn Manifold<T>,
    algorithm: SampleAlgorithm,
    x0: &Point<T>,
    t_horizon: T,
    n_steps: usize,
    rng: &mut ChaCha12Rng,
) -> Result<BrownianPath<T>> {
    match algorithm {
        SampleAlgorithm::TangentSpace => sample_path_tangent(m, x0, t_horizon, n_steps, rng),
        SampleAlgorithm::LocalCoords => sample_path_coords(m, x0, t_horizon, n_steps, rng),
    }
}

/// Endpoints of `n_paths` independent paths from `x0` (observation data
/// for the mean-estimation protocols).
pub fn sample_endpoints<T: Scalar>(
    m: &dyn Manifold<T>,
    algorithm: SampleAlgorithm,
    x0: &Point<T>,
    t_horizon: T,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Point<T>>> {
    (0..n_paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx as u64);
            let path = sample_one(m, algorithm, x0, t_horizon, n_steps, &mut rng)?;
            Ok(path.endpoint().clone())
        })
        .collect()
}

/// Build a training corpus: batches of paths whose every step becomes a
/// record `(x0 of path, point, elapsed t, previous point, delta)`, with
/// endpoints of one batch seeding the starts of the next.
pub fn build_dataset<T: Scalar>(
    m: &dyn Manifold<T>,
    cfg: &SamplingConfig<T>,
) -> Result<PathDataset<T>> {
    check_args(cfg.t_horizon, cfg.n_steps)?;
    if cfg.n_x0 == 0 || cfg.samples_per_x0 == 0 || cfg.n_batches == 0 {
        return Err(Error::Domain(
            "n_x0, samples_per_x0 and n_batches must be positive".into(),
        ));
    }
    let x0 = cfg
        .x0
        .clone()
        .unwrap_or_else(|| crate::manifold::canonical_basepoint(m.id()));
    m.check_point(&x0)?;

    let mut starts = vec![x0; cfg.n_x0];
    let mut records = Vec::new();
    let mut path_index = 0u64;
    for _ in 0..cfg.n_batches {
        let jobs: Vec<(u64, Point<T>)> = starts
            .iter()
            .flat_map(|s| std::iter::repeat(s.clone()).take(cfg.samples_per_x0))
            .enumerate()
            .map(|(i, s)| (path_index + i as u64, s))
            .collect();
        path_index += jobs.len() as u64;
        let paths: Vec<BrownianPath<T>> = jobs
            .into_par_iter()
            .map(|(idx, start)| {
                let mut rng = path_rng(cfg.seed, idx);
                sample_one(m, cfg.algorithm, &start, cfg.t_horizon, cfg.n_steps, &mut rng)
            })
            .collect::<Result<_>>()?;
        for path in &paths {
            for k in 1..=cfg.n_steps {
                let y = path.points[k].clone();
                let prev = m.express_in_chart_of(&path.points[k - 1], &y);
                let x0_rec = m.express_in_chart_of(&path.start, &y);
                records.push(DatasetRecord {
                    x0: x0_rec,
                    prev,
                    t: path.times[k],
                    dt: cfg.t_horizon / T::of(cfg.n_steps as f64),
                    y,
                });
            }
        }
        // Endpoints seed the next batch, one per starting point.
        starts = paths
            .iter()
            .step_by(cfg.samples_per_x0)
            .map(|p| p.endpoint().clone())
            .collect();
    }
    Ok(PathDataset {
        manifold: m.id(),
        seed: cfg.seed,
        records,
    })
}
