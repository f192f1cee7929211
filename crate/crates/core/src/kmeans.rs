//! Riemannian k-means: assignment by the Varadhan ranking distance,
//! centroid updates by the score-based Fréchet mean.

use crate::error::{Error, Result};
use crate::estimators::{self, OptimizerConfig, VaradhanDistance};
use crate::manifold::{Manifold, Point};
use crate::oracle::ScoreProvider;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// k-means controls. The ranking distance is evaluated at `t_rank`, the
/// centroid updates run the Fréchet estimator with `t_small` and the
/// embedded optimizer configuration.
#[derive(Debug, Clone)]
pub struct KMeansConfig<T: Scalar> {
    pub k: usize,
    /// Outer iterations.
    pub iters: usize,
    /// Diffusion time of the ranking distance.
    pub t_rank: T,
    /// Diffusion time of the log-map approximation in centroid updates.
    pub t_small: T,
    /// Fréchet-mean optimizer settings for centroid updates.
    pub frechet: OptimizerConfig<T>,
    pub seed: u64,
}

impl<T: Scalar> KMeansConfig<T> {
    pub fn new(id: crate::manifold::ManifoldId, k: usize) -> Self {
        let mut frechet = OptimizerConfig::for_manifold(id);
        frechet.iters = 100;
        frechet.step = T::of(0.1);
        frechet.grad_tol = T::of(1e-10);
        KMeansConfig {
            k,
            iters: 10,
            t_rank: T::of(0.1),
            t_small: T::of(0.05),
            frechet,
            seed: 2712,
        }
    }
}

/// Clustering result: centroids, hard assignments and the inertia trace.
#[derive(Debug, Clone)]
pub struct KMeansResult<T: Scalar> {
    pub centroids: Vec<Point<T>>,
    /// Cluster index per observation.
    pub assignments: Vec<usize>,
    /// Sum of squared assigned ranking distances, one entry per outer
    /// iteration (evaluated right after the assignment step).
    pub inertia_trace: Vec<T>,
}

impl<T: Scalar> KMeansResult<T> {
    /// Assignments as an N x K one-hot matrix.
    pub fn one_hot(&self) -> Vec<Vec<u8>> {
        let k = self.centroids.len();
        self.assignments
            .iter()
            .map(|&a| (0..k).map(|j| u8::from(j == a)).collect())
            .collect()
    }
}

/// Index of the minimum of a distance row (lowest index wins ties).
pub fn assign_from_distances<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (j, v) in row.iter().enumerate().skip(1) {
        if *v < row[best] {
            best = j;
        }
    }
    best
}

fn ranking_distances<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
    centroids: &[Point<T>],
    t_rank: T,
) -> Result<Vec<Vec<T>>> {
    // One batched evaluation per centroid; rows indexed by observation.
    let per_centroid: Vec<Vec<VaradhanDistance<T>>> = centroids
        .par_iter()
        .map(|c| estimators::varadhan_distance_batch(provider, m, data, c, t_rank))
        .collect::<Result<_>>()?;
    Ok((0..data.len())
        .map(|i| per_centroid.iter().map(|col| col[i].distance).collect())
        .collect())
}

/// Farthest-point seeding on the ranking distance.
fn seed_centroids<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
    k: usize,
    t_rank: T,
    seed: u64,
) -> Result<Vec<Point<T>>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut centroids = vec![data[rng.gen_range(0..data.len())].clone()];
    while centroids.len() < k {
        let dists = ranking_distances(provider, m, data, &centroids, t_rank)?;
        let farthest = (0..data.len())
            .max_by(|&a, &b| {
                let da = dists[a].iter().cloned().fold(T::of(f64::INFINITY), T::min);
                let db = dists[b].iter().cloned().fold(T::of(f64::INFINITY), T::min);
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty data");
        centroids.push(data[farthest].clone());
    }
    Ok(centroids)
}

/// Lloyd-style clustering with score-based primitives.
pub fn riemannian_kmeans<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
    cfg: &KMeansConfig<T>,
    init_centroids: Option<Vec<Point<T>>>,
) -> Result<KMeansResult<T>> {
    if cfg.k == 0 || cfg.k > data.len() {
        return Err(Error::InvalidInput(format!(
            "k = {} must be in 1..={}",
            cfg.k,
            data.len()
        )));
    }
    let mut centroids = match init_centroids {
        Some(c) => {
            if c.len() != cfg.k {
                return Err(Error::InvalidInput(format!(
                    "expected {} initial centroids, got {}",
                    cfg.k,
                    c.len()
                )));
            }
            for p in &c {
                m.check_point(p)?;
            }
            c
        }
        None => seed_centroids(provider, m, data, cfg.k, cfg.t_rank, cfg.seed)?,
    };

    let mut assignments = vec![0usize; data.len()];
    let mut inertia_trace = Vec::with_capacity(cfg.iters);
    for _outer in 0..cfg.iters {
        // Assignment step.
        let dists = ranking_distances(provider, m, data, &centroids, cfg.t_rank)?;
        for (i, row) in dists.iter().enumerate() {
            assignments[i] = assign_from_distances(row);
        }
        let mut inertia = T::zero();
        for (i, row) in dists.iter().enumerate() {
            inertia += row[assignments[i]] * row[assignments[i]];
        }
        inertia_trace.push(inertia);

        // Empty clusters re-seed at the farthest assigned point.
        for j in 0..cfg.k {
            if assignments.iter().all(|&a| a != j) {
                let farthest = (0..data.len())
                    .max_by(|&a, &b| {
                        let da = dists[a][assignments[a]];
                        let db = dists[b][assignments[b]];
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .expect("non-empty data");
                centroids[j] = data[farthest].clone();
                assignments[farthest] = j;
            }
        }

        // Update step: Fréchet mean per cluster, warm-started at the
        // current centroid.
        let members: Vec<Vec<Point<T>>> = (0..cfg.k)
            .map(|j| {
                data.iter()
                    .zip(&assignments)
                    .filter(|(_, &a)| a == j)
                    .map(|(p, _)| p.clone())
                    .collect()
            })
            .collect();
        centroids = members
            .par_iter()
            .zip(centroids.par_iter())
            .map(|(cluster, current)| {
                let mut fcfg = cfg.frechet.clone();
                fcfg.mu0 = Some(current.clone());
                Ok(estimators::frechet_mean(provider, m, cluster, &fcfg, cfg.t_small)?.mu)
            })
            .collect::<Result<_>>()?;
    }

    Ok(KMeansResult {
        centroids,
        assignments,
        inertia_trace,
    })
}
