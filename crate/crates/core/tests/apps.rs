//! Clustering and regression on top of the estimators: cluster recovery
//! against a brute-force exact-distance baseline, inertia monotonicity,
//! the OLS reduction and geodesic recovery on the sphere.

mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use scoremeans::estimators::{frechet_mean, OptimizerConfig};
use scoremeans::kmeans::{assign_from_distances, riemannian_kmeans, KMeansConfig};
use scoremeans::manifold::{self, Manifold, ManifoldId, Point, TangentVector};
use scoremeans::oracle::{oracle_provider, ScoreProvider, SeriesTruncation};
use scoremeans::regression::{
    mlrr_fit, mlrr_predict, RegressionConfig, SigmaMode, SigmaParams,
};
use scoremeans::sampler::{path_rng, sample_path_coords};

fn s2_provider() -> Box<dyn ScoreProvider<f64>> {
    oracle_provider::<f64>(ManifoldId::Sphere(2), SeriesTruncation::default()).unwrap()
}

fn r1_provider() -> Box<dyn ScoreProvider<f64>> {
    oracle_provider::<f64>(ManifoldId::Euclidean(1), SeriesTruncation::default()).unwrap()
}

/// Three tight Brownian clusters around pairwise-orthogonal centers.
fn three_sphere_clusters(
    m: &dyn Manifold<f64>,
    per_cluster: usize,
    noise_t: f64,
    seed: u64,
) -> (Vec<Point<f64>>, Vec<usize>) {
    let centers = [
        sphere_point(&[1.0, 0.0, 0.0]),
        sphere_point(&[0.0, 1.0, 0.0]),
        sphere_point(&[0.0, 0.0, 1.0]),
    ];
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for i in 0..per_cluster {
            let mut r = path_rng(seed, (c * per_cluster + i) as u64);
            let p = sample_path_coords(m, center, noise_t, 10, &mut r).unwrap();
            data.push(p.endpoint().clone());
            labels.push(c);
        }
    }
    (data, labels)
}

/// Brute-force Lloyd iteration with exact geodesic distances and
/// closed-form-log Fréchet means (the oracle route).
fn exact_kmeans(
    m: &dyn Manifold<f64>,
    data: &[Point<f64>],
    init: &[Point<f64>],
    iters: usize,
) -> Vec<usize> {
    let k = init.len();
    let mut centroids: Vec<Point<f64>> = init.to_vec();
    let mut assign = vec![0usize; data.len()];
    for _ in 0..iters {
        for (i, p) in data.iter().enumerate() {
            let row: Vec<f64> = centroids
                .iter()
                .map(|c| m.distance(p, c).unwrap())
                .collect();
            assign[i] = assign_from_distances(&row);
        }
        for j in 0..k {
            let members: Vec<&Point<f64>> = data
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == j)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            // Closed-form-log Karcher iteration.
            let mut mu = centroids[j].clone();
            for _ in 0..60 {
                let mut acc = DVector::zeros(m.dim());
                for p in &members {
                    acc += m.log(&mu, p).unwrap().components;
                }
                acc /= members.len() as f64;
                if acc.norm() < 1e-12 {
                    break;
                }
                mu = m.exp(&TangentVector::new(mu, acc)).unwrap();
                if m.needs_recenter(&mu) {
                    mu = m.recenter(&mu);
                }
            }
            centroids[j] = mu;
        }
    }
    assign
}

#[test]
fn kmeans_recovers_separated_clusters() {
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let (data, labels) = three_sphere_clusters(m.as_ref(), 50, 0.02, 99);
    let cfg = KMeansConfig::new(ManifoldId::Sphere(2), 3);
    let result = riemannian_kmeans(provider.as_ref(), m.as_ref(), &data, &cfg, None).unwrap();

    // Perfect recovery against the generating labels and against the
    // exact-distance baseline started from the same seeding.
    assert_abs_diff_eq!(adjusted_rand_index(&result.assignments, &labels), 1.0);
    let exact = exact_kmeans(m.as_ref(), &data, &result.centroids, 5);
    assert_abs_diff_eq!(adjusted_rand_index(&result.assignments, &exact), 1.0);

    // Inertia is non-increasing across outer iterations.
    for w in result.inertia_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "inertia increased: {} -> {}", w[0], w[1]);
    }

    // One-hot rows sum to one.
    for row in result.one_hot() {
        assert_eq!(row.iter().map(|&v| v as usize).sum::<usize>(), 1);
    }
}

#[test]
fn kmeans_k1_reduces_to_the_frechet_mean() {
    // A single moderately spread cloud: the score log map at t = 0.05
    // serves every pairwise distance that occurs here.
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let center = sphere_point(&[1.0, 0.2, 0.4]);
    let data: Vec<Point<f64>> = (0..60)
        .map(|i| {
            let mut r = path_rng(5, i as u64);
            sample_path_coords(m.as_ref(), &center, 0.05, 10, &mut r)
                .unwrap()
                .endpoint()
                .clone()
        })
        .collect();
    let cfg = KMeansConfig::new(ManifoldId::Sphere(2), 1);
    let result = riemannian_kmeans(provider.as_ref(), m.as_ref(), &data, &cfg, None).unwrap();

    let mut fcfg = OptimizerConfig::for_manifold(ManifoldId::Sphere(2));
    fcfg.iters = 100;
    fcfg.grad_tol = 1e-10;
    fcfg.mu0 = Some(result.centroids[0].clone());
    let direct = frechet_mean(provider.as_ref(), m.as_ref(), &data, &fcfg, cfg.t_small).unwrap();
    let d = m.distance(&result.centroids[0], &direct.mu).unwrap();
    assert!(d < 1e-6, "K=1 centroid differs from the Frechet mean by {d}");
}

#[test]
fn kmeans_distinct_points_are_a_fixed_point() {
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let pts = vec![
        sphere_point(&[1.0, 0.0, 0.1]),
        sphere_point(&[0.0, 1.0, -0.2]),
        sphere_point(&[-0.3, 0.1, 1.0]),
    ];
    let mut cfg = KMeansConfig::new(ManifoldId::Sphere(2), 3);
    cfg.iters = 1;
    let result =
        riemannian_kmeans(provider.as_ref(), m.as_ref(), &pts, &cfg, Some(pts.clone())).unwrap();
    for (j, c) in result.centroids.iter().enumerate() {
        let d = m.distance(c, &pts[result.assignments.iter().position(|&a| a == j).unwrap()])
            .unwrap();
        // acos resolves zero distances only to ~sqrt(eps).
        assert!(d < 1e-7, "centroid {j} moved by {d}");
    }
    assert_eq!(result.assignments.len(), 3);
}

#[test]
fn assignment_is_invariant_to_distance_scaling() {
    let mut r = rng(2);
    for _ in 0..200 {
        let row: Vec<f64> = (0..5).map(|_| r.gen_range(0.0..10.0)).collect();
        let scaled: Vec<f64> = row.iter().map(|v| v * 7.3).collect();
        assert_eq!(assign_from_distances(&row), assign_from_distances(&scaled));
    }
}

#[test]
fn kmeans_validation() {
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let pts = vec![sphere_point(&[1.0, 0.0, 0.0])];
    let cfg = KMeansConfig::new(ManifoldId::Sphere(2), 2);
    assert!(riemannian_kmeans(provider.as_ref(), m.as_ref(), &pts, &cfg, None).is_err());
}

#[test]
fn mlrr_reduces_to_ordinary_least_squares() {
    // R^1 responses with constant sigma: the stationary point solves the
    // normal equations.
    let m = manifold::make::<f64>(ManifoldId::Euclidean(1));
    let provider = r1_provider();
    let mut r = rng(31);
    let n = 60;
    let covariates: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_column_slice(&[r.gen_range(-1.0..1.0)]))
        .collect();
    let responses: Vec<Point<f64>> = covariates
        .iter()
        .map(|x| {
            let noise: f64 = r.sample(rand_distr::StandardNormal);
            Point::from_slice(&[0.7 + 1.8 * x[0] + 0.3 * noise])
        })
        .collect();

    let cfg = RegressionConfig {
        iters: 1500,
        sigma_mode: SigmaMode::Constant,
        ..RegressionConfig::default()
    };
    let model = mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg).unwrap();

    // Closed-form OLS.
    let xbar: f64 = covariates.iter().map(|x| x[0]).sum::<f64>() / n as f64;
    let ybar: f64 = responses.iter().map(|y| y.coords[0]).sum::<f64>() / n as f64;
    let sxx: f64 = covariates.iter().map(|x| (x[0] - xbar).powi(2)).sum();
    let sxy: f64 = covariates
        .iter()
        .zip(&responses)
        .map(|(x, y)| (x[0] - xbar) * (y.coords[0] - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    assert!(
        (model.mu.coords[0] - intercept).abs() < 1e-4,
        "intercept {} vs OLS {intercept}",
        model.mu.coords[0]
    );
    assert!(
        (model.v[(0, 0)] - slope).abs() < 1e-4,
        "slope {} vs OLS {slope}",
        model.v[(0, 0)]
    );

    // Predictions: x = 0 gives mu; the linear model elsewhere.
    let (p0, _) = mlrr_predict(m.as_ref(), &model, &DVector::from_column_slice(&[0.0])).unwrap();
    assert_abs_diff_eq!(p0.coords[0], model.mu.coords[0], epsilon = 1e-14);
    let (p1, _) = mlrr_predict(m.as_ref(), &model, &DVector::from_column_slice(&[0.5])).unwrap();
    assert_abs_diff_eq!(
        p1.coords[0],
        model.mu.coords[0] + 0.5 * model.v[(0, 0)],
        epsilon = 1e-14
    );
}

#[test]
fn mlrr_sigma_matches_residual_variance() {
    // Learned constant sigma tracks the residual variance within 5%.
    let m = manifold::make::<f64>(ManifoldId::Euclidean(1));
    let provider = r1_provider();
    let mut r = rng(37);
    let n = 500;
    let covariates: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_column_slice(&[r.gen_range(-1.0..1.0)]))
        .collect();
    let responses: Vec<Point<f64>> = covariates
        .iter()
        .map(|x| {
            let noise: f64 = r.sample(rand_distr::StandardNormal);
            Point::from_slice(&[-0.2 + 0.9 * x[0] + 0.4 * noise])
        })
        .collect();
    let cfg = RegressionConfig {
        iters: 1500,
        ..RegressionConfig::default()
    };
    let model = mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg).unwrap();
    let sigma = model.sigma.sigma_at(&DVector::from_column_slice(&[0.0]));

    let rss: f64 = covariates
        .iter()
        .zip(&responses)
        .map(|(x, y)| {
            let (p, _) = mlrr_predict(m.as_ref(), &model, x).unwrap();
            (p.coords[0] - y.coords[0]).powi(2)
        })
        .sum();
    let resid_var = rss / n as f64;
    assert!(
        (sigma * sigma - resid_var).abs() < 0.05 * resid_var,
        "sigma^2 {} vs residual variance {resid_var}",
        sigma * sigma
    );
}

#[test]
fn mlrr_recovers_a_sphere_geodesic() {
    // 100 points scattered around a great-circle arc with Brownian noise
    // t = 0.01; the fitted geodesic stays within 0.05 of the truth at 10
    // test covariates.
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let mu_true = sphere_point(&[0.0, 0.0, 1.0]);
    let v_true = DVector::from_column_slice(&[0.45, 0.25]);
    let n = 100;
    let covariates: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_column_slice(&[-1.0 + 2.0 * i as f64 / (n - 1) as f64]))
        .collect();
    let responses: Vec<Point<f64>> = covariates
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let on_arc = m
                .exp(&TangentVector::new(mu_true.clone(), &v_true * x[0]))
                .unwrap();
            let mut r = path_rng(61, i as u64);
            sample_path_coords(m.as_ref(), &on_arc, 0.01, 5, &mut r)
                .unwrap()
                .endpoint()
                .clone()
        })
        .collect();

    let cfg = RegressionConfig {
        iters: 800,
        sigma0: 0.3,
        mu0: Some(mu_true.clone()), // anchor chart at the true intercept region
        ..RegressionConfig::default()
    };
    let model = mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg).unwrap();

    let mut worst: f64 = 0.0;
    for j in 0..10 {
        let x = DVector::from_column_slice(&[-1.0 + 2.0 * j as f64 / 9.0]);
        let (pred, _) = mlrr_predict(m.as_ref(), &model, &x).unwrap();
        let truth = m
            .exp(&TangentVector::new(mu_true.clone(), &v_true * x[0]))
            .unwrap();
        worst = worst.max(m.distance(&pred, &truth).unwrap());
    }
    assert!(worst < 0.05, "worst geodesic recovery error {worst}");
}

#[test]
fn mlrr_zero_noise_truth_is_a_fixed_point() {
    // Responses exactly on the geodesic and initialization at the truth:
    // the curve parameters do not move (sigma keeps shrinking).
    let m = manifold::make::<f64>(ManifoldId::Sphere(2));
    let provider = s2_provider();
    let mu_true = sphere_point(&[0.0, 0.0, 1.0]);
    let v_true = DMatrix::from_column_slice(2, 1, &[0.4, -0.2]);
    let covariates: Vec<DVector<f64>> = (0..20)
        .map(|i| DVector::from_column_slice(&[-1.0 + 2.0 * i as f64 / 19.0]))
        .collect();
    let responses: Vec<Point<f64>> = covariates
        .iter()
        .map(|x| {
            m.exp(&TangentVector::new(
                mu_true.clone(),
                &v_true.column(0) * x[0],
            ))
            .unwrap()
        })
        .collect();
    let cfg = RegressionConfig {
        iters: 40,
        polish_iters: 0,
        mu0: Some(mu_true.clone()),
        v0: Some(v_true.clone()),
        ..RegressionConfig::default()
    };
    let model = mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg).unwrap();
    // The curve gradients sit at machine zero, so the deadband freezes
    // (mu, v) exactly while sigma keeps shrinking.
    assert!((&model.mu.coords - &mu_true.coords).norm() < 1e-12);
    assert!((&model.v - &v_true).norm() < 1e-12);
}

#[test]
fn mlrr_likelihood_ascends() {
    // Exact log-likelihood is non-decreasing along the plain decaying
    // phase and improves overall (the Adam phase hovers; see the plain
    // iterates for the monotone property).
    let m = manifold::make::<f64>(ManifoldId::Euclidean(1));
    let provider = r1_provider();
    let mut r = rng(43);
    let covariates: Vec<DVector<f64>> = (0..50)
        .map(|_| DVector::from_column_slice(&[r.gen_range(-1.0..1.0)]))
        .collect();
    let responses: Vec<Point<f64>> = covariates
        .iter()
        .map(|x| {
            let noise: f64 = r.sample(rand_distr::StandardNormal);
            Point::from_slice(&[0.3 - 1.1 * x[0] + 0.5 * noise])
        })
        .collect();
    let cfg = RegressionConfig {
        iters: 300,
        ..RegressionConfig::default()
    };
    let model = mlrr_fit(provider.as_ref(), m.as_ref(), &covariates, &responses, &cfg).unwrap();

    let ll = |mu: &DVector<f64>, v: &DMatrix<f64>, sigma: f64| -> f64 {
        covariates
            .iter()
            .zip(&responses)
            .map(|(x, y)| {
                let f = Point::new(mu + v * x);
                provider.log_p(&f, y, sigma * sigma).unwrap().unwrap()
            })
            .sum()
    };
    let lls: Vec<(bool, f64)> = model
        .trace
        .iter()
        .map(|row| (row.polish, ll(&row.mu, &row.v, row.mean_sigma)))
        .collect();
    let first = lls.first().unwrap().1;
    let last = lls.last().unwrap().1;
    assert!(last > first, "no overall likelihood progress: {first} -> {last}");
    for w in lls.windows(2) {
        if w[0].0 && w[1].0 {
            assert!(
                w[1].1 >= w[0].1 - 1e-9 * w[0].1.abs().max(1.0),
                "likelihood decreased in the plain phase: {} -> {}",
                w[0].1,
                w[1].1
            );
        }
    }
}
