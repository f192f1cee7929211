//! Maximum likelihood Riemannian regression: responses are modeled as
//! Brownian-motion dispersions around a geodesic curve
//! `f(x) = Exp_mu(sum_c x^c v_c)`, and the likelihood is ascended through
//! the provider's score (for the curve parameters) and time derivative
//! (for the dispersion).

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};
use crate::net::Mlp;
use crate::oracle::ScoreProvider;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Dispersion model: one scalar, or a small network over the covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    Constant,
    Learned,
}

/// Fitting controls.
#[derive(Debug, Clone)]
pub struct RegressionConfig<T: Scalar> {
    pub iters: usize,
    pub lr: T,
    pub grad_tol: T,
    pub sigma_mode: SigmaMode,
    /// Initial dispersion sigma (the diffusion variance is sigma^2).
    pub sigma0: T,
    pub seed: u64,
    /// Initial intercept; the first response when `None`.
    pub mu0: Option<Point<T>>,
    /// Initial slope columns (d x n_cov); zero when `None`.
    pub v0: Option<DMatrix<T>>,
    /// Budget of the decaying plain polish phase.
    pub polish_iters: usize,
}

impl<T: Scalar> Default for RegressionConfig<T> {
    fn default() -> Self {
        RegressionConfig {
            iters: 1000,
            lr: T::of(0.1),
            grad_tol: T::of(1e-6),
            sigma_mode: SigmaMode::Constant,
            sigma0: T::of(0.5),
            seed: 2712,
            mu0: None,
            v0: None,
            polish_iters: 300,
        }
    }
}

/// Dispersion parameters after fitting.
#[derive(Debug, Clone)]
pub enum SigmaParams<T: Scalar> {
    /// sigma = softplus(rho).
    Constant { rho: T },
    /// sigma(x) = softplus(net(x)); hidden layers 32, 32.
    Net(Mlp<T>),
}

impl<T: Scalar> SigmaParams<T> {
    pub fn sigma_at(&self, x: &DVector<T>) -> T {
        match self {
            SigmaParams::Constant { rho } => softplus(*rho),
            SigmaParams::Net(net) => {
                let mut input = DMatrix::zeros(x.len(), 1);
                input.set_column(0, x);
                let out = net.forward(&input).expect("sigma net shape");
                softplus(out[(0, 0)])
            }
        }
    }
}

/// One fitting iteration in the trace.
#[derive(Debug, Clone)]
pub struct RegressionTraceRow<T: Scalar> {
    pub iter: usize,
    pub grad_norm: T,
    pub mean_sigma: T,
    /// Plain decaying phase (after the Adam budget).
    pub polish: bool,
    pub mu: DVector<T>,
    pub v: DMatrix<T>,
}

/// Fitted geodesic-regression model.
#[derive(Debug, Clone)]
pub struct RegressionModel<T: Scalar> {
    /// Intercept point.
    pub mu: Point<T>,
    /// Tangent slope columns at `mu`, one per covariate (d x n_cov).
    pub v: DMatrix<T>,
    pub sigma: SigmaParams<T>,
    pub trace: Vec<RegressionTraceRow<T>>,
    pub converged: bool,
    /// Some sigma evaluation hit the lower clamp during fitting.
    pub sigma_clamped: bool,
}

pub fn softplus<T: Scalar>(x: T) -> T {
    if x > T::of(30.0) {
        x
    } else if x < T::of(-30.0) {
        x.exp()
    } else {
        (T::one() + x.exp()).ln()
    }
}

pub fn softplus_inv<T: Scalar>(y: T) -> T {
    if y > T::of(30.0) {
        y
    } else {
        (y.exp() - T::one()).max(T::of(1e-300)).ln()
    }
}

fn sigmoid<T: Scalar>(x: T) -> T {
    if x > T::of(30.0) {
        T::one()
    } else if x < T::of(-30.0) {
        x.exp()
    } else {
        T::one() / (T::one() + (-x).exp())
    }
}

const SIGMA_FLOOR: f64 = 1e-4;

/// Predict the response point and dispersion at covariates `x`.
pub fn mlrr_predict<T: Scalar>(
    m: &dyn Manifold<T>,
    model: &RegressionModel<T>,
    x: &DVector<T>,
) -> Result<(Point<T>, T)> {
    if x.len() != model.v.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} covariates, got {}",
            model.v.ncols(),
            x.len()
        )));
    }
    let tangent = &model.v * x;
    let point = m.exp(&TangentVector::new(model.mu.clone(), tangent))?;
    Ok((point, model.sigma.sigma_at(x)))
}

struct FlatParams<T: Scalar> {
    mu: DVector<T>,
    v: DMatrix<T>,
    sigma: SigmaParams<T>,
}

/// Gradient of the mean log-likelihood with respect to `(mu, v, sigma)`.
struct GradEval<T: Scalar> {
    g_mu: DVector<T>,
    g_v: DMatrix<T>,
    g_sigma: Vec<T>,
    grad_norm: T,
    mean_sigma: T,
    clamped: bool,
}

/// Maximum likelihood geodesic regression (f = Exp along tangent slopes).
pub fn mlrr_fit<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    covariates: &[DVector<T>],
    responses: &[Point<T>],
    cfg: &RegressionConfig<T>,
) -> Result<RegressionModel<T>> {
    if covariates.is_empty() || covariates.len() != responses.len() {
        return Err(Error::InvalidInput(
            "covariates and responses must be non-empty and equal length".into(),
        ));
    }
    if provider.manifold_id() != m.id() {
        return Err(Error::InvalidInput(format!(
            "provider is for {}, manifold is {}",
            provider.manifold_id(),
            m.id()
        )));
    }
    for y in responses {
        m.check_point(y)?;
    }
    let n_cov = covariates[0].len();
    if covariates.iter().any(|x| x.len() != n_cov) {
        return Err(Error::InvalidInput("covariates have mixed lengths".into()));
    }
    let d = m.dim();
    let n = covariates.len();

    let mut mu0 = cfg.mu0.clone().unwrap_or_else(|| responses[0].clone());
    if m.needs_recenter(&mu0) {
        mu0 = m.recenter(&mu0);
    }
    // The anchor of mu stays fixed for the whole fit; slope columns live in
    // that chart and are transported flatly when mu moves.
    let anchor = mu0.anchor.clone();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let sigma = match cfg.sigma_mode {
        SigmaMode::Constant => SigmaParams::Constant {
            rho: softplus_inv(cfg.sigma0),
        },
        SigmaMode::Learned => SigmaParams::Net(Mlp::init(&[n_cov, 32, 32, 1], &mut rng)),
    };
    if let Some(v0) = &cfg.v0 {
        if v0.nrows() != d || v0.ncols() != n_cov {
            return Err(Error::ShapeMismatch(format!(
                "v0 is {}x{}, expected {}x{}",
                v0.nrows(),
                v0.ncols(),
                d,
                n_cov
            )));
        }
    }
    let mut params = FlatParams {
        mu: mu0.coords.clone(),
        v: cfg.v0.clone().unwrap_or_else(|| DMatrix::zeros(d, n_cov)),
        sigma,
    };

    let (t_lo_provider, t_hi_provider) = provider.t_range();
    let t_lo = t_lo_provider.max(T::of(SIGMA_FLOOR * SIGMA_FLOOR));
    let t_hi = t_hi_provider;

    let eval = |p: &FlatParams<T>| -> Result<GradEval<T>> {
        let mu_point = Point {
            coords: p.mu.clone(),
            anchor: anchor.clone(),
        };
        let mut g_mu = DVector::zeros(d);
        let mut g_v = DMatrix::zeros(d, n_cov);
        let mut g_sigma_net_upstream = Vec::with_capacity(n);
        let mut g_rho = T::zero();
        let mut mean_sigma = T::zero();
        let mut clamped = false;
        let h = T::of(1e-5);
        let flat = matches!(
            m.id(),
            crate::manifold::ManifoldId::Euclidean(_) | crate::manifold::ManifoldId::Sym(_)
        );
        for i in 0..n {
            let x = &covariates[i];
            let sigma_pre = match &p.sigma {
                SigmaParams::Constant { rho } => *rho,
                SigmaParams::Net(net) => {
                    let mut input = DMatrix::zeros(n_cov, 1);
                    input.set_column(0, x);
                    net.forward(&input)?[(0, 0)]
                }
            };
            let mut sigma = softplus(sigma_pre);
            if sigma < T::of(SIGMA_FLOOR) {
                sigma = T::of(SIGMA_FLOOR);
                clamped = true;
            }
            mean_sigma += sigma;
            let mut t = sigma * sigma;
            if t < t_lo {
                t = t_lo;
                clamped = true;
            }
            if t > t_hi {
                t = t_hi;
                clamped = true;
            }

            let u = &p.v * x;
            let f = m.exp(&TangentVector::new(mu_point.clone(), u.clone()))?;
            // Score at the predicted point; the heat kernel is symmetric,
            // so this is the gradient in the first argument as well.
            let s = provider.score(&responses[i], &f, t)?;
            let w = m.metric(&f)? * s.components; // differential at f

            // Jacobians of exp with respect to base and tangent.
            let (a_mat, b_mat) = if flat {
                (DMatrix::identity(d, d), DMatrix::identity(d, d))
            } else {
                let mut a_mat = DMatrix::zeros(d, d);
                let mut b_mat = DMatrix::zeros(d, d);
                for j in 0..d {
                    let mut mu_p = mu_point.clone();
                    mu_p.coords[j] += h;
                    let mut mu_m = mu_point.clone();
                    mu_m.coords[j] -= h;
                    let fp = m.exp(&TangentVector::new(mu_p, u.clone()))?;
                    let fm = m.exp(&TangentVector::new(mu_m, u.clone()))?;
                    a_mat.set_column(j, &((fp.coords - fm.coords) / (T::of(2.0) * h)));

                    let mut up = u.clone();
                    up[j] += h;
                    let mut um = u.clone();
                    um[j] -= h;
                    let fp = m.exp(&TangentVector::new(mu_point.clone(), up))?;
                    let fm = m.exp(&TangentVector::new(mu_point.clone(), um))?;
                    b_mat.set_column(j, &((fp.coords - fm.coords) / (T::of(2.0) * h)));
                }
                (a_mat, b_mat)
            };
            g_mu += a_mat.transpose() * &w;
            let bw = b_mat.transpose() * &w;
            // d f / d v_{r,c} = B[:, r] x^c
            g_v += &bw * x.transpose();

            // Dispersion gradient: 2 sigma dt_log_p, through softplus.
            let dt = provider.dt_log_p(&responses[i], &f, t)?;
            let up = T::of(2.0) * sigma * dt * sigmoid(sigma_pre);
            match &p.sigma {
                SigmaParams::Constant { .. } => g_rho += up,
                SigmaParams::Net(_) => g_sigma_net_upstream.push(up),
            }
        }
        let scale = T::one() / T::of(n as f64);
        g_mu *= scale;
        g_v *= scale;
        g_rho *= scale;
        mean_sigma *= scale;
        let g_sigma = match &p.sigma {
            SigmaParams::Constant { .. } => vec![g_rho],
            SigmaParams::Net(net) => {
                // Batch backprop: upstream per column on the scalar output.
                let mut input = DMatrix::zeros(n_cov, n);
                for (c, x) in covariates.iter().enumerate() {
                    input.set_column(c, x);
                }
                let cache = net.forward_cached(&input)?;
                let mut upstream = DMatrix::zeros(1, n);
                for (c, u) in g_sigma_net_upstream.iter().enumerate() {
                    upstream[(0, c)] = *u * scale;
                }
                let (grads, _) = net.backward(&cache, &upstream);
                let mut flat_g = Vec::new();
                for l in 0..grads.weights.len() {
                    flat_g.extend(grads.weights[l].iter().copied());
                    flat_g.extend(grads.biases[l].iter().copied());
                }
                flat_g
            }
        };
        let mut grad_norm = (g_mu.norm_squared() + g_v.norm_squared()).sqrt();
        for v in &g_sigma {
            grad_norm = (grad_norm * grad_norm + *v * *v).sqrt();
        }
        Ok(GradEval {
            g_mu,
            g_v,
            g_sigma,
            grad_norm,
            mean_sigma,
            clamped,
        })
    };

    // Flat Adam state over [mu; vec(v); sigma params].
    let sigma_len = match &params.sigma {
        SigmaParams::Constant { .. } => 1,
        SigmaParams::Net(net) => net.to_flat().len(),
    };
    let total = d + d * n_cov + sigma_len;
    let mut adam_m = DVector::<T>::zeros(total);
    let mut adam_v = DVector::<T>::zeros(total);
    let mut adam_step = 0usize;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sigma_clamped = false;

    let apply = |params: &mut FlatParams<T>, dirs: &DVector<T>, lr: T| {
        for j in 0..d {
            params.mu[j] += lr * dirs[j];
        }
        for c in 0..n_cov {
            for r in 0..d {
                params.v[(r, c)] += lr * dirs[d + c * d + r];
            }
        }
        match &mut params.sigma {
            SigmaParams::Constant { rho } => {
                *rho += lr * dirs[d + d * n_cov];
                // Keep sigma above the floor.
                let floor = softplus_inv(T::of(SIGMA_FLOOR));
                if *rho < floor {
                    *rho = floor;
                }
            }
            SigmaParams::Net(net) => {
                // Same order as the gradient flattening: per layer, weight
                // entries in iteration order, then biases.
                let mut idx = d + d * n_cov;
                for l in 0..net.weights.len() {
                    for w in net.weights[l].iter_mut() {
                        *w += lr * dirs[idx];
                        idx += 1;
                    }
                    for b in net.biases[l].iter_mut() {
                        *b += lr * dirs[idx];
                        idx += 1;
                    }
                }
            }
        }
    };

    let pack = |e: &GradEval<T>| {
        let mut g = DVector::zeros(total);
        for j in 0..d {
            g[j] = e.g_mu[j];
        }
        for c in 0..n_cov {
            for r in 0..d {
                g[d + c * d + r] = e.g_v[(r, c)];
            }
        }
        for (k, v) in e.g_sigma.iter().enumerate() {
            g[d + d * n_cov + k] = *v;
        }
        g
    };

    for iter in 0..cfg.iters {
        let e = eval(&params)?;
        sigma_clamped |= e.clamped;
        trace.push(RegressionTraceRow {
            iter,
            grad_norm: e.grad_norm,
            mean_sigma: e.mean_sigma,
            polish: false,
            mu: params.mu.clone(),
            v: params.v.clone(),
        });
        if e.grad_norm < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut g = pack(&e);
        // Rounding-level curve gradients must not feed Adam's scale-free
        // update: a block at machine zero stays frozen.
        let curve_norm = (e.g_mu.norm_squared() + e.g_v.norm_squared()).sqrt();
        if curve_norm < T::of(1e-12) {
            for k in 0..d + d * n_cov {
                g[k] = T::zero();
            }
        }
        // Adam ascent with cosine-decayed step.
        adam_step += 1;
        let b1 = T::of(0.9);
        let b2 = T::of(0.999);
        let c1 = T::one() - b1.powi(adam_step as i32);
        let c2 = T::one() - b2.powi(adam_step as i32);
        let mut dir = DVector::zeros(total);
        for k in 0..total {
            adam_m[k] = b1 * adam_m[k] + (T::one() - b1) * g[k];
            adam_v[k] = b2 * adam_v[k] + (T::one() - b2) * g[k] * g[k];
            dir[k] = (adam_m[k] / c1) / ((adam_v[k] / c2).sqrt() + T::of(1e-8));
        }
        let progress = iter as f64 / cfg.iters.max(1) as f64;
        let lr = cfg.lr * T::of(0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
        apply(&mut params, &dir, lr);
        if !params.mu.iter().all(|v| v.is_finite()) || !params.v.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("regression parameters diverged".into()));
        }
    }

    // Plain decaying polish on the raw gradient.
    if !converged {
        let mut alpha = cfg.lr;
        let mut prev: Option<T> = None;
        for k in 0..cfg.polish_iters {
            let e = eval(&params)?;
            sigma_clamped |= e.clamped;
            trace.push(RegressionTraceRow {
                iter: cfg.iters + k,
                grad_norm: e.grad_norm,
                mean_sigma: e.mean_sigma,
                polish: true,
                mu: params.mu.clone(),
                v: params.v.clone(),
            });
            if e.grad_norm < cfg.grad_tol {
                converged = true;
                break;
            }
            if let Some(p) = prev {
                if e.grad_norm > p * T::of(1.5) {
                    alpha *= T::of(0.5);
                }
            }
            prev = Some(e.grad_norm);
            let g = pack(&e);
            apply(&mut params, &g, alpha);
        }
    }

    Ok(RegressionModel {
        mu: Point {
            coords: params.mu,
            anchor,
        },
        v: params.v,
        sigma: params.sigma,
        trace,
        converged,
        sigma_clamped,
    })
}
