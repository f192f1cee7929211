//! Mean, log-map and distance estimators on top of any score provider.
//!
//! The diffusion t-mean ascends the average log heat-kernel likelihood:
//! the location moves through the exponential map along the mean score,
//! and the diffusion variance follows the mean time derivative, clamped to
//! the training interval. The variance update steps in log t — the
//! likelihood curvature in t grows like 1/t^3, so additive steps at the
//! published rates oscillate for small variances, while in log t the
//! curvature at the optimum is O(1) at every scale. The Fréchet mean
//! replaces the score with the small-time score approximation of the
//! logarithmic map, normalized to a unit step direction, and both
//! estimators finish with a decaying plain polish phase so fixed points
//! are resolved beyond the nominal step size.

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};
use crate::oracle::ScoreProvider;
use crate::scalar::Scalar;
use nalgebra::DVector;

/// Optimizer step rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plain gradient ascent with a constant step.
    Plain,
    /// Adam with bias correction and cosine-decayed step size.
    Adam,
}

impl Method {
    /// Per-family default: plain gradient steps on spheres, Adam elsewhere.
    pub fn default_for(id: crate::manifold::ManifoldId) -> Method {
        match id {
            crate::manifold::ManifoldId::Sphere(_) => Method::Plain,
            _ => Method::Adam,
        }
    }
}

/// Optimizer controls shared by the mean estimators.
#[derive(Debug, Clone)]
pub struct OptimizerConfig<T: Scalar> {
    /// Step size for the location update.
    pub step: T,
    /// Step size for the diffusion-variance update; `step` when `None`.
    pub step_t: Option<T>,
    /// Initial diffusion variance.
    pub t0: T,
    /// Iteration budget of the main loop.
    pub iters: usize,
    pub method: Method,
    /// Convergence threshold on the metric norm of the mean gradient.
    pub grad_tol: T,
    /// Lower clamp for the diffusion variance.
    pub t_min: T,
    /// Initial location; the first observation when `None`.
    pub mu0: Option<Point<T>>,
    /// Budget of the decaying plain polish phase after the main loop.
    pub polish_iters: usize,
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn for_manifold(id: crate::manifold::ManifoldId) -> Self {
        OptimizerConfig {
            step: T::of(0.1),
            step_t: None,
            t0: T::of(0.2),
            iters: 1000,
            method: Method::default_for(id),
            grad_tol: T::of(1e-6),
            t_min: T::of(0.01),
            mu0: None,
            polish_iters: 300,
        }
    }
}

/// One optimizer iteration in the trace.
#[derive(Debug, Clone)]
pub struct TraceRow<T: Scalar> {
    pub iter: usize,
    pub mu: DVector<T>,
    pub t: Option<T>,
    pub grad_mu_norm: T,
    pub grad_t_abs: Option<T>,
}

/// Optimizer output with the iteration trace.
#[derive(Debug, Clone)]
pub struct MeanEstimate<T: Scalar> {
    pub mu: Point<T>,
    /// Fitted diffusion variance; `None` for the Fréchet mean.
    pub t: Option<T>,
    pub trace: Vec<TraceRow<T>>,
    pub converged: bool,
    pub iters_used: usize,
}

/// Scale-invariant first-order state for the location + variance block.
struct AdamState<T: Scalar> {
    m: DVector<T>,
    v: DVector<T>,
    step: usize,
}

impl<T: Scalar> AdamState<T> {
    fn new(d: usize) -> Self {
        AdamState {
            m: DVector::zeros(d),
            v: DVector::zeros(d),
            step: 0,
        }
    }

    fn reset(&mut self) {
        self.m.fill(T::zero());
        self.v.fill(T::zero());
        self.step = 0;
    }

    /// Bias-corrected ascent direction for gradient `g`.
    fn direction(&mut self, g: &DVector<T>) -> DVector<T> {
        let b1 = T::of(0.9);
        let b2 = T::of(0.999);
        let eps = T::of(1e-8);
        self.step += 1;
        let c1 = T::one() - b1.powi(self.step as i32);
        let c2 = T::one() - b2.powi(self.step as i32);
        let mut out = DVector::zeros(g.len());
        for i in 0..g.len() {
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g[i];
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g[i] * g[i];
            out[i] = (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + eps);
        }
        out
    }
}

fn cosine_factor<T: Scalar>(iter: usize, total: usize) -> T {
    let progress = iter as f64 / total.max(1) as f64;
    T::of(0.5 * (1.0 + (std::f64::consts::PI * progress.min(1.0)).cos()))
}

fn check_setup<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidInput("no observations".into()));
    }
    if provider.manifold_id() != m.id() {
        return Err(Error::InvalidInput(format!(
            "provider is for {}, manifold is {}",
            provider.manifold_id(),
            m.id()
        )));
    }
    for x in data {
        m.check_point(x)?;
    }
    Ok(())
}

fn metric_norm<T: Scalar>(m: &dyn Manifold<T>, at: &Point<T>, v: &DVector<T>) -> Result<T> {
    let g = m.metric(at)?;
    Ok((v.transpose() * g * v)[(0, 0)].max(T::zero()).sqrt())
}

/// Joint estimation of the diffusion t-mean and diffusion variance by
/// likelihood ascent through the score.
pub fn diffusion_mean<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
    cfg: &OptimizerConfig<T>,
) -> Result<MeanEstimate<T>> {
    check_setup(provider, m, data)?;
    let n = T::of(data.len() as f64);
    let (t_provider_lo, t_provider_hi) = provider.t_range();
    let t_lo = cfg.t_min.max(t_provider_lo);
    let t_hi = (T::one() - T::of(1e-9)).min(t_provider_hi);
    if t_lo >= t_hi {
        return Err(Error::Domain(
            "empty diffusion-variance interval after clamping".into(),
        ));
    }
    let clamp_t = |t: T| t.clamp(t_lo, t_hi);

    let mut mu = cfg.mu0.clone().unwrap_or_else(|| data[0].clone());
    if m.needs_recenter(&mu) {
        mu = m.recenter(&mu);
    }
    let mut t = clamp_t(cfg.t0);
    let step_t = cfg.step_t.unwrap_or(cfg.step);
    let d = m.dim();
    let mut adam = AdamState::new(d + 1);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iters_used = 0;

    let gradients = |mu: &Point<T>, t: T| -> Result<(DVector<T>, T)> {
        let scores = provider.score_batch(data, mu, t)?;
        let mut s_mean = DVector::zeros(d);
        for s in &scores {
            s_mean += &s.components;
        }
        s_mean /= n;
        let dts = provider.dt_log_p_batch(data, mu, t)?;
        let mut dt_mean = T::zero();
        for v in &dts {
            dt_mean += *v;
        }
        dt_mean /= n;
        Ok((s_mean, dt_mean))
    };

    for iter in 0..cfg.iters {
        let (s_mean, dt_mean) = gradients(&mu, t)?;
        let grad_mu_norm = metric_norm(m, &mu, &s_mean)?;
        trace.push(TraceRow {
            iter,
            mu: mu.coords.clone(),
            t: Some(t),
            grad_mu_norm,
            grad_t_abs: Some(dt_mean.abs()),
        });
        iters_used = iter + 1;
        if grad_mu_norm < cfg.grad_tol && dt_mean.abs() < cfg.grad_tol {
            converged = true;
            break;
        }
        match cfg.method {
            Method::Plain => {
                mu = m.exp(&TangentVector::new(mu, &s_mean * cfg.step))?;
                // d log-likelihood / d log t = t * dt_mean.
                t = clamp_t(t * (step_t * t * dt_mean).exp());
            }
            Method::Adam => {
                let mut g = DVector::zeros(d + 1);
                // Rounding-level blocks stay frozen instead of feeding
                // Adam's scale-free normalization.
                if grad_mu_norm >= T::of(1e-12) {
                    for i in 0..d {
                        g[i] = s_mean[i];
                    }
                }
                if dt_mean.abs() >= T::of(1e-12) {
                    g[d] = t * dt_mean;
                }
                let dir = adam.direction(&g);
                let lr = cfg.step * cosine_factor::<T>(iter, cfg.iters);
                let lr_t = step_t * cosine_factor::<T>(iter, cfg.iters);
                let mu_step = dir.rows(0, d) * lr;
                mu = m.exp(&TangentVector::new(mu, mu_step.into_owned()))?;
                t = clamp_t(t * (lr_t * dir[d]).exp());
            }
        }
        if m.needs_recenter(&mu) {
            mu = m.recenter(&mu);
            adam.reset();
        }
    }

    // Decaying plain polish: resolves the fixed point below the nominal
    // step size (Adam hovers, normalized steps oscillate).
    if !converged {
        let mut alpha = cfg.step;
        let mut alpha_t = step_t;
        let mut prev_norm: Option<T> = None;
        for k in 0..cfg.polish_iters {
            let (s_mean, dt_mean) = gradients(&mu, t)?;
            let grad_mu_norm = metric_norm(m, &mu, &s_mean)?;
            trace.push(TraceRow {
                iter: cfg.iters + k,
                mu: mu.coords.clone(),
                t: Some(t),
                grad_mu_norm,
                grad_t_abs: Some(dt_mean.abs()),
            });
            iters_used = cfg.iters + k + 1;
            if grad_mu_norm < cfg.grad_tol && dt_mean.abs() < cfg.grad_tol {
                converged = true;
                break;
            }
            if let Some(p) = prev_norm {
                if grad_mu_norm + dt_mean.abs() > p * T::of(1.5) {
                    alpha *= T::of(0.5);
                    alpha_t *= T::of(0.5);
                }
            }
            prev_norm = Some(grad_mu_norm + dt_mean.abs());
            mu = m.exp(&TangentVector::new(mu, &s_mean * alpha))?;
            t = clamp_t(t * (alpha_t * t * dt_mean).exp());
            if m.needs_recenter(&mu) {
                mu = m.recenter(&mu);
            }
        }
    }

    Ok(MeanEstimate {
        mu,
        t: Some(t),
        trace,
        converged,
        iters_used,
    })
}

/// Logarithmic map approximation `t * score(x, y, t)` at a small time,
/// an element of `T_y` estimating `Log_y(x)`.
pub fn log_map_score<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    x: &Point<T>,
    y: &Point<T>,
    t_small: T,
) -> Result<TangentVector<T>> {
    let s = provider.score(x, y, t_small)?;
    Ok(TangentVector::new(s.base, s.components * t_small))
}

/// Batched log-map approximation against a common base point.
pub fn log_map_score_batch<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    xs: &[Point<T>],
    y: &Point<T>,
    t_small: T,
) -> Result<Vec<TangentVector<T>>> {
    let scores = provider.score_batch(xs, y, t_small)?;
    Ok(scores
        .into_iter()
        .map(|s| TangentVector::new(s.base, s.components * t_small))
        .collect())
}

/// Fréchet mean by normalized gradient steps along the mean score-based
/// logarithmic map, followed by the decaying polish phase.
pub fn frechet_mean<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    data: &[Point<T>],
    cfg: &OptimizerConfig<T>,
    t_small: T,
) -> Result<MeanEstimate<T>> {
    check_setup(provider, m, data)?;
    provider.check_t(t_small)?;
    let n = T::of(data.len() as f64);
    let d = m.dim();
    let mut mu = cfg.mu0.clone().unwrap_or_else(|| data[0].clone());
    if m.needs_recenter(&mu) {
        mu = m.recenter(&mu);
    }
    let mut adam = AdamState::new(d);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iters_used = 0;

    let mean_log = |mu: &Point<T>| -> Result<DVector<T>> {
        let logs = log_map_score_batch(provider, data, mu, t_small)?;
        let mut acc = DVector::zeros(d);
        for l in &logs {
            acc += &l.components;
        }
        Ok(acc / n)
    };

    for iter in 0..cfg.iters {
        let g = mean_log(&mu)?;
        let norm = metric_norm(m, &mu, &g)?;
        trace.push(TraceRow {
            iter,
            mu: mu.coords.clone(),
            t: None,
            grad_mu_norm: norm,
            grad_t_abs: None,
        });
        iters_used = iter + 1;
        if norm < cfg.grad_tol {
            // Zero mean direction (symmetric data): already a fixed point.
            converged = true;
            break;
        }
        let dir = match cfg.method {
            Method::Plain => &g / norm,
            Method::Adam => {
                let a = adam.direction(&(&g / norm));
                a * cosine_factor::<T>(iter, cfg.iters)
            }
        };
        mu = m.exp(&TangentVector::new(mu, dir * cfg.step))?;
        if m.needs_recenter(&mu) {
            mu = m.recenter(&mu);
            adam.reset();
        }
    }

    if !converged {
        let mut alpha = cfg.step;
        let mut prev_norm: Option<T> = None;
        for k in 0..cfg.polish_iters {
            let g = mean_log(&mu)?;
            let norm = metric_norm(m, &mu, &g)?;
            trace.push(TraceRow {
                iter: cfg.iters + k,
                mu: mu.coords.clone(),
                t: None,
                grad_mu_norm: norm,
                grad_t_abs: None,
            });
            iters_used = cfg.iters + k + 1;
            if norm < cfg.grad_tol {
                converged = true;
                break;
            }
            if let Some(p) = prev_norm {
                if norm > p * T::of(1.5) {
                    alpha *= T::of(0.5);
                }
            }
            prev_norm = Some(norm);
            mu = m.exp(&TangentVector::new(mu, &g * alpha))?;
            if m.needs_recenter(&mu) {
                mu = m.recenter(&mu);
            }
        }
    }

    Ok(MeanEstimate {
        mu,
        t: None,
        trace,
        converged,
        iters_used,
    })
}

/// Varadhan distance estimate with the clamping flag.
#[derive(Debug, Clone, Copy)]
pub struct VaradhanDistance<T> {
    pub distance: T,
    /// Negative radicand clamped to zero.
    pub clamped: bool,
}

/// Small-time distance from the time derivative of the log heat kernel:
/// `dist^2 ~ 2 t^2 d/dt log p_t(x, y) + d t`, exact on flat manifolds for
/// every `t`. Intended for ranking; the estimate degrades smoothly with
/// curvature at finite `t`.
pub fn varadhan_distance<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    x: &Point<T>,
    y: &Point<T>,
    t_small: T,
) -> Result<VaradhanDistance<T>> {
    let dt = provider.dt_log_p(x, y, t_small)?;
    varadhan_from_dt(m.dim(), dt, t_small)
}

/// Batched Varadhan distances against a common point.
pub fn varadhan_distance_batch<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    xs: &[Point<T>],
    y: &Point<T>,
    t_small: T,
) -> Result<Vec<VaradhanDistance<T>>> {
    let dts = provider.dt_log_p_batch(xs, y, t_small)?;
    dts.into_iter()
        .map(|dt| varadhan_from_dt(m.dim(), dt, t_small))
        .collect()
}

fn varadhan_from_dt<T: Scalar>(dim: usize, dt: T, t: T) -> Result<VaradhanDistance<T>> {
    let sq = T::of(2.0) * t * t * dt + T::of(dim as f64) * t;
    if sq < T::zero() {
        Ok(VaradhanDistance {
            distance: T::zero(),
            clamped: true,
        })
    } else {
        Ok(VaradhanDistance {
            distance: sq.sqrt(),
            clamped: false,
        })
    }
}
