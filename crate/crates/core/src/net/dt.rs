//! Time derivative of `log p_t` from a first-order score:
//!
//! `d/dt log p = 1/2 (Lap_y log p + |grad_y log p|^2_g)`
//!
//! with the Laplace–Beltrami term in local coordinates,
//! `Lap log p = g^{jk} d_j w_k - g^{jk} Gamma^l_{jk} w_l`, where
//! `w = g * score` is the differential of `log p`. The Jacobian of `w`
//! comes from the provider when it has one in closed form, otherwise from
//! central finite differences of the score field (step 1e-4).

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};
use crate::oracle::ScoreProvider;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

const JACOBIAN_FD_STEP: f64 = 1e-4;

/// `d/dt log p_t(x, y)` evaluated from the provider's score field.
pub fn dt_log_p_from_score<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    x: &Point<T>,
    y: &Point<T>,
    t: T,
) -> Result<T> {
    Ok(dt_log_p_from_score_batch(provider, m, std::slice::from_ref(x), y, t)?[0])
}

/// Batched variant sharing the metric data and the shifted score
/// evaluations across observations.
pub fn dt_log_p_from_score_batch<T: Scalar>(
    provider: &dyn ScoreProvider<T>,
    m: &dyn Manifold<T>,
    xs: &[Point<T>],
    y: &Point<T>,
    t: T,
) -> Result<Vec<T>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let d = m.dim();
    let md = m.metric_at(y)?;
    // c_l = g^{jk} Gamma^l_{jk}
    let mut c = DVector::zeros(d);
    for l in 0..d {
        let mut acc = T::zero();
        for j in 0..d {
            for k in 0..d {
                acc += md.g_inv[(j, k)] * md.christoffel[l][(j, k)];
            }
        }
        c[l] = acc;
    }

    let scores = provider.score_batch(xs, y, t)?;
    let diffs: Vec<DVector<T>> = scores.iter().map(|s| &md.g * &s.components).collect();

    // Jacobians of the differential field w.
    let jacobians: Vec<DMatrix<T>> = if let Some(first) = provider.score_jacobian(&xs[0], y, t) {
        let mut out = Vec::with_capacity(xs.len());
        out.push(first?);
        for x in &xs[1..] {
            out.push(
                provider
                    .score_jacobian(x, y, t)
                    .expect("provider offered an exact Jacobian for the first query")?,
            );
        }
        out
    } else {
        let h = T::of(JACOBIAN_FD_STEP);
        let mut out = vec![DMatrix::zeros(d, d); xs.len()];
        for j in 0..d {
            let mut yp = y.clone();
            yp.coords[j] += h;
            let mut ym = y.clone();
            ym.coords[j] -= h;
            let gp = m.metric(&yp)?;
            let gm = m.metric(&ym)?;
            let sp = provider.score_batch(xs, &yp, t)?;
            let sm = provider.score_batch(xs, &ym, t)?;
            for (i, jac) in out.iter_mut().enumerate() {
                let wp = &gp * &sp[i].components;
                let wm = &gm * &sm[i].components;
                let col = (wp - wm) / (T::of(2.0) * h);
                jac.set_column(j, &col);
            }
        }
        out
    };

    let mut result = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        // tr(g^{-1} J) is insensitive to the antisymmetric part of J since
        // g^{-1} is symmetric.
        let mut lap = T::zero();
        for j in 0..d {
            for k in 0..d {
                lap += md.g_inv[(j, k)] * jacobians[i][(k, j)];
            }
        }
        lap -= c.dot(&diffs[i]);
        let sq = scores[i].components.dot(&diffs[i]);
        let v = (lap + sq) * T::of(0.5);
        if !v.is_finite() {
            return Err(Error::Numerical(
                "non-finite score Jacobian in the time-derivative evaluator".into(),
            ));
        }
        result.push(v);
    }
    Ok(result)
}
