//! Wrapped-Gaussian heat kernel on the circle:
//! `p_t(x, y) = (2 pi t)^{-1/2} sum_k exp(-(x - y + 2 pi k)^2 / (2t))`
//! with angles in R / 2 pi Z, truncated to `|k| <= K`.

use super::{ScoreProvider, SeriesTruncation, SPHERE_T_MIN};
use crate::error::Result;
use crate::manifold::{Manifold, ManifoldId, Point, Sphere, TangentVector};
use crate::scalar::Scalar;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct CircleOracle {
    trunc: SeriesTruncation,
    sphere: Sphere,
}

struct WrappedEval<T> {
    log_p: T,
    dtheta: T,
    dt: T,
}

impl CircleOracle {
    pub fn new(trunc: SeriesTruncation) -> Self {
        CircleOracle {
            trunc,
            sphere: Sphere::new(1),
        }
    }

    /// Angle of a circle point in its ambient embedding.
    pub fn angle_of<T: Scalar>(&self, p: &Point<T>) -> Result<T> {
        let e = self.sphere.embed(p)?;
        Ok(e[1].atan2(e[0]))
    }

    /// Kernel evaluation from raw angles; exposed for distribution tests.
    pub fn eval_angles<T: Scalar>(&self, theta_x: T, theta_y: T, t: T) -> Result<(T, T, T)> {
        let e = self.eval(theta_x, theta_y, t)?;
        Ok((e.log_p, e.dtheta, e.dt))
    }

    fn eval<T: Scalar>(&self, theta_x: T, theta_y: T, t: T) -> Result<WrappedEval<T>> {
        let delta = theta_x - theta_y;
        let k_max = self.trunc.circle_wraps as i64;
        // Factor out the smallest exponent for stability at small t.
        let mut a_min = T::of(f64::INFINITY);
        for k in -k_max..=k_max {
            let u = delta + T::two_pi() * T::of(k as f64);
            let a = u * u / (T::of(2.0) * t);
            if a < a_min {
                a_min = a;
            }
        }
        let mut sum = T::zero();
        let mut sum_u = T::zero();
        let mut sum_u2 = T::zero();
        for k in -k_max..=k_max {
            let u = delta + T::two_pi() * T::of(k as f64);
            let a = u * u / (T::of(2.0) * t);
            let e = (a_min - a).exp();
            sum += e;
            sum_u += u * e;
            sum_u2 += u * u * e;
        }
        let log_p = -a_min + sum.ln() - ((T::two_pi() * t).ln()) * T::of(0.5);
        // d/d theta_y log p: the summand exponent is -(delta + 2 pi k)^2/(2t)
        // with d delta / d theta_y = -1.
        let dtheta = sum_u / (sum * t);
        let dt = sum_u2 / (sum * T::of(2.0) * t * t) - T::one() / (T::of(2.0) * t);
        Ok(WrappedEval { log_p, dtheta, dt })
    }
}

impl<T: Scalar> ScoreProvider<T> for CircleOracle {
    fn manifold_id(&self) -> ManifoldId {
        ManifoldId::Sphere(1)
    }

    fn t_range(&self) -> (T, T) {
        (T::of(SPHERE_T_MIN), T::of(f64::INFINITY))
    }

    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>> {
        self.check_t(t)?;
        let tx = self.angle_of(x)?;
        let ty = self.angle_of(y)?;
        let e = self.eval(tx, ty, t)?;
        // Riemannian gradient: magnitude d(log p)/d theta along the
        // orthonormal angular direction at y.
        let ty_cos = ty.cos();
        let ty_sin = ty.sin();
        let ambient = DVector::from_column_slice(&[-ty_sin * e.dtheta, ty_cos * e.dtheta]);
        self.sphere.project_to_tangent(y, &ambient)
    }

    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        self.check_t(t)?;
        let e = self.eval(self.angle_of(x)?, self.angle_of(y)?, t)?;
        Ok(e.dt)
    }

    fn log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<T>> {
        Some((|| {
            self.check_t(t)?;
            let e = self.eval(self.angle_of(x)?, self.angle_of(y)?, t)?;
            Ok(e.log_p)
        })())
    }
}
