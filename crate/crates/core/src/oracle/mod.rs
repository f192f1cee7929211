//! Closed-form heat kernels, scores and time derivatives behind the same
//! [`ScoreProvider`] interface as learned networks. These are the ground
//! truth oracles for Euclidean space, the circle, higher spheres and flat
//! constant-metric manifolds.

mod circle;
mod euclidean;
mod sphere;

pub use circle::CircleOracle;
pub use euclidean::{EuclideanOracle, FlatOracle};
pub use sphere::{gegenbauer, sphere_area, SphereOracle};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldId, Point, Sym, TangentVector};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Truncation controls for the closed-form kernel series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTruncation {
    /// Wrap count for the circle kernel: the sum runs over k in [-K, K].
    pub circle_wraps: usize,
    /// Maximum spectral degree for the m-sphere kernel.
    pub sphere_max_degree: usize,
    /// Early-stop tolerance: a series stops once the next term's magnitude
    /// drops below `tail_tol` times the partial sum.
    pub tail_tol: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation {
            circle_wraps: 10,
            // Near z = 0 at t = 0.05 the signed sums sit ten orders below
            // the term scale, so the series needs degree ~40 before its own
            // tail is negligible; 48 leaves margin. Early stopping keeps
            // moderate-time evaluations short.
            sphere_max_degree: 48,
            tail_tol: 1e-12,
        }
    }
}

/// Smallest diffusion time served by the sphere-family oracles at the
/// default truncation.
pub const SPHERE_T_MIN: f64 = 0.05;

/// Uniform interface over analytic kernels and trained networks: the score
/// `grad_y log p_t(x, y)` as a tangent vector at `y` (the Riemannian
/// gradient, i.e. the differential raised through the inverse metric), the
/// time derivative `d/dt log p_t(x, y)`, and optionally `log p_t` itself.
pub trait ScoreProvider<T: Scalar>: Send + Sync {
    fn manifold_id(&self) -> ManifoldId;

    /// Valid diffusion-time interval `[t_min, t_max]`; `t_min = 0` means
    /// any positive time.
    fn t_range(&self) -> (T, T);

    /// Reject a diffusion time outside the provider's interval.
    fn check_t(&self, t: T) -> Result<()> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!(
                "diffusion time must be positive, got {}",
                t.as_f64()
            )));
        }
        let (lo, hi) = self.t_range();
        if t < lo {
            return Err(Error::SmallTime {
                t: t.as_f64(),
                t_min: lo.as_f64(),
            });
        }
        if t > hi {
            return Err(Error::Domain(format!(
                "diffusion time {} above provider maximum {}",
                t.as_f64(),
                hi.as_f64()
            )));
        }
        Ok(())
    }

    /// Score `grad_y log p_t(x, y)` as a tangent vector at `y`.
    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>>;

    /// `d/dt log p_t(x, y)`.
    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T>;

    /// `log p_t(x, y)` where available (analytic kernels).
    fn log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<T>> {
        let _ = (x, y, t);
        None
    }

    /// Exact Jacobian of the differential `w = g * score` with respect to
    /// the chart coordinates of `y`, where available.
    fn score_jacobian(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<DMatrix<T>>> {
        let _ = (x, y, t);
        None
    }

    /// Scores of many observations against a common evaluation point.
    fn score_batch(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<Vec<TangentVector<T>>> {
        xs.iter().map(|x| self.score(x, y, t)).collect()
    }

    /// Time derivatives of many observations against a common point.
    fn dt_log_p_batch(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<Vec<T>> {
        xs.iter().map(|x| self.dt_log_p(x, y, t)).collect()
    }
}

/// Analytic score provider for a manifold, or [`Error::NoOracle`] when the
/// family has no closed-form heat kernel (SPD, landmarks).
pub fn oracle_provider<T: Scalar>(
    id: ManifoldId,
    trunc: SeriesTruncation,
) -> Result<Box<dyn ScoreProvider<T>>> {
    match id {
        ManifoldId::Euclidean(n) => Ok(Box::new(EuclideanOracle::new(n))),
        ManifoldId::Sphere(1) => Ok(Box::new(CircleOracle::new(trunc))),
        ManifoldId::Sphere(m) => Ok(Box::new(SphereOracle::new(m, trunc))),
        ManifoldId::Sym(n) => {
            let sym = Sym::new(n);
            let g = crate::manifold::Manifold::<T>::metric(
                &sym,
                &Point::new(sym.identity_coords::<T>()),
            )?;
            Ok(Box::new(FlatOracle::new(id, g)))
        }
        ManifoldId::Spd(_) | ManifoldId::Landmarks { .. } => {
            Err(Error::NoOracle(id.to_string()))
        }
    }
}
