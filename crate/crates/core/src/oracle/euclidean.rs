//! Gaussian heat kernels on flat manifolds.

use super::ScoreProvider;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldId, Point, TangentVector};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Heat kernel on R^n:
/// `p_t(x, y) = (2 pi t)^{-n/2} exp(-|x - y|^2 / (2t))`.
#[derive(Debug, Clone)]
pub struct EuclideanOracle {
    n: usize,
}

impl EuclideanOracle {
    pub fn new(n: usize) -> Self {
        EuclideanOracle { n }
    }

    fn diff<T: Scalar>(&self, x: &Point<T>, y: &Point<T>) -> Result<DVector<T>> {
        if x.dim() != self.n || y.dim() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "expected points of dimension {}",
                self.n
            )));
        }
        Ok(&x.coords - &y.coords)
    }
}

impl<T: Scalar> ScoreProvider<T> for EuclideanOracle {
    fn manifold_id(&self) -> ManifoldId {
        ManifoldId::Euclidean(self.n)
    }

    fn t_range(&self) -> (T, T) {
        (T::zero(), T::of(f64::INFINITY))
    }

    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>> {
        self.check_t(t)?;
        let d = self.diff(x, y)?;
        Ok(TangentVector::new(y.clone(), d / t))
    }

    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        self.check_t(t)?;
        let d = self.diff(x, y)?;
        Ok(d.norm_squared() / (T::of(2.0) * t * t) - T::of(self.n as f64) / (T::of(2.0) * t))
    }

    fn log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<T>> {
        Some((|| {
            self.check_t(t)?;
            let d = self.diff(x, y)?;
            let two_pi_t = T::two_pi() * t;
            Ok(-d.norm_squared() / (T::of(2.0) * t)
                - T::of(self.n as f64 / 2.0) * two_pi_t.ln())
        })())
    }

    fn score_jacobian(&self, _x: &Point<T>, _y: &Point<T>, t: T) -> Option<Result<DMatrix<T>>> {
        Some((|| {
            self.check_t(t)?;
            Ok(DMatrix::identity(self.n, self.n) * (-T::one() / t))
        })())
    }
}

/// Heat kernel on a flat manifold with a constant metric `g` in a single
/// global chart (used for Sym(n)): a Gaussian with covariance `t g^{-1}`
/// relative to the Riemannian volume,
/// `log p = -(x-y)^T g (x-y) / (2t) - d/2 log(2 pi t)`.
#[derive(Debug, Clone)]
pub struct FlatOracle<T: Scalar> {
    id: ManifoldId,
    g: DMatrix<T>,
}

impl<T: Scalar> FlatOracle<T> {
    pub fn new(id: ManifoldId, g: DMatrix<T>) -> Self {
        FlatOracle { id, g }
    }

    fn diff(&self, x: &Point<T>, y: &Point<T>) -> Result<DVector<T>> {
        let d = self.g.nrows();
        if x.dim() != d || y.dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "expected points of dimension {d}"
            )));
        }
        Ok(&x.coords - &y.coords)
    }
}

impl<T: Scalar> ScoreProvider<T> for FlatOracle<T> {
    fn manifold_id(&self) -> ManifoldId {
        self.id
    }

    fn t_range(&self) -> (T, T) {
        (T::zero(), T::of(f64::INFINITY))
    }

    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>> {
        self.check_t(t)?;
        // Differential is g (x - y) / t; raising through g^{-1} gives the
        // tangent vector (x - y) / t.
        let d = self.diff(x, y)?;
        Ok(TangentVector::new(y.clone(), d / t))
    }

    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        self.check_t(t)?;
        let d = self.diff(x, y)?;
        let q = (d.transpose() * &self.g * &d)[(0, 0)];
        let dim = T::of(self.g.nrows() as f64);
        Ok(q / (T::of(2.0) * t * t) - dim / (T::of(2.0) * t))
    }

    fn log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<T>> {
        Some((|| {
            self.check_t(t)?;
            let d = self.diff(x, y)?;
            let q = (d.transpose() * &self.g * &d)[(0, 0)];
            let dim = T::of(self.g.nrows() as f64 / 2.0);
            Ok(-q / (T::of(2.0) * t) - dim * (T::two_pi() * t).ln())
        })())
    }

    fn score_jacobian(&self, _x: &Point<T>, _y: &Point<T>, t: T) -> Option<Result<DMatrix<T>>> {
        Some((|| {
            self.check_t(t)?;
            Ok(&self.g * (-T::one() / t))
        })())
    }
}
