//! Euclidean space: the trivial flat geometry.

use super::{Manifold, ManifoldId, Point, TangentVector};
use crate::error::Result;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Euclidean space needs dimension >= 1");
        Euclidean { n }
    }
}

impl<T: Scalar> Manifold<T> for Euclidean {
    fn id(&self) -> ManifoldId {
        ManifoldId::Euclidean(self.n)
    }

    fn metric(&self, _x: &Point<T>) -> Result<DMatrix<T>> {
        Ok(DMatrix::identity(self.n, self.n))
    }

    fn metric_deriv(&self, _x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        Some(Ok(vec![DMatrix::zeros(self.n, self.n); self.n]))
    }

    fn exp(&self, v: &TangentVector<T>) -> Result<Point<T>> {
        self.check_point(&v.base)?;
        Ok(Point::new(&v.base.coords + &v.components))
    }

    fn log(&self, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(TangentVector::new(x.clone(), &y.coords - &x.coords))
    }

    fn embed(&self, x: &Point<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        Ok(x.coords.clone())
    }

    fn embedding_jacobian(&self, _x: &Point<T>) -> Result<DMatrix<T>> {
        Ok(DMatrix::identity(self.n, self.n))
    }
}
