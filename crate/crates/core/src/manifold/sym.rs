//! Symmetric n x n matrices with the Frobenius pullback metric.
//!
//! Chart coordinates list the upper triangle row by row (diagonal
//! included); the embedding fills the full matrix. Off-diagonal
//! coordinates touch two matrix entries, so the induced metric is the
//! constant diagonal matrix with 1 on diagonal coordinates and 2 on
//! off-diagonal coordinates — a flat geometry.

use super::{Manifold, ManifoldId, Point, TangentVector};
use crate::error::Result;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Sym {
    n: usize,
}

impl Sym {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Sym needs n >= 1");
        Sym { n }
    }

    /// Chart index of matrix entry (i, j), i <= j, upper triangle row-wise.
    pub fn coord_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        // Entries before row i: sum_{r<i} (n - r); then offset j - i.
        i * self.n - i * (i + 1) / 2 + i + (j - i)
    }

    /// Coordinates of the identity matrix.
    pub fn identity_coords<T: Scalar>(&self) -> DVector<T> {
        let d = self.n * (self.n + 1) / 2;
        let mut c = DVector::zeros(d);
        for i in 0..self.n {
            c[self.coord_index(i, i)] = T::one();
        }
        c
    }

    fn is_diagonal_coord(&self, idx: usize) -> bool {
        for i in 0..self.n {
            if self.coord_index(i, i) == idx {
                return true;
            }
        }
        false
    }
}

impl<T: Scalar> Manifold<T> for Sym {
    fn id(&self) -> ManifoldId {
        ManifoldId::Sym(self.n)
    }

    fn metric(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let d = self.n * (self.n + 1) / 2;
        let mut g = DMatrix::zeros(d, d);
        for idx in 0..d {
            g[(idx, idx)] = if self.is_diagonal_coord(idx) {
                T::one()
            } else {
                T::of(2.0)
            };
        }
        Ok(g)
    }

    fn metric_deriv(&self, x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        let d = <Self as Manifold<T>>::dim(self);
        if let Err(e) = self.check_point(x) {
            return Some(Err(e));
        }
        Some(Ok(vec![DMatrix::zeros(d, d); d]))
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
        let n = self.n;
        let mut m = DVector::zeros(n * n);
        for i in 0..n {
            for j in i..n {
                let c = x.coords[self.coord_index(i, j)];
                m[i * n + j] = c;
                m[j * n + i] = c;
            }
        }
        Ok(m)
    }

    fn embedding_jacobian(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let n = self.n;
        let d = n * (n + 1) / 2;
        let mut j = DMatrix::zeros(n * n, d);
        for a in 0..n {
            for b in a..n {
                let idx = self.coord_index(a, b);
                j[(a * n + b, idx)] = T::one();
                j[(b * n + a, idx)] = T::one();
            }
        }
        Ok(j)
    }
}
