//! Positive-definite n x n matrices with the Frobenius metric pulled back
//! through the parameterization f(x) = l(x) l(x)^T, where l(x) is the
//! lower-triangular matrix filled row by row from the chart coordinates.
//!
//! The pullback metric g = J^T J (J the Jacobian of f) has closed-form
//! coordinate derivatives because J is linear in x. No closed-form
//! logarithmic map is exposed for this metric.

use super::{Manifold, ManifoldId, Point};
use crate::error::Result;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Spd {
    n: usize,
}

impl Spd {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "SPD needs n >= 1");
        Spd { n }
    }

    /// Chart index of lower-triangle entry (i, j), j <= i, row-wise.
    pub fn coord_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i < self.n);
        i * (i + 1) / 2 + j
    }

    /// Coordinates whose factor l is the identity (so f = I).
    pub fn identity_coords<T: Scalar>(&self) -> DVector<T> {
        let d = self.n * (self.n + 1) / 2;
        let mut c = DVector::zeros(d);
        for i in 0..self.n {
            c[self.coord_index(i, i)] = T::one();
        }
        c
    }

    fn lower<T: Scalar>(&self, coords: &DVector<T>) -> DMatrix<T> {
        let n = self.n;
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                l[(i, j)] = coords[self.coord_index(i, j)];
            }
        }
        l
    }

    /// l(e_k): the lower-triangular basis matrix of coordinate k.
    fn lower_basis<T: Scalar>(&self, k: usize) -> DMatrix<T> {
        let mut e = DMatrix::zeros(self.n, self.n);
        'outer: for i in 0..self.n {
            for j in 0..=i {
                if self.coord_index(i, j) == k {
                    e[(i, j)] = T::one();
                    break 'outer;
                }
            }
        }
        e
    }

    fn vec<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
        let n = m.nrows();
        DVector::from_fn(n * n, |idx, _| m[(idx / n, idx % n)])
    }

    fn jacobian<T: Scalar>(&self, coords: &DVector<T>) -> DMatrix<T> {
        let n = self.n;
        let d = n * (n + 1) / 2;
        let l = self.lower(coords);
        let mut j = DMatrix::zeros(n * n, d);
        for k in 0..d {
            let e = self.lower_basis::<T>(k);
            let col = &e * l.transpose() + &l * e.transpose();
            j.set_column(k, &Self::vec(&col));
        }
        j
    }
}

impl<T: Scalar> Manifold<T> for Spd {
    fn id(&self) -> ManifoldId {
        ManifoldId::Spd(self.n)
    }

    fn metric(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let j = self.jacobian(&x.coords);
        Ok(j.transpose() * j)
    }

    fn metric_deriv(&self, x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        if let Err(e) = self.check_point(x) {
            return Some(Err(e));
        }
        let d = <Self as Manifold<T>>::dim(self);
        let j = self.jacobian(&x.coords);
        // dJ/dx^m is constant: column k of it is vec of
        // l(e_k) l(e_m)^T + l(e_m) l(e_k)^T.
        let mut out = Vec::with_capacity(d);
        for m_idx in 0..d {
            let em = self.lower_basis::<T>(m_idx);
            let mut dj = DMatrix::zeros(self.n * self.n, d);
            for k in 0..d {
                let ek = self.lower_basis::<T>(k);
                let col = &ek * em.transpose() + &em * ek.transpose();
                dj.set_column(k, &Self::vec(&col));
            }
            out.push(dj.transpose() * &j + j.transpose() * dj);
        }
        Some(Ok(out))
    }

    fn embed(&self, x: &Point<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        let l = self.lower(&x.coords);
        Ok(Self::vec(&(&l * l.transpose())))
    }

    fn embedding_jacobian(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        Ok(self.jacobian(&x.coords))
    }
}
