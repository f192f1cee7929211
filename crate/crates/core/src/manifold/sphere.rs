//! Unit n-sphere with anchored stereographic charts.
//!
//! A chart is identified by its center (the `anchor`, a unit vector in
//! R^{n+1}); coordinates are obtained by stereographic projection from the
//! anchor's antipode, so the chart center has coordinates zero and the
//! metric there is `4 I`. Charts are re-centered once coordinates leave the
//! unit ball to stay away from the projection singularity.

use super::{Manifold, ManifoldId, Point, TangentVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "sphere needs dimension >= 1");
        Sphere { n }
    }

    /// Default chart center: the north pole (last ambient axis).
    pub fn north<T: Scalar>(&self) -> DVector<T> {
        let mut a = DVector::zeros(self.n + 1);
        a[self.n] = T::one();
        a
    }

    /// Point at the chart center of the default (north) chart.
    pub fn north_point<T: Scalar>(&self) -> Point<T> {
        Point::with_anchor(DVector::zeros(self.n), self.north())
    }

    fn anchor_of<T: Scalar>(&self, x: &Point<T>) -> DVector<T> {
        x.anchor.clone().unwrap_or_else(|| self.north())
    }

    /// Orthonormal basis of the anchor's orthogonal complement, by a
    /// Householder reflection mapping the last ambient axis to the anchor.
    fn basis<T: Scalar>(&self, anchor: &DVector<T>) -> DMatrix<T> {
        let dim = self.n + 1;
        let mut h = anchor.clone();
        h[self.n] -= T::one();
        let hh = h.norm_squared();
        let mut b = DMatrix::zeros(dim, self.n);
        if hh < T::of(1e-28) {
            for i in 0..self.n {
                b[(i, i)] = T::one();
            }
            return b;
        }
        let scale = T::of(2.0) / hh;
        for col in 0..self.n {
            // column = e_col - scale * h * h[col]
            let f = scale * h[col];
            for row in 0..dim {
                b[(row, col)] = -h[row] * f;
            }
            b[(col, col)] += T::one();
        }
        b
    }

    fn chart_to_ambient<T: Scalar>(&self, u: &DVector<T>, anchor: &DVector<T>) -> DVector<T> {
        let s = u.norm_squared();
        let denom = T::one() + s;
        let b = self.basis(anchor);
        let mut p = b * (u * (T::of(2.0) / denom));
        p += anchor * ((T::one() - s) / denom);
        p
    }

    fn ambient_to_chart<T: Scalar>(
        &self,
        p: &DVector<T>,
        anchor: &DVector<T>,
    ) -> Result<DVector<T>> {
        let h = anchor.dot(p);
        let denom = T::one() + h;
        if denom <= T::of(1e-14) {
            return Err(Error::CutLocus(
                "point lies at the stereographic chart singularity".into(),
            ));
        }
        let b = self.basis(anchor);
        Ok(b.transpose() * p / denom)
    }

    /// Jacobian of `chart_to_ambient` with respect to chart coordinates.
    fn chart_jacobian<T: Scalar>(&self, u: &DVector<T>, anchor: &DVector<T>) -> DMatrix<T> {
        let s = u.norm_squared();
        let denom = T::one() + s;
        let b = self.basis(anchor);
        // inner block: 2/(1+s) I - 4 u u^T / (1+s)^2
        let mut m = DMatrix::identity(self.n, self.n) * (T::of(2.0) / denom);
        m -= (u * u.transpose()) * (T::of(4.0) / (denom * denom));
        let mut j = b * m;
        // anchor row: -4 u^T / (1+s)^2
        let r = u * (-T::of(4.0) / (denom * denom));
        j += anchor * r.transpose();
        j
    }

    fn conformal_factor<T: Scalar>(&self, u: &DVector<T>) -> T {
        let denom = T::one() + u.norm_squared();
        T::of(4.0) / (denom * denom)
    }
}

impl<T: Scalar> Manifold<T> for Sphere {
    fn id(&self) -> ManifoldId {
        ManifoldId::Sphere(self.n)
    }

    fn check_point(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, sphere s{} expects {}",
                x.dim(),
                self.n,
                self.n
            )));
        }
        if !x.is_finite() {
            return Err(Error::InvalidInput("point has non-finite coordinates".into()));
        }
        if let Some(a) = &x.anchor {
            if a.len() != self.n + 1 {
                return Err(Error::ShapeMismatch(format!(
                    "anchor has length {}, expected {}",
                    a.len(),
                    self.n + 1
                )));
            }
            if (a.norm() - T::one()).abs() > T::of(1e-9) {
                return Err(Error::InvalidInput("sphere anchor is not a unit vector".into()));
            }
        }
        Ok(())
    }

    fn metric(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        Ok(DMatrix::identity(self.n, self.n) * self.conformal_factor(&x.coords))
    }

    fn metric_deriv(&self, x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        if let Err(e) = self.check_point(x) {
            return Some(Err(e));
        }
        let denom = T::one() + x.coords.norm_squared();
        let out = (0..self.n)
            .map(|l| {
                let f = -T::of(16.0) * x.coords[l] / (denom * denom * denom);
                DMatrix::identity(self.n, self.n) * f
            })
            .collect();
        Some(Ok(out))
    }

    fn exp(&self, v: &TangentVector<T>) -> Result<Point<T>> {
        self.check_point(&v.base)?;
        let anchor = self.anchor_of(&v.base);
        let xh = self.chart_to_ambient(&v.base.coords, &anchor);
        let vh = self.chart_jacobian(&v.base.coords, &anchor) * &v.components;
        let theta = vh.norm();
        if !theta.is_finite() {
            return Err(Error::IntegrationFailure("non-finite tangent vector".into()));
        }
        let mut p = if theta < T::of(1e-12) {
            &xh + &vh
        } else {
            xh * theta.cos() + vh * (theta.sin() / theta)
        };
        let norm = p.norm();
        p /= norm;
        // Fall back to the point's own chart when the result sits at (or
        // numerically near) the current chart's singularity.
        match self.ambient_to_chart(&p, &anchor) {
            Ok(u) => Ok(Point::with_anchor(u, anchor)),
            Err(_) => Ok(Point::with_anchor(DVector::zeros(self.n), p)),
        }
    }

    fn log(&self, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let xh = self.chart_to_ambient(&x.coords, &self.anchor_of(x));
        let yh = self.chart_to_ambient(&y.coords, &self.anchor_of(y));
        let c = xh.dot(&yh).clamp(-T::one(), T::one());
        if c <= T::of(-1.0 + 1e-10) {
            return Err(Error::CutLocus(
                "antipodal points: logarithmic map undefined".into(),
            ));
        }
        let theta = c.acos();
        if theta < T::of(1e-14) {
            return Ok(TangentVector::zero_at(x.clone()));
        }
        let dir = &yh - &xh * c;
        let n = dir.norm();
        let vh = dir * (theta / n);
        self.project_to_tangent(x, &vh)
    }

    fn distance(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        self.check_point(x)?;
        self.check_point(y)?;
        let xh = self.chart_to_ambient(&x.coords, &self.anchor_of(x));
        let yh = self.chart_to_ambient(&y.coords, &self.anchor_of(y));
        let c = xh.dot(&yh).clamp(-T::one(), T::one());
        if c <= T::of(-1.0 + 1e-10) {
            return Err(Error::CutLocus(
                "antipodal points: distance attains the cut locus".into(),
            ));
        }
        Ok(c.acos())
    }

    fn recenter(&self, x: &Point<T>) -> Point<T> {
        let anchor = self.anchor_of(x);
        let p = self.chart_to_ambient(&x.coords, &anchor);
        Point::with_anchor(DVector::zeros(self.n), p)
    }

    fn needs_recenter(&self, x: &Point<T>) -> bool {
        x.coords.norm() > T::one()
    }

    fn express_in_chart_of(&self, p: &Point<T>, reference: &Point<T>) -> Point<T> {
        let anchor = self.anchor_of(reference);
        let ph = self.chart_to_ambient(&p.coords, &self.anchor_of(p));
        match self.ambient_to_chart(&ph, &anchor) {
            Ok(u) => Point::with_anchor(u, anchor),
            // Antipodal to the reference anchor: keep the point's own chart.
            Err(_) => Point::with_anchor(DVector::zeros(self.n), ph),
        }
    }

    fn embed(&self, x: &Point<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        Ok(self.chart_to_ambient(&x.coords, &self.anchor_of(x)))
    }

    fn embedding_jacobian(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        Ok(self.chart_jacobian(&x.coords, &self.anchor_of(x)))
    }

    fn project_to_tangent(&self, x: &Point<T>, w: &DVector<T>) -> Result<TangentVector<T>> {
        if w.len() != self.n + 1 {
            return Err(Error::ShapeMismatch(format!(
                "ambient vector has length {}, expected {}",
                w.len(),
                self.n + 1
            )));
        }
        let j = self.embedding_jacobian(x)?;
        // g = lambda I, so g^{-1} J^T w = J^T w / lambda.
        let lambda = self.conformal_factor(&x.coords);
        Ok(TangentVector::new(x.clone(), j.transpose() * w / lambda))
    }
}
