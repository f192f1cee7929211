//! Landmark shape space: `points` labeled landmarks in R^`ambient` with
//! the cometric given by the Gaussian kernel matrix (bandwidth parameter
//! alpha = 1), assembled blockwise per ambient dimension. The metric is
//! the dense inverse of the kernel matrix; coincident landmarks make the
//! kernel singular and are rejected.

use super::{invert_spd, Manifold, ManifoldId, Point, TangentVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Landmarks {
    points: usize,
    ambient: usize,
}

impl Landmarks {
    pub fn new(points: usize, ambient: usize) -> Self {
        assert!(points >= 1 && ambient >= 1, "landmarks need k >= 1, a >= 1");
        Landmarks { points, ambient }
    }

    /// Canonical starting configuration: first coordinate equally spaced in
    /// [-5, 5], remaining coordinates zero.
    pub fn canonical_start<T: Scalar>(&self) -> DVector<T> {
        let mut q = DVector::zeros(self.points * self.ambient);
        for i in 0..self.points {
            let frac = if self.points == 1 {
                0.0
            } else {
                -5.0 + 10.0 * i as f64 / (self.points - 1) as f64
            };
            q[i * self.ambient] = T::of(frac);
        }
        q
    }

    fn landmark<'a, T: Scalar>(&self, q: &'a DVector<T>, i: usize) -> &'a [T] {
        &q.as_slice()[i * self.ambient..(i + 1) * self.ambient]
    }

    /// Gaussian kernel value between landmarks i and j.
    fn kernel_entry<T: Scalar>(&self, q: &DVector<T>, i: usize, j: usize) -> T {
        let pi = self.landmark(q, i);
        let pj = self.landmark(q, j);
        let mut d2 = T::zero();
        for c in 0..self.ambient {
            let diff = pi[c] - pj[c];
            d2 += diff * diff;
        }
        (-d2 * T::of(0.5)).exp()
    }

    /// Kernel (cometric) matrix K(q).
    pub fn kernel_matrix<T: Scalar>(&self, q: &DVector<T>) -> DMatrix<T> {
        let d = self.points * self.ambient;
        let mut k = DMatrix::zeros(d, d);
        for i in 0..self.points {
            for j in i..self.points {
                let v = self.kernel_entry(q, i, j);
                for c in 0..self.ambient {
                    k[(i * self.ambient + c, j * self.ambient + c)] = v;
                    k[(j * self.ambient + c, i * self.ambient + c)] = v;
                }
            }
        }
        k
    }

    /// Coordinate derivatives of K: `out[m] = dK/dq^m`.
    fn kernel_deriv<T: Scalar>(&self, q: &DVector<T>) -> Vec<DMatrix<T>> {
        let d = self.points * self.ambient;
        let mut out = vec![DMatrix::zeros(d, d); d];
        for i in 0..self.points {
            for j in 0..self.points {
                if i == j {
                    continue;
                }
                let kij = self.kernel_entry(q, i, j);
                let pi = self.landmark(q, i);
                let pj = self.landmark(q, j);
                for c in 0..self.ambient {
                    // d k(p_i, p_j) / d p_i^c = -(p_i^c - p_j^c) k_ij
                    let dv = -(pi[c] - pj[c]) * kij;
                    let m = i * self.ambient + c;
                    for cc in 0..self.ambient {
                        out[m][(i * self.ambient + cc, j * self.ambient + cc)] += dv;
                        out[m][(j * self.ambient + cc, i * self.ambient + cc)] += dv;
                    }
                }
            }
        }
        out
    }
}

impl<T: Scalar> Manifold<T> for Landmarks {
    fn id(&self) -> ManifoldId {
        ManifoldId::Landmarks {
            points: self.points,
            ambient: self.ambient,
        }
    }

    fn metric(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let k = self.kernel_matrix(&x.coords);
        invert_spd(&k).map_err(|_| {
            Error::DegenerateMetric(
                "landmark kernel matrix is singular (coincident landmarks)".into(),
            )
        })
    }

    fn metric_deriv(&self, x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        if let Err(e) = self.check_point(x) {
            return Some(Err(e));
        }
        let k = self.kernel_matrix(&x.coords);
        let g = match invert_spd(&k) {
            Ok(g) => g,
            Err(_) => {
                return Some(Err(Error::DegenerateMetric(
                    "landmark kernel matrix is singular (coincident landmarks)".into(),
                )))
            }
        };
        let dk = self.kernel_deriv(&x.coords);
        // g = K^{-1}  =>  dg/dq^m = -K^{-1} (dK/dq^m) K^{-1}
        Some(Ok(dk.into_iter().map(|dkm| -(&g * dkm * &g)).collect()))
    }

    fn metric_at(&self, x: &Point<T>) -> Result<super::MetricData<T>> {
        self.check_point(x)?;
        let k = self.kernel_matrix(&x.coords);
        let chol_k = nalgebra::Cholesky::new(k.clone()).ok_or_else(|| {
            Error::DegenerateMetric(
                "landmark kernel matrix is singular (coincident landmarks)".into(),
            )
        })?;
        let g = chol_k.inverse();
        let mut log_det = T::zero();
        for i in 0..k.nrows() {
            // log det g = -log det K
            log_det -= chol_k.l()[(i, i)].ln();
        }
        Ok(super::MetricData {
            sqrt_g_inv: chol_k.l(),
            g_inv: k,
            christoffel: self.christoffel(x)?,
            g,
            log_det_g: log_det * T::of(2.0),
        })
    }

    fn embed(&self, x: &Point<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        Ok(x.coords.clone())
    }

    fn embedding_jacobian(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let d = self.points * self.ambient;
        Ok(DMatrix::identity(d, d))
    }

    fn project_to_tangent(&self, x: &Point<T>, w: &DVector<T>) -> Result<TangentVector<T>> {
        if w.len() != self.points * self.ambient {
            return Err(Error::ShapeMismatch(format!(
                "ambient vector has length {}, expected {}",
                w.len(),
                self.points * self.ambient
            )));
        }
        // Global chart equals the ambient space; projection is the identity.
        Ok(TangentVector::new(x.clone(), w.clone()))
    }
}
