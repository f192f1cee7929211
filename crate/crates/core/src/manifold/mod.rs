//! Riemannian geometry core: charts, metric data, geodesics and
//! tangent-space utilities for the supported manifold families.

mod euclidean;
mod landmarks;
mod sphere;
mod spd;
mod sym;

pub use euclidean::Euclidean;
pub use landmarks::Landmarks;
pub use spd::Spd;
pub use sphere::Sphere;
pub use sym::Sym;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Identifier of a concrete manifold, parsed from / rendered as the CLI
/// forms `r<n>`, `s<n>`, `sym<n>`, `spd<n>`, `lm<k>x<a>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldId {
    /// Euclidean space of the given dimension.
    Euclidean(usize),
    /// Unit n-sphere embedded in R^{n+1}.
    Sphere(usize),
    /// Symmetric n x n matrices with the Frobenius pullback metric.
    Sym(usize),
    /// Positive-definite n x n matrices, pullback metric through the
    /// Cholesky-style parameterization f(x) = l(x) l(x)^T.
    Spd(usize),
    /// `points` labeled landmarks in R^`ambient` with a Gaussian-kernel
    /// cometric.
    Landmarks { points: usize, ambient: usize },
}

impl ManifoldId {
    /// Intrinsic dimension of the manifold.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldId::Euclidean(n) => n,
            ManifoldId::Sphere(n) => n,
            ManifoldId::Sym(n) | ManifoldId::Spd(n) => n * (n + 1) / 2,
            ManifoldId::Landmarks { points, ambient } => points * ambient,
        }
    }

    /// Dimension of the ambient representation used by `embed`.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldId::Euclidean(n) => n,
            ManifoldId::Sphere(n) => n + 1,
            ManifoldId::Sym(n) | ManifoldId::Spd(n) => n * n,
            ManifoldId::Landmarks { points, ambient } => points * ambient,
        }
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ManifoldId::Euclidean(n) => write!(f, "r{n}"),
            ManifoldId::Sphere(n) => write!(f, "s{n}"),
            ManifoldId::Sym(n) => write!(f, "sym{n}"),
            ManifoldId::Spd(n) => write!(f, "spd{n}"),
            ManifoldId::Landmarks { points, ambient } => write!(f, "lm{points}x{ambient}"),
        }
    }
}

impl FromStr for ManifoldId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown manifold identifier `{s}`"));
        let parse_dim = |digits: &str| -> Result<usize> {
            let n: usize = digits.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(Error::InvalidInput(format!(
                    "manifold `{s}` must have positive dimension parameters"
                )));
            }
            Ok(n)
        };
        if let Some(rest) = s.strip_prefix("lm") {
            let (k, a) = rest.split_once('x').ok_or_else(bad)?;
            return Ok(ManifoldId::Landmarks {
                points: parse_dim(k)?,
                ambient: parse_dim(a)?,
            });
        }
        if let Some(rest) = s.strip_prefix("sym") {
            return Ok(ManifoldId::Sym(parse_dim(rest)?));
        }
        if let Some(rest) = s.strip_prefix("spd") {
            return Ok(ManifoldId::Spd(parse_dim(rest)?));
        }
        if let Some(rest) = s.strip_prefix('r') {
            return Ok(ManifoldId::Euclidean(parse_dim(rest)?));
        }
        if let Some(rest) = s.strip_prefix('s') {
            return Ok(ManifoldId::Sphere(parse_dim(rest)?));
        }
        Err(bad())
    }
}

impl Serialize for ManifoldId {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ManifoldId {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Point in chart coordinates. `anchor` identifies the chart center for
/// manifolds with anchored charts (the sphere's stereographic charts);
/// it is `None` for manifolds with a single global chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T: Scalar> {
    pub coords: DVector<T>,
    pub anchor: Option<DVector<T>>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: DVector<T>) -> Self {
        Point { coords, anchor: None }
    }

    pub fn with_anchor(coords: DVector<T>, anchor: DVector<T>) -> Self {
        Point {
            coords,
            anchor: Some(anchor),
        }
    }

    pub fn from_slice(coords: &[T]) -> Self {
        Point::new(DVector::from_row_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
            && self
                .anchor
                .as_ref()
                .map_or(true, |a| a.iter().all(|c| c.is_finite()))
    }
}

/// Tangent vector: components in the chart of `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Scalar> {
    pub base: Point<T>,
    pub components: DVector<T>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(base: Point<T>, components: DVector<T>) -> Self {
        TangentVector { base, components }
    }

    pub fn zero_at(base: Point<T>) -> Self {
        let d = base.dim();
        TangentVector {
            base,
            components: DVector::zeros(d),
        }
    }
}

/// Metric tensor data at a point: the metric, its inverse, a factor `S`
/// with `S S^T = g^{-1}`, the Christoffel symbols and `log det g`.
#[derive(Debug, Clone)]
pub struct MetricData<T: Scalar> {
    pub g: DMatrix<T>,
    pub g_inv: DMatrix<T>,
    pub sqrt_g_inv: DMatrix<T>,
    /// `christoffel[k]` is the d x d matrix of Gamma^k_{ij}.
    pub christoffel: Vec<DMatrix<T>>,
    pub log_det_g: T,
}

/// Relative step used for finite-difference metric derivatives.
pub(crate) const METRIC_FD_STEP: f64 = 1e-5;

/// Shared geometry interface implemented by every manifold family.
///
/// Default methods provide the generic machinery (Christoffels from metric
/// derivatives, RK4 geodesics, tangent projection through the embedding
/// Jacobian); families override whatever they have in closed form.
pub trait Manifold<T: Scalar>: Send + Sync {
    fn id(&self) -> ManifoldId;

    fn dim(&self) -> usize {
        self.id().dim()
    }

    fn ambient_dim(&self) -> usize {
        self.id().ambient_dim()
    }

    /// Validate chart coordinates and anchor for this manifold.
    fn check_point(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, manifold {} has dimension {}",
                x.dim(),
                self.id(),
                self.dim()
            )));
        }
        if !x.is_finite() {
            return Err(Error::InvalidInput("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// Metric tensor at `x`.
    fn metric(&self, x: &Point<T>) -> Result<DMatrix<T>>;

    /// Exact coordinate derivatives of the metric, `out[l] = d g / d x^l`,
    /// when the family has them in closed form.
    fn metric_deriv(&self, x: &Point<T>) -> Option<Result<Vec<DMatrix<T>>>> {
        let _ = x;
        None
    }

    /// Metric derivatives: closed form when available, otherwise central
    /// finite differences with relative step `1e-5`.
    fn metric_deriv_any(&self, x: &Point<T>) -> Result<Vec<DMatrix<T>>> {
        if let Some(exact) = self.metric_deriv(x) {
            return exact;
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for l in 0..d {
            let h = T::of(METRIC_FD_STEP) * T::one().max(x.coords[l].abs());
            let mut xp = x.clone();
            xp.coords[l] += h;
            let mut xm = x.clone();
            xm.coords[l] -= h;
            let gp = self.metric(&xp)?;
            let gm = self.metric(&xm)?;
            let dg = (gp - gm) / (T::of(2.0) * h);
            if dg.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite metric derivative at coordinate {l}"
                )));
            }
            out.push(dg);
        }
        Ok(out)
    }

    /// Christoffel symbols `Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})`.
    fn christoffel(&self, x: &Point<T>) -> Result<Vec<DMatrix<T>>> {
        let d = self.dim();
        let g = self.metric(x)?;
        let g_inv = invert_spd(&g)?;
        let dg = self.metric_deriv_any(x)?;
        let mut gamma = vec![DMatrix::<T>::zeros(d, d); d];
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut acc = T::zero();
                    for l in 0..d {
                        let term = dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)];
                        acc += g_inv[(k, l)] * term;
                    }
                    let v = acc * T::of(0.5);
                    gamma[k][(i, j)] = v;
                    gamma[k][(j, i)] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// A factor `S` with `S S^T = g^{-1}`, without the Christoffel symbols
    /// (the per-step cost of the tangent-space sampler).
    fn sqrt_g_inv(&self, x: &Point<T>) -> Result<DMatrix<T>> {
        let g = self.metric(x)?;
        let g_inv = invert_spd(&g)?;
        nalgebra::Cholesky::new(g_inv)
            .map(|c| c.l())
            .ok_or_else(|| {
                Error::DegenerateMetric(format!("inverse metric not SPD on {}", self.id()))
            })
    }

    /// Full metric data at `x`.
    fn metric_at(&self, x: &Point<T>) -> Result<MetricData<T>> {
        self.check_point(x)?;
        let g = self.metric(x)?;
        let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(|| {
            Error::DegenerateMetric(format!("metric not positive definite on {}", self.id()))
        })?;
        let mut log_det = T::zero();
        for i in 0..g.nrows() {
            log_det += chol.l()[(i, i)].ln();
        }
        let log_det_g = log_det * T::of(2.0);
        let g_inv = chol.inverse();
        let sqrt_g_inv = nalgebra::Cholesky::new(g_inv.clone())
            .ok_or_else(|| {
                Error::DegenerateMetric(format!("inverse metric not SPD on {}", self.id()))
            })?
            .l();
        let christoffel = self.christoffel(x)?;
        Ok(MetricData {
            g,
            g_inv,
            sqrt_g_inv,
            christoffel,
            log_det_g,
        })
    }

    /// Exponential map. Default: fixed-step RK4 on the geodesic equation,
    /// 100 steps over unit time.
    fn exp(&self, v: &TangentVector<T>) -> Result<Point<T>> {
        self.exp_rk4(v, 100)
    }

    /// RK4 integration of the geodesic equation from `v.base` with initial
    /// velocity `v`, over unit time.
    fn exp_rk4(&self, v: &TangentVector<T>, steps: usize) -> Result<Point<T>> {
        let traj = self.geodesic_trajectory(v, steps)?;
        let (coords, _) = traj.into_iter().last().expect("non-empty trajectory");
        Ok(Point {
            coords,
            anchor: v.base.anchor.clone(),
        })
    }

    /// States `(position, velocity)` along the RK4 geodesic, including the
    /// initial state; `steps + 1` entries.
    fn geodesic_trajectory(
        &self,
        v: &TangentVector<T>,
        steps: usize,
    ) -> Result<Vec<(DVector<T>, DVector<T>)>> {
        self.check_point(&v.base)?;
        let d = self.dim();
        let anchor = v.base.anchor.clone();
        let accel = |u: &DVector<T>, w: &DVector<T>| -> Result<DVector<T>> {
            let p = Point {
                coords: u.clone(),
                anchor: anchor.clone(),
            };
            let gamma = self.christoffel(&p)?;
            let mut a = DVector::zeros(d);
            for k in 0..d {
                a[k] = -(w.transpose() * &gamma[k] * w)[(0, 0)];
            }
            Ok(a)
        };
        let h = T::one() / T::of(steps as f64);
        let mut u = v.base.coords.clone();
        let mut w = v.components.clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push((u.clone(), w.clone()));
        for _ in 0..steps {
            let k1u = w.clone();
            let k1w = accel(&u, &w)?;
            let half = h * T::of(0.5);
            let u2 = &u + &k1u * half;
            let w2 = &w + &k1w * half;
            let k2u = w2.clone();
            let k2w = accel(&u2, &w2)?;
            let u3 = &u + &k2u * half;
            let w3 = &w + &k2w * half;
            let k3u = w3.clone();
            let k3w = accel(&u3, &w3)?;
            let u4 = &u + &k3u * h;
            let w4 = &w + &k3w * h;
            let k4u = w4.clone();
            let k4w = accel(&u4, &w4)?;
            let sixth = h / T::of(6.0);
            u += (k1u + k2u * T::of(2.0) + k3u * T::of(2.0) + k4u) * sixth;
            w += (k1w + k2w * T::of(2.0) + k3w * T::of(2.0) + k4w) * sixth;
            if u.iter().any(|c| !c.is_finite()) || w.iter().any(|c| !c.is_finite()) {
                return Err(Error::IntegrationFailure(format!(
                    "non-finite geodesic state on {}",
                    self.id()
                )));
            }
            out.push((u.clone(), w.clone()));
        }
        Ok(out)
    }

    /// Logarithmic map, available only where a closed form exists.
    fn log(&self, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
        let _ = (x, y);
        Err(Error::Unsupported(format!(
            "no closed-form logarithmic map on {}; use the score-based log map",
            self.id()
        )))
    }

    /// Geodesic distance: metric norm of the logarithmic map.
    fn distance(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        let v = self.log(x, y)?;
        self.norm(&v)
    }

    /// Metric inner product of two tangent vectors at the same base point.
    fn inner(&self, u: &TangentVector<T>, v: &TangentVector<T>) -> Result<T> {
        let g = self.metric(&u.base)?;
        Ok((u.components.transpose() * g * &v.components)[(0, 0)])
    }

    /// Metric norm of a tangent vector.
    fn norm(&self, v: &TangentVector<T>) -> Result<T> {
        Ok(self.inner(v, v)?.max(T::zero()).sqrt())
    }

    /// Express the same manifold point in the chart centered at itself.
    /// Identity for manifolds with a single global chart.
    fn recenter(&self, x: &Point<T>) -> Point<T> {
        x.clone()
    }

    /// Chart re-centering trigger used by samplers and optimizers.
    fn needs_recenter(&self, x: &Point<T>) -> bool {
        let _ = x;
        false
    }

    /// Express `p` in the chart of `reference` (identity for global charts).
    fn express_in_chart_of(&self, p: &Point<T>, reference: &Point<T>) -> Point<T> {
        let _ = reference;
        p.clone()
    }

    /// Ambient representation of a point.
    fn embed(&self, x: &Point<T>) -> Result<DVector<T>>;

    /// Jacobian of `embed` with respect to chart coordinates (ambient x d).
    fn embedding_jacobian(&self, x: &Point<T>) -> Result<DMatrix<T>>;

    /// Push a tangent vector forward to ambient coordinates.
    fn embed_tangent(&self, v: &TangentVector<T>) -> Result<DVector<T>> {
        Ok(self.embedding_jacobian(&v.base)? * &v.components)
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at
    /// `x`, returned in chart components: `g^{-1} J^T w`.
    fn project_to_tangent(&self, x: &Point<T>, w: &DVector<T>) -> Result<TangentVector<T>> {
        if w.len() != self.ambient_dim() {
            return Err(Error::ShapeMismatch(format!(
                "ambient vector has length {}, expected {}",
                w.len(),
                self.ambient_dim()
            )));
        }
        let j = self.embedding_jacobian(x)?;
        let g = self.metric(x)?;
        let g_inv = invert_spd(&g)?;
        let comps = g_inv * (j.transpose() * w);
        Ok(TangentVector::new(x.clone(), comps))
    }
}

/// Invert a symmetric positive-definite matrix via Cholesky.
pub(crate) fn invert_spd<T: Scalar>(g: &DMatrix<T>) -> Result<DMatrix<T>> {
    nalgebra::Cholesky::new(g.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| Error::DegenerateMetric("matrix not positive definite".into()))
}

/// Construct the manifold for an identifier.
pub fn make<T: Scalar>(id: ManifoldId) -> Box<dyn Manifold<T>> {
    match id {
        ManifoldId::Euclidean(n) => Box::new(Euclidean::new(n)),
        ManifoldId::Sphere(n) => Box::new(Sphere::new(n)),
        ManifoldId::Sym(n) => Box::new(Sym::new(n)),
        ManifoldId::Spd(n) => Box::new(Spd::new(n)),
        ManifoldId::Landmarks { points, ambient } => Box::new(Landmarks::new(points, ambient)),
    }
}

/// Canonical starting point per family: the origin on R^n, the north pole
/// on S^n, identity coordinates on Sym(n)/SPD(n), and landmarks equally
/// spaced along the first axis in [-5, 5].
pub fn canonical_basepoint<T: Scalar>(id: ManifoldId) -> Point<T> {
    match id {
        ManifoldId::Euclidean(n) => Point::new(DVector::zeros(n)),
        ManifoldId::Sphere(n) => Sphere::new(n).north_point(),
        ManifoldId::Sym(n) => Point::new(Sym::new(n).identity_coords()),
        ManifoldId::Spd(n) => Point::new(Spd::new(n).identity_coords()),
        ManifoldId::Landmarks { points, ambient } => {
            Point::new(Landmarks::new(points, ambient).canonical_start())
        }
    }
}

/// Riemannian divergence of a vector field at `x`:
/// `div V = dV^m/dx^m + V^k d(1/2 log |g|)/dx^k` in local coordinates.
///
/// The field derivative uses central finite differences with relative step
/// `1e-5`; the `log |g|` derivative uses exact metric derivatives when the
/// family provides them.
pub fn divergence<T: Scalar, F>(m: &dyn Manifold<T>, field: F, x: &Point<T>) -> Result<T>
where
    F: Fn(&Point<T>) -> DVector<T>,
{
    m.check_point(x)?;
    let d = m.dim();
    let mut div = T::zero();
    for k in 0..d {
        let h = T::of(METRIC_FD_STEP) * T::one().max(x.coords[k].abs());
        let mut xp = x.clone();
        xp.coords[k] += h;
        let mut xm = x.clone();
        xm.coords[k] -= h;
        div += (field(&xp)[k] - field(&xm)[k]) / (T::of(2.0) * h);
    }
    let g = m.metric(x)?;
    let g_inv = invert_spd(&g)?;
    let dg = m.metric_deriv_any(x)?;
    let v = field(x);
    for k in 0..d {
        // d_k log det g = tr(g^{-1} d_k g)
        let mut tr = T::zero();
        for i in 0..d {
            for j in 0..d {
                tr += g_inv[(i, j)] * dg[k][(j, i)];
            }
        }
        div += v[k] * tr * T::of(0.5);
    }
    if !div.is_finite() {
        return Err(Error::Numerical("non-finite divergence".into()));
    }
    Ok(div)
}
