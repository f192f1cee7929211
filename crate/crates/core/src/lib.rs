//! Estimation of intrinsic means, logarithmic maps and distances on
//! Riemannian manifolds from the score (gradient of the log heat kernel)
//! of Riemannian Brownian motion.
//!
//! The crate is organized around a small set of building blocks:
//!
//! * [`manifold`] — charts, metrics, geodesics and tangent-space utilities
//!   for five manifold families (Euclidean space, spheres, symmetric
//!   matrices, SPD matrices with a pullback metric, landmark spaces).
//! * [`sampler`] — simulation of Riemannian Brownian motion and
//!   construction of training corpora.
//! * [`oracle`] — closed-form heat kernels (Euclidean, circle, m-sphere)
//!   behind the same [`oracle::ScoreProvider`] interface as learned models.
//! * [`net`] — a from-scratch MLP with exact reverse-mode gradients,
//!   trained by denoising score matching.
//! * [`estimators`] — diffusion t-mean, Fréchet mean, score-based log map
//!   and Varadhan distances on top of any score provider.
//! * [`kmeans`] / [`regression`] — Riemannian k-means and maximum
//!   likelihood Riemannian regression.
//!
//! All numerical code is generic over the scalar type through [`Scalar`];
//! `f64` aliases are exported at the crate root.

pub mod error;
pub mod estimators;
pub mod io;
pub mod kmeans;
pub mod manifold;
pub mod net;
pub mod oracle;
pub mod regression;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Chart point with `f64` coordinates.
pub type Point64 = manifold::Point<f64>;
/// Tangent vector with `f64` components.
pub type TangentVector64 = manifold::TangentVector<f64>;
/// Metric data with `f64` entries.
pub type MetricData64 = manifold::MetricData<f64>;
/// Brownian path with `f64` state.
pub type BrownianPath64 = sampler::BrownianPath<f64>;
/// Training corpus with `f64` records.
pub type PathDataset64 = sampler::PathDataset<f64>;
/// Mean estimate with `f64` state.
pub type MeanEstimate64 = estimators::MeanEstimate<f64>;
