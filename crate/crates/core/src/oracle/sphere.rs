//! Spectral heat kernel on the m-sphere (m >= 2):
//!
//! `p_t(x, y) = sum_l exp(-l(l+m-1) t/2) (2l+m-1)/(m-1) C_l^{(m-1)/2}(<x,y>) / A_m`
//!
//! with Gegenbauer polynomials `C_l^{(alpha)}` evaluated by their
//! three-term recursion and `A_m` the surface area of the unit m-sphere.
//! The z-derivative series uses `d/dz C_l^{(alpha)} = 2 alpha C_{l-1}^{(alpha+1)}`.

use super::{ScoreProvider, SeriesTruncation, SPHERE_T_MIN};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldId, Point, Sphere, TangentVector};
use crate::scalar::Scalar;

/// Relative size the final series term may have before the evaluation is
/// rejected as non-convergent at this diffusion time.
const CONVERGENCE_TOL: f64 = 1e-5;

/// Relative cancellation floor: below this ratio of signed sum to absolute
/// sum the double-precision series carries no significant digits.
const CANCELLATION_TOL: f64 = 1e-12;

/// Gegenbauer polynomial `C_l^{(alpha)}(z)` by the three-term recursion
/// `l C_l = 2 (l - 1 + alpha) z C_{l-1} - (l + 2 alpha - 2) C_{l-2}`.
pub fn gegenbauer<T: Scalar>(l: usize, alpha: T, z: T) -> T {
    let mut prev2 = T::one();
    if l == 0 {
        return prev2;
    }
    let mut prev = T::of(2.0) * alpha * z;
    if l == 1 {
        return prev;
    }
    for k in 2..=l {
        let kf = T::of(k as f64);
        let c = (T::of(2.0) * (kf - T::one() + alpha) * z * prev
            - (kf + T::of(2.0) * alpha - T::of(2.0)) * prev2)
            / kf;
        prev2 = prev;
        prev = c;
    }
    prev
}

/// Surface area of the unit m-sphere, `2 pi^{(m+1)/2} / Gamma((m+1)/2)`.
pub fn sphere_area(m: usize) -> f64 {
    let half = (m + 1) as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(half)
}

/// Gamma function for positive integer or half-integer arguments.
fn gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(
        twice >= 1 && ((2.0 * x) - twice as f64).abs() < 1e-9,
        "argument must be a positive multiple of 1/2"
    );
    let mut value = if twice % 2 == 0 {
        1.0 // Gamma(1)
    } else {
        std::f64::consts::PI.sqrt() // Gamma(1/2)
    };
    let mut arg = if twice % 2 == 0 { 1.0 } else { 0.5 };
    while arg + 1e-9 < x {
        value *= arg;
        arg += 1.0;
    }
    value
}

struct SphereKernelEval<T> {
    p: T,
    dp_dz: T,
    dp_dt: T,
}

#[derive(Debug, Clone)]
pub struct SphereOracle {
    m: usize,
    trunc: SeriesTruncation,
    area: f64,
    sphere: Sphere,
}

impl SphereOracle {
    pub fn new(m: usize, trunc: SeriesTruncation) -> Self {
        assert!(m >= 2, "spectral sphere kernel needs m >= 2; use the circle kernel for m = 1");
        SphereOracle {
            m,
            trunc,
            area: sphere_area(m),
            sphere: Sphere::new(m),
        }
    }

    /// Kernel, z-derivative and t-derivative at inner product `z`,
    /// all including the 1/area normalization.
    fn series<T: Scalar>(&self, z: T, t: T) -> Result<SphereKernelEval<T>> {
        let m = T::of(self.m as f64);
        let alpha = (m - T::one()) * T::of(0.5);
        let inv_area = T::of(1.0 / self.area);
        let tail = T::of(self.trunc.tail_tol);
        let l_max = self.trunc.sphere_max_degree;

        // Rolling Gegenbauer states for alpha (kernel) and alpha + 1
        // (derivative series).
        let mut ca_prev2 = T::one();
        let mut ca_prev = T::of(2.0) * alpha * z;
        let ap1 = alpha + T::one();
        let mut cb_prev2 = T::one();
        let mut cb_prev = T::of(2.0) * ap1 * z;

        let mut p = T::zero();
        let mut p_abs = T::zero();
        let mut dz = T::zero();
        let mut dz_abs = T::zero();
        let mut dt = T::zero();
        let mut dt_abs = T::zero();
        // Largest [term magnitude / signed partial sum] of the last
        // accumulated degree, across the three series. Signed sums are the
        // reference: near z = 0 they sit far below the term scale and the
        // series must keep running until its own tail is negligible.
        let mut last_rel: T = T::of(f64::INFINITY);

        for l in 0..=l_max {
            let lf = T::of(l as f64);
            let ca = match l {
                0 => T::one(),
                1 => ca_prev,
                _ => {
                    let c = (T::of(2.0) * (lf - T::one() + alpha) * z * ca_prev
                        - (lf + T::of(2.0) * alpha - T::of(2.0)) * ca_prev2)
                        / lf;
                    ca_prev2 = ca_prev;
                    ca_prev = c;
                    c
                }
            };
            let eig = lf * (lf + m - T::one()) * T::of(0.5);
            let w = (-eig * t).exp();
            let mult = (T::of(2.0) * lf + m - T::one()) / (m - T::one());
            let term_p = w * mult * ca * inv_area;
            p += term_p;
            p_abs += term_p.abs();
            let term_t = -eig * term_p;
            dt += term_t;
            dt_abs += term_t.abs();
            let mut term_z_abs = T::zero();

            if l >= 1 {
                // C_{l-1}^{(alpha+1)} for the z-derivative series.
                let cb = match l {
                    1 => T::one(),
                    2 => cb_prev,
                    _ => {
                        let k = lf - T::one();
                        let c = (T::of(2.0) * (k - T::one() + ap1) * z * cb_prev
                            - (k + T::of(2.0) * ap1 - T::of(2.0)) * cb_prev2)
                            / k;
                        cb_prev2 = cb_prev;
                        cb_prev = c;
                        c
                    }
                };
                let term_z = w * (T::of(2.0) * lf + m - T::one()) * cb * inv_area;
                dz += term_z;
                dz_abs += term_z.abs();
                term_z_abs = term_z.abs();
            }

            let ratio = |term_abs: T, signed: T| {
                if signed.abs() > T::zero() {
                    term_abs / signed.abs()
                } else if term_abs > T::zero() {
                    T::of(f64::INFINITY)
                } else {
                    T::zero()
                }
            };
            // dp/dt legitimately crosses zero (kernel peak time); measure
            // its tail against the natural scale p / t as well.
            let dt_scale = dt.abs().max(p.abs() / t);
            last_rel = ratio(term_p.abs(), p)
                .max(ratio(term_t.abs(), dt_scale))
                .max(ratio(term_z_abs, dz));
            if l >= 8 && last_rel < tail {
                break;
            }
        }

        if last_rel > T::of(CONVERGENCE_TOL) {
            return Err(Error::SmallTime {
                t: t.as_f64(),
                t_min: SPHERE_T_MIN,
            });
        }
        // The alternating kernel sum loses all significant digits once its
        // value sits below the rounding noise of the absolute sum; the
        // derivative ratios dz/p, dt/p inherit the same noise floor.
        // (dz and dt may legitimately be small: dp/dt crosses zero at the
        // kernel's peak time, so only p is guarded.)
        let cancel = T::of(CANCELLATION_TOL);
        if p <= T::zero() || p < cancel * p_abs {
            return Err(Error::Numerical(format!(
                "sphere kernel series cancels catastrophically at t = {} (points too far apart); \
                 increase the diffusion time",
                t.as_f64()
            )));
        }
        Ok(SphereKernelEval { p, dp_dz: dz, dp_dt: dt })
    }
}

impl<T: Scalar> ScoreProvider<T> for SphereOracle {
    fn manifold_id(&self) -> ManifoldId {
        ManifoldId::Sphere(self.m)
    }

    fn t_range(&self) -> (T, T) {
        (T::of(SPHERE_T_MIN), T::of(f64::INFINITY))
    }

    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>> {
        self.check_t(t)?;
        let xh = self.sphere.embed(x)?;
        let yh = self.sphere.embed(y)?;
        let z = xh.dot(&yh).clamp(-T::one(), T::one());
        let eval = self.series(z, t)?;
        // Ambient gradient of log p is (p'/p) x; its tangential part at y
        // is (p'/p) (x - z y).
        let factor = eval.dp_dz / eval.p;
        let ambient = (&xh - &yh * z) * factor;
        self.sphere.project_to_tangent(y, &ambient)
    }

    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        self.check_t(t)?;
        let xh = self.sphere.embed(x)?;
        let yh = self.sphere.embed(y)?;
        let z = xh.dot(&yh).clamp(-T::one(), T::one());
        let eval = self.series(z, t)?;
        Ok(eval.dp_dt / eval.p)
    }

    fn log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Option<Result<T>> {
        Some((|| {
            self.check_t(t)?;
            let xh = self.sphere.embed(x)?;
            let yh = self.sphere.embed(y)?;
            let z = xh.dot(&yh).clamp(-T::one(), T::one());
            let eval = self.series(z, t)?;
            Ok(eval.p.ln())
        })())
    }
}
