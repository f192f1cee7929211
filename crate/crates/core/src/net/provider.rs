//! Trained networks behind the [`ScoreProvider`] interface.

use super::mlp::Mlp;
use super::train::{DsmMode, NetKind};
use super::Checkpoint;
use crate::error::{Error, Result};
use crate::manifold::{self, Manifold, ManifoldId, Point, TangentVector};
use crate::oracle::ScoreProvider;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Score provider backed by a trained network. Scores are returned in the
/// crate's vector convention (Riemannian gradient in chart components):
/// embedded outputs are projected onto the tangent space and pulled back
/// through the chart, and metric-weighted checkpoints (which model
/// coordinate partials) are raised through the inverse metric. The time
/// derivative comes from the second-order evaluator over the network's
/// score field.
pub struct NetProvider<T: Scalar> {
    net: Mlp<T>,
    manifold: Box<dyn Manifold<T>>,
    embedded: bool,
    dsm_mode: DsmMode,
    kind: NetKind,
    t_range: (T, T),
}

impl<T: Scalar> NetProvider<T> {
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let net = Mlp::from_flat(&ckpt.layer_dims, &ckpt.params)?;
        let manifold = manifold::make::<T>(ckpt.manifold);
        let d = manifold.dim();
        let amb = manifold.ambient_dim();
        let expect_in = if ckpt.embedded { 2 * amb + 1 } else { 2 * d + 1 };
        let expect_out = match ckpt.kind {
            NetKind::Score => {
                if ckpt.embedded {
                    amb
                } else {
                    d
                }
            }
            NetKind::Potential => 1,
        };
        if net.input_dim() != expect_in || net.output_dim() != expect_out {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint network is {}x{}, manifold {} expects {}x{}",
                net.input_dim(),
                net.output_dim(),
                ckpt.manifold,
                expect_in,
                expect_out
            )));
        }
        Ok(NetProvider {
            net,
            manifold,
            embedded: ckpt.embedded,
            dsm_mode: ckpt.dsm_mode,
            kind: ckpt.kind,
            t_range: (T::of(ckpt.t_range.0), T::of(ckpt.t_range.1)),
        })
    }

    /// Network inputs for a batch of observations against one point.
    fn inputs(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<DMatrix<T>> {
        let m = self.manifold.as_ref();
        let n = xs.len();
        if self.embedded {
            let amb = m.ambient_dim();
            let ye = m.embed(y)?;
            let mut input = DMatrix::zeros(2 * amb + 1, n);
            for (c, x) in xs.iter().enumerate() {
                let xe = m.embed(x)?;
                for r in 0..amb {
                    input[(r, c)] = xe[r];
                    input[(amb + r, c)] = ye[r];
                }
                input[(2 * amb, c)] = t;
            }
            Ok(input)
        } else {
            let d = m.dim();
            let mut input = DMatrix::zeros(2 * d + 1, n);
            for (c, x) in xs.iter().enumerate() {
                // Chart-mode networks see raw chart coordinates; both points
                // must live in the same (global) chart.
                for r in 0..d {
                    input[(r, c)] = x.coords[r];
                    input[(d + r, c)] = y.coords[r];
                }
                input[(2 * d, c)] = t;
            }
            Ok(input)
        }
    }

    /// Raw network score columns (ambient in embedded mode, chart
    /// otherwise).
    fn raw_scores(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<DMatrix<T>> {
        let input = self.inputs(xs, y, t)?;
        match self.kind {
            NetKind::Score => self.net.forward(&input),
            NetKind::Potential => super::potential::potential_input_gradients(&self.net, &input),
        }
    }

    /// Unnormalized log-density value of a potential network.
    pub fn potential_value(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        if self.kind != NetKind::Potential {
            return Err(Error::Unsupported(
                "potential values are only defined for potential networks".into(),
            ));
        }
        let input = self.inputs(std::slice::from_ref(x), y, t)?;
        Ok(self.net.forward(&input)?[(0, 0)])
    }
}

impl<T: Scalar> ScoreProvider<T> for NetProvider<T> {
    fn manifold_id(&self) -> ManifoldId {
        self.manifold.id()
    }

    fn t_range(&self) -> (T, T) {
        self.t_range
    }

    fn score(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<TangentVector<T>> {
        Ok(self
            .score_batch(std::slice::from_ref(x), y, t)?
            .pop()
            .expect("one score"))
    }

    fn score_batch(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<Vec<TangentVector<T>>> {
        self.check_t(t)?;
        let m = self.manifold.as_ref();
        let raw = self.raw_scores(xs, y, t)?;
        let mut out = Vec::with_capacity(xs.len());
        if self.embedded {
            for c in 0..raw.ncols() {
                let col = raw.column(c).into_owned();
                // project_to_tangent projects and pulls back to the chart.
                out.push(m.project_to_tangent(y, &col)?);
            }
        } else {
            let raise = match self.dsm_mode {
                DsmMode::Isotropic => None,
                DsmMode::MetricWeighted => Some(m.metric_at(y)?.g_inv),
            };
            for c in 0..raw.ncols() {
                let col = raw.column(c).into_owned();
                let comps = match &raise {
                    Some(g_inv) => g_inv * col,
                    None => col,
                };
                out.push(TangentVector::new(y.clone(), comps));
            }
        }
        Ok(out)
    }

    fn dt_log_p(&self, x: &Point<T>, y: &Point<T>, t: T) -> Result<T> {
        super::dt::dt_log_p_from_score(self, self.manifold.as_ref(), x, y, t)
    }

    fn dt_log_p_batch(&self, xs: &[Point<T>], y: &Point<T>, t: T) -> Result<Vec<T>> {
        super::dt::dt_log_p_from_score_batch(self, self.manifold.as_ref(), xs, y, t)
    }
}
