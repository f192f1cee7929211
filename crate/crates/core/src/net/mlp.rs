//! Dense MLP with hyperbolic-tangent hidden layers, identity output,
//! batched forward/backward passes and an Adam optimizer.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Multilayer perceptron; `weights[l]` maps layer `l` to layer `l + 1`.
#[derive(Debug, Clone)]
pub struct Mlp<T: Scalar> {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<DMatrix<T>>,
    pub biases: Vec<DVector<T>>,
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone)]
pub struct MlpGrads<T: Scalar> {
    pub weights: Vec<DMatrix<T>>,
    pub biases: Vec<DVector<T>>,
}

/// Cached activations of a forward pass: `activations[0]` is the input,
/// `activations[l]` the post-activation output of layer `l`.
pub(crate) struct ForwardCache<T: Scalar> {
    pub activations: Vec<DMatrix<T>>,
}

impl<T: Scalar> Mlp<T> {
    /// Glorot-uniform initialization; draws are made in `f64` so the same
    /// seed gives the same network for every scalar type.
    pub fn init<R: Rng + ?Sized>(layer_dims: &[usize], rng: &mut R) -> Self {
        assert!(layer_dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                T::of(rng.gen_range(-bound..bound))
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Mlp {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn zeros(layer_dims: &[usize]) -> Self {
        let weights = layer_dims
            .windows(2)
            .map(|w| DMatrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_dims.windows(2).map(|w| DVector::zeros(w[1])).collect();
        Mlp {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    fn affine(&self, l: usize, a: &DMatrix<T>) -> DMatrix<T> {
        let mut z = &self.weights[l] * a;
        for mut col in z.column_iter_mut() {
            col += &self.biases[l];
        }
        z
    }

    /// Batched forward pass: `input` is (in_dim x batch), output
    /// (out_dim x batch).
    pub fn forward(&self, input: &DMatrix<T>) -> Result<DMatrix<T>> {
        let mut cache = self.forward_cached(input)?;
        Ok(cache.activations.pop().expect("non-empty activations"))
    }

    pub(crate) fn forward_cached(&self, input: &DMatrix<T>) -> Result<ForwardCache<T>> {
        if input.nrows() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "network expects input dimension {}, got {}",
                self.input_dim(),
                input.nrows()
            )));
        }
        let last = self.n_layers() - 1;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(input.clone());
        for l in 0..self.n_layers() {
            let mut z = self.affine(l, activations.last().unwrap());
            if l != last {
                z.apply(|v| *v = v.tanh());
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Reverse pass: parameter gradients for upstream `d_out = dL/d output`,
    /// plus the input gradient `dL/d input`.
    pub(crate) fn backward(
        &self,
        cache: &ForwardCache<T>,
        d_out: &DMatrix<T>,
    ) -> (MlpGrads<T>, DMatrix<T>) {
        let last = self.n_layers() - 1;
        let mut grads = MlpGrads {
            weights: self
                .layer_dims
                .windows(2)
                .map(|w| DMatrix::zeros(w[1], w[0]))
                .collect(),
            biases: self.layer_dims.windows(2).map(|w| DVector::zeros(w[1])).collect(),
        };
        // delta = dL/dz at the current layer; output layer is linear.
        let mut delta = d_out.clone();
        for l in (0..=last).rev() {
            if l != last {
                // delta arrived as dL/da; convert through tanh.
                let a = &cache.activations[l + 1];
                delta.zip_apply(a, |d, av| *d *= T::one() - av * av);
            }
            grads.weights[l] = &delta * cache.activations[l].transpose();
            let mut b = DVector::zeros(delta.nrows());
            for col in delta.column_iter() {
                b += col;
            }
            grads.biases[l] = b;
            delta = self.weights[l].transpose() * delta;
        }
        (grads, delta)
    }

    /// Flat parameter vector: per layer, weight matrix row-major then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.n_layers() {
            let w = &self.weights[l];
            for i in 0..w.nrows() {
                for j in 0..w.ncols() {
                    out.push(w[(i, j)].as_f64());
                }
            }
            out.extend(self.biases[l].iter().map(|v| v.as_f64()));
        }
        out
    }

    pub fn from_flat(layer_dims: &[usize], flat: &[f64]) -> Result<Self> {
        let expected = super::Checkpoint::parameter_count(layer_dims);
        if flat.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} parameters for dims {layer_dims:?}, got {}",
                flat.len()
            )));
        }
        let mut mlp = Self::zeros(layer_dims);
        let mut idx = 0;
        for l in 0..mlp.n_layers() {
            let (rows, cols) = (layer_dims[l + 1], layer_dims[l]);
            for i in 0..rows {
                for j in 0..cols {
                    mlp.weights[l][(i, j)] = T::of(flat[idx]);
                    idx += 1;
                }
            }
            for i in 0..rows {
                mlp.biases[l][i] = T::of(flat[idx]);
                idx += 1;
            }
        }
        Ok(mlp)
    }

    pub fn params_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Adam with bias correction over the network parameters.
#[derive(Debug, Clone)]
pub struct Adam<T: Scalar> {
    m_w: Vec<DMatrix<T>>,
    v_w: Vec<DMatrix<T>>,
    m_b: Vec<DVector<T>>,
    v_b: Vec<DVector<T>>,
    beta1: T,
    beta2: T,
    eps: T,
    step: usize,
}

impl<T: Scalar> Adam<T> {
    pub fn new(net: &Mlp<T>) -> Self {
        Adam {
            m_w: net.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            v_w: net.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            m_b: net.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
            v_b: net.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            step: 0,
        }
    }

    pub fn step(&mut self, net: &mut Mlp<T>, grads: &MlpGrads<T>, lr: T) {
        self.step += 1;
        let b1 = self.beta1;
        let b2 = self.beta2;
        let corr1 = T::one() - b1.powi(self.step as i32);
        let corr2 = T::one() - b2.powi(self.step as i32);
        let eps = self.eps;
        for l in 0..net.weights.len() {
            for (entry, (m, (v, g))) in net.weights[l].iter_mut().zip(
                self.m_w[l]
                    .iter_mut()
                    .zip(self.v_w[l].iter_mut().zip(grads.weights[l].iter())),
            ) {
                *m = b1 * *m + (T::one() - b1) * *g;
                *v = b2 * *v + (T::one() - b2) * *g * *g;
                let mhat = *m / corr1;
                let vhat = *v / corr2;
                *entry -= lr * mhat / (vhat.sqrt() + eps);
            }
            for (entry, (m, (v, g))) in net.biases[l].iter_mut().zip(
                self.m_b[l]
                    .iter_mut()
                    .zip(self.v_b[l].iter_mut().zip(grads.biases[l].iter())),
            ) {
                *m = b1 * *m + (T::one() - b1) * *g;
                *v = b2 * *v + (T::one() - b2) * *g * *g;
                let mhat = *m / corr1;
                let vhat = *v / corr2;
                *entry -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}
