//! Scalar potential network: the score is the exact reverse-mode gradient
//! of the network output with respect to the evaluation point `y`.
//! Training the gradient against DSM targets needs second-order
//! backpropagation: the parameter gradient of `sum_b r_b . grad_y out_b`
//! is computed with a forward tangent pass along `r` followed by a reverse
//! pass that carries adjoints for both the primal and tangent chains.

use super::mlp::{Mlp, MlpGrads};
use super::train::project_columns;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Rows of the input occupied by the evaluation point `y`; the layout is
/// `[x (k); y (k); t]` with `k = (in_dim - 1) / 2`.
fn y_block(in_dim: usize) -> Result<(usize, usize)> {
    if in_dim % 2 == 0 || in_dim < 3 {
        return Err(Error::ShapeMismatch(format!(
            "potential input layout needs odd dimension >= 3, got {in_dim}"
        )));
    }
    let k = (in_dim - 1) / 2;
    Ok((k, 2 * k))
}

/// Gradient of the scalar output with respect to the `y` input block,
/// one column per batch element.
pub fn potential_input_gradients<T: Scalar>(
    net: &Mlp<T>,
    inputs: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    if net.output_dim() != 1 {
        return Err(Error::ShapeMismatch(
            "potential network must have scalar output".into(),
        ));
    }
    let (lo, hi) = y_block(net.input_dim())?;
    let cache = net.forward_cached(inputs)?;
    let ones = DMatrix::from_element(1, inputs.ncols(), T::one());
    let (_, input_grad) = net.backward(&cache, &ones);
    Ok(input_grad.rows(lo, hi - lo).into())
}

/// Mean DSM loss of the potential's gradient against `targets`, plus the
/// exact parameter gradients (second-order backpropagation).
pub fn potential_dsm_grads<T: Scalar>(
    net: &Mlp<T>,
    inputs: &DMatrix<T>,
    targets: &DMatrix<T>,
    y_embed: Option<&DMatrix<T>>,
) -> Result<(T, MlpGrads<T>)> {
    if net.output_dim() != 1 {
        return Err(Error::ShapeMismatch(
            "potential network must have scalar output".into(),
        ));
    }
    let (lo, hi) = y_block(net.input_dim())?;
    let k = hi - lo;
    if targets.nrows() != k {
        return Err(Error::ShapeMismatch(format!(
            "targets have {} rows, y block has {k}",
            targets.nrows()
        )));
    }
    let b = inputs.ncols();
    let cache = net.forward_cached(inputs)?;

    // First-order pass: the score G = grad_y out.
    let ones = DMatrix::from_element(1, b, T::one());
    let (_, input_grad) = net.backward(&cache, &ones);
    let mut score: DMatrix<T> = input_grad.rows(lo, k).into();
    if let Some(y) = y_embed {
        project_columns(&mut score, y);
    }
    let residual = &score - targets;
    let loss = residual.norm_squared() * T::of(0.5 / b as f64);

    // Tangent direction through the y block: r/B (projected back for
    // embedded outputs; the projector is symmetric).
    let mut r = residual * T::of(1.0 / b as f64);
    if let Some(y) = y_embed {
        project_columns(&mut r, y);
    }
    let mut tangent_in = DMatrix::zeros(inputs.nrows(), b);
    for c in 0..b {
        for i in 0..k {
            tangent_in[(lo + i, c)] = r[(i, c)];
        }
    }

    // Forward tangent pass; store the pre-activation tangents.
    let last = net.n_layers() - 1;
    let mut a_dots: Vec<DMatrix<T>> = Vec::with_capacity(net.n_layers() + 1);
    let mut z_dots: Vec<DMatrix<T>> = Vec::with_capacity(net.n_layers());
    a_dots.push(tangent_in);
    for l in 0..net.n_layers() {
        let z_dot = &net.weights[l] * a_dots.last().unwrap();
        let mut a_dot = z_dot.clone();
        if l != last {
            let act = &cache.activations[l + 1];
            a_dot.zip_apply(act, |v, a| *v *= T::one() - a * a);
        }
        z_dots.push(z_dot);
        a_dots.push(a_dot);
    }

    // Reverse pass with adjoints for both chains:
    //   gamma_l = dPhi/dz_l, delta_l = dPhi/dz_dot_l,
    //   alpha = dPhi/da, beta = dPhi/da_dot.
    let mut grads = MlpGrads {
        weights: net
            .layer_dims
            .windows(2)
            .map(|w| DMatrix::zeros(w[1], w[0]))
            .collect(),
        biases: net
            .layer_dims
            .windows(2)
            .map(|w| nalgebra::DVector::zeros(w[1]))
            .collect(),
    };
    let mut alpha = DMatrix::zeros(1, b);
    let mut beta = DMatrix::from_element(1, b, T::one());
    for l in (0..net.n_layers()).rev() {
        let (gamma, delta) = if l == last {
            // Identity activation: phi' = 1, phi'' = 0.
            (alpha.clone(), beta.clone())
        } else {
            let act = &cache.activations[l + 1];
            let mut gamma = alpha.clone();
            gamma.zip_apply(act, |v, a| *v *= T::one() - a * a);
            // beta * phi''(z) * z_dot with phi'' = -2 a (1 - a^2).
            let mut second = beta.clone();
            second.zip_apply(act, |v, a| *v *= -T::of(2.0) * a * (T::one() - a * a));
            second.component_mul_assign(&z_dots[l]);
            gamma += second;
            let mut delta = beta.clone();
            delta.zip_apply(act, |v, a| *v *= T::one() - a * a);
            (gamma, delta)
        };
        grads.weights[l] =
            &gamma * cache.activations[l].transpose() + &delta * a_dots[l].transpose();
        let mut bg = nalgebra::DVector::zeros(gamma.nrows());
        for col in gamma.column_iter() {
            bg += col;
        }
        grads.biases[l] = bg;
        alpha = net.weights[l].transpose() * gamma;
        beta = net.weights[l].transpose() * delta;
    }
    Ok((loss, grads))
}
