//! Loss and reverse-mode gradients of the regressor network.

use nalgebra::{DMatrix, DVector};

use super::batch::TrainBatch;
use super::net::{OutputLayer, RegressorNet};
use crate::error::{check_len, Error, Result};

/// Mean squared error over samples and joints plus `λ·Σ‖W‖²`.
pub fn loss_mse_l2(
    pred: &DMatrix<f64>,
    target: &DMatrix<f64>,
    net: &RegressorNet,
    l2_lambda: f64,
) -> Result<f64> {
    Ok(mse(pred, target)? + l2_lambda * net.weight_norm_sq())
}

pub fn mse(pred: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64> {
    check_len("prediction rows", target.nrows(), pred.nrows())?;
    check_len("prediction columns", target.ncols(), pred.ncols())?;
    if pred.is_empty() {
        return Err(Error::Empty("prediction"));
    }
    Ok((pred - target).norm_squared() / pred.len() as f64)
}

/// Gradients of [`loss_mse_l2`] for every regressor parameter and, unless the
/// output layer is frozen, for `â`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub a_hat: Option<DVector<f64>>,
}

impl Gradients {
    /// Same layout as [`RegressorNet::flatten_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }
}

/// Exact gradients of the regularized loss on `batch`.
///
/// With `freeze_output` set, `â` is treated as a constant and
/// [`Gradients::a_hat`] is `None`.
pub fn backprop(
    net: &RegressorNet,
    out: &OutputLayer,
    batch: &TrainBatch,
    freeze_output: bool,
    l2_lambda: f64,
) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    check_len("batch joints", net.n_joints(), batch.n_joints())?;
    check_len("output layer", net.basis_dim(), out.len())?;
    let cache = net.forward_cache(&batch.inputs)?;
    let head = cache.acts.last().expect("head activation");
    let pred = net.mix_head(head, &out.a_hat);
    let count = pred.len() as f64;
    let resid = &pred - &batch.targets;
    let loss = resid.norm_squared() / count + l2_lambda * net.weight_norm_sq();

    let (n, nb) = (net.n_joints(), net.basis_dim());
    let d_pred = resid * (2.0 / count);
    // dL/dhead[b, j·N + k] = dL/dpred[b, j] · â[k]
    let mut d_act = DMatrix::from_fn(head.nrows(), n * nb, |b, idx| {
        d_pred[(b, idx / nb)] * out.a_hat[idx % nb]
    });
    let a_hat = if freeze_output {
        None
    } else {
        let g = DVector::from_fn(nb, |k, _| {
            let mut acc = 0.0;
            for b in 0..head.nrows() {
                for j in 0..n {
                    acc += d_pred[(b, j)] * head[(b, j * nb + k)];
                }
            }
            acc
        });
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient {
                layer: net.layers().len(),
            });
        }
        Some(g)
    };

    let layers = net.layers();
    let mut weights = vec![DMatrix::zeros(0, 0); layers.len()];
    let mut biases = vec![DVector::zeros(0); layers.len()];
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let z = &cache.pre[l];
        let a = &cache.acts[l + 1];
        let mut d_z = d_act;
        for ((dz, zv), av) in d_z.iter_mut().zip(z.iter()).zip(a.iter()) {
            *dz *= layer.activation.derivative(*zv, *av);
        }
        let mut g_w = d_z.transpose() * &cache.acts[l];
        if l2_lambda != 0.0 {
            g_w += &layer.weights * (2.0 * l2_lambda);
        }
        let g_b = DVector::from_fn(d_z.ncols(), |c, _| d_z.column(c).sum());
        if g_w.iter().chain(g_b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { layer: l });
        }
        d_act = if l > 0 {
            &d_z * &layer.weights
        } else {
            DMatrix::zeros(0, 0)
        };
        weights[l] = g_w;
        biases[l] = g_b;
    }
    Ok(Gradients {
        loss,
        weights,
        biases,
        a_hat,
    })
}
