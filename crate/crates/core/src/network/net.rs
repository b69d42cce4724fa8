use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            "linear" => Some(Activation::Linear),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }
}

/// Fully connected layer `a = σ(W x + b)` with `W` stored as `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.weights.ncols(), self.weights.nrows(), self.activation)
    }
}

/// Network emulating the regressor `Y(θ̇₁, θ, θ̇₂, θ̈)`.
///
/// The input is the `4n` concatenation of the four signals. The last layer
/// emits `n·N` values, reshaped row-major into the `n × N` regressor, so
/// entry `(j, k)` is output `j·N + k`. Inputs are standardized with the stored
/// per-dimension mean and standard deviation before the first layer.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressorNet {
    layers: Vec<Dense>,
    n_joints: usize,
    basis_dim: usize,
    input_mean: DVector<f64>,
    input_std: DVector<f64>,
}

/// The linear output layer `â` mixing the regressor columns.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputLayer {
    pub a_hat: DVector<f64>,
}

impl OutputLayer {
    pub fn new(a_hat: DVector<f64>) -> Self {
        OutputLayer { a_hat }
    }

    pub fn zeros(basis_dim: usize) -> Self {
        OutputLayer {
            a_hat: DVector::zeros(basis_dim),
        }
    }

    /// Glorot-uniform initialization for a `N → 1` map.
    pub fn random<R: Rng>(basis_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (basis_dim as f64 + 1.0)).sqrt();
        OutputLayer {
            a_hat: DVector::from_fn(basis_dim, |_, _| rng.random_range(-limit..limit)),
        }
    }

    pub fn len(&self) -> usize {
        self.a_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_hat.is_empty()
    }
}

/// Dense stack `4n → hidden (tanh) → hidden (tanh) → n·N (linear)`.
pub fn default_architecture(n_joints: usize, hidden: usize, basis_dim: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::new(4 * n_joints, hidden, Activation::Tanh),
        LayerSpec::new(hidden, hidden, Activation::Tanh),
        LayerSpec::new(hidden, n_joints * basis_dim, Activation::Linear),
    ]
}

/// Row-major reshape of a flat head output into the `n × N` regressor.
pub fn reshape_regressor(flat: &[f64], n_joints: usize, basis_dim: usize) -> Result<DMatrix<f64>> {
    check_len("regressor head", n_joints * basis_dim, flat.len())?;
    Ok(DMatrix::from_row_slice(n_joints, basis_dim, flat))
}

/// Inverse of [`reshape_regressor`].
pub fn flatten_regressor(y: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    for r in 0..y.nrows() {
        out.extend(y.row(r).iter());
    }
    out
}

/// Activations of one batched forward pass.
pub(crate) struct ForwardCache {
    /// `acts[0]` is the standardized input, `acts[l + 1]` the output of layer `l`.
    pub acts: Vec<DMatrix<f64>>,
    pub pre: Vec<DMatrix<f64>>,
}

impl RegressorNet {
    fn validate_specs(specs: &[LayerSpec], n_joints: usize, basis_dim: usize) -> Result<()> {
        if specs.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        if n_joints == 0 || basis_dim == 0 {
            return Err(Error::Config(
                "n_joints and basis_dim must be positive".into(),
            ));
        }
        check_len("first layer input", 4 * n_joints, specs[0].in_dim)?;
        for w in specs.windows(2) {
            check_len("layer chaining", w[0].out_dim, w[1].in_dim)?;
        }
        check_len(
            "head output",
            n_joints * basis_dim,
            specs[specs.len() - 1].out_dim,
        )?;
        Ok(())
    }

    /// Glorot-uniform weights, zero biases, identity standardization.
    pub fn new<R: Rng>(
        specs: &[LayerSpec],
        n_joints: usize,
        basis_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::validate_specs(specs, n_joints, basis_dim)?;
        let layers = specs
            .iter()
            .map(|s| {
                let limit = (6.0 / (s.in_dim + s.out_dim) as f64).sqrt();
                Dense {
                    weights: DMatrix::from_fn(s.out_dim, s.in_dim, |_, _| {
                        rng.random_range(-limit..limit)
                    }),
                    bias: DVector::zeros(s.out_dim),
                    activation: s.activation,
                }
            })
            .collect();
        Ok(Self::from_layers_unchecked(layers, n_joints, basis_dim))
    }

    pub fn zeros(specs: &[LayerSpec], n_joints: usize, basis_dim: usize) -> Result<Self> {
        Self::validate_specs(specs, n_joints, basis_dim)?;
        let layers = specs
            .iter()
            .map(|s| Dense {
                weights: DMatrix::zeros(s.out_dim, s.in_dim),
                bias: DVector::zeros(s.out_dim),
                activation: s.activation,
            })
            .collect();
        Ok(Self::from_layers_unchecked(layers, n_joints, basis_dim))
    }

    pub fn from_layers(layers: Vec<Dense>, n_joints: usize, basis_dim: usize) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(Dense::spec).collect();
        Self::validate_specs(&specs, n_joints, basis_dim)?;
        for (i, l) in layers.iter().enumerate() {
            check_len("bias", l.weights.nrows(), l.bias.len())?;
            if l.weights
                .iter()
                .chain(l.bias.iter())
                .any(|v| !v.is_finite())
            {
                return Err(Error::Config(format!(
                    "layer {i} has non-finite parameters"
                )));
            }
        }
        Ok(Self::from_layers_unchecked(layers, n_joints, basis_dim))
    }

    fn from_layers_unchecked(layers: Vec<Dense>, n_joints: usize, basis_dim: usize) -> Self {
        let d = 4 * n_joints;
        RegressorNet {
            layers,
            n_joints,
            basis_dim,
            input_mean: DVector::zeros(d),
            input_std: DVector::from_element(d, 1.0),
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Dense::spec).collect()
    }

    pub fn n_joints(&self) -> usize {
        self.n_joints
    }

    pub fn basis_dim(&self) -> usize {
        self.basis_dim
    }

    pub fn input_dim(&self) -> usize {
        4 * self.n_joints
    }

    pub fn input_mean(&self) -> &DVector<f64> {
        &self.input_mean
    }

    pub fn input_std(&self) -> &DVector<f64> {
        &self.input_std
    }

    pub fn set_normalization(&mut self, mean: DVector<f64>, std: DVector<f64>) -> Result<()> {
        check_len("input mean", self.input_dim(), mean.len())?;
        check_len("input std", self.input_dim(), std.len())?;
        check_finite("input mean", mean.as_slice())?;
        if std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config("input std entries must be > 0".into()));
        }
        self.input_mean = mean;
        self.input_std = std;
        Ok(())
    }

    /// Sets standardization from the column statistics of `inputs`.
    /// Near-constant columns keep unit scale.
    pub fn fit_normalization(&mut self, inputs: &DMatrix<f64>) -> Result<()> {
        check_len("input columns", self.input_dim(), inputs.ncols())?;
        if inputs.nrows() == 0 {
            return Err(Error::Empty("normalization data"));
        }
        let rows = inputs.nrows() as f64;
        let mean = DVector::from_fn(inputs.ncols(), |c, _| inputs.column(c).sum() / rows);
        let std = DVector::from_fn(inputs.ncols(), |c, _| {
            let m = mean[c];
            let var = inputs
                .column(c)
                .iter()
                .map(|v| (v - m) * (v - m))
                .sum::<f64>()
                / rows;
            let s = var.sqrt();
            if s > 1e-12 {
                s
            } else {
                1.0
            }
        });
        self.set_normalization(mean, std)
    }

    /// `Σ ‖W‖²` over all weight matrices (biases excluded).
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers.iter().map(|l| l.weights.norm_squared()).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Weights then bias of each layer, in layer order (weights column-major).
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.bias.as_slice());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len("parameters", self.param_count(), params.len())?;
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights
                .as_mut_slice()
                .copy_from_slice(&params[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias
                .as_mut_slice()
                .copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    fn standardize(&self, inputs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = inputs.clone();
        for c in 0..x.ncols() {
            let (m, s) = (self.input_mean[c], self.input_std[c]);
            for v in x.column_mut(c).iter_mut() {
                *v = (*v - m) / s;
            }
        }
        x
    }

    pub(crate) fn forward_cache(&self, inputs: &DMatrix<f64>) -> Result<ForwardCache> {
        check_len("network input", self.input_dim(), inputs.ncols())?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        acts.push(self.standardize(inputs));
        for l in &self.layers {
            let prev = acts.last().expect("input activation");
            let mut z = prev * l.weights.transpose();
            for c in 0..z.ncols() {
                z.column_mut(c).add_scalar_mut(l.bias[c]);
            }
            let a = z.map(|v| l.activation.apply(v));
            pre.push(z);
            acts.push(a);
        }
        Ok(ForwardCache { acts, pre })
    }

    /// Flat head outputs (`rows × n·N`) for a batch of inputs (`rows × 4n`).
    pub fn forward_batch(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut cache = self.forward_cache(inputs)?;
        Ok(cache.acts.pop().expect("head activation"))
    }

    /// The `n × N` regressor at a single input.
    pub fn forward_regressor(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len("network input", self.input_dim(), x.len())?;
        check_finite("network input", x.as_slice())?;
        let head = self.forward_batch(&DMatrix::from_row_slice(1, x.len(), x.as_slice()))?;
        reshape_regressor(head.as_slice(), self.n_joints, self.basis_dim)
    }

    /// `Y(x)·â` for a single input.
    pub fn predict(&self, out: &OutputLayer, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("output layer", self.basis_dim, out.len())?;
        Ok(self.forward_regressor(x)? * &out.a_hat)
    }

    /// Predictions (`rows × n`) for a batch.
    pub fn predict_batch(&self, out: &OutputLayer, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_len("output layer", self.basis_dim, out.len())?;
        let head = self.forward_batch(inputs)?;
        Ok(self.mix_head(&head, &out.a_hat))
    }

    pub(crate) fn mix_head(&self, head: &DMatrix<f64>, a_hat: &DVector<f64>) -> DMatrix<f64> {
        let (n, nb) = (self.n_joints, self.basis_dim);
        DMatrix::from_fn(head.nrows(), n, |b, j| {
            (0..nb).map(|k| head[(b, j * nb + k)] * a_hat[k]).sum()
        })
    }
}

/// Free-function form of [`RegressorNet::forward_regressor`].
pub fn forward_regressor(net: &RegressorNet, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    net.forward_regressor(x)
}

/// Free-function form of [`RegressorNet::predict`].
pub fn predict(net: &RegressorNet, out: &OutputLayer, x: &DVector<f64>) -> Result<DVector<f64>> {
    net.predict(out, x)
}
