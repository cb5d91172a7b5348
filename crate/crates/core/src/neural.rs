//! Fully connected feed-forward networks trained by full-batch gradient
//! descent with momentum on ½·mean squared error.
//!
//! Presets: the 4-5-1 tanh MLP and the 4-100-100-100-1 ReLU DNN. Inputs are
//! standardized with training statistics; targets are optionally
//! transformed, then min-max scaled to [−1, 1].

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};
use crate::model::TargetTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => {
                if z >= 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative in terms of the pre-activation `z`.
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Shape (outputs, inputs).
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

/// Per-layer gradients, aligned with `Network::layers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform weights, zero biases. `sizes` includes input and
    /// output widths; the output layer is linear.
    pub fn init<R: Rng>(sizes: &[usize], hidden: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output widths");
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-limit..=limit));
                let activation = if i + 2 == sizes.len() {
                    Activation::Identity
                } else {
                    hidden
                };
                Layer {
                    weights,
                    bias: Array1::zeros(fan_out),
                    activation,
                }
            })
            .collect();
        Network { layers }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut a = Array1::from_vec(x.to_vec());
        for layer in &self.layers {
            let z = layer.weights.dot(&a) + &layer.bias;
            a = z.mapv(|v| layer.activation.apply(v));
        }
        a[0]
    }

    /// Outputs for every row of `inputs` (shape n × input width).
    pub fn forward_batch(&self, inputs: &Array2<f64>) -> Array1<f64> {
        let mut a = inputs.clone();
        for layer in &self.layers {
            let z = a.dot(&layer.weights.t()) + &layer.bias;
            a = z.mapv(|v| layer.activation.apply(v));
        }
        a.column(0).to_owned()
    }

    /// Exact gradients of ½·mean (output − target)² by backpropagation.
    pub fn gradients(&self, inputs: &Array2<f64>, targets: &Array1<f64>) -> Gradients {
        let n = inputs.nrows() as f64;
        let mut pre: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let mut acts: Vec<Array2<f64>> = vec![inputs.clone()];
        for layer in &self.layers {
            let z = acts.last().expect("input present").dot(&layer.weights.t()) + &layer.bias;
            acts.push(z.mapv(|v| layer.activation.apply(v)));
            pre.push(z);
        }
        let out = acts.last().expect("output present").column(0).to_owned();
        let err = &out - targets;
        let loss = 0.5 * err.mapv(|e| e * e).sum() / n;

        let mut delta = (err / n).insert_axis(Axis(1));
        let depth = self.layers.len();
        let mut gw = vec![Array2::zeros((0, 0)); depth];
        let mut gb = vec![Array1::zeros(0); depth];
        for l in (0..depth).rev() {
            let layer = &self.layers[l];
            let dz = &delta * &pre[l].mapv(|v| layer.activation.derivative(v));
            gw[l] = dz.t().dot(&acts[l]);
            gb[l] = dz.sum_axis(Axis(0));
            delta = dz.dot(&layer.weights);
        }
        Gradients {
            weights: gw,
            bias: gb,
            loss,
        }
    }

    pub fn loss(&self, inputs: &Array2<f64>, targets: &Array1<f64>) -> f64 {
        let err = self.forward_batch(inputs) - targets;
        0.5 * err.mapv(|e| e * e).sum() / inputs.nrows() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub target_transform: TargetTransform,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl NetworkSpec {
    /// 4-5-1, tanh.
    pub fn mlp() -> Self {
        NetworkSpec {
            hidden: vec![5],
            activation: Activation::Tanh,
            target_transform: TargetTransform::None,
            epochs: 5000,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 0,
        }
    }

    /// 4-100-100-100-1, ReLU.
    pub fn dnn() -> Self {
        NetworkSpec {
            hidden: vec![100, 100, 100],
            activation: Activation::Relu,
            target_transform: TargetTransform::None,
            epochs: 1000,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 0,
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![N_FEATURES];
        sizes.extend(&self.hidden);
        sizes.push(1);
        sizes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralModel {
    pub network: Network,
    pub input_mean: [f64; N_FEATURES],
    pub input_std: [f64; N_FEATURES],
    pub target_transform: TargetTransform,
    /// Range of the transformed training targets, mapped onto [−1, 1].
    pub target_min: f64,
    pub target_max: f64,
    /// Training loss before each epoch, plus the final loss.
    pub loss_history: Vec<f64>,
}

impl NeuralModel {
    pub fn standardize(&self, x: &[f64; N_FEATURES]) -> [f64; N_FEATURES] {
        std::array::from_fn(|i| (x[i] - self.input_mean[i]) / self.input_std[i])
    }

    fn unscale(&self, s: f64) -> f64 {
        (s + 1.0) / 2.0 * (self.target_max - self.target_min) + self.target_min
    }

    /// Network output mapped back to the transformed target space.
    pub fn internal_output(&self, x: &FeatureVector) -> Result<f64> {
        let v = self.standardize(&x.complete()?);
        Ok(self.unscale(self.network.forward(&v)))
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        self.target_transform.inverse(self.internal_output(x)?)
    }
}

/// Full-batch gradient descent with momentum for `spec.epochs` epochs.
pub fn train(spec: &NetworkSpec, x: &[FeatureVector], y: &[f64]) -> Result<NeuralModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let rows: Vec<[f64; N_FEATURES]> = x.iter().map(|f| f.complete()).collect::<Result<_>>()?;
    let z: Vec<f64> = y
        .iter()
        .map(|&v| spec.target_transform.forward(v))
        .collect::<Result<_>>()?;
    let n = rows.len();

    let mut mean = [0.0; N_FEATURES];
    let mut std = [0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64;
        std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let (zmin, zmax) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let (target_min, target_max) = if zmax > zmin { (zmin, zmax) } else { (zmin - 1.0, zmin + 1.0) };

    let inputs = Array2::from_shape_fn((n, N_FEATURES), |(i, j)| (rows[i][j] - mean[j]) / std[j]);
    let targets = Array1::from_iter(
        z.iter()
            .map(|&v| 2.0 * (v - target_min) / (target_max - target_min) - 1.0),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut network = Network::init(&spec.layer_sizes(), spec.activation, &mut rng);
    let mut vel_w: Vec<Array2<f64>> = network.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect();
    let mut vel_b: Vec<Array1<f64>> = network.layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect();
    let mut loss_history = Vec::with_capacity(spec.epochs + 1);
    for epoch in 0..spec.epochs {
        let g = network.gradients(&inputs, &targets);
        if !g.loss.is_finite() {
            return Err(Error::NonConvergence(format!("loss became {} at epoch {epoch}", g.loss)));
        }
        loss_history.push(g.loss);
        for (l, layer) in network.layers.iter_mut().enumerate() {
            vel_w[l] *= spec.momentum;
            vel_w[l].scaled_add(-spec.learning_rate, &g.weights[l]);
            layer.weights += &vel_w[l];
            vel_b[l] *= spec.momentum;
            vel_b[l].scaled_add(-spec.learning_rate, &g.bias[l]);
            layer.bias += &vel_b[l];
        }
    }
    let final_loss = network.loss(&inputs, &targets);
    if !final_loss.is_finite() {
        return Err(Error::NonConvergence(format!("final loss {final_loss}")));
    }
    loss_history.push(final_loss);

    Ok(NeuralModel {
        network,
        input_mean: mean,
        input_std: std,
        target_transform: spec.target_transform,
        target_min,
        target_max,
        loss_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_piecewise() {
        assert_eq!(Activation::Relu.apply(-3.0), 0.0);
        assert_eq!(Activation::Relu.apply(3.0), 3.0);
        assert_eq!(Activation::Relu.apply(0.0), 0.0);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = Network::init(&[4, 5, 1], Activation::Tanh, &mut ChaCha8Rng::seed_from_u64(1));
        for l in &mut net.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 4.0]), 0.0);
    }

    #[test]
    fn tiny_tanh_network_is_nearly_linear() {
        let mut net = Network::init(&[4, 5, 1], Activation::Tanh, &mut ChaCha8Rng::seed_from_u64(2));
        for l in &mut net.layers {
            l.weights.mapv_inplace(|w| w * 1e-3);
        }
        let x = [1.0, -1.0, 0.5, 2.0];
        let hidden = &net.layers[0];
        let out = &net.layers[1];
        let linear = out.weights.dot(&(hidden.weights.dot(&Array1::from_vec(x.to_vec())) + &hidden.bias))[0] + out.bias[0];
        assert!((net.forward(&x) - linear).abs() <= 1e-4);
    }

    #[test]
    fn zero_error_batch_has_zero_gradient() {
        let net = Network::init(&[4, 3, 1], Activation::Tanh, &mut ChaCha8Rng::seed_from_u64(3));
        let inputs = Array2::from_shape_fn((5, 4), |(i, j)| (i * 4 + j) as f64 * 0.1 - 1.0);
        let targets = net.forward_batch(&inputs);
        let g = net.gradients(&inputs, &targets);
        assert_eq!(g.loss, 0.0);
        assert!(g.weights.iter().all(|w| w.iter().all(|v| *v == 0.0)));
        assert!(g.bias.iter().all(|b| b.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn zero_epochs_is_deterministic_init() {
        let d = crate::data::synthesize(20, 1, 5.0).unwrap();
        let spec = NetworkSpec { epochs: 0, seed: 11, ..NetworkSpec::mlp() };
        let a = train(&spec, &d.features(), &d.targets()).unwrap();
        let b = train(&spec, &d.features(), &d.targets()).unwrap();
        assert_eq!(a, b);
        assert!(a.predict(&d.records()[0].features).unwrap().is_finite());
    }

    #[test]
    fn log_transform_rejects_nonpositive_targets() {
        let d = crate::data::synthesize(5, 1, 5.0).unwrap();
        let spec = NetworkSpec {
            target_transform: TargetTransform::Ln,
            epochs: 1,
            ..NetworkSpec::mlp()
        };
        let mut y = d.targets();
        y[0] = 0.0;
        assert_eq!(train(&spec, &d.features(), &y).unwrap_err().class(), "TRANSFORM_DOMAIN");
    }

    #[test]
    fn presets_match_published_shapes() {
        assert_eq!(NetworkSpec::mlp().layer_sizes(), vec![4, 5, 1]);
        assert_eq!(NetworkSpec::dnn().layer_sizes(), vec![4, 100, 100, 100, 1]);
        assert_eq!(NetworkSpec::dnn().activation, Activation::Relu);
    }
}
