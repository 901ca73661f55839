//! Dense feed-forward regressor from label vectors to embeddings.
//!
//! Trained with Adam on mean squared error. Backpropagation is written out
//! by hand; [`finite_difference_check`] verifies it against central
//! differences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AxisError;
use crate::annotate::LabelVector;
use crate::embed::EmbeddingVector;
use crate::hashing::{json_hash, sha256_hex};

/// Serialization format version of [`TrainedRegressor`] dumps.
pub const REGRESSOR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
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
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    /// Input width, hidden widths, output width.
    pub layer_widths: Vec<usize>,
    /// One activation per weight layer.
    pub activations: Vec<Activation>,
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` trains on the full batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            layer_widths: vec![14, 64, 128, 768],
            activations: vec![Activation::Relu, Activation::Relu, Activation::Linear],
            learning_rate: 0.001,
            epochs: 1000,
            batch_size: None,
            seed: 42,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-7,
        }
    }
}

impl RegressorConfig {
    pub fn validate(&self) -> Result<(), AxisError> {
        let bad = |m: &str| Err(AxisError::InvalidConfig(m.to_string()));
        if self.layer_widths.len() < 2 {
            return bad("need at least input and output widths");
        }
        if self.layer_widths.contains(&0) {
            return bad("layer widths must be positive");
        }
        if self.activations.len() != self.layer_widths.len() - 1 {
            return bad("need one activation per weight layer");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == Some(0) {
            return bad("batch_size must be positive");
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().expect("validated widths")
    }

    pub fn content_hash(&self) -> String {
        json_hash(self)
    }
}

/// One fully connected layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.biases.clone();
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *zo += row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
        z
    }
}

/// Layer stack with per-layer pre-activations kept for backpropagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
}

struct Trace {
    /// `activations[0]` is the input; `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Network {
    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn initialize(config: &RegressorConfig, rng: &mut impl Rng) -> Self {
        let layers = config
            .layer_widths
            .windows(2)
            .zip(&config.activations)
            .map(|(w, &activation)| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = 1.0 / (inputs as f64).sqrt();
                DenseLayer {
                    inputs,
                    outputs,
                    activation,
                    weights: (0..inputs * outputs)
                        .map(|_| rng.random_range(-bound..=bound))
                        .collect(),
                    biases: vec![0.0; outputs],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("non-empty network").outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer
                .pre_activation(&a)
                .into_iter()
                .map(|z| layer.activation.apply(z))
                .collect();
        }
        a
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut activations = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let z = layer.pre_activation(activations.last().expect("input present"));
            activations.push(z.iter().map(|&v| layer.activation.apply(v)).collect());
            pre.push(z);
        }
        Trace { activations, pre }
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Mean squared error over all samples and output components.
    pub fn loss(&self, batch: &[(&[f64], &[f64])]) -> f64 {
        let mut total = 0.0;
        for (x, t) in batch {
            let y = self.forward(x);
            total += y.iter().zip(*t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        total / (batch.len() * self.output_width()) as f64
    }

    /// Loss and its exact gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, batch: &[(&[f64], &[f64])]) -> (f64, Gradients) {
        let mut grads = self.zero_gradients();
        let scale = 1.0 / (batch.len() * self.output_width()) as f64;
        let mut total = 0.0;
        for (x, t) in batch {
            let tr = self.trace(x);
            let y = tr.activations.last().expect("output present");
            // dL/dy for this sample.
            let mut delta: Vec<f64> = y
                .iter()
                .zip(*t)
                .map(|(a, b)| {
                    total += (a - b) * (a - b);
                    2.0 * (a - b) * scale
                })
                .collect();
            for (l, layer) in self.layers.iter().enumerate().rev() {
                // delta becomes dL/dz for layer l.
                for (d, &z) in delta.iter_mut().zip(&tr.pre[l]) {
                    *d *= layer.activation.derivative(z);
                }
                let input = &tr.activations[l];
                let gw = &mut grads.weights[l];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    grads.biases[l][o] += d;
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, xi) in row.iter_mut().zip(input) {
                        *g += d * xi;
                    }
                }
                if l > 0 {
                    let mut next = vec![0.0; layer.inputs];
                    for (o, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (n, w) in next.iter_mut().zip(row) {
                            *n += d * w;
                        }
                    }
                    delta = next;
                }
            }
        }
        (total * scale, grads)
    }

    fn param_mut(&mut self, p: ParamRef) -> &mut f64 {
        let layer = &mut self.layers[p.layer];
        if p.bias {
            &mut layer.biases[p.index]
        } else {
            &mut layer.weights[p.index]
        }
    }

    /// Sign pattern of every ReLU pre-activation, for kink detection.
    fn relu_pattern(&self, x: &[f64]) -> Vec<bool> {
        let tr = self.trace(x);
        self.layers
            .iter()
            .zip(&tr.pre)
            .filter(|(l, _)| l.activation == Activation::Relu)
            .flat_map(|(_, z)| z.iter().map(|v| *v > 0.0))
            .collect()
    }
}

struct Adam {
    m: Gradients,
    v: Gradients,
    t: i32,
}

impl Adam {
    fn new(net: &Network) -> Self {
        Self {
            m: net.zero_gradients(),
            v: net.zero_gradients(),
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, g: &Gradients, cfg: &RegressorConfig) {
        self.t += 1;
        let lr_t = cfg.learning_rate * (1.0 - cfg.beta2.powi(self.t)).sqrt() / (1.0 - cfg.beta1.powi(self.t));
        for (l, layer) in net.layers.iter_mut().enumerate() {
            for (params, grads, m, v) in [
                (
                    &mut layer.weights,
                    &g.weights[l],
                    &mut self.m.weights[l],
                    &mut self.v.weights[l],
                ),
                (
                    &mut layer.biases,
                    &g.biases[l],
                    &mut self.m.biases[l],
                    &mut self.v.biases[l],
                ),
            ] {
                for i in 0..params.len() {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
                    params[i] -= lr_t * m[i] / (v[i].sqrt() + cfg.adam_epsilon);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRegressor {
    pub format_version: u32,
    pub config: RegressorConfig,
    pub config_hash: String,
    pub network: Network,
    /// `(epoch, mean batch loss)`, epochs numbered from 1.
    pub loss_curve: Vec<(usize, f64)>,
}

impl TrainedRegressor {
    pub fn predict(&self, label: &LabelVector) -> Result<EmbeddingVector, AxisError> {
        self.predict_raw(label.values())
    }

    pub fn predict_raw(&self, x: &[f64]) -> Result<EmbeddingVector, AxisError> {
        if x.len() != self.network.input_width() {
            return Err(AxisError::Dimension {
                expected: self.network.input_width(),
                actual: x.len(),
            });
        }
        EmbeddingVector::new(self.network.forward(x)).map_err(AxisError::from)
    }

    pub fn mse(&self, pairs: &[(LabelVector, EmbeddingVector)]) -> f64 {
        let batch: Vec<(&[f64], &[f64])> = pairs.iter().map(|(l, e)| (l.values(), e.as_slice())).collect();
        self.network.loss(&batch)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("regressor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AxisError> {
        let r: Self = serde_json::from_str(text).map_err(|e| AxisError::Serialization(e.to_string()))?;
        if r.format_version != REGRESSOR_FORMAT_VERSION {
            return Err(AxisError::Serialization(format!(
                "unsupported regressor format version {}",
                r.format_version
            )));
        }
        Ok(r)
    }

    /// Hash of the serialized regressor, used in axis provenance.
    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}

/// Train a fresh network. Identical config and data give bit-identical results.
pub fn train_regressor(
    pairs: &[(LabelVector, EmbeddingVector)],
    config: &RegressorConfig,
) -> Result<TrainedRegressor, AxisError> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(AxisError::EmptyTraining);
    }
    let batch: Vec<(&[f64], &[f64])> = pairs.iter().map(|(l, e)| (l.values(), e.as_slice())).collect();
    train_raw(&batch, config)
}

pub(crate) fn train_raw(data: &[(&[f64], &[f64])], config: &RegressorConfig) -> Result<TrainedRegressor, AxisError> {
    for (x, t) in data {
        if x.len() != config.input_width() {
            return Err(AxisError::Dimension {
                expected: config.input_width(),
                actual: x.len(),
            });
        }
        if t.len() != config.output_width() {
            return Err(AxisError::Dimension {
                expected: config.output_width(),
                actual: t.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Network::initialize(config, &mut rng);
    let mut adam = Adam::new(&net);
    let batch_size = config.batch_size.unwrap_or(data.len()).min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<(&[f64], &[f64])> = chunk.iter().map(|&i| data[i]).collect();
            let (loss, grads) = net.loss_and_gradients(&batch);
            if !loss.is_finite() {
                return Err(AxisError::Divergence { epoch, loss });
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.step(&mut net, &grads, config);
        }
        curve.push((epoch, epoch_loss / data.len() as f64));
    }
    Ok(TrainedRegressor {
        format_version: REGRESSOR_FORMAT_VERSION,
        config_hash: config.content_hash(),
        config: config.clone(),
        network: net,
        loss_curve: curve,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ParamRef {
    layer: usize,
    bias: bool,
    index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub checked: usize,
    /// Parameters skipped because a perturbation moved a ReLU across its kink.
    pub skipped_kinks: usize,
}

/// Relative errors use this floor on the denominator so that two
/// essentially-zero gradients compare equal.
pub const GRADIENT_FLOOR: f64 = 1e-8;

/// Compare analytic gradients of the single-pair loss with central
/// differences, over every parameter.
pub fn finite_difference_check(
    network: &Network,
    pair: (&[f64], &[f64]),
    epsilon: f64,
) -> Result<GradientCheck, AxisError> {
    let params: Vec<ParamRef> = all_params(network).collect();
    check_params(network, pair, epsilon, &params)
}

/// As [`finite_difference_check`], on at most `per_tensor` randomly chosen
/// entries of each weight matrix and bias vector.
pub fn finite_difference_check_sampled(
    network: &Network,
    pair: (&[f64], &[f64]),
    epsilon: f64,
    per_tensor: usize,
    seed: u64,
) -> Result<GradientCheck, AxisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Vec::new();
    for (layer, l) in network.layers.iter().enumerate() {
        for (bias, len) in [(false, l.weights.len()), (true, l.biases.len())] {
            let picked = rand::seq::index::sample(&mut rng, len, per_tensor.min(len));
            let mut picked: Vec<usize> = picked.into_iter().collect();
            picked.sort_unstable();
            params.extend(picked.into_iter().map(|index| ParamRef { layer, bias, index }));
        }
    }
    check_params(network, pair, epsilon, &params)
}

fn all_params(network: &Network) -> impl Iterator<Item = ParamRef> + '_ {
    network.layers.iter().enumerate().flat_map(|(layer, l)| {
        (0..l.weights.len())
            .map(move |index| ParamRef {
                layer,
                bias: false,
                index,
            })
            .chain((0..l.biases.len()).map(move |index| ParamRef {
                layer,
                bias: true,
                index,
            }))
    })
}

fn check_params(
    network: &Network,
    (x, t): (&[f64], &[f64]),
    epsilon: f64,
    params: &[ParamRef],
) -> Result<GradientCheck, AxisError> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(AxisError::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1e-2]"
        )));
    }
    if x.len() != network.input_width() || t.len() != network.output_width() {
        return Err(AxisError::Dimension {
            expected: network.input_width(),
            actual: x.len(),
        });
    }
    let batch = [(x, t)];
    let (_, grads) = network.loss_and_gradients(&batch);
    let base_pattern = network.relu_pattern(x);
    let mut probe = network.clone();
    let mut out = GradientCheck {
        max_relative_error: 0.0,
        max_absolute_error: 0.0,
        checked: 0,
        skipped_kinks: 0,
    };
    for &p in params {
        let original = *probe.param_mut(p);
        *probe.param_mut(p) = original + epsilon;
        let plus = probe.loss(&batch);
        let kink_plus = probe.relu_pattern(x) != base_pattern;
        *probe.param_mut(p) = original - epsilon;
        let minus = probe.loss(&batch);
        let kink_minus = probe.relu_pattern(x) != base_pattern;
        *probe.param_mut(p) = original;
        if kink_plus || kink_minus {
            out.skipped_kinks += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * epsilon);
        let analytic = if p.bias {
            grads.biases[p.layer][p.index]
        } else {
            grads.weights[p.layer][p.index]
        };
        let abs = (analytic - numeric).abs();
        let rel = abs / analytic.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
        out.max_relative_error = out.max_relative_error.max(rel);
        out.max_absolute_error = out.max_absolute_error.max(abs);
        out.checked += 1;
    }
    Ok(out)
}
