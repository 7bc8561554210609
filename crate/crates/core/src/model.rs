//! Dense feed-forward networks.
//!
//! A [`Network`] is a chain of [`DenseLayer`]s. A [`LatentSplit`] cuts the
//! chain after layer `cut`: the post-activation output of that layer is the
//! latent representation, and the remaining layers form the decision head whose
//! tracked output is read *before* the final activation.
//!
//! Networks may also carry [`SkipUnit`]s: extra neurons that read the output of
//! an inner layer and add their gained response to one pre-activation of the
//! final layer. This is how an attack neuron is attached directly to the head
//! output without disturbing the layer structure.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            "softmax" => Some(Activation::Softmax),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    fn apply(self, pre: &[f64], out: &mut [f64]) {
        match self {
            Activation::Relu => {
                for (o, &p) in out.iter_mut().zip(pre) {
                    *o = relu(p);
                }
            }
            Activation::Sigmoid => {
                for (o, &p) in out.iter_mut().zip(pre) {
                    *o = sigmoid(p);
                }
            }
            Activation::Identity => out.copy_from_slice(pre),
            Activation::Softmax => {
                let max = pre.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for (o, &p) in out.iter_mut().zip(pre) {
                    *o = libm::exp(p - max);
                    total += *o;
                }
                for o in out.iter_mut() {
                    *o /= total;
                }
            }
        }
    }

    /// Cotangent of the pre-activation given the cotangent of the output.
    fn backward(self, pre: &[f64], post: &[f64], grad_post: &[f64]) -> Vec<f64> {
        match self {
            // derivative at exactly 0 is taken as 0
            Activation::Relu => pre
                .iter()
                .zip(grad_post)
                .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Sigmoid => post
                .iter()
                .zip(grad_post)
                .map(|(&s, &g)| g * s * (1.0 - s))
                .collect(),
            Activation::Identity => grad_post.to_vec(),
            Activation::Softmax => {
                let inner = dot(grad_post, post);
                post.iter()
                    .zip(grad_post)
                    .map(|(&s, &g)| s * (g - inner))
                    .collect()
            }
        }
    }
}

#[inline]
pub fn relu(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        0.0
    }
}

#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

/// Fully connected layer `act(W x + b)` with a row-major `out_dim x in_dim`
/// weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Shape(format!(
                "layer dimensions must be positive, got {in_dim}->{out_dim}"
            )));
        }
        check_dim("layer weights", in_dim * out_dim, weights.len())?;
        check_dim("layer biases", out_dim, biases.len())?;
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            biases,
            activation,
        })
    }

    /// Builds a layer from nested rows (one row per output neuron).
    pub fn from_rows(rows: &[Vec<f64>], biases: Vec<f64>, activation: Activation) -> Result<Self> {
        let out_dim = rows.len();
        let in_dim = rows.first().map_or(0, Vec::len);
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for row in rows {
            check_dim("layer weight row", in_dim, row.len())?;
            weights.extend_from_slice(row);
        }
        Self::new(in_dim, out_dim, weights, biases, activation)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.weights[neuron * self.in_dim..(neuron + 1) * self.in_dim]
    }

    pub fn weight(&self, neuron: usize, input: usize) -> f64 {
        self.weights[neuron * self.in_dim + input]
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    /// Appends an input column (one weight per existing neuron).
    pub(crate) fn push_input(&mut self, column: &[f64]) {
        debug_assert_eq!(column.len(), self.out_dim);
        let new_in = self.in_dim + 1;
        let mut weights = Vec::with_capacity(new_in * self.out_dim);
        for (r, &c) in column.iter().enumerate() {
            weights.extend_from_slice(self.row(r));
            weights.push(c);
        }
        self.weights = weights;
        self.in_dim = new_in;
    }

    /// Appends an output neuron.
    pub(crate) fn push_neuron(&mut self, row: &[f64], bias: f64) {
        debug_assert_eq!(row.len(), self.in_dim);
        self.weights.extend_from_slice(row);
        self.biases.push(bias);
        self.out_dim += 1;
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|r| dot(self.row(r), x) + self.biases[r])
            .collect()
    }

    fn transpose_mul(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.in_dim];
        for (r, &gr) in g.iter().enumerate() {
            if gr == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += w * gr;
            }
        }
        out
    }
}

/// Admissible input set: a closed box `lower <= u <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl InputBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim("input box", lower.len(), upper.len())?;
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFinite(format!("input_box coordinate {i}")));
            }
            if lo > hi {
                return Err(Error::Shape(format!(
                    "input_box coordinate {i} has lower {lo} > upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| lo <= x && x <= hi)
    }

    /// Largest coordinate width.
    pub fn max_width(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    /// Coordinate-wise clamp into the box.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| x.clamp(lo, hi))
            .collect()
    }
}

/// A neuron reading the post-activation output of layer `source` whose gained
/// response `gain * g(<z, weights> - threshold)` is added to pre-activation
/// `target` of the final layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipUnit {
    pub source: usize,
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub activation: Activation,
    pub target: usize,
    pub gain: f64,
}

impl SkipUnit {
    pub fn pre_activation(&self, z: &[f64]) -> f64 {
        dot(z, &self.weights) - self.threshold
    }

    pub fn response(&self, z: &[f64]) -> f64 {
        let s = self.pre_activation(z);
        let g = match self.activation {
            Activation::Relu => relu(s),
            Activation::Sigmoid => sigmoid(s),
            Activation::Identity => s,
            Activation::Softmax => unreachable!("rejected at construction"),
        };
        self.gain * g
    }

    fn derivative(&self, z: &[f64]) -> f64 {
        let s = self.pre_activation(z);
        let d = match self.activation {
            Activation::Relu => {
                if s > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let v = sigmoid(s);
                v * (1.0 - v)
            }
            Activation::Identity => 1.0,
            Activation::Softmax => unreachable!("rejected at construction"),
        };
        self.gain * d
    }
}

/// Pre- and post-activation values of every evaluated layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    input_box: InputBox,
    layers: Vec<DenseLayer>,
    skips: Vec<SkipUnit>,
    metadata: BTreeMap<String, String>,
}

impl Network {
    pub fn new(
        input_dim: usize,
        input_box: InputBox,
        layers: Vec<DenseLayer>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        Self::with_skips(input_dim, input_box, layers, Vec::new(), metadata)
    }

    pub fn with_skips(
        input_dim: usize,
        input_box: InputBox,
        layers: Vec<DenseLayer>,
        skips: Vec<SkipUnit>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let net = Self {
            input_dim,
            input_box,
            layers,
            skips,
            metadata,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Shape("input_dim must be positive".to_string()));
        }
        if self.layers.is_empty() {
            return Err(Error::Shape("network has no layers".to_string()));
        }
        check_dim("input box", self.input_dim, self.input_box.dim())?;
        let mut expected_in = self.input_dim;
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.in_dim != expected_in {
                return Err(Error::Shape(format!(
                    "layer {k} expects {} inputs but receives {expected_in}",
                    layer.in_dim
                )));
            }
            if layer.activation == Activation::Softmax && k != last {
                return Err(Error::Shape(format!(
                    "softmax is only allowed on the final layer, found on layer {k}"
                )));
            }
            if let Some(i) = layer.weights.iter().position(|w| !w.is_finite()) {
                return Err(Error::NonFinite(format!("layer {k} weight {i}")));
            }
            if let Some(i) = layer.biases.iter().position(|b| !b.is_finite()) {
                return Err(Error::NonFinite(format!("layer {k} bias {i}")));
            }
            expected_in = layer.out_dim;
        }
        for (j, skip) in self.skips.iter().enumerate() {
            if skip.source >= last {
                return Err(Error::Shape(format!(
                    "skip unit {j} reads layer {} which is not an inner layer",
                    skip.source
                )));
            }
            check_dim("skip unit weights", self.layers[skip.source].out_dim, skip.weights.len())?;
            if skip.target >= self.layers[last].out_dim {
                return Err(Error::Shape(format!(
                    "skip unit {j} targets output {} of {}",
                    skip.target, self.layers[last].out_dim
                )));
            }
            if matches!(skip.activation, Activation::Softmax) {
                return Err(Error::Shape(format!("skip unit {j} cannot use softmax")));
            }
            let finite = skip.weights.iter().all(|w| w.is_finite())
                && skip.threshold.is_finite()
                && skip.gain.is_finite();
            if !finite {
                return Err(Error::NonFinite(format!("skip unit {j}")));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn input_box(&self) -> &InputBox {
        &self.input_box
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn skips(&self) -> &[SkipUnit] {
        &self.skips
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Total number of weights, biases and skip-unit parameters.
    pub fn param_count(&self) -> usize {
        let dense: usize = self
            .layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum();
        let skips: usize = self.skips.iter().map(|s| s.weights.len() + 3).sum();
        dense + skips
    }

    /// Evaluates layers `start..=end` on `input`, which is the output of layer
    /// `start - 1` (or the network input when `start == 0`).
    fn eval_range(&self, start: usize, end: usize, input: &[f64]) -> Result<Trace> {
        let last = self.layers.len() - 1;
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(end + 1 - start);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(end + 1 - start);
        for k in start..=end {
            let layer = &self.layers[k];
            let x = if k == start { input } else { &post[k - start - 1] };
            let mut p = layer.pre_activation(x);
            if k == last {
                for skip in &self.skips {
                    let z: &[f64] = if skip.source + 1 == start {
                        input
                    } else if skip.source >= start {
                        &post[skip.source - start]
                    } else {
                        return Err(Error::Shape(format!(
                            "skip unit reads layer {} below the evaluated range",
                            skip.source
                        )));
                    };
                    p[skip.target] += skip.response(z);
                }
            }
            let mut out = vec![0.0; layer.out_dim];
            layer.activation.apply(&p, &mut out);
            pre.push(p);
            post.push(out);
        }
        Ok(Trace { pre, post })
    }

    fn check_input(&self, u: &[f64]) -> Result<()> {
        check_dim("network input", self.input_dim, u.len())?;
        if !self.input_box.contains(u) {
            log::warn!("input lies outside the admissible input box");
        }
        Ok(())
    }

    /// Post-activation output of every layer; the last entry is the network
    /// output.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_trace(u)?.post)
    }

    pub fn forward_trace(&self, u: &[f64]) -> Result<Trace> {
        self.check_input(u)?;
        self.eval_range(0, self.layers.len() - 1, u)
    }

    /// Final-layer pre-activations (the logits before softmax).
    pub fn logits(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward_trace(u)?;
        Ok(trace.pre.pop().expect("non-empty network"))
    }

    /// Index of the largest network output.
    pub fn predict(&self, u: &[f64]) -> Result<usize> {
        let out = self.forward(u)?;
        Ok(argmax(out.last().expect("non-empty network")))
    }

    /// Latent representation: post-activation output of layer `split.cut`.
    pub fn latent(&self, split: &LatentSplit, u: &[f64]) -> Result<Vec<f64>> {
        split.check(self)?;
        self.check_input(u)?;
        let mut trace = self.eval_range(0, split.cut, u)?;
        Ok(trace.post.pop().expect("cut is a valid layer"))
    }

    /// Decision-head output for a latent vector: the tracked final-layer
    /// pre-activation. With the cut at the final layer the head is the
    /// identity and `z[head_output_index]` is returned.
    pub fn head_output(&self, split: &LatentSplit, z: &[f64]) -> Result<f64> {
        split.check(self)?;
        check_dim("latent vector", split.latent_dim, z.len())?;
        let last = self.layers.len() - 1;
        if split.cut == last {
            return Ok(z[split.head_output_index]);
        }
        let trace = self.eval_range(split.cut + 1, last, z)?;
        Ok(trace.pre[trace.pre.len() - 1][split.head_output_index])
    }

    /// Gradient of `<v, latent(u)>` with respect to `u`.
    pub fn latent_vjp(&self, split: &LatentSplit, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        split.check(self)?;
        check_dim("latent cotangent", split.latent_dim, v.len())?;
        self.check_input(u)?;
        let cut = split.cut;
        let last = self.layers.len() - 1;
        let trace = self.eval_range(0, cut, u)?;
        let mut grad_post: Vec<Vec<f64>> = trace.post.iter().map(|p| vec![0.0; p.len()]).collect();
        grad_post[cut].copy_from_slice(v);
        let mut grad_input = vec![0.0; self.input_dim];
        for k in (0..=cut).rev() {
            let layer = &self.layers[k];
            let g_pre = layer
                .activation
                .backward(&trace.pre[k], &trace.post[k], &grad_post[k]);
            if k == last {
                for skip in &self.skips {
                    let src = &trace.post[skip.source];
                    let scale = g_pre[skip.target] * skip.derivative(src);
                    if scale != 0.0 {
                        for (g, &w) in grad_post[skip.source].iter_mut().zip(&skip.weights) {
                            *g += scale * w;
                        }
                    }
                }
            }
            let g_in = layer.transpose_mul(&g_pre);
            let target = if k == 0 {
                &mut grad_input
            } else {
                &mut grad_post[k - 1]
            };
            for (t, g) in target.iter_mut().zip(g_in) {
                *t += g;
            }
        }
        Ok(grad_input)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Partition of a network into latent map and decision head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentSplit {
    pub cut: usize,
    pub latent_dim: usize,
    pub head_output_index: usize,
}

impl LatentSplit {
    pub fn new(net: &Network, cut: usize, head_output_index: usize) -> Result<Self> {
        if cut >= net.layers.len() {
            return Err(Error::InvalidParameter(format!(
                "cut {cut} out of range for {} layers",
                net.layers.len()
            )));
        }
        let split = Self {
            cut,
            latent_dim: net.layers[cut].out_dim,
            head_output_index,
        };
        split.check(net)?;
        Ok(split)
    }

    pub(crate) fn check(&self, net: &Network) -> Result<()> {
        if self.cut >= net.layers.len() {
            return Err(Error::InvalidParameter(format!("cut {} out of range", self.cut)));
        }
        check_dim("latent split", net.layers[self.cut].out_dim, self.latent_dim)?;
        if self.head_output_index >= net.output_dim() {
            return Err(Error::InvalidParameter(format!(
                "head output index {} out of range for {} outputs",
                self.head_output_index,
                net.output_dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;

    fn unit_box(dim: usize) -> InputBox {
        InputBox::uniform(dim, -10.0, 10.0).unwrap()
    }

    fn net(input_dim: usize, layers: Vec<DenseLayer>) -> Network {
        Network::new(input_dim, unit_box(input_dim), layers, BTreeMap::new()).unwrap()
    }

    fn identity_layer(n: usize, act: Activation) -> DenseLayer {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        DenseLayer::new(n, n, w, vec![0.0; n], act).unwrap()
    }

    pub(crate) fn random_net(seed: u64, dims: &[usize], acts: &[Activation]) -> Network {
        let mut rng = rng::seeded(seed);
        let layers = dims
            .windows(2)
            .zip(acts)
            .map(|(d, &act)| {
                let scale = 1.0 / libm::sqrt(d[0] as f64);
                let w = (0..d[0] * d[1]).map(|_| rng::standard_normal(&mut rng) * scale).collect();
                let b = (0..d[1]).map(|_| 0.1 * rng::standard_normal(&mut rng)).collect();
                DenseLayer::new(d[0], d[1], w, b, act).unwrap()
            })
            .collect();
        net(dims[0], layers)
    }

    /// Straightforward evaluator written without the trace machinery.
    fn naive_forward(net: &Network, u: &[f64]) -> Vec<f64> {
        let mut x = u.to_vec();
        for layer in net.layers() {
            let mut next = Vec::new();
            for r in 0..layer.out_dim() {
                let mut s = layer.biases()[r];
                for c in 0..layer.in_dim() {
                    s += layer.weight(r, c) * x[c];
                }
                next.push(s);
            }
            x = match layer.activation() {
                Activation::Relu => next.iter().map(|&s| s.max(0.0)).collect(),
                Activation::Sigmoid => next.iter().map(|&s| 1.0 / (1.0 + libm::exp(-s))).collect(),
                Activation::Identity => next,
                Activation::Softmax => {
                    let e: Vec<f64> = next.iter().map(|&s| libm::exp(s)).collect();
                    let t: f64 = e.iter().sum();
                    e.iter().map(|v| v / t).collect()
                }
            };
        }
        x
    }

    #[test]
    fn identity_two_layer_reproduces_basis_vector() {
        let n = net(
            3,
            vec![identity_layer(3, Activation::Relu), identity_layer(3, Activation::Softmax)],
        );
        let logits = n.logits(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(logits, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn dimension_chain_violation_is_rejected() {
        let l1 = DenseLayer::new(3, 4, vec![0.0; 12], vec![0.0; 4], Activation::Relu).unwrap();
        let l2 = DenseLayer::new(5, 2, vec![0.0; 10], vec![0.0; 2], Activation::Identity).unwrap();
        let err = Network::new(3, unit_box(3), vec![l1, l2], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn non_finite_weight_is_rejected() {
        let l1 = DenseLayer::new(1, 1, vec![f64::NAN], vec![0.0], Activation::Relu).unwrap();
        let err = Network::new(1, unit_box(1), vec![l1], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn softmax_must_be_final() {
        let l1 = identity_layer(2, Activation::Softmax);
        let l2 = identity_layer(2, Activation::Identity);
        assert!(Network::new(2, unit_box(2), vec![l1, l2], BTreeMap::new()).is_err());
    }

    #[test]
    fn relu_sign_case() {
        let l = DenseLayer::new(2, 1, vec![1.0, -1.0], vec![0.0], Activation::Relu).unwrap();
        let n = net(2, vec![l]);
        assert_eq!(n.forward(&[2.0, 3.0]).unwrap()[0], vec![0.0]);
    }

    #[test]
    fn zero_sigmoid_is_one_half() {
        let l = DenseLayer::new(2, 1, vec![0.0, 0.0], vec![0.0], Activation::Sigmoid).unwrap();
        let n = net(2, vec![l]);
        assert_eq!(n.forward(&[5.0, -7.0]).unwrap()[0], vec![0.5]);
    }

    #[test]
    fn forward_matches_naive_evaluator() {
        use Activation::*;
        for seed in 0..10 {
            let n = random_net(seed, &[6, 8, 5, 4], &[Relu, Sigmoid, Softmax]);
            let mut rng = rng::seeded(100 + seed);
            let u: Vec<f64> = (0..6).map(|_| rng::standard_normal(&mut rng)).collect();
            let got = n.forward(&u).unwrap();
            let want = naive_forward(&n, &u);
            for (a, b) in got.last().unwrap().iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_in_forward() {
        let n = net(2, vec![identity_layer(2, Activation::Relu)]);
        assert!(matches!(
            n.forward(&[1.0]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn latent_cut_at_final_layer_is_network_output() {
        use Activation::*;
        let n = random_net(3, &[4, 5, 3], &[Relu, Softmax]);
        let split = LatentSplit::new(&n, 1, 0).unwrap();
        let u = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(n.latent(&split, &u).unwrap(), *n.forward(&u).unwrap().last().unwrap());
    }

    #[test]
    fn latent_of_identity_relu_is_input() {
        let n = net(3, vec![identity_layer(3, Activation::Relu), identity_layer(3, Activation::Identity)]);
        let split = LatentSplit::new(&n, 0, 0).unwrap();
        let u = [0.5, 2.0, 0.0];
        assert_eq!(n.latent(&split, &u).unwrap(), u.to_vec());
    }

    #[test]
    fn latent_matches_forward_on_random_nets() {
        use Activation::*;
        for seed in 0..5 {
            let n = random_net(seed, &[5, 7, 6, 3], &[Relu, Relu, Softmax]);
            let split = LatentSplit::new(&n, 1, 2).unwrap();
            let u = [0.3, -0.1, 0.8, 0.0, 1.5];
            assert_eq!(n.latent(&split, &u).unwrap(), n.forward(&u).unwrap()[1]);
        }
    }

    #[test]
    fn head_of_latent_is_logit() {
        use Activation::*;
        for seed in 0..10 {
            let n = random_net(seed, &[5, 7, 6, 3], &[Relu, Sigmoid, Softmax]);
            for cut in 0..2 {
                let split = LatentSplit::new(&n, cut, 1).unwrap();
                let u = [0.3, -0.1, 0.8, 0.0, 1.5];
                let z = n.latent(&split, &u).unwrap();
                assert_eq!(n.head_output(&split, &z).unwrap(), n.logits(&u).unwrap()[1]);
            }
        }
    }

    #[test]
    fn identity_head_reads_coordinate() {
        let n = net(3, vec![identity_layer(3, Activation::Relu), identity_layer(3, Activation::Identity)]);
        let split = LatentSplit::new(&n, 0, 2).unwrap();
        assert_eq!(n.head_output(&split, &[1.0, 2.0, 3.5]).unwrap(), 3.5);
    }

    #[test]
    fn vjp_of_linear_map_is_transpose_product() {
        let a = DenseLayer::from_rows(&[vec![1.0, 2.0], vec![0.0, -1.0], vec![3.0, 1.0]], vec![0.5, 0.0, -1.0], Activation::Identity).unwrap();
        let b = DenseLayer::from_rows(&[vec![1.0, 0.0, 2.0], vec![-1.0, 1.0, 0.0]], vec![0.0, 0.0], Activation::Identity).unwrap();
        let n = net(2, vec![a, b]);
        let split = LatentSplit::new(&n, 1, 0).unwrap();
        // product B·A = [[7, 4], [-1, -3]]
        let v = [2.0, -1.0];
        let g = n.latent_vjp(&split, &[0.3, 0.7], &v).unwrap();
        assert_eq!(g, vec![2.0 * 7.0 + 1.0, 2.0 * 4.0 + 3.0]);
    }

    #[test]
    fn vjp_of_zero_cotangent_is_zero() {
        use Activation::*;
        let n = random_net(9, &[4, 6, 3], &[Sigmoid, Identity]);
        let split = LatentSplit::new(&n, 0, 0).unwrap();
        let g = n.latent_vjp(&split, &[0.1, 0.2, 0.3, 0.4], &[0.0; 6]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vjp_matches_finite_differences() {
        use Activation::*;
        for seed in 0..10 {
            let n = random_net(seed, &[5, 8, 6, 3], &[Relu, Sigmoid, Softmax]);
            for cut in [1usize, 2] {
                let split = LatentSplit::new(&n, cut, 0).unwrap();
                let mut rng = rng::seeded(seed + 50);
                let u: Vec<f64> = (0..5).map(|_| rng::standard_normal(&mut rng)).collect();
                let v: Vec<f64> = (0..split.latent_dim).map(|_| rng::standard_normal(&mut rng)).collect();
                let g = n.latent_vjp(&split, &u, &v).unwrap();
                let h = 1e-5;
                for i in 0..5 {
                    let mut up = u.clone();
                    up[i] += h;
                    let mut dn = u.clone();
                    dn[i] -= h;
                    let fp = dot(&v, &n.latent(&split, &up).unwrap());
                    let fm = dot(&v, &n.latent(&split, &dn).unwrap());
                    let fd = (fp - fm) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "seed {seed} cut {cut}");
                }
            }
        }
    }

    #[test]
    fn skip_unit_adds_to_head_logit() {
        use Activation::*;
        let base = random_net(4, &[3, 4, 2], &[Relu, Softmax]);
        let skip = SkipUnit {
            source: 0,
            weights: vec![1.0, 1.0, 1.0, 1.0],
            threshold: 0.0,
            activation: Relu,
            target: 1,
            gain: 2.0,
        };
        let b = base.clone();
        let planted = Network::with_skips(b.input_dim, b.input_box, b.layers, vec![skip.clone()], b.metadata).unwrap();
        let u = [0.2, 0.4, -0.1];
        let z = base.forward(&u).unwrap()[0].clone();
        let diff = planted.logits(&u).unwrap()[1] - base.logits(&u).unwrap()[1];
        assert!((diff - skip.response(&z)).abs() < 1e-12);
        let split = LatentSplit::new(&planted, 0, 1).unwrap();
        assert_eq!(planted.head_output(&split, &z).unwrap(), planted.logits(&u).unwrap()[1]);
    }
}
