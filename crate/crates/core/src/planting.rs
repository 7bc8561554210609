//! Network surgery: planting an attack neuron and ranking neurons by how
//! little they matter downstream.
//!
//! * Scenario 1 adds the attack neuron beside the network; its gained output
//!   is added to the tracked final-layer pre-activation.
//! * Scenario 2 keeps the layered structure: the neuron joins the layer after
//!   the cut and a chain of ReLU relay neurons carries its output to the head.
//! * Scenario 3 overwrites an existing neuron (a one-neuron attack).
//!
//! Every function takes the original network by reference and returns a new
//! one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::attack::{AttackNeuron, GKind};
use crate::error::{check_dim, Error, Result};
use crate::model::{argmax, Activation, LatentSplit, Network, SkipUnit};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityRanking {
    pub layer: usize,
    /// Neuron indices, most replaceable first.
    pub order: Vec<usize>,
    /// L1 norms of the outgoing weights, aligned with `order`.
    pub norms: Vec<f64>,
    pub tie_seed: u64,
}

impl SusceptibilityRanking {
    /// 1-based rank of `neuron`.
    pub fn rank_of(&self, neuron: usize) -> Option<usize> {
        self.order.iter().position(|&i| i == neuron).map(|p| p + 1)
    }
}

fn activation_of(g: GKind) -> Activation {
    match g {
        GKind::Relu => Activation::Relu,
        GKind::Sigmoid => Activation::Sigmoid,
    }
}

fn check_inner_layer(net: &Network, layer: usize) -> Result<()> {
    if layer + 1 >= net.layers().len() {
        return Err(Error::InvalidParameter(format!(
            "layer {layer} has no outgoing weights in a {}-layer network",
            net.layers().len()
        )));
    }
    Ok(())
}

/// Ranks the neurons of `layer` by the L1 norm of their outgoing weights
/// (their column in the next layer); ties are broken at random with
/// `tie_seed`.
pub fn rank_neurons(net: &Network, layer: usize, tie_seed: u64) -> Result<SusceptibilityRanking> {
    check_inner_layer(net, layer)?;
    let next = &net.layers()[layer + 1];
    let count = net.layers()[layer].out_dim();
    let mut norms = vec![0.0; count];
    for r in 0..next.out_dim() {
        for (n, &w) in norms.iter_mut().zip(next.row(r)) {
            *n += libm::fabs(w);
        }
    }
    let mut rng = rng::seeded(tie_seed);
    let keys: Vec<u64> = (0..count).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&a, &b| {
        norms[a]
            .total_cmp(&norms[b])
            .then(keys[a].cmp(&keys[b]))
            .then(a.cmp(&b))
    });
    let sorted = order.iter().map(|&i| norms[i]).collect();
    Ok(SusceptibilityRanking {
        layer,
        order,
        norms: sorted,
        tie_seed,
    })
}

fn check_neuron(neuron: &AttackNeuron, expected: usize) -> Result<()> {
    check_dim("attack neuron weights", expected, neuron.w.len())?;
    let finite = neuron.w.iter().all(|v| v.is_finite()) && neuron.b.is_finite() && neuron.gain.is_finite();
    if !finite {
        return Err(Error::NonFinite("attack neuron".into()));
    }
    Ok(())
}

/// Scenario 1: the attack neuron reads the latent layer and its output
/// `D g(<z, w> - b)` is added to the head's final-layer pre-activation.
pub fn plant_scenario1(net: &Network, split: &LatentSplit, neuron: &AttackNeuron) -> Result<Network> {
    split.check(net)?;
    check_neuron(neuron, split.latent_dim)?;
    if split.cut + 1 >= net.layers().len() {
        return Err(Error::Surgery(
            "scenario 1 needs the cut below the final layer".into(),
        ));
    }
    let mut skips = net.skips().to_vec();
    skips.push(SkipUnit {
        source: split.cut,
        weights: neuron.w.clone(),
        threshold: neuron.b,
        activation: activation_of(neuron.g_kind),
        target: split.head_output_index,
        gain: neuron.gain,
    });
    Network::with_skips(
        net.input_dim(),
        net.input_box().clone(),
        net.layers().to_vec(),
        skips,
        net.metadata().clone(),
    )
}

/// Scenario 2: the attack neuron becomes an extra neuron of layer `cut + 1`,
/// one weight-1/bias-0 ReLU relay is added to every further hidden layer and
/// the gain `D` becomes the relay's weight into the head output.
pub fn plant_scenario2(net: &Network, split: &LatentSplit, neuron: &AttackNeuron) -> Result<Network> {
    split.check(net)?;
    check_neuron(neuron, split.latent_dim)?;
    let last = net.layers().len() - 1;
    let host = split.cut + 1;
    if host >= last {
        return Err(Error::Surgery(
            "scenario 2 needs at least one hidden layer between the cut and the output".into(),
        ));
    }
    if net.layers()[host].activation() != activation_of(neuron.g_kind) {
        return Err(Error::Surgery(format!(
            "layer {host} uses {} but the attack neuron needs {}",
            net.layers()[host].activation().name(),
            neuron.g_kind.name()
        )));
    }
    for k in host + 1..last {
        if net.layers()[k].activation() != Activation::Relu {
            return Err(Error::Surgery(format!(
                "relay layer {k} uses {}; lossless pass-through needs relu",
                net.layers()[k].activation().name()
            )));
        }
    }
    if !net.skips().is_empty() {
        return Err(Error::Surgery("scenario 2 expects a network without skip units".into()));
    }
    let mut layers = net.layers().to_vec();
    layers[host].push_neuron(&neuron.w, -neuron.b);
    for layer in layers.iter_mut().take(last).skip(host + 1) {
        layer.push_input(&vec![0.0; layer.out_dim()]);
        let mut relay = vec![0.0; layer.in_dim()];
        relay[layer.in_dim() - 1] = 1.0;
        layer.push_neuron(&relay, 0.0);
    }
    let head = &mut layers[last];
    let mut column = vec![0.0; head.out_dim()];
    column[split.head_output_index] = neuron.gain;
    head.push_input(&column);
    Network::new(net.input_dim(), net.input_box().clone(), layers, net.metadata().clone())
}

/// Scenario 3: neuron `victim` of `layer` takes the attack neuron's incoming
/// weights and bias `-b`; its outgoing weights are zeroed except the one into
/// neuron `head_index` of the next layer, which becomes `D`.
pub fn plant_scenario3(
    net: &Network,
    layer: usize,
    victim: usize,
    neuron: &AttackNeuron,
    head_index: usize,
) -> Result<Network> {
    check_inner_layer(net, layer)?;
    let host = &net.layers()[layer];
    check_neuron(neuron, host.in_dim())?;
    if victim >= host.out_dim() {
        return Err(Error::InvalidParameter(format!(
            "victim {victim} out of range for {} neurons",
            host.out_dim()
        )));
    }
    let next_dim = net.layers()[layer + 1].out_dim();
    if head_index >= next_dim {
        return Err(Error::InvalidParameter(format!(
            "head index {head_index} out of range for {next_dim} neurons"
        )));
    }
    if host.activation() != activation_of(neuron.g_kind) {
        return Err(Error::Surgery(format!(
            "layer {layer} uses {} but the attack neuron needs {}",
            host.activation().name(),
            neuron.g_kind.name()
        )));
    }
    let mut layers = net.layers().to_vec();
    let in_dim = layers[layer].in_dim();
    layers[layer].weights_mut()[victim * in_dim..(victim + 1) * in_dim].copy_from_slice(&neuron.w);
    layers[layer].biases_mut()[victim] = -neuron.b;
    let next = &mut layers[layer + 1];
    let next_in = next.in_dim();
    for r in 0..next_dim {
        next.weights_mut()[r * next_in + victim] = if r == head_index { neuron.gain } else { 0.0 };
    }
    Network::with_skips(
        net.input_dim(),
        net.input_box().clone(),
        layers,
        net.skips().to_vec(),
        net.metadata().clone(),
    )
}

fn neuron_output(net: &Network, layer: usize, victim: usize, u: &[f64]) -> Result<f64> {
    let trace = net.forward_trace(u)?;
    Ok(trace.post[layer][victim])
}

/// Summary of what a neuron fed into one downstream neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub max_abs: f64,
    pub mean_abs: f64,
}

/// Contribution `W[head, victim] * a_victim(u)` of the victim to the
/// pre-activation of neuron `head_index` in the next layer, over `inputs`.
pub fn victim_contribution(
    net: &Network,
    layer: usize,
    victim: usize,
    head_index: usize,
    inputs: &[Vec<f64>],
) -> Result<Contribution> {
    check_inner_layer(net, layer)?;
    if victim >= net.layers()[layer].out_dim() || head_index >= net.layers()[layer + 1].out_dim() {
        return Err(Error::InvalidParameter(format!(
            "victim {victim} or head {head_index} out of range"
        )));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("no inputs given".into()));
    }
    let w = net.layers()[layer + 1].weight(head_index, victim);
    let mut max_abs: f64 = 0.0;
    let mut sum = 0.0;
    for u in inputs {
        let c = libm::fabs(w * neuron_output(net, layer, victim, u)?);
        max_abs = max_abs.max(c);
        sum += c;
    }
    Ok(Contribution {
        max_abs,
        mean_abs: sum / inputs.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalImpact {
    /// Fraction of inputs whose predicted class changes.
    pub changed_fraction: f64,
    /// Largest absolute change of any final-layer pre-activation.
    pub max_deviation: f64,
}

/// Effect of silencing neuron `victim` of `layer` (zeroing its outgoing
/// weights) on the predictions for `inputs`.
pub fn removal_impact(net: &Network, layer: usize, victim: usize, inputs: &[Vec<f64>]) -> Result<RemovalImpact> {
    check_inner_layer(net, layer)?;
    if victim >= net.layers()[layer].out_dim() {
        return Err(Error::InvalidParameter(format!("victim {victim} out of range")));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("no inputs given".into()));
    }
    let mut layers = net.layers().to_vec();
    let next = &mut layers[layer + 1];
    let next_in = next.in_dim();
    for r in 0..next.out_dim() {
        next.weights_mut()[r * next_in + victim] = 0.0;
    }
    let pruned = Network::with_skips(
        net.input_dim(),
        net.input_box().clone(),
        layers,
        net.skips().to_vec(),
        net.metadata().clone(),
    )?;
    let mut changed = 0usize;
    let mut max_deviation: f64 = 0.0;
    for u in inputs {
        let a = net.logits(u)?;
        let b = pruned.logits(u)?;
        if argmax(&a) != argmax(&b) {
            changed += 1;
        }
        for (x, y) in a.iter().zip(&b) {
            max_deviation = max_deviation.max(libm::fabs(x - y));
        }
    }
    Ok(RemovalImpact {
        changed_fraction: changed as f64 / inputs.len() as f64,
        max_deviation,
    })
}
