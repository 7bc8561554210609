//! JSON file formats: models, vector sets (inputs or latents), attack
//! neurons, trigger results and provenance records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use stealth_core::trigger::TriggerSearchConfig;
use stealth_core::{Activation, AttackNeuron, DenseLayer, GKind, InputBox, Network, SkipUnit, SphereSample, TriggerResult};

use crate::canonical::to_canonical;
use crate::error::{Result, ToolError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: String,
    /// Row-major: one row of `in_dim` weights per output neuron.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkipFile {
    pub source: usize,
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub activation: String,
    pub target: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub input_dim: usize,
    pub input_box: BoxFile,
    pub layers: Vec<LayerFile>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    /// Extra neurons added next to the network (scenario-1 planting).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_units: Vec<SkipFile>,
}

fn activation(name: &str) -> stealth_core::Result<Activation> {
    Activation::from_name(name)
        .ok_or_else(|| stealth_core::Error::Shape(format!("unknown activation {name:?}")))
}

impl ModelFile {
    pub fn from_network(net: &Network) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| LayerFile {
                in_dim: l.in_dim(),
                out_dim: l.out_dim(),
                activation: l.activation().name().to_string(),
                weights: (0..l.out_dim()).map(|r| l.row(r).to_vec()).collect(),
                biases: l.biases().to_vec(),
            })
            .collect();
        let skip_units = net
            .skips()
            .iter()
            .map(|s| SkipFile {
                source: s.source,
                weights: s.weights.clone(),
                threshold: s.threshold,
                activation: s.activation.name().to_string(),
                target: s.target,
                gain: s.gain,
            })
            .collect();
        Self {
            input_dim: net.input_dim(),
            input_box: BoxFile {
                lower: net.input_box().lower().to_vec(),
                upper: net.input_box().upper().to_vec(),
            },
            layers,
            metadata: net.metadata().clone(),
            skip_units,
        }
    }

    pub fn to_network(&self) -> stealth_core::Result<Network> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.out_dim {
                return Err(stealth_core::Error::Shape(format!(
                    "layer {k} declares {} outputs but has {} weight rows",
                    l.out_dim,
                    l.weights.len()
                )));
            }
            let mut flat = Vec::with_capacity(l.in_dim * l.out_dim);
            for (r, row) in l.weights.iter().enumerate() {
                if row.len() != l.in_dim {
                    return Err(stealth_core::Error::Shape(format!(
                        "layer {k} row {r} has {} weights, expected {}",
                        row.len(),
                        l.in_dim
                    )));
                }
                flat.extend_from_slice(row);
            }
            layers.push(DenseLayer::new(l.in_dim, l.out_dim, flat, l.biases.clone(), activation(&l.activation)?)?);
        }
        let skips = self
            .skip_units
            .iter()
            .map(|s| {
                Ok(SkipUnit {
                    source: s.source,
                    weights: s.weights.clone(),
                    threshold: s.threshold,
                    activation: activation(&s.activation)?,
                    target: s.target,
                    gain: s.gain,
                })
            })
            .collect::<stealth_core::Result<Vec<_>>>()?;
        let input_box = InputBox::new(self.input_box.lower.clone(), self.input_box.upper.clone())?;
        Network::with_skips(self.input_dim, input_box, layers, skips, self.metadata.clone())
    }
}

/// A list of equal-length vectors: raw inputs or precomputed latents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSet {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl VectorSet {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Self {
        Self { dim, vectors }
    }

    pub fn check(&self) -> stealth_core::Result<()> {
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(stealth_core::Error::Shape(format!(
                    "vector {i} has length {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(stealth_core::Error::NonFinite(format!("vector {i}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronFile {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(rename = "D")]
    pub gain: f64,
    pub kappa: f64,
    pub g_kind: String,
    pub x_prime: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl NeuronFile {
    pub fn from_neuron(n: &AttackNeuron) -> Self {
        Self {
            w: n.w.clone(),
            b: n.b,
            gain: n.gain,
            kappa: n.kappa,
            g_kind: n.g_kind.name().to_string(),
            x_prime: n.x_prime.clone(),
            radius: n.radius,
        }
    }

    pub fn to_neuron(&self) -> stealth_core::Result<AttackNeuron> {
        let g_kind = GKind::from_name(&self.g_kind)
            .ok_or_else(|| stealth_core::Error::InvalidParameter(format!("unknown g_kind {:?}", self.g_kind)))?;
        Ok(AttackNeuron {
            w: self.w.clone(),
            b: self.b,
            gain: self.gain,
            kappa: self.kappa,
            g_kind,
            x_prime: self.x_prime.clone(),
            radius: self.radius,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereFile {
    pub x: Vec<f64>,
    pub delta: f64,
    pub support: Option<Vec<usize>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfigFile {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: f64,
    pub p2: f64,
    pub max_iters: usize,
    pub step0: Option<f64>,
    pub step_decay: f64,
    pub alpha_target: Option<f64>,
    pub seed: u64,
    pub round_to_integers: bool,
}

impl From<&TriggerSearchConfig> for SearchConfigFile {
    fn from(c: &TriggerSearchConfig) -> Self {
        Self {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            p1: c.p1,
            p2: c.p2,
            max_iters: c.max_iters,
            step0: c.step0,
            step_decay: c.step_decay,
            alpha_target: c.alpha_target,
            seed: c.seed,
            round_to_integers: c.round_to_integers,
        }
    }
}

impl From<&SearchConfigFile> for TriggerSearchConfig {
    fn from(c: &SearchConfigFile) -> Self {
        Self {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            p1: c.p1,
            p2: c.p2,
            max_iters: c.max_iters,
            step0: c.step0,
            step_decay: c.step_decay,
            alpha_target: c.alpha_target,
            seed: c.seed,
            round_to_integers: c.round_to_integers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerFile {
    pub u_prime: Vec<f64>,
    pub u_star: Option<Vec<f64>>,
    pub x: SphereFile,
    pub x_prime: Vec<f64>,
    pub alpha: f64,
    pub feasible: bool,
    pub iterations: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub step0: f64,
    pub seed: u64,
    pub config: SearchConfigFile,
    pub loss_trace: Vec<f64>,
    pub best_alpha_trace: Vec<f64>,
}

impl TriggerFile {
    pub fn from_result(r: &TriggerResult, cfg: &TriggerSearchConfig) -> Self {
        Self {
            u_prime: r.u_prime.clone(),
            u_star: r.u_star.clone(),
            x: SphereFile {
                x: r.x.x.clone(),
                delta: r.x.delta,
                support: r.x.support.clone(),
                seed: r.x.seed,
            },
            x_prime: r.x_prime.clone(),
            alpha: r.alpha,
            feasible: r.feasible,
            iterations: r.iterations,
            radius: r.radius,
            step0: r.step0,
            seed: r.seed,
            config: cfg.into(),
            loss_trace: r.loss_trace.clone(),
            best_alpha_trace: r.best_alpha_trace.clone(),
        }
    }

    pub fn sphere(&self) -> SphereSample {
        SphereSample {
            x: self.x.x.clone(),
            delta: self.x.delta,
            support: self.x.support.clone(),
            seed: self.x.seed,
        }
    }
}

/// Audit record written next to a planted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: u8,
    pub victim: Option<Victim>,
    pub neuron: NeuronFile,
    pub neuron_sha256: String,
    pub original_model_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Victim {
    pub layer: usize,
    pub index: usize,
    pub head_index: usize,
    pub rank: Option<usize>,
    pub outgoing_l1: f64,
    /// Largest former contribution `|W[head, victim] a_victim(u)|` over the
    /// validation inputs, when given.
    pub former_contribution_max: Option<f64>,
    pub former_contribution_mean: Option<f64>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ToolError::parse(path, e))
}

/// Writes the canonical serialization followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_canonical(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ToolError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Network> {
    let file: ModelFile = read_json(path)?;
    file.to_network().map_err(|e| ToolError::parse(path, e))
}

pub fn save_model(path: &Path, net: &Network) -> Result<()> {
    write_json(path, &ModelFile::from_network(net))
}

pub fn load_vectors(path: &Path) -> Result<VectorSet> {
    let set: VectorSet = read_json(path)?;
    set.check().map_err(|e| ToolError::parse(path, e))?;
    Ok(set)
}

pub fn load_neuron(path: &Path) -> Result<AttackNeuron> {
    let file: NeuronFile = read_json(path)?;
    file.to_neuron().map_err(|e| ToolError::parse(path, e))
}
