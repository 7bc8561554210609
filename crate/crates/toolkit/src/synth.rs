//! Synthetic fixtures: a random dense classifier and clustered inputs.
//!
//! Inputs live in `[0, 1]^m`. Each class has a uniform random prototype and a
//! sample is its class prototype plus Gaussian noise, clamped to the box. The
//! network uses He-scaled Gaussian weights and zero biases, with ReLU hidden
//! layers and a softmax output.

use std::collections::BTreeMap;

use stealth_core::rng::{seeded_stream, standard_normal, uniform};
use stealth_core::{Activation, DenseLayer, InputBox, Network};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub input_dim: usize,
    /// Widths of the hidden ReLU layers; the first one is the latent layer.
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub samples: usize,
    /// Number of samples held out of the validation set (target candidates).
    pub holdout: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            input_dim: 784,
            hidden: vec![200, 100],
            classes: 10,
            samples: 2500,
            holdout: 25,
            noise: 0.15,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub model: Network,
    pub validation: Vec<Vec<f64>>,
    pub heldout: Vec<Vec<f64>>,
}

const WEIGHT_STREAM: u64 = 0;
const DATA_STREAM: u64 = 1;

pub fn random_network(cfg: &SynthConfig) -> stealth_core::Result<Network> {
    let mut rng = seeded_stream(cfg.seed, WEIGHT_STREAM);
    let mut dims = vec![cfg.input_dim];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(cfg.classes);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (k, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let scale = (2.0 / fan_in as f64).sqrt();
        let weights = (0..fan_in * fan_out).map(|_| scale * standard_normal(&mut rng)).collect();
        let act = if k + 2 == dims.len() { Activation::Softmax } else { Activation::Relu };
        layers.push(DenseLayer::new(fan_in, fan_out, weights, vec![0.0; fan_out], act)?);
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("name".to_string(), "synthetic".to_string());
    metadata.insert("seed".to_string(), cfg.seed.to_string());
    Network::new(cfg.input_dim, InputBox::uniform(cfg.input_dim, 0.0, 1.0)?, layers, metadata)
}

pub fn generate(cfg: &SynthConfig) -> stealth_core::Result<Synthetic> {
    if cfg.classes == 0 || cfg.holdout > cfg.samples || cfg.input_dim == 0 {
        return Err(stealth_core::Error::InvalidParameter(format!(
            "bad fixture shape: {} classes, {} of {} samples held out",
            cfg.classes, cfg.holdout, cfg.samples
        )));
    }
    if !(cfg.noise >= 0.0 && cfg.noise.is_finite()) {
        return Err(stealth_core::Error::InvalidParameter(format!("noise must be >= 0, got {}", cfg.noise)));
    }
    let model = random_network(cfg)?;
    let mut rng = seeded_stream(cfg.seed, DATA_STREAM);
    let prototypes: Vec<Vec<f64>> = (0..cfg.classes)
        .map(|_| (0..cfg.input_dim).map(|_| uniform(&mut rng, 0.0, 1.0)).collect())
        .collect();
    let mut samples = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let p = &prototypes[i % cfg.classes];
        samples.push(
            p.iter()
                .map(|&c| (c + cfg.noise * standard_normal(&mut rng)).clamp(0.0, 1.0))
                .collect::<Vec<f64>>(),
        );
    }
    let heldout = samples.split_off(cfg.samples - cfg.holdout);
    Ok(Synthetic {
        model,
        validation: samples,
        heldout,
    })
}
