//! Stealth checks on concrete validation sets and Monte Carlo estimates of
//! the geometric event that keeps an attack neuron silent.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::attack::{AttackNeuron, AttackParams};
use crate::error::{check_dim, Error, Result};
use crate::geometry::fill_sphere_point;
use crate::linalg::{dot, norm, norm_sq};
use crate::model::{LatentSplit, Network};
use crate::rng;

/// Fixed-width histogram; `edges` has one more entry than `counts`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins spanning `[min, max]` of `values`, the last bin closed. A
    /// degenerate range is widened to `[v - 0.5, v + 0.5]`.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("histogram value".into()));
        }
        if values.is_empty() {
            return Ok(Self {
                edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
                counts: vec![0; bins],
            });
        }
        let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        edges[bins] = hi;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let mut b = ((v - lo) / width) as usize;
            b = b.min(bins - 1);
            // floating rounding can put a value just past its bin edge
            while b > 0 && v < edges[b] {
                b -= 1;
            }
            while b + 1 < bins && v >= edges[b + 1] {
                b += 1;
            }
            counts[b] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Upper edge of the highest non-empty bin.
    pub fn max_occupied_edge(&self) -> Option<f64> {
        self.counts.iter().rposition(|&c| c > 0).map(|i| self.edges[i + 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StealthReport {
    /// Largest `|F(Φ(u)) - F_a(Φ(u))|` over the validation set.
    pub max_validation_deviation: f64,
    pub trigger_deviation: f64,
    pub eps_ok: bool,
    pub delta_ok: bool,
    /// Validation points on which the attack neuron's effect is exactly 0.
    pub silent_count: Option<usize>,
    /// Pre-activations `<Φ(u), w> - b` over the validation set.
    pub histogram: Option<Histogram>,
    pub validation_size: usize,
}

fn monitored(net: &Network, split: &LatentSplit, u: &[f64]) -> Result<f64> {
    let z = net.latent(split, u)?;
    net.head_output(split, &z)
}

fn finish_report(
    deviations: &[f64],
    trigger_deviation: f64,
    pre: Option<Vec<f64>>,
    silent_count: Option<usize>,
    params: &AttackParams,
    bins: usize,
) -> Result<StealthReport> {
    let max_validation_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let histogram = match pre {
        Some(values) => Some(Histogram::from_values(&values, bins)?),
        None => None,
    };
    Ok(StealthReport {
        max_validation_deviation,
        trigger_deviation,
        eps_ok: max_validation_deviation <= params.tolerance,
        delta_ok: trigger_deviation >= params.response,
        silent_count,
        histogram,
        validation_size: deviations.len(),
    })
}

/// Compares the monitored head output of both networks on every validation
/// input and on the trigger. With `neuron`, also counts silent points and
/// histograms the neuron's pre-activation on the original latents.
#[allow(clippy::too_many_arguments)]
pub fn verify_stealth(
    original: &Network,
    planted: &Network,
    split: &LatentSplit,
    validation: &[Vec<f64>],
    trigger: &[f64],
    neuron: Option<&AttackNeuron>,
    params: &AttackParams,
    bins: usize,
) -> Result<StealthReport> {
    check_dim("planted network input", original.input_dim(), planted.input_dim())?;
    check_dim("trigger", original.input_dim(), trigger.len())?;
    let mut deviations = Vec::with_capacity(validation.len());
    let mut pre = neuron.map(|_| Vec::with_capacity(validation.len()));
    let mut silent = 0usize;
    for u in validation {
        let a = monitored(original, split, u)?;
        let b = monitored(planted, split, u)?;
        deviations.push(libm::fabs(a - b));
        if let (Some(n), Some(values)) = (neuron, pre.as_mut()) {
            let z = original.latent(split, u)?;
            values.push(n.pre_activation(&z)?);
            if n.effect(&z)? == 0.0 {
                silent += 1;
            }
        }
    }
    let trigger_deviation =
        libm::fabs(monitored(original, split, trigger)? - monitored(planted, split, trigger)?);
    finish_report(&deviations, trigger_deviation, pre, neuron.map(|_| silent), params, bins)
}

/// Like [`verify_stealth`] for precomputed latents at `split.cut`; both
/// networks must share the layers up to the cut.
#[allow(clippy::too_many_arguments)]
pub fn verify_stealth_latents(
    original: &Network,
    planted: &Network,
    split: &LatentSplit,
    latents: &[Vec<f64>],
    trigger_latent: &[f64],
    neuron: Option<&AttackNeuron>,
    params: &AttackParams,
    bins: usize,
) -> Result<StealthReport> {
    let mut deviations = Vec::with_capacity(latents.len());
    let mut pre = neuron.map(|_| Vec::with_capacity(latents.len()));
    let mut silent = 0usize;
    for z in latents {
        let a = original.head_output(split, z)?;
        let b = planted.head_output(split, z)?;
        deviations.push(libm::fabs(a - b));
        if let (Some(n), Some(values)) = (neuron, pre.as_mut()) {
            values.push(n.pre_activation(z)?);
            if n.effect(z)? == 0.0 {
                silent += 1;
            }
        }
    }
    let trigger_deviation = libm::fabs(
        original.head_output(split, trigger_latent)? - planted.head_output(split, trigger_latent)?,
    );
    finish_report(&deviations, trigger_deviation, pre, neuron.map(|_| silent), params, bins)
}

/// Histogram of `<Φ(u), w> - b` over `inputs`, with `Φ` taken from `net`.
pub fn activation_histogram(
    net: &Network,
    split: &LatentSplit,
    neuron: &AttackNeuron,
    inputs: &[Vec<f64>],
    bins: usize,
) -> Result<Histogram> {
    let mut values = Vec::with_capacity(inputs.len());
    for u in inputs {
        values.push(neuron.pre_activation(&net.latent(split, u)?)?);
    }
    Histogram::from_values(&values, bins)
}

/// How the validation latents are drawn in a Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub enum LatentModel {
    /// Independent uniform points of the unit ball, redrawn every trial.
    UniformBall,
    /// The same user-supplied latents in every trial.
    FixedList(Vec<Vec<f64>>),
    /// Unit-norm points spread over a cap of angular radius `cap_angle`
    /// around a random centre, redrawn every trial.
    AdversarialShell { cap_angle: f64 },
}

impl LatentModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformBall => "uniform-ball",
            Self::FixedList(_) => "fixed-list",
            Self::AdversarialShell { .. } => "adversarial-shell",
        }
    }
}

/// How `x` is moved to `x'` in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Displacement {
    /// A uniformly random direction of length `alpha delta`.
    #[default]
    Random,
    /// Diagnostic: for each latent separately, length `alpha delta` straight
    /// towards that latent.
    WorstCase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n: usize,
    /// Dimension of the subspace holding `x` (the first `n_p` coordinates).
    pub n_p: Option<usize>,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub model: LatentModel,
    /// Number of validation latents `M` (ignored for a fixed list).
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub displacement: Displacement,
    /// Trials per RNG stream; the partition is part of the result's identity.
    pub chunk_trials: u64,
}

/// Default number of trials handled by one RNG stream.
pub const DEFAULT_CHUNK_TRIALS: u64 = 1 << 16;
const MAX_TRIALS: u64 = 1 << 53;
const WILSON_Z: f64 = 1.959_963_984_540_054;

impl McConfig {
    pub fn sampling_dim(&self) -> usize {
        self.n_p.unwrap_or(self.n)
    }

    pub fn validation_count(&self) -> usize {
        match &self.model {
            LatentModel::FixedList(list) => list.len(),
            _ => self.m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        let np = self.sampling_dim();
        if np < 2 || np > self.n {
            return bad(format!("n_p must lie in [2, {}], got {np}", self.n));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return bad(format!("trials must lie in [1, 2^53], got {}", self.trials));
        }
        if self.chunk_trials == 0 {
            return bad("chunk size must be positive".into());
        }
        match &self.model {
            LatentModel::FixedList(list) => {
                for v in list {
                    check_dim("fixed latent", self.n, v.len())?;
                }
            }
            LatentModel::AdversarialShell { cap_angle } => {
                if !(*cap_angle >= 0.0 && *cap_angle <= core::f64::consts::PI) {
                    return bad(format!("cap angle must lie in [0, pi], got {cap_angle}"));
                }
            }
            LatentModel::UniformBall => {}
        }
        Ok(())
    }

    pub fn chunk_count(&self) -> u64 {
        self.trials.div_ceil(self.chunk_trials)
    }

    /// Trials handled by chunk `index`.
    pub fn chunk_size(&self, index: u64) -> u64 {
        let start = index * self.chunk_trials;
        self.chunk_trials.min(self.trials.saturating_sub(start))
    }
}

/// Raw counts, merged across chunks by addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McCounts {
    pub trials: u64,
    pub failures: u64,
}

impl McCounts {
    pub fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            failures: self.failures + other.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub trials: u64,
    pub failures: u64,
    pub success_frequency: f64,
    pub success_interval: (f64, f64),
    pub failure_frequency: f64,
    pub failure_interval: (f64, f64),
    pub chunks: u64,
    pub chunk_trials: u64,
    pub seed: u64,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

fn draw_latent<R: Rng + ?Sized>(rng: &mut R, model: &LatentModel, centre: &[f64], out: &mut [f64], scratch: &mut [f64]) {
    match model {
        LatentModel::UniformBall => {
            fill_sphere_point(rng, 1.0, out);
            let n = out.len() as f64;
            let r = libm::pow(rng.random::<f64>(), 1.0 / n);
            for v in out.iter_mut() {
                *v *= r;
            }
        }
        LatentModel::AdversarialShell { cap_angle } => {
            // rotate the centre by a uniform angle in [0, cap_angle] towards
            // a random orthogonal direction
            fill_sphere_point(rng, 1.0, scratch);
            let proj = dot(scratch, centre);
            for (s, &c) in scratch.iter_mut().zip(centre) {
                *s -= proj * c;
            }
            let len = norm(scratch);
            let t = cap_angle * rng.random::<f64>();
            let (sin_t, cos_t) = (libm::sin(t), libm::cos(t));
            for ((o, &c), &s) in out.iter_mut().zip(centre).zip(scratch.iter()) {
                *o = cos_t * c + if len > 0.0 { sin_t * s / len } else { 0.0 };
            }
        }
        LatentModel::FixedList(_) => unreachable!("fixed latents are not drawn"),
    }
}

/// Runs chunk `index` of the Monte Carlo experiment on its own RNG stream.
pub fn mc_chunk(cfg: &McConfig, index: u64) -> Result<McCounts> {
    cfg.validate()?;
    let trials = cfg.chunk_size(index);
    let mut rng = rng::seeded_stream(cfg.seed, index);
    let n = cfg.n;
    let np = cfg.sampling_dim();
    let m = cfg.validation_count();
    let step = cfg.alpha * cfg.delta;
    let mut x = vec![0.0; n];
    let mut e = vec![0.0; np];
    let mut x_prime = vec![0.0; n];
    let mut latent = vec![0.0; n];
    let mut centre = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    let mut failures = 0u64;
    for _ in 0..trials {
        fill_sphere_point(&mut rng, cfg.delta, &mut x[..np]);
        if cfg.displacement == Displacement::Random {
            x_prime.copy_from_slice(&x);
            if step > 0.0 {
                fill_sphere_point(&mut rng, step, &mut e);
                for (xp, &ei) in x_prime.iter_mut().zip(&e) {
                    *xp += ei;
                }
            }
        }
        if matches!(cfg.model, LatentModel::AdversarialShell { .. }) {
            fill_sphere_point(&mut rng, 1.0, &mut centre);
        }
        let mut failed = false;
        for i in 0..m {
            let xi: &[f64] = match &cfg.model {
                LatentModel::FixedList(list) => &list[i],
                model => {
                    draw_latent(&mut rng, model, &centre, &mut latent, &mut scratch);
                    &latent
                }
            };
            if failed {
                // keep the stream layout independent of earlier outcomes
                continue;
            }
            let hit = match cfg.displacement {
                Displacement::Random => dot(&x_prime, xi) > cfg.gamma * norm_sq(&x_prime),
                Displacement::WorstCase => {
                    let sub = &xi[..np];
                    let len = norm(sub);
                    shifted.copy_from_slice(&x);
                    if len > 0.0 {
                        for (s, &v) in shifted.iter_mut().zip(sub) {
                            *s += step * v / len;
                        }
                    }
                    dot(&shifted, xi) > cfg.gamma * norm_sq(&shifted)
                }
            };
            failed = hit;
        }
        if failed {
            failures += 1;
        }
    }
    Ok(McCounts { trials, failures })
}

/// Builds the report from merged counts.
pub fn mc_report(cfg: &McConfig, counts: McCounts) -> McReport {
    let successes = counts.trials - counts.failures;
    let success_interval = wilson_interval(successes, counts.trials);
    let failure_interval = wilson_interval(counts.failures, counts.trials);
    let t = counts.trials.max(1) as f64;
    McReport {
        trials: counts.trials,
        failures: counts.failures,
        success_frequency: successes as f64 / t,
        success_interval,
        failure_frequency: counts.failures as f64 / t,
        failure_interval,
        chunks: cfg.chunk_count(),
        chunk_trials: cfg.chunk_trials,
        seed: cfg.seed,
    }
}

/// Empirical probability of the event `<x', x_i> <= gamma ‖x'‖²` for all
/// validation latents, with 95% Wilson intervals. Runs every chunk in turn;
/// callers may instead run [`mc_chunk`] in parallel and merge the counts.
pub fn mc_event_probability(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let mut total = McCounts::default();
    for c in 0..cfg.chunk_count() {
        total = total.merge(mc_chunk(cfg, c)?);
    }
    Ok(mc_report(cfg, total))
}
