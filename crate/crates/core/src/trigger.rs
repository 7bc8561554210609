//! Trigger search by projected gradient descent on a penalised loss.
//!
//! With `d = (Φ(u) - Φ(u*)) / R` (or `Φ(u) / R` for a plain attack) the loss is
//!
//! ```text
//! ‖d - x‖² + λ1 max(γ‖d‖ - 1, 0)^p1 + λ2 max(‖d - x‖ - δ, 0)^p2
//! ```
//!
//! and the iteration is `u ← Proj_box(u - step(k) ∇L)` with
//! `step(k) = step0 / (1 + decay k)`.

use alloc::format;
use alloc::vec::Vec;

use crate::attack::AttackParams;
use crate::error::{check_dim, Error, Result};
use crate::geometry::SphereSample;
use crate::linalg::{dist, norm};
use crate::model::{InputBox, LatentSplit, Network};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSearchConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: f64,
    pub p2: f64,
    pub max_iters: usize,
    /// Initial step; `None` means 1% of the widest box side.
    pub step0: Option<f64>,
    pub step_decay: f64,
    /// Stop as soon as a feasible iterate reaches this accuracy.
    pub alpha_target: Option<f64>,
    pub seed: u64,
    /// Round the returned trigger to integers (then clamp to the box) and
    /// recompute its accuracy.
    pub round_to_integers: bool,
}

impl Default for TriggerSearchConfig {
    fn default() -> Self {
        Self {
            lambda1: 10.0,
            lambda2: 10.0,
            p1: 2.0,
            p2: 2.0,
            max_iters: 100_000,
            step0: None,
            step_decay: 1e-3,
            alpha_target: None,
            seed: 0,
            round_to_integers: false,
        }
    }
}

impl TriggerSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) || !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return bad(format!("penalty weights must be finite and >= 0, got {} and {}", self.lambda1, self.lambda2));
        }
        if !(self.p1 > 0.0 && self.p2 > 0.0) || !self.p1.is_finite() || !self.p2.is_finite() {
            return bad(format!("penalty exponents must be positive, got {} and {}", self.p1, self.p2));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if let Some(s) = self.step0 {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("step0 must be positive, got {s}"));
            }
        }
        if !(self.step_decay >= 0.0 && self.step_decay.is_finite()) {
            return bad(format!("step decay must be finite and >= 0, got {}", self.step_decay));
        }
        if let Some(a) = self.alpha_target {
            if !(a >= 0.0) {
                return bad(format!("alpha target must be >= 0, got {a}"));
            }
        }
        Ok(())
    }

    /// Step size actually used for a given input box.
    pub fn resolved_step0(&self, input_box: &InputBox) -> f64 {
        self.step0.unwrap_or_else(|| {
            let w = input_box.max_width();
            if w > 0.0 {
                0.01 * w
            } else {
                0.01
            }
        })
    }

    pub fn step(&self, step0: f64, k: usize) -> f64 {
        step0 / (1.0 + self.step_decay * k as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerResult {
    pub u_prime: Vec<f64>,
    pub x: SphereSample,
    /// Achieved displacement `(Φ(u') - Φ(u*)) / R`.
    pub x_prime: Vec<f64>,
    pub alpha: f64,
    pub feasible: bool,
    /// Gradient steps taken.
    pub iterations: usize,
    pub loss_trace: Vec<f64>,
    /// Smallest accuracy seen so far, one entry per evaluated iterate.
    pub best_alpha_trace: Vec<f64>,
    pub u_star: Option<Vec<f64>>,
    pub radius: f64,
    pub step0: f64,
    pub seed: u64,
}

/// Coordinate-wise clamp of `u` into `input_box`.
pub fn project_box(u: &[f64], input_box: &InputBox) -> Result<Vec<f64>> {
    check_dim("projection", input_box.dim(), u.len())?;
    Ok(input_box.project(u))
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

fn displacement(z: &[f64], anchor: Option<&[f64]>, radius: f64) -> Vec<f64> {
    match anchor {
        Some(a) => z.iter().zip(a).map(|(&zi, &ai)| (zi - ai) / radius).collect(),
        None => z.iter().map(|&zi| zi / radius).collect(),
    }
}

fn is_feasible(d: &[f64], x: &[f64], gamma: f64, delta: f64) -> bool {
    gamma * norm(d) <= 1.0 && dist(d, x) < delta
}

struct Evaluation {
    value: f64,
    grad: Vec<f64>,
    d: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    net: &Network,
    split: &LatentSplit,
    u: &[f64],
    anchor: Option<&[f64]>,
    x: &[f64],
    radius: f64,
    gamma: f64,
    delta: f64,
    cfg: &TriggerSearchConfig,
) -> Result<Evaluation> {
    let z = net.latent(split, u)?;
    let d = displacement(&z, anchor, radius);
    let r: Vec<f64> = d.iter().zip(x).map(|(&a, &b)| a - b).collect();
    let r_norm = norm(&r);
    let d_norm = norm(&d);
    let mut value = r_norm * r_norm;
    let mut grad_d: Vec<f64> = r.iter().map(|&v| 2.0 * v).collect();

    let g1 = gamma * d_norm - 1.0;
    if g1 > 0.0 && cfg.lambda1 > 0.0 {
        value += cfg.lambda1 * libm::pow(g1, cfg.p1);
        let scale = cfg.lambda1 * cfg.p1 * libm::pow(g1, cfg.p1 - 1.0) * gamma / d_norm;
        for (g, &di) in grad_d.iter_mut().zip(&d) {
            *g += scale * di;
        }
    }
    let g2 = r_norm - delta;
    if g2 > 0.0 && cfg.lambda2 > 0.0 {
        value += cfg.lambda2 * libm::pow(g2, cfg.p2);
        let scale = cfg.lambda2 * cfg.p2 * libm::pow(g2, cfg.p2 - 1.0) / r_norm;
        for (g, &ri) in grad_d.iter_mut().zip(&r) {
            *g += scale * ri;
        }
    }
    for g in grad_d.iter_mut() {
        *g /= radius;
    }
    let grad = net.latent_vjp(split, u, &grad_d)?;
    Ok(Evaluation { value, grad, d })
}

/// Penalised trigger loss at `u` and its gradient with respect to `u`.
#[allow(clippy::too_many_arguments)]
pub fn trigger_loss(
    net: &Network,
    split: &LatentSplit,
    u: &[f64],
    u_star: Option<&[f64]>,
    x: &SphereSample,
    radius: f64,
    gamma: f64,
    delta: f64,
    cfg: &TriggerSearchConfig,
) -> Result<(f64, Vec<f64>)> {
    check_radius(radius)?;
    check_dim("sampled direction", split.latent_dim, x.x.len())?;
    let anchor = u_star.map(|s| net.latent(split, s)).transpose()?;
    let e = evaluate(net, split, u, anchor.as_deref(), &x.x, radius, gamma, delta, cfg)?;
    Ok((e.value, e.grad))
}

/// Projected gradient search for a trigger whose scaled latent displacement
/// approximates `x`. Starts at `u_star` when given (targeted attack), else at
/// a seeded uniform point of the input box.
pub fn search_trigger(
    net: &Network,
    split: &LatentSplit,
    x: &SphereSample,
    u_star: Option<&[f64]>,
    radius: f64,
    params: &AttackParams,
    cfg: &TriggerSearchConfig,
) -> Result<TriggerResult> {
    params.validate()?;
    cfg.validate()?;
    check_radius(radius)?;
    check_dim("sampled direction", split.latent_dim, x.x.len())?;
    if x.delta != params.delta {
        return Err(Error::InvalidParameter(format!(
            "direction was sampled with delta {} but the attack uses {}",
            x.delta, params.delta
        )));
    }
    let (gamma, delta) = (params.gamma, params.delta);
    let input_box = net.input_box();
    let anchor = match u_star {
        Some(s) => {
            check_dim("target input", net.input_dim(), s.len())?;
            Some(net.latent(split, s)?)
        }
        None => None,
    };
    let mut u = match u_star {
        Some(s) => s.to_vec(),
        None => {
            let mut rng = rng::seeded(cfg.seed);
            input_box
                .lower()
                .iter()
                .zip(input_box.upper())
                .map(|(&lo, &hi)| rng::uniform(&mut rng, lo, hi))
                .collect()
        }
    };
    let step0 = cfg.resolved_step0(input_box);

    let mut loss_trace = Vec::new();
    let mut best_alpha_trace = Vec::new();
    // (alpha, u, d) of the best feasible and the best iterate overall
    let mut best_feasible: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut best_any: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    for k in 0..=cfg.max_iters {
        let e = evaluate(net, split, &u, anchor.as_deref(), &x.x, radius, gamma, delta, cfg)?;
        if !e.value.is_finite() || e.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: k });
        }
        loss_trace.push(e.value);
        let alpha = dist(&e.d, &x.x) / delta;
        let feasible = is_feasible(&e.d, &x.x, gamma, delta);
        if best_any.as_ref().is_none_or(|b| alpha < b.0) {
            best_any = Some((alpha, u.clone(), e.d.clone()));
        }
        if feasible && best_feasible.as_ref().is_none_or(|b| alpha < b.0) {
            best_feasible = Some((alpha, u.clone(), e.d));
        }
        best_alpha_trace.push(best_any.as_ref().map_or(f64::INFINITY, |b| b.0));
        if let (true, Some(target)) = (feasible, cfg.alpha_target) {
            if alpha <= target {
                break;
            }
        }
        if k == cfg.max_iters {
            break;
        }
        let h = cfg.step(step0, k);
        for (ui, gi) in u.iter_mut().zip(&e.grad) {
            *ui -= h * gi;
        }
        u = input_box.project(&u);
        iterations += 1;
    }

    let (_, mut u_best, _) = best_feasible
        .or(best_any)
        .expect("at least one iterate is evaluated");
    if cfg.round_to_integers {
        let rounded: Vec<f64> = u_best.iter().map(|&v| libm::round(v)).collect();
        u_best = input_box.project(&rounded);
    }
    let d_best = displacement(&net.latent(split, &u_best)?, anchor.as_deref(), radius);
    let alpha = dist(&d_best, &x.x) / delta;
    let feasible = is_feasible(&d_best, &x.x, gamma, delta);
    Ok(TriggerResult {
        u_prime: u_best,
        x: x.clone(),
        x_prime: d_best,
        alpha,
        feasible,
        iterations,
        loss_trace,
        best_alpha_trace,
        u_star: u_star.map(<[f64]>::to_vec),
        radius,
        step0,
        seed: cfg.seed,
    })
}

/// The result with the smallest accuracy, preferring feasible ones. Ties
/// keep the earliest candidate.
pub fn select_best(results: Vec<TriggerResult>) -> Option<TriggerResult> {
    let mut best: Option<TriggerResult> = None;
    for r in results {
        let better = match &best {
            None => true,
            Some(b) => (r.feasible && !b.feasible) || (r.feasible == b.feasible && r.alpha < b.alpha),
        };
        if better {
            best = Some(r);
        }
    }
    best
}

/// Runs one search per `(u_star, radius)` candidate and keeps the one with
/// minimal accuracy.
pub fn search_trigger_restarts(
    net: &Network,
    split: &LatentSplit,
    x: &SphereSample,
    candidates: &[(Vec<f64>, f64)],
    params: &AttackParams,
    cfg: &TriggerSearchConfig,
) -> Result<TriggerResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no target candidates given".into()));
    }
    let mut results = Vec::with_capacity(candidates.len());
    for (u_star, radius) in candidates {
        results.push(search_trigger(net, split, x, Some(u_star), *radius, params, cfg)?);
    }
    Ok(select_best(results).expect("non-empty candidate list"))
}
