//! Construction of the attack neuron `D * g(<z, w> - b)`.
//!
//! Given the achieved latent displacement `x'` (already divided by the radius
//! `R`), the neuron uses `w = kappa * x' / R` and
//! `b = 0.5 * kappa * (1 + gamma) * ‖x'‖²`, plus `kappa * <phi*, x'> / R` for a
//! targeted attack around the latent point `phi*`. On the trigger the
//! pre-activation equals `0.5 * kappa * (1 - gamma) * ‖x'‖²`; on any latent
//! with `<x', z / R> <= gamma * ‖x'‖²` it is at most minus that amount.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, norm_sq};
use crate::model::{relu, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GKind {
    Relu,
    Sigmoid,
}

impl GKind {
    pub fn name(self) -> &'static str {
        match self {
            GKind::Relu => "relu",
            GKind::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(GKind::Relu),
            "sigmoid" => Some(GKind::Sigmoid),
            _ => None,
        }
    }

    pub fn apply(self, s: f64) -> f64 {
        match self {
            GKind::Relu => relu(s),
            GKind::Sigmoid => sigmoid(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sign {
    #[default]
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackParams {
    /// Silence threshold `gamma` in (0, 1).
    pub gamma: f64,
    /// Radius `delta` of the random direction, in (0, 1].
    pub delta: f64,
    /// Required trigger response `Delta`.
    pub response: f64,
    /// Validation tolerance `epsilon`.
    pub tolerance: f64,
    pub g_kind: GKind,
    pub sign: Sign,
    /// Extra log-odds headroom for sigmoid neurons.
    pub kappa_margin: f64,
    /// Upper bound `M` on the validation-set size, used for success bounds.
    pub max_validation: usize,
    /// Relative amount by which the planned trigger response exceeds
    /// `response`, so that rounding in the host network cannot push it below.
    pub response_headroom: f64,
}

impl Default for AttackParams {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            delta: 1.0 / 3.0,
            response: 50.0,
            tolerance: 0.0,
            g_kind: GKind::Relu,
            sign: Sign::Positive,
            kappa_margin: core::f64::consts::LN_10,
            max_validation: 1,
            response_headroom: 1e-10,
        }
    }
}

impl AttackParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if !(self.response >= 0.0 && self.response.is_finite()) {
            return bad(format!("response must be finite and >= 0, got {}", self.response));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be finite and >= 0, got {}", self.tolerance));
        }
        if self.g_kind == GKind::Sigmoid && self.tolerance <= 0.0 {
            return bad("a sigmoid attack needs a positive tolerance".into());
        }
        if !(self.kappa_margin > 0.0 && self.kappa_margin.is_finite()) {
            return bad(format!("kappa margin must be positive, got {}", self.kappa_margin));
        }
        if !(self.response_headroom >= 0.0 && self.response_headroom < 1e-3) {
            return bad(format!("response headroom must lie in [0, 1e-3), got {}", self.response_headroom));
        }
        Ok(())
    }
}

/// Attack neuron `D * g(<z, w> - b)` together with the quantities it was
/// built from.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackNeuron {
    pub w: Vec<f64>,
    pub b: f64,
    /// Output gain `D`.
    pub gain: f64,
    pub kappa: f64,
    pub g_kind: GKind,
    pub x_prime: Vec<f64>,
    /// Latent radius `R`.
    pub radius: f64,
}

impl AttackNeuron {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `<z, w> - b`.
    pub fn pre_activation(&self, z: &[f64]) -> Result<f64> {
        check_dim("attack neuron input", self.w.len(), z.len())?;
        Ok(dot(z, &self.w) - self.b)
    }

    /// Effect `D * g(<z, w> - b)` of the neuron on latent `z`.
    pub fn effect(&self, z: &[f64]) -> Result<f64> {
        Ok(self.gain * self.g_kind.apply(self.pre_activation(z)?))
    }

    /// `true` when `<x', z / R> <= gamma * ‖x'‖²`, i.e. `z` lies in the
    /// silent half-space of a plain attack.
    pub fn is_silent_plain(&self, z: &[f64], gamma: f64) -> Result<bool> {
        check_dim("attack neuron input", self.w.len(), z.len())?;
        Ok(dot(&self.x_prime, z) / self.radius <= gamma * norm_sq(&self.x_prime))
    }
}

/// Picks `(kappa, D)` so that `D g(-kappa z) <= epsilon` and
/// `D g(kappa z) >= Delta` with `z = 0.5 (1 - gamma) ‖x'‖²`.
///
/// ReLU: `kappa = Delta / z`, `D = ±1`; the response on silent latents is
/// exactly 0. Sigmoid: `kappa = (ln(Delta / epsilon) + margin) / z` and
/// `D = ±Delta / sigma(kappa z)`, which leaves `|D| sigma(-kappa z) =
/// epsilon e^{-margin}`.
pub fn choose_kappa_gain(params: &AttackParams, xprime_norm_sq: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(xprime_norm_sq > 0.0 && xprime_norm_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "‖x'‖² must be positive, got {xprime_norm_sq}"
        )));
    }
    if params.response <= 0.0 {
        return Err(Error::InvalidParameter("a zero trigger response is a no-op attack".into()));
    }
    let z = 0.5 * (1.0 - params.gamma) * xprime_norm_sq;
    let target = params.response * (1.0 + params.response_headroom);
    let sign = params.sign.value();
    match params.g_kind {
        GKind::Relu => {
            let mut kappa = target / z;
            while kappa * z < target {
                kappa = kappa.next_up();
            }
            Ok((kappa, sign))
        }
        GKind::Sigmoid => {
            let eps = params.tolerance;
            let kappa = (libm::log(params.response / eps) + params.kappa_margin) / z;
            let high = sigmoid(kappa * z);
            let mut gain = target / high;
            while gain * high < target {
                gain = gain.next_up();
            }
            if gain * sigmoid(-kappa * z) > eps {
                return Err(Error::Hypothesis {
                    what: "sigmoid attack cannot meet the tolerance",
                    value: gain * sigmoid(-kappa * z),
                });
            }
            if !kappa.is_finite() || !gain.is_finite() {
                return Err(Error::Hypothesis {
                    what: "non-finite sigmoid attack parameters",
                    value: kappa,
                });
            }
            Ok((kappa, sign * gain))
        }
    }
}

fn check_plan_inputs(params: &AttackParams, x_prime: &[f64], radius: f64) -> Result<()> {
    params.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let scaled = params.gamma * norm(x_prime);
    if scaled > 1.0 {
        return Err(Error::Hypothesis {
            what: "gamma * ‖x'‖ <= 1 is violated",
            value: scaled,
        });
    }
    Ok(())
}

/// Attack neuron for a plain attack (latents assumed within `B(0, R)`).
pub fn plan_plain_attack(params: &AttackParams, x_prime: &[f64], radius: f64) -> Result<AttackNeuron> {
    check_plan_inputs(params, x_prime, radius)?;
    let nsq = norm_sq(x_prime);
    let (kappa, gain) = choose_kappa_gain(params, nsq)?;
    let w = x_prime.iter().map(|&v| kappa * v / radius).collect();
    let b = 0.5 * kappa * (1.0 + params.gamma) * nsq;
    Ok(AttackNeuron {
        w,
        b,
        gain,
        kappa,
        g_kind: params.g_kind,
        x_prime: x_prime.to_vec(),
        radius,
    })
}

/// Attack neuron for a targeted attack around the latent point `phi_star`
/// (latents assumed within `B(phi_star, R)`).
pub fn plan_targeted_attack(
    params: &AttackParams,
    x_prime: &[f64],
    radius: f64,
    phi_star: &[f64],
) -> Result<AttackNeuron> {
    check_dim("target latent", x_prime.len(), phi_star.len())?;
    let mut neuron = plan_plain_attack(params, x_prime, radius)?;
    neuron.b += neuron.kappa * dot(phi_star, x_prime) / radius;
    Ok(neuron)
}
