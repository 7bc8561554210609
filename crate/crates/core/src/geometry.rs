//! Random directions on spheres, latent radius estimation and attack accuracy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm};
use crate::rng;

/// A point on the sphere of radius `delta`, optionally restricted to a
/// coordinate subspace (`support`). Coordinates outside the support are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSample {
    pub x: Vec<f64>,
    pub delta: f64,
    pub support: Option<Vec<usize>>,
    pub seed: u64,
}

impl SphereSample {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Number of free coordinates (`n_p`): the support size or the full
    /// dimension.
    pub fn effective_dim(&self) -> usize {
        self.support.as_ref().map_or(self.x.len(), Vec::len)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// Writes a uniform point of the sphere of radius `radius` into `out` by
/// normalising a standard Gaussian draw.
pub fn fill_sphere_point<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    loop {
        rng::fill_standard_normal(rng, out);
        let len = norm(out);
        if len > 0.0 {
            let scale = radius / len;
            for v in out.iter_mut() {
                *v *= scale;
            }
            return;
        }
    }
}

/// Uniform sample on the sphere `S_{n-1}(0, delta)`, deterministic in `seed`.
pub fn sample_sphere(n: usize, delta: f64, seed: u64) -> Result<SphereSample> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("sphere dimension must be >= 2, got {n}")));
    }
    check_delta(delta)?;
    let mut rng = rng::seeded(seed);
    let mut x = vec![0.0; n];
    fill_sphere_point(&mut rng, delta, &mut x);
    Ok(SphereSample {
        x,
        delta,
        support: None,
        seed,
    })
}

/// Uniform sample on the sphere of radius `delta` inside the coordinate
/// subspace spanned by `support`.
pub fn sample_subsphere(n: usize, support: &[usize], delta: f64, seed: u64) -> Result<SphereSample> {
    if support.len() < 2 || support.len() > n {
        return Err(Error::InvalidParameter(format!(
            "support size must lie in [2, {n}], got {}",
            support.len()
        )));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("support indices must be distinct".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParameter(format!("support index {bad} out of range for dimension {n}")));
    }
    check_delta(delta)?;
    let mut rng = rng::seeded(seed);
    let mut coords = vec![0.0; sorted.len()];
    fill_sphere_point(&mut rng, delta, &mut coords);
    let mut x = vec![0.0; n];
    for (&i, &c) in sorted.iter().zip(&coords) {
        x[i] = c;
    }
    Ok(SphereSample {
        x,
        delta,
        support: Some(sorted),
        seed,
    })
}

/// Indices of the strictly positive coordinates; the default subspace for
/// targeted attacks on ReLU latents, whose zero coordinates carry no gradient.
pub fn positive_support(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Radius of the smallest origin-centred ball (or `center`-centred, for
/// targeted attacks) containing every latent vector, times `safety`.
pub fn estimate_radius(latents: &[Vec<f64>], center: Option<&[f64]>, safety: f64) -> Result<f64> {
    let first = latents
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot estimate a radius from no vectors".into()))?;
    if !(safety > 0.0 && safety.is_finite()) {
        return Err(Error::InvalidParameter(format!("safety factor must be positive, got {safety}")));
    }
    let zero;
    let c = match center {
        Some(c) => c,
        None => {
            zero = vec![0.0; first.len()];
            &zero
        }
    };
    let mut r: f64 = 0.0;
    for v in latents {
        check_dim("latent vector", c.len(), v.len())?;
        r = r.max(dist(v, c));
    }
    Ok(r * safety)
}

/// Achieved accuracy `‖x' - x‖ / delta`.
pub fn alpha_of(x: &SphereSample, x_prime: &[f64]) -> Result<f64> {
    check_dim("alpha", x.x.len(), x_prime.len())?;
    check_delta(x.delta)?;
    Ok(dist(x_prime, &x.x) / x.delta)
}
