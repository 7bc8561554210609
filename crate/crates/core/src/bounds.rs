//! Lower bounds on the probability that a single-neuron attack succeeds.
//!
//! The central quantity is the normalised spherical-cap area
//!
//! ```text
//! P1(n, theta) = pi^{-1/2} Γ(n/2) / Γ((n-1)/2) ∫_0^theta sin^{n-2}(t) dt
//! ```
//!
//! evaluated at `theta = arccos(phi(gamma, delta, alpha))`. Gamma ratios and
//! large powers are formed in log space so that dimensions in the millions do
//! not overflow. The integral uses adaptive Simpson quadrature.

use alloc::format;

use crate::error::{Error, Result};

/// Absolute tolerance of the cap integral (after normalisation).
pub const CAP_ABS_TOL: f64 = 1e-12;
/// Relative tolerance, which takes over for very small cap areas.
pub const CAP_REL_TOL: f64 = 1e-12;
const MAX_DEPTH: u32 = 40;

fn check_unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// `phi(gamma, delta, alpha) = cos(arccos(gamma (1 - alpha) delta) +
/// arccos(sqrt(1 - alpha²)))`. Errors unless the result is positive.
pub fn phi(gamma: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_unit_open("gamma", gamma)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let value = if alpha == 0.0 {
        gamma * delta
    } else {
        libm::cos(libm::acos(gamma * (1.0 - alpha) * delta) + libm::acos(libm::sqrt(1.0 - alpha * alpha)))
    };
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Hypothesis {
            what: "phi(gamma, delta, alpha) > 0",
            value,
        })
    }
}

/// `ln sin t` on `(0, pi/2]`, accurate near `pi/2` where `sin t` rounds to 1.
fn ln_sin(t: f64) -> f64 {
    if t > core::f64::consts::FRAC_PI_4 {
        let c = libm::cos(t);
        0.5 * libm::log1p(-c * c)
    } else {
        libm::log(libm::sin(t))
    }
}

/// `ln(Γ(n/2) / Γ((n-1)/2)) - ln(sqrt(pi))`.
fn ln_cap_coefficient(n: usize) -> f64 {
    let n = n as f64;
    libm::lgamma(0.5 * n) - libm::lgamma(0.5 * (n - 1.0)) - 0.5 * libm::log(core::f64::consts::PI)
}

/// Value and error estimate of the normalised cap integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapIntegral {
    pub value: f64,
    pub error: f64,
}

struct Simpson<F> {
    f: F,
    tol: f64,
    error: f64,
    converged: bool,
}

impl<F: Fn(f64) -> f64> Simpson<F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        // below roundoff level further refinement cannot help
        let floor = 4.0 * f64::EPSILON * libm::fabs(left + right);
        if libm::fabs(diff) <= (15.0 * tol).max(floor) || depth >= MAX_DEPTH || m <= a || b <= m {
            if depth >= MAX_DEPTH && libm::fabs(diff) > 15.0 * tol {
                self.converged = false;
            }
            self.error += libm::fabs(diff) / 15.0;
            return left + right + diff / 15.0;
        }
        self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }

    fn integrate(&mut self, a: f64, b: f64) -> f64 {
        // a fixed 16-panel pre-split keeps the first Simpson estimate honest
        // for sharply peaked integrands
        const PANELS: usize = 16;
        let h = (b - a) / PANELS as f64;
        let panel_tol = self.tol / PANELS as f64;
        let mut total = 0.0;
        for i in 0..PANELS {
            let lo = a + h * i as f64;
            let hi = if i + 1 == PANELS { b } else { lo + h };
            let fa = (self.f)(lo);
            let fb = (self.f)(hi);
            let fm = (self.f)(0.5 * (lo + hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            total += self.step(lo, hi, fa, fm, fb, whole, panel_tol, 0);
        }
        total
    }
}

fn cap_integral_with_tol(n: usize, theta_max: f64, abs_tol: f64, rel_tol: f64) -> Result<CapIntegral> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
    }
    if !(0.0..=core::f64::consts::FRAC_PI_2).contains(&theta_max) {
        return Err(Error::InvalidParameter(format!(
            "theta_max must lie in [0, pi/2], got {theta_max}"
        )));
    }
    if theta_max == 0.0 {
        return Ok(CapIntegral { value: 0.0, error: 0.0 });
    }
    let power = (n - 2) as f64;
    let ln_coef = ln_cap_coefficient(n);
    // fold the normalisation into the integrand so tolerances apply to P1
    let f = move |t: f64| {
        if power == 0.0 {
            libm::exp(ln_coef)
        } else {
            if t <= 0.0 {
                0.0
            } else {
                libm::exp(ln_coef + power * ln_sin(t))
            }
        }
    };
    // rough magnitude for the relative criterion: the integrand is increasing
    // on [0, pi/2], so theta * f(theta) bounds the integral from above and
    // the right-end Laplace estimate f(theta) * tan(theta) / (n - 1) from below
    let peak = f(theta_max);
    let scale = peak * (libm::tan(theta_max) / (n as f64 - 1.0)).min(theta_max);
    let tol = abs_tol.min(rel_tol * scale).max(f64::MIN_POSITIVE);
    // skip the left part where the integrand is negligible: f is increasing,
    // so the skipped mass is at most t_lo * f(t_lo)
    let ln_f = |t: f64| ln_coef + power * ln_sin(t);
    let ln_cut = libm::log(tol * 1e-3 / theta_max);
    let mut t_lo = 0.0;
    if power > 0.0 && ln_f(theta_max) > ln_cut {
        let mut hi = theta_max;
        for _ in 0..200 {
            let mid = 0.5 * (t_lo + hi);
            if ln_f(mid) < ln_cut {
                t_lo = mid;
            } else {
                hi = mid;
            }
        }
    } else if power > 0.0 {
        // the whole integrand is below the cut
        return Ok(CapIntegral { value: 0.0, error: theta_max * peak });
    }
    let mut simpson = Simpson {
        f,
        tol,
        error: 0.0,
        converged: true,
    };
    let value = simpson.integrate(t_lo, theta_max);
    if !simpson.converged || !value.is_finite() {
        return Err(Error::Quadrature(format!(
            "cap integral for n = {n}, theta = {theta_max} did not reach tolerance {tol:e}"
        )));
    }
    Ok(CapIntegral {
        value,
        error: simpson.error,
    })
}

/// Normalised cap probability `P1(n, theta_max)` by adaptive quadrature with
/// absolute tolerance [`CAP_ABS_TOL`].
pub fn cap_term_integral(n: usize, theta_max: f64) -> Result<CapIntegral> {
    cap_integral_with_tol(n, theta_max, CAP_ABS_TOL, CAP_REL_TOL)
}

/// Same as [`cap_term_integral`] with caller-chosen tolerances.
pub fn cap_term_integral_tol(n: usize, theta_max: f64, abs_tol: f64, rel_tol: f64) -> Result<CapIntegral> {
    cap_integral_with_tol(n, theta_max, abs_tol, rel_tol)
}

/// Closed-form upper bound on the cap probability:
/// `(2 sqrt(pi))^{-1} Γ(n/2) / Γ(n/2 + 1/2) phi^{-1} (1 - phi²)^{(n-1)/2}`.
pub fn cap_term_closed(n: usize, phi_val: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
    }
    if !(phi_val > 0.0) {
        return Err(Error::Hypothesis {
            what: "phi > 0",
            value: phi_val,
        });
    }
    if phi_val > 1.0 {
        return Err(Error::InvalidParameter(format!("phi must not exceed 1, got {phi_val}")));
    }
    if phi_val == 1.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let ln = libm::lgamma(0.5 * nf) - libm::lgamma(0.5 * nf + 0.5)
        - libm::log(2.0 * libm::sqrt(core::f64::consts::PI))
        - libm::log(phi_val)
        + 0.5 * (nf - 1.0) * libm::log1p(-phi_val * phi_val);
    Ok(libm::exp(ln))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    /// Bound `M` on the validation-set size.
    pub max_validation: f64,
    /// Latent (ambient) dimension.
    pub n: usize,
    /// Dimension of the sampling subspace; defaults to `n`.
    pub n_p: Option<usize>,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Collapse slack `epsilon` in `[0, gamma delta]`.
    pub eps_collapse: Option<f64>,
    /// Non-degeneracy constant `C` of the clustered data model.
    pub c: Option<f64>,
}

impl BoundQuery {
    pub fn sampling_dim(&self) -> usize {
        self.n_p.unwrap_or(self.n)
    }

    fn validate(&self) -> Result<()> {
        if !(self.max_validation >= 0.0 && self.max_validation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "M must be finite and >= 0, got {}",
                self.max_validation
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {}", self.n)));
        }
        if let Some(np) = self.n_p {
            if np < 2 || np > self.n {
                return Err(Error::InvalidParameter(format!(
                    "n_p must lie in [2, n = {}], got {np}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub phi: f64,
    pub theta_max: f64,
    /// Dimension used for the cap terms (`n_p`).
    pub dim: usize,
    pub p1_integral: f64,
    /// Closed-form cap term, capped at 1.
    pub p1_closed: f64,
    pub bound_integral: f64,
    pub bound_closed: f64,
    /// Closed-form bound evaluated at `alpha = 0` (`phi = gamma delta`).
    pub bound_alpha0: f64,
    pub bound_collapse: Option<f64>,
    pub collapse: Option<CollapseTerms>,
    pub quadrature_error_estimate: f64,
}

/// The three subtracted terms of the clustered-data bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseTerms {
    /// `C (1 - 2 eps)^n`.
    pub event1: f64,
    /// `M (C / 2) [2 (1/4 - (1/2 - eps - gamma delta)²)^{1/2}]^n`.
    pub event2: f64,
    /// `(1/2) [2 (1/4 - (1/2 - eps - gamma delta)²)^{1/2}]^n`, i.e. `event2`
    /// per unit of `M C`.
    pub event2_factor: f64,
    /// Cap term in the sampling dimension.
    pub event3: f64,
    pub value: f64,
}

/// Lower bounds on the success probability of the plain and targeted
/// attacks, and the clustered-data bound when `eps_collapse` and `C` are set.
pub fn success_bound(q: &BoundQuery) -> Result<BoundReport> {
    q.validate()?;
    let dim = q.sampling_dim();
    let phi_val = phi(q.gamma, q.delta, q.alpha)?;
    let theta_max = libm::acos(phi_val);
    let cap = cap_term_integral(dim, theta_max)?;
    let p1_closed = cap_term_closed(dim, phi_val)?.min(1.0);
    let p1_alpha0 = cap_term_closed(dim, q.gamma * q.delta)?.min(1.0);
    let m = q.max_validation;
    let (bound_collapse, collapse) = match (q.eps_collapse, q.c) {
        (Some(_), Some(_)) => {
            let terms = collapse_bound(q)?;
            (Some(terms.value), Some(terms))
        }
        _ => (None, None),
    };
    Ok(BoundReport {
        phi: phi_val,
        theta_max,
        dim,
        p1_integral: cap.value,
        p1_closed,
        bound_integral: 1.0 - m * cap.value,
        bound_closed: 1.0 - m * p1_closed,
        bound_alpha0: 1.0 - m * p1_alpha0,
        bound_collapse,
        collapse,
        quadrature_error_estimate: cap.error,
    })
}

/// Success bound under clustered validation data ("concentrational
/// collapse"); requires `gamma delta < 1/2` and `0 <= eps <= gamma delta`.
pub fn collapse_bound(q: &BoundQuery) -> Result<CollapseTerms> {
    q.validate()?;
    let gd = q.gamma * q.delta;
    if !(gd < 0.5) {
        return Err(Error::Hypothesis {
            what: "gamma * delta < 1/2",
            value: gd,
        });
    }
    let eps = q
        .eps_collapse
        .ok_or_else(|| Error::InvalidParameter("collapse bound needs eps_collapse".into()))?;
    let c = q
        .c
        .ok_or_else(|| Error::InvalidParameter("collapse bound needs the constant C".into()))?;
    if !(0.0..=gd).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "eps_collapse must lie in [0, gamma delta = {gd}], got {eps}"
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be finite and >= 0, got {c}")));
    }
    let n = q.n as f64;
    let event1 = c * libm::exp(n * libm::log1p(-2.0 * eps));
    let shift = 0.5 - eps - gd;
    let base = 2.0 * libm::sqrt((0.25 - shift * shift).max(0.0));
    let event2_factor = 0.5 * libm::exp(n * libm::log(base));
    let event2 = q.max_validation * c * event2_factor;
    let phi_val = phi(q.gamma, q.delta, q.alpha)?;
    let event3 = cap_term_integral(q.sampling_dim(), libm::acos(phi_val))?.value;
    Ok(CollapseTerms {
        event1,
        event2,
        event2_factor,
        event3,
        value: 1.0 - event1 - event2 - event3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GAMMA: f64 = 0.9;
    const DELTA: f64 = 1.0 / 3.0;

    /// cos(A + B) expanded algebraically: an independent route to phi.
    fn phi_algebraic(g: f64, d: f64, a: f64) -> f64 {
        let c = g * (1.0 - a) * d;
        c * (1.0 - a * a).sqrt() - (1.0 - c * c).sqrt() * a
    }

    /// Incomplete-beta route: P1 = I_{sin² theta}((n-1)/2, 1/2) / 2.
    fn p1_beta(n: usize, theta: f64) -> f64 {
        let s = theta.sin();
        0.5 * statrs::function::beta::beta_reg((n as f64 - 1.0) / 2.0, 0.5, s * s)
    }

    #[test]
    fn phi_reductions() {
        assert_eq!(phi(GAMMA, DELTA, 0.0).unwrap(), GAMMA * DELTA);
        assert!((phi(GAMMA, DELTA, 0.0).unwrap() - 0.3).abs() < 1e-15);
        let p = phi(GAMMA, DELTA, 0.179).unwrap();
        assert!(p > 0.0 && p < 0.3);
        // frozen from a 40-digit evaluation
        assert!((p - 0.068_836_365_482_537_02).abs() < 1e-14);
        assert!((p - phi_algebraic(GAMMA, DELTA, 0.179)).abs() < 1e-14);
    }

    #[test]
    fn phi_hypothesis_violation() {
        let err = phi(0.5, 0.3, 0.5).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { .. }));
        assert!(phi(1.0, 0.3, 0.0).is_err());
        assert!(phi(0.9, 0.3, 1.0).is_err());
    }

    #[test]
    fn cap_integral_reference_values() {
        // frozen from 40-digit quadrature
        let t = libm::acos(phi(GAMMA, DELTA, 0.179).unwrap());
        let v = cap_term_integral(112, t).unwrap();
        assert!((v.value - 0.234_390_275_139_574_6).abs() < 1e-11);
        let v0 = cap_term_integral(112, libm::acos(0.3)).unwrap();
        assert!((v0.value / 6.226_798_086_596_168e-4 - 1.0).abs() < 1e-9);
        let v200 = cap_term_integral(200, libm::acos(0.3)).unwrap();
        assert!((v200.value / 7.564_951_201_059_889e-6 - 1.0).abs() < 1e-8);
        let q = cap_term_integral(2, core::f64::consts::FRAC_PI_4).unwrap();
        assert!((q.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cap_integral_empty_range() {
        assert_eq!(cap_term_integral(50, 0.0).unwrap().value, 0.0);
        assert!(cap_term_integral(1, 0.2).is_err());
        assert!(cap_term_integral(10, 2.0).is_err());
    }

    #[test]
    fn cap_integral_matches_incomplete_beta() {
        for &n in &[2usize, 3, 5, 16, 64, 112, 200, 1000] {
            for &t in &[0.1, 0.5, 1.0, 1.3, 1.5] {
                let got = cap_term_integral(n, t).unwrap().value;
                let want = p1_beta(n, t);
                assert!((got - want).abs() <= 1e-10 * want.max(1e-300) + 1e-13, "n={n} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn cap_integral_large_dimension() {
        let t = core::f64::consts::FRAC_PI_2 - 1e-3;
        let v = cap_term_integral(1_000_000, t).unwrap();
        let want = p1_beta(1_000_000, t);
        assert!(v.value > 0.0 && (v.value / want - 1.0).abs() < 1e-8, "{} vs {want}", v.value);
        let tiny = cap_term_integral(100_000, 1.2).unwrap().value;
        assert!(tiny >= 0.0 && tiny < 1e-100);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(cap_term_closed(50, 1.0).unwrap(), 0.0);
        assert!(cap_term_closed(50, 0.0).is_err());
        // independent evaluation: Gamma ratio by recurrence, power by
        // repeated multiplication
        let mut ratio = 2.0 / core::f64::consts::PI.sqrt(); // Γ(1)/Γ(3/2)
        for k in 1..100 {
            ratio *= k as f64 / (k as f64 + 0.5);
        }
        let mut pow = 0.91f64.sqrt();
        for _ in 0..99 {
            pow *= 0.91;
        }
        let want = ratio / (2.0 * core::f64::consts::PI.sqrt()) / 0.3 * pow;
        let got = cap_term_closed(200, 0.3).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
        assert!((got / 7.914_713_797_839_461e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_dominates_integral_on_grid() {
        for n in (2..400).step_by(7) {
            for k in 1..20 {
                let p = k as f64 / 20.0;
                let closed = cap_term_closed(n, p).unwrap();
                let integral = cap_term_integral(n, libm::acos(p)).unwrap().value;
                assert!(integral <= closed * (1.0 + 1e-12), "n={n} phi={p}");
            }
        }
    }

    #[test]
    fn success_bound_examples() {
        let mut q = BoundQuery {
            max_validation: 0.0,
            n: 112,
            n_p: None,
            gamma: GAMMA,
            delta: DELTA,
            alpha: 0.179,
            eps_collapse: None,
            c: None,
        };
        let r = success_bound(&q).unwrap();
        assert_eq!((r.bound_integral, r.bound_closed, r.bound_alpha0), (1.0, 1.0, 1.0));
        q.max_validation = 10.0;
        let r = success_bound(&q).unwrap();
        assert!((r.bound_integral - (1.0 - 10.0 * r.p1_integral)).abs() < 1e-15);
        assert!(r.bound_integral < 0.0);
        assert!(r.p1_integral <= r.p1_closed);
        assert!(r.quadrature_error_estimate < 1e-11);
    }

    #[test]
    fn subspace_dimension_is_used() {
        let q = BoundQuery {
            max_validation: 1.0,
            n: 200,
            n_p: Some(112),
            gamma: GAMMA,
            delta: DELTA,
            alpha: 0.0,
            eps_collapse: None,
            c: None,
        };
        let r = success_bound(&q).unwrap();
        assert_eq!(r.dim, 112);
        assert!((r.p1_integral / 6.226_798_086_596_168e-4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn collapse_terms() {
        let q = BoundQuery {
            max_validation: 1.0,
            n: 200,
            n_p: Some(112),
            gamma: GAMMA,
            delta: DELTA,
            alpha: 0.179,
            eps_collapse: Some(0.01),
            c: Some(1.0),
        };
        let t = collapse_bound(&q).unwrap();
        // direct evaluation of 0.5 * (2 sqrt(1/4 - 0.19²))^200
        let direct = 0.5 * (2.0 * (0.25f64 - 0.19 * 0.19).sqrt()).powi(200);
        assert!((t.event2_factor / direct - 1.0).abs() < 1e-12);
        assert!((t.event1 - 0.98f64.powi(200)).abs() < 1e-15);
        let bad = BoundQuery {
            gamma: 0.9,
            delta: 0.6,
            ..q.clone()
        };
        assert!(matches!(collapse_bound(&bad).unwrap_err(), Error::Hypothesis { .. }));
        let eps_too_big = BoundQuery {
            eps_collapse: Some(0.31),
            ..q.clone()
        };
        assert!(collapse_bound(&eps_too_big).is_err());
    }

    #[test]
    fn collapse_boundary_eps_equals_gamma_delta() {
        let gd: f64 = 0.9 * 0.3;
        let q = BoundQuery {
            max_validation: 3.0,
            n: 50,
            n_p: None,
            gamma: 0.9,
            delta: 0.3,
            alpha: 0.0,
            eps_collapse: Some(gd),
            c: Some(2.0),
        };
        let t = collapse_bound(&q).unwrap();
        let base = 2.0 * (0.25 - (0.5 - 2.0 * gd) * (0.5 - 2.0 * gd)).sqrt();
        let direct = 3.0 * (2.0 / 2.0) * base.powi(50);
        assert!((t.event2 / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_self_consistency() {
        let t = libm::acos(phi(GAMMA, DELTA, 0.2).unwrap());
        for &n in &[16usize, 112, 500] {
            let a = cap_term_integral(n, t).unwrap();
            let b = cap_term_integral_tol(n, t, CAP_ABS_TOL / 2.0, CAP_REL_TOL / 2.0).unwrap();
            assert!((a.value - b.value).abs() <= a.error.max(1e-15), "n={n}");
        }
    }

    proptest! {
        #[test]
        fn cap_integral_monotone(n in 3usize..600, t in 0.05f64..1.5, dt in 0.001f64..0.05) {
            let a = cap_term_integral(n, t).unwrap().value;
            let b = cap_term_integral(n, t + dt).unwrap().value;
            let c = cap_term_integral(n + 1, t).unwrap().value;
            prop_assert!(b >= a && c <= a);
            if a > 1e-250 {
                prop_assert!(b > a);
                prop_assert!(c < a);
            }
        }

        #[test]
        fn phi_monotone(g in 0.05f64..0.95, d in 0.05f64..0.95, a in 0.0f64..0.2, step in 0.001f64..0.04) {
            if let (Ok(base), Ok(more_alpha)) = (phi(g, d, a), phi(g, d, a + step)) {
                prop_assert!(more_alpha < base);
                let more_gamma = phi(g + step, d, a).unwrap();
                let more_delta = phi(g, d + step, a).unwrap();
                prop_assert!(more_gamma > base);
                prop_assert!(more_delta > base);
            }
        }

        #[test]
        fn bounds_monotone_and_at_most_one(
            m in 0.0f64..100.0, n in 2usize..400, dn in 1usize..50, alpha in 0.0f64..0.3,
        ) {
            let q = BoundQuery {
                max_validation: m, n, n_p: None, gamma: GAMMA, delta: DELTA, alpha,
                eps_collapse: None, c: None,
            };
            if let Ok(r) = success_bound(&q) {
                prop_assert!(r.bound_integral <= 1.0 && r.bound_closed <= 1.0 && r.bound_alpha0 <= 1.0);
                prop_assert!((0.0..=1.0).contains(&r.p1_integral));
                prop_assert!((0.0..=1.0).contains(&r.p1_closed));
                prop_assert!(r.p1_integral <= r.p1_closed * (1.0 + 1e-12));
                let bigger = success_bound(&BoundQuery { n: n + dn, ..q.clone() }).unwrap();
                prop_assert!(bigger.bound_integral >= r.bound_integral);
                let exact = success_bound(&BoundQuery { alpha: 0.0, ..q.clone() }).unwrap();
                prop_assert!(exact.bound_integral >= r.bound_integral);
                prop_assert!(exact.bound_closed >= r.bound_closed);
            }
        }
    }
}
