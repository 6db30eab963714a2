//! The concave nonlinearity `F_α`, its derivatives, the Euler–Lagrange
//! right-hand side and the exact parameter scalings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MARGIN: f64 = 1e-12;

/// Model parameters. The branch constants are always recomputed from `q`, `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct ModelParams {
    pub d: usize,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub a_const: f64,
    pub b_const: f64,
    pub c_const: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    d: usize,
    q: f64,
    r: f64,
    alpha: f64,
}

impl TryFrom<ParamsJson> for ModelParams {
    type Error = Error;
    fn try_from(j: ParamsJson) -> Result<Self> {
        ModelParams::new(j.d, j.q, j.r, j.alpha)
    }
}

impl From<ModelParams> for ParamsJson {
    fn from(p: ModelParams) -> Self {
        ParamsJson { d: p.d, q: p.q, r: p.r, alpha: p.alpha }
    }
}

impl ModelParams {
    /// Validates `1 < r < (d+2)/d < q` and `α > 0`, then derives 𝔞, 𝔟, 𝔠.
    pub fn new(d: usize, q: f64, r: f64, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("d must be at least 1".into()));
        }
        if !(q.is_finite() && r.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        let crit = (d as f64 + 2.0) / d as f64;
        if !(r > 1.0 + MARGIN && r < crit - MARGIN && q > crit + MARGIN) {
            return Err(Error::InvalidParams(format!("need 1 < r < (d+2)/d < q, got d={d}, q={q}, r={r}")));
        }
        if alpha <= 0.0 {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        Ok(ModelParams {
            d,
            q,
            r,
            alpha,
            a_const: (q - 1.0) * (q - r) / r,
            b_const: q * (q - r) / (r - 1.0),
            c_const: q * (q - 1.0) / (r * (r - 1.0)),
        })
    }

    /// Same exponents at a different threshold.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ModelParams::new(self.d, self.q, self.r, alpha)
    }

    /// `q − (d+2)/d`, positive by construction.
    pub fn q_excess(&self) -> f64 {
        self.q - (self.d as f64 + 2.0) / self.d as f64
    }

    /// Energy-critical exponent `d/(d−2)`, infinite for `d ≤ 2`.
    pub fn q_sobolev(&self) -> f64 {
        if self.d <= 2 {
            f64::INFINITY
        } else {
            self.d as f64 / (self.d as f64 - 2.0)
        }
    }

    fn f1(&self, s: f64) -> f64 {
        if s <= 1.0 {
            -s.powf(self.q)
        } else {
            -self.a_const + self.b_const * s - self.c_const * s.powf(self.r)
        }
    }

    fn f1_prime(&self, s: f64) -> f64 {
        if s <= 1.0 {
            -self.q * s.powf(self.q - 1.0)
        } else {
            self.b_const - self.c_const * self.r * s.powf(self.r - 1.0)
        }
    }

    fn f1_second(&self, s: f64) -> f64 {
        if s <= 1.0 {
            -self.q * (self.q - 1.0) * s.powf(self.q - 2.0)
        } else {
            -self.c_const * self.r * (self.r - 1.0) * s.powf(self.r - 2.0)
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::Domain(format!("F_alpha needs t >= 0, got {t}")))
    } else {
        Ok(())
    }
}

/// `F_α(t) = α^q F₁(t/α)`.
pub fn f_alpha(p: &ModelParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(p.alpha.powf(p.q) * p.f1(t / p.alpha))
}

/// `F_α′(t)`.
pub fn f_alpha_prime(p: &ModelParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(p.alpha.powf(p.q - 1.0) * p.f1_prime(t / p.alpha))
}

/// `F_α″(t)`. Diverges at `t = 0` when `q < 2`.
pub fn f_alpha_second(p: &ModelParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(p.alpha.powf(p.q - 2.0) * p.f1_second(t / p.alpha))
}

// Infallible versions for hot loops where the argument is a square.
#[inline]
pub(crate) fn fa(p: &ModelParams, t: f64) -> f64 {
    p.alpha.powf(p.q) * p.f1(t / p.alpha)
}

#[inline]
pub(crate) fn fa_prime(p: &ModelParams, t: f64) -> f64 {
    p.alpha.powf(p.q - 1.0) * p.f1_prime(t / p.alpha)
}

#[inline]
pub(crate) fn fa_second(p: &ModelParams, t: f64) -> f64 {
    p.alpha.powf(p.q - 2.0) * p.f1_second(t / p.alpha)
}

/// `F_α(t + dt) − F_α(t)` without cancellation when `|dt| ≪ t`.
pub fn f_alpha_increment(p: &ModelParams, t: f64, dt: f64) -> f64 {
    let s = t / p.alpha;
    let ds = dt / p.alpha;
    let s1 = s + ds;
    let scale = p.alpha.powf(p.q);
    if s > 0.0 && s <= 1.0 && s1 <= 1.0 {
        // −((s+ds)^q − s^q)
        -scale * s.powf(p.q) * ((p.q * (ds / s).ln_1p()).exp_m1())
    } else if s >= 1.0 && s1 >= 1.0 {
        let pow_inc = s.powf(p.r) * (p.r * (ds / s).ln_1p()).exp_m1();
        scale * (p.b_const * ds - p.c_const * pow_inc)
    } else {
        scale * (p.f1(s1.max(0.0)) - p.f1(s))
    }
}

/// `g_μ(t) = −t(F_α′(t²) + μ)`.
pub fn g_mu(p: &ModelParams, mu: f64, t: f64) -> f64 {
    -t * (fa_prime(p, t * t) + mu)
}

/// `G_μ(t) = −½F_α(t²) − ½μt²`, the antiderivative of `g_μ` vanishing at 0.
pub fn big_g(p: &ModelParams, mu: f64, t: f64) -> f64 {
    -0.5 * fa(p, t * t) - 0.5 * mu * t * t
}

/// Result of an exact parameter transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPair {
    pub alpha_prime: f64,
    pub lambda_prime: f64,
    pub energy_factor: f64,
    pub beta: f64,
    /// Amplitude factor `L` of the minimizer map (1 when unused).
    pub l_factor: f64,
    /// Length factor `s` of the minimizer map (1 when unused).
    pub s_factor: f64,
}

/// Maps the threshold problem at `α` to threshold 1 with coupling
/// `β = α^{q−(d+2)/d}`: `J_α(λ) = α^{2/d} J̃_β(λ)`.
pub fn rescale_alpha_to_beta(p: &ModelParams) -> ScaledPair {
    let d = p.d as f64;
    ScaledPair {
        alpha_prime: 1.0,
        lambda_prime: 1.0,
        energy_factor: p.alpha.powf(2.0 / d),
        beta: p.alpha.powf(p.q_excess()),
        l_factor: 1.0,
        s_factor: 1.0,
    }
}

/// Inverse of [`rescale_alpha_to_beta`]: the threshold producing coupling `beta`.
pub fn alpha_from_beta(p: &ModelParams, beta: f64) -> f64 {
    beta.powf(1.0 / p.q_excess())
}

/// Maps `J_α(λ)` to `J₁(λ′)`: `J_α(λ) = energy_factor · J₁(lambda_prime)`.
/// A minimizer `v` of `J₁(λ′)` maps to `u(x) = √L s^{d/2} v(sx)`.
pub fn bosonic_scaling_map(p: &ModelParams, lambda: f64) -> ScaledPair {
    let d = p.d as f64;
    let ex = 0.5 * d * p.q_excess();
    ScaledPair {
        alpha_prime: 1.0,
        lambda_prime: p.alpha.powf(ex) * lambda,
        energy_factor: p.alpha.powf(p.q * (1.0 - 0.5 * d) + 0.5 * d),
        beta: p.alpha.powf(p.q_excess()),
        l_factor: p.alpha.powf(-ex),
        s_factor: p.alpha.powf(0.5 * (p.q - 1.0)),
    }
}

/// Inverse of [`bosonic_scaling_map`]: recovers `λ` from `λ′`.
pub fn bosonic_scaling_inverse(p: &ModelParams, lambda_prime: f64) -> f64 {
    lambda_prime * p.alpha.powf(-0.5 * p.d as f64 * p.q_excess())
}

/// Threshold `α` at which mass `lambda` becomes critical given `λ_c`.
pub fn alpha_critical(p: &ModelParams, lambda_c: f64, lambda: f64) -> f64 {
    (lambda_c / lambda).powf((2.0 / p.d as f64) / p.q_excess())
}

/// The correction term `E(α, t)` of the large-μ rescaled equation.
pub fn e_alpha_correction(p: &ModelParams, alpha: f64, t: f64) -> f64 {
    if t >= alpha {
        return 0.0;
    }
    let (q, r) = (p.q, p.r);
    p.b_const * alpha.powf(2.0 * (r - 1.0)) * t + q * alpha.powf(-2.0 * (q - r)) * t.powf(2.0 * q - 1.0)
        - p.c_const * r * t.powf(2.0 * r - 1.0)
}

/// `∂_t E(α, t)` on `(0, α)`.
pub fn e_alpha_correction_dt(p: &ModelParams, alpha: f64, t: f64) -> f64 {
    if t >= alpha {
        return 0.0;
    }
    let (q, r) = (p.q, p.r);
    p.b_const * alpha.powf(2.0 * (r - 1.0)) + q * (2.0 * q - 1.0) * alpha.powf(-2.0 * (q - r)) * t.powf(2.0 * (q - 1.0))
        - p.c_const * r * (2.0 * r - 1.0) * t.powf(2.0 * (r - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).unwrap()
    }

    #[test]
    fn constants_for_reference_exponents() {
        let p = base();
        assert!((p.a_const - 0.5).abs() < 1e-14);
        assert!((p.b_const - 4.0).abs() < 1e-14);
        assert!((p.c_const - 4.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ModelParams::new(3, 2.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, 1.5, 1.2, 1.0).is_err());
        assert!(ModelParams::new(3, 2.0, 1.7, 1.0).is_err());
        assert!(ModelParams::new(3, 2.0, 1.2, 0.0).is_err());
    }

    #[test]
    fn values_from_branch_formula() {
        let p = base();
        assert_eq!(f_alpha(&p, 0.5).unwrap(), -0.25);
        assert_eq!(f_alpha(&p, 1.0).unwrap(), -1.0);
        let want = -0.5 + 8.0 - 4.5 * 2f64.powf(4.0 / 3.0);
        assert!((f_alpha(&p, 2.0).unwrap() - want).abs() < 1e-14);
        assert!(f_alpha(&p, 2.0).unwrap() >= -4.0);
        assert!(f_alpha(&p, -1e-3).is_err());
        assert!((f_alpha_prime(&p, 1.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((f_alpha_second(&p, 1.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((f_alpha_prime(&p, 0.25).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn g_and_big_g() {
        let p = base();
        assert_eq!(g_mu(&p, 1.0, 0.0), 0.0);
        assert!((g_mu(&p, 1.0, 0.5) + 0.25).abs() < 1e-15);
        assert!((big_g(&p, 0.0, 1.0) - 0.5).abs() < 1e-15);
        let t = 1e-4;
        assert!((g_mu(&p, 0.0, t) / t).abs() < 1e-7);
    }

    #[test]
    fn scalings() {
        let p = base().with_alpha(8.0).unwrap();
        let s = rescale_alpha_to_beta(&p);
        assert!((s.beta - 2.0).abs() < 1e-13);
        assert!((s.energy_factor - 4.0).abs() < 1e-13);
        assert!((alpha_from_beta(&p, s.beta) - 8.0).abs() < 1e-12);
        let p4 = base().with_alpha(4.0).unwrap();
        let m = bosonic_scaling_map(&p4, 1.0);
        assert!((m.lambda_prime - 2.0).abs() < 1e-13);
        assert!((m.energy_factor - 2.0).abs() < 1e-13);
        assert!((bosonic_scaling_inverse(&p4, m.lambda_prime) - 1.0).abs() < 1e-13);
        let one = bosonic_scaling_map(&base(), 0.7);
        assert_eq!((one.lambda_prime, one.energy_factor, one.l_factor, one.s_factor), (0.7, 1.0, 1.0, 1.0));
    }

    #[test]
    fn fermionic_exponent_is_five() {
        let p = ModelParams::new(3, 1.8, 1.4, 1.0).unwrap();
        let a = alpha_critical(&p, 2.0, 1.0);
        assert!((a - 32.0).abs() < 1e-9);
    }

    #[test]
    fn correction_term_vanishes_at_alpha() {
        let p = base();
        let al = 0.3;
        assert_eq!(e_alpha_correction(&p, al, al), 0.0);
        let left = e_alpha_correction(&p, al, al * (1.0 - 1e-12));
        assert!(left.abs() < 1e-10);
        assert!(e_alpha_correction_dt(&p, al, al * (1.0 - 1e-12)).abs() < 1e-9);
    }

    #[test]
    fn increment_matches_direct_difference() {
        let p = ModelParams::new(3, 1.8, 1.4, 0.7).unwrap();
        for &(t, dt) in &[(0.1, 1e-3), (2.0, 0.3), (0.5, 0.4), (1.5, -1.0)] {
            let direct = fa(&p, t + dt) - fa(&p, t);
            assert!((f_alpha_increment(&p, t, dt) - direct).abs() < 1e-13);
        }
        let tiny = f_alpha_increment(&p, 1e-3, 1e-40);
        let lin = fa_prime(&p, 1e-3) * 1e-40;
        assert!(((tiny - lin) / lin).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_recomputes_constants() {
        let j = r#"{"d":3,"q":2.0,"r":1.3333333333333333,"alpha":1.0}"#;
        let p: ModelParams = serde_json::from_str(j).unwrap();
        assert!((p.b_const - 4.0).abs() < 1e-12);
        let back = serde_json::to_string(&p).unwrap();
        assert!(!back.contains("b_const"));
        assert!(serde_json::from_str::<ModelParams>(r#"{"d":3,"q":2,"r":1.3,"alpha":1,"b_const":9}"#).is_err());
    }
}
