//! Arrival envelopes for fBm and on-off traffic and their overflow profiles.
//!
//! A profile `ε(b)` bounds the probability that arrivals exceed the envelope
//! relaxed by slack `b`. Profiles are kept as closed-form parameter bundles
//! and evaluated in the log domain; [`OverflowProfile::ln_epsilon`] is the
//! primary accessor and may return values far below `ln f64::MIN_POSITIVE`.

use crate::numerics::{gaussian_ccdf, ln_gamma};
use crate::traffic::{EbbOnOffAggregate, FbmTraffic};
use crate::{Error, Result};

/// A decreasing bound `ε(b)` on an overflow or deficit probability.
///
/// Values are not capped at 1; callers that report a probability take
/// `min(1, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverflowProfile {
    /// Power law `Γ(1/2β) / (2β ϑ^(1/2β)) · b^(−(1−(H+β))/β)` of an affine
    /// fBm envelope. With `relaxation = Some(δ)` it is the sample-path
    /// deficit `(1/δ) ∫_b^∞ ε(x) dx`.
    FbmRigorous {
        vartheta: f64,
        beta: f64,
        hurst: f64,
        relaxation: Option<f64>,
    },
    /// Weibull tail `exp(−υ b^(2−2H))`. Not a rigorous bound.
    FbmAsymptotic { upsilon: f64, hurst: f64 },
    /// `prefactor · e^(−θb)`.
    EbbExponential { theta: f64, prefactor: f64 },
    Zero,
}

impl OverflowProfile {
    /// `log ε(b)`. Power-law profiles are `+∞` at `b ≤ 0`.
    pub fn ln_epsilon(&self, b: f64) -> f64 {
        match *self {
            OverflowProfile::FbmRigorous { .. } => {
                let (ln_c, k) = self.power_law().expect("power-law profile");
                if b <= 0.0 {
                    f64::INFINITY
                } else {
                    ln_c - k * b.ln()
                }
            }
            OverflowProfile::FbmAsymptotic { upsilon, hurst } => {
                -upsilon * b.max(0.0).powf(2.0 - 2.0 * hurst)
            }
            OverflowProfile::EbbExponential { theta, prefactor } => prefactor.ln() - theta * b.max(0.0),
            OverflowProfile::Zero => f64::NEG_INFINITY,
        }
    }

    pub fn epsilon(&self, b: f64) -> f64 {
        self.ln_epsilon(b).exp()
    }

    /// `(log c, k)` with `ε(b) = c b^(−k)` for the fBm power-law family.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        let OverflowProfile::FbmRigorous {
            vartheta,
            beta,
            hurst,
            relaxation,
        } = *self
        else {
            return None;
        };
        let inv = 1.0 / (2.0 * beta);
        let lg = ln_gamma(inv).ok()?;
        Some(match relaxation {
            None => (
                lg - (2.0 * beta).ln() - inv * vartheta.ln(),
                (1.0 - (hurst + beta)) / beta,
            ),
            Some(delta) => {
                let g = 1.0 - (hurst + 2.0 * beta);
                (
                    lg - 2f64.ln() - delta.ln() - inv * vartheta.ln() - g.ln(),
                    g / beta,
                )
            }
        })
    }

    /// Whether `∫_b^∞ ε(x) dx` is finite, i.e. whether a sample-path deficit
    /// can be derived from this profile. For the unrelaxed fBm profile this
    /// is `β < (1−H)/2`.
    pub fn is_integrable(&self) -> bool {
        match self {
            OverflowProfile::FbmRigorous {
                beta,
                hurst,
                relaxation,
                ..
            } => match relaxation {
                None => *beta < 0.5 * (1.0 - hurst),
                Some(_) => *beta < (1.0 - hurst) / 3.0,
            },
            OverflowProfile::FbmAsymptotic { .. } => false,
            OverflowProfile::EbbExponential { .. } | OverflowProfile::Zero => true,
        }
    }

    /// Sample-path deficit `ε_δ(b) = (1/δ) ∫_b^∞ ε(x) dx`.
    pub fn sample_path_deficit(&self, delta: f64) -> Result<OverflowProfile> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain("delta", delta, "(0, ∞)"));
        }
        match *self {
            OverflowProfile::FbmRigorous {
                vartheta,
                beta,
                hurst,
                relaxation: None,
            } => {
                if beta >= 0.5 * (1.0 - hurst) {
                    return Err(Error::NotComposable(format!(
                        "beta = {beta} must be below (1-H)/2 = {}",
                        0.5 * (1.0 - hurst)
                    )));
                }
                Ok(OverflowProfile::FbmRigorous {
                    vartheta,
                    beta,
                    hurst,
                    relaxation: Some(delta),
                })
            }
            OverflowProfile::FbmRigorous { relaxation: Some(_), .. } => Err(Error::NotComposable(
                "profile is already a sample-path deficit".into(),
            )),
            OverflowProfile::FbmAsymptotic { .. } => Err(Error::NotComposable(
                "the asymptotic profile is an approximation, not a bound".into(),
            )),
            OverflowProfile::EbbExponential { theta, prefactor } => Ok(OverflowProfile::EbbExponential {
                theta,
                prefactor: prefactor / (delta * theta),
            }),
            OverflowProfile::Zero => Ok(OverflowProfile::Zero),
        }
    }
}

/// Affine envelope `E(t) = r t` with an overflow profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineEnvelope {
    pub rate: f64,
    pub profile: OverflowProfile,
}

impl AffineEnvelope {
    /// Deterministic envelope of a constant bit rate flow.
    pub fn cbr(rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::domain("rate", rate, "[0, ∞)"));
        }
        Ok(AffineEnvelope {
            rate,
            profile: OverflowProfile::Zero,
        })
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(name, p, "(0, 1)"));
    }
    Ok(())
}

fn check_beta(t: &FbmTraffic, beta: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { beta >= 0.0 } else { beta > 0.0 };
    if !(ok && beta < 1.0 - t.hurst()) {
        let lo = if allow_zero { "[0" } else { "(0" };
        return Err(Error::domain("beta", beta, format!("{lo}, {})", 1.0 - t.hurst())));
    }
    Ok(())
}

/// Point-wise envelope `E(t) = λt + √(−2 log ε_p) σ t^H`.
pub fn fbm_pointwise_envelope(t: &FbmTraffic, eps_p: f64, time: f64) -> Result<f64> {
    check_probability("eps_p", eps_p)?;
    if time <= 0.0 {
        return Ok(0.0);
    }
    Ok(t.mean_rate() * time + (-2.0 * eps_p.ln()).sqrt() * t.sigma() * time.powf(t.hurst()))
}

/// Exact `P[A(t) > E(t)]` for the point-wise envelope, `Φ̄(√(−2 log ε_p))`,
/// the same at every t.
pub fn fbm_pointwise_exact_violation(eps_p: f64) -> Result<f64> {
    check_probability("eps_p", eps_p)?;
    Ok(gaussian_ccdf((-2.0 * eps_p.ln()).sqrt()))
}

/// Sample-path envelope `E(t) = λt + √(−2 log η) σ t^(H+β)`; `β = 0` gives
/// the point-wise envelope with `ε_p = η`.
pub fn fbm_sample_path_envelope(t: &FbmTraffic, beta: f64, eta: f64, time: f64) -> Result<f64> {
    t.check_rigorous()?;
    check_beta(t, beta, true)?;
    check_probability("eta", eta)?;
    if time <= 0.0 {
        return Ok(0.0);
    }
    Ok(t.mean_rate() * time + (-2.0 * eta.ln()).sqrt() * t.sigma() * time.powf(t.hurst() + beta))
}

/// Chernoff bound `η^(τ^2β)` on `P[A(τ) > E(τ)]` for the sample-path
/// envelope.
pub fn pointwise_bound(beta: f64, eta: f64, tau: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    if !(beta >= 0.0) {
        return Err(Error::domain("beta", beta, "[0, ∞)"));
    }
    if tau <= 0.0 {
        return Ok(0.0);
    }
    Ok((eta.ln() * tau.powf(2.0 * beta)).exp())
}

/// Exact Gaussian `P[A(τ) > E(τ)] = Φ̄(√(−2 log η) τ^β)`.
pub fn pointwise_exact(beta: f64, eta: f64, tau: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    if tau <= 0.0 {
        return Ok(0.0);
    }
    Ok(gaussian_ccdf((-2.0 * eta.ln()).sqrt() * tau.powf(beta)))
}

/// `Σ_{τ=1}^{t} η^(τ^2β)`, the union bound over `[0, t]`.
pub fn pointwise_partial_sums(beta: f64, eta: f64, horizon: usize) -> Result<Vec<f64>> {
    check_probability("eta", eta)?;
    let ln_eta = eta.ln();
    let mut acc = 0.0;
    Ok((1..=horizon)
        .map(|tau| {
            acc += (ln_eta * (tau as f64).powf(2.0 * beta)).exp();
            acc
        })
        .collect())
}

/// Sample-path violation probability `Γ(1/2β) / (2β (−log η)^(1/2β))`.
pub fn sample_path_epsilon(beta: f64, eta: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    Ok(ln_sample_path_epsilon(beta, -eta.ln())?.exp())
}

/// `log ε_s` as a function of `β` and `z = −log η`.
pub fn ln_sample_path_epsilon(beta: f64, neg_ln_eta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta", beta, "(0, ∞)"));
    }
    crate::numerics::ln_gamma_tail_integral(neg_ln_eta, 2.0 * beta)
}

/// `log ϑ` with `ϑ = (1/2σ²) ((r−λ)/γ)^(2γ) (1/(1−γ))^(2−2γ)`, `γ = H+β`.
pub fn ln_vartheta(t: &FbmTraffic, r: f64, beta: f64) -> f64 {
    let g = t.hurst() + beta;
    -(2.0 * t.sigma() * t.sigma()).ln() + 2.0 * g * ((r - t.mean_rate()) / g).ln() - (2.0 - 2.0 * g) * (1.0 - g).ln()
}

/// `ϑ` itself, as a product of powers; more accurate than `exp(log ϑ)`
/// when it is later raised to large exponents.
pub fn vartheta(t: &FbmTraffic, r: f64, beta: f64) -> f64 {
    let g = t.hurst() + beta;
    let v = ((r - t.mean_rate()) / g).powf(2.0 * g) * (1.0 - g).powf(-(2.0 - 2.0 * g))
        / (2.0 * t.sigma() * t.sigma());
    if v.is_finite() && v > 0.0 {
        v
    } else {
        ln_vartheta(t, r, beta).exp()
    }
}

/// `υ = (1/2σ²) ((r−λ)/H)^(2H) (1/(1−H))^(2−2H)`.
pub fn upsilon(t: &FbmTraffic, r: f64) -> f64 {
    vartheta(t, r, 0.0)
}

fn check_rate(t: &FbmTraffic, r: f64) -> Result<()> {
    if !(r > t.mean_rate() && r.is_finite()) {
        return Err(Error::Unstable {
            load: t.mean_rate(),
            capacity: r,
        });
    }
    Ok(())
}

/// Overflow profile of the affine sample-path envelope `E(t) = r t` of fBm
/// traffic.
pub fn fbm_affine_profile(t: &FbmTraffic, r: f64, beta: f64) -> Result<OverflowProfile> {
    t.check_rigorous()?;
    check_rate(t, r)?;
    check_beta(t, beta, false)?;
    Ok(OverflowProfile::FbmRigorous {
        vartheta: vartheta(t, r, beta),
        beta,
        hurst: t.hurst(),
        relaxation: None,
    })
}

/// Approximate Weibull profile `exp(−υ b^(2−2H))` of `E(t) = r t`.
pub fn fbm_affine_profile_asymptotic(t: &FbmTraffic, r: f64) -> Result<OverflowProfile> {
    check_rate(t, r)?;
    Ok(OverflowProfile::FbmAsymptotic {
        upsilon: upsilon(t, r),
        hurst: t.hurst(),
    })
}

/// Profile `e^(−θb) / (θ(r − mρ(θ)))` of `E(t) = r t` for an on-off
/// aggregate.
pub fn ebb_affine_profile(a: &EbbOnOffAggregate, r: f64, theta: f64) -> Result<OverflowProfile> {
    let required = a.aggregate_envelope_rate(theta)?;
    if !(required < r) {
        return Err(Error::EnvelopeRate { rate: r, required, theta });
    }
    Ok(OverflowProfile::EbbExponential {
        theta,
        prefactor: 1.0 / (theta * (r - required)),
    })
}
