//! Backlog and delay bounds at a constant-rate server.
//!
//! All probabilities are handled as logarithms internally; the reported
//! `epsilon` fields are `min(1, e^ln_epsilon)` and may underflow to zero
//! where `ln_epsilon` is still exact.

use rayon::prelude::*;

use crate::envelope::{ln_vartheta, upsilon, vartheta};
use crate::numerics::{
    find_root, grow_until, lambert_w0, ln_gamma, minimize_scalar_with, shrink_until, Interval, MinimizeOptions,
    LN_SQRT_PI,
};
use crate::traffic::{EbbOnOffAggregate, FbmTraffic};
use crate::{Error, Result};

/// Lower end of the β search range; `Γ(1/2β)` is only ever used as `ln Γ`.
pub const BETA_FLOOR: f64 = 1e-6;

/// Optimized backlog bound `P[B > b] ≤ epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacklogBoundResult {
    pub b: f64,
    pub epsilon: f64,
    pub ln_epsilon: f64,
    pub beta_opt: f64,
    /// `log η` at the optimum; η itself underflows for large `b`.
    pub ln_eta_opt: f64,
    pub tau_star: f64,
}

impl BacklogBoundResult {
    pub fn eta_opt(&self) -> f64 {
        self.ln_eta_opt.exp()
    }
}

pub(crate) fn check_stable(c: f64, t: &FbmTraffic) -> Result<()> {
    if !(c > t.mean_rate() && c.is_finite()) {
        return Err(Error::Unstable {
            load: t.mean_rate(),
            capacity: c,
        });
    }
    Ok(())
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(name, x, "(0, ∞)"));
    }
    Ok(())
}

pub(crate) fn beta_domain(t: &FbmTraffic, upper: f64) -> Result<Interval> {
    Interval::open(BETA_FLOOR, upper - BETA_FLOOR)
        .map_err(|_| Error::Infeasible(format!("no room for beta below {upper} (H = {})", t.hurst())))
}

pub(crate) fn to_probability(ln_eps: f64) -> f64 {
    ln_eps.min(0.0).exp()
}

/// `log ε_s = log Γ(1/2β) − log 2β − (1/2β) log z` with `z = −log η` given
/// as `log z`.
pub(crate) fn ln_eps_from_ln_z(beta: f64, ln_z: f64) -> f64 {
    let inv = 1.0 / (2.0 * beta);
    ln_gamma(inv).unwrap_or(f64::NAN) - (2.0 * beta).ln() - inv * ln_z
}

/// `log(−log η)` of the tangency-optimal η for backlog `b` at capacity `c`.
fn ln_neg_ln_eta(c: f64, t: &FbmTraffic, beta: f64, b: f64) -> f64 {
    let g = t.hurst() + beta;
    ln_vartheta(t, c, beta) + (2.0 - 2.0 * g) * b.ln()
}

/// `log η` with `η = exp(−(1/2σ²)((C−λ)/(H+β))^(2(H+β)) (b/(1−(H+β)))^(2−2(H+β)))`,
/// the largest η whose envelope stays below `b + Ct`.
pub fn fbm_backlog_ln_eta(c: f64, t: &FbmTraffic, beta: f64, b: f64) -> Result<f64> {
    check_stable(c, t)?;
    check_positive("b", b)?;
    if !(beta >= 0.0 && beta < 1.0 - t.hurst()) {
        return Err(Error::domain("beta", beta, format!("[0, {})", 1.0 - t.hurst())));
    }
    let z = vartheta(t, c, beta) * b.powf(2.0 - 2.0 * (t.hurst() + beta));
    if z.is_finite() && z > 0.0 {
        Ok(-z)
    } else {
        Ok(-ln_neg_ln_eta(c, t, beta, b).exp())
    }
}

pub fn fbm_backlog_eta(c: f64, t: &FbmTraffic, beta: f64, b: f64) -> Result<f64> {
    Ok(fbm_backlog_ln_eta(c, t, beta, b)?.exp())
}

/// Tangency point `τ* = (√(−2 log η) σ (H+β) / (C−λ))^(1/(1−(H+β)))`.
pub fn most_probable_timescale(c: f64, t: &FbmTraffic, beta: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain("eta", eta, "(0, 1)"));
    }
    timescale_from_neg_ln_eta(c, t, beta, -eta.ln())
}

fn timescale_from_neg_ln_eta(c: f64, t: &FbmTraffic, beta: f64, neg_ln_eta: f64) -> Result<f64> {
    check_stable(c, t)?;
    let g = t.hurst() + beta;
    if !(beta >= 0.0 && g < 1.0) {
        return Err(Error::domain("beta", beta, format!("[0, {})", 1.0 - t.hurst())));
    }
    Ok(((2.0 * neg_ln_eta).sqrt() * t.sigma() * g / (c - t.mean_rate())).powf(1.0 / (1.0 - g)))
}

/// Busy-period time scale `τ′ = (√(−2 log ε_p) σ / (C−λ))^(1/(1−H))`, where
/// the point-wise envelope crosses `Ct`.
pub fn busy_period_timescale(c: f64, t: &FbmTraffic, eps_p: f64) -> Result<f64> {
    check_stable(c, t)?;
    if !(eps_p > 0.0 && eps_p < 1.0) {
        return Err(Error::domain("eps_p", eps_p, "(0, 1)"));
    }
    Ok(((-2.0 * eps_p.ln()).sqrt() * t.sigma() / (c - t.mean_rate())).powf(1.0 / (1.0 - t.hurst())))
}

fn backlog_result(c: f64, t: &FbmTraffic, b: f64, beta: f64, ln_eps: f64) -> Result<BacklogBoundResult> {
    let ln_z = ln_neg_ln_eta(c, t, beta, b);
    Ok(BacklogBoundResult {
        b,
        epsilon: to_probability(ln_eps),
        ln_epsilon: ln_eps,
        beta_opt: beta,
        ln_eta_opt: -ln_z.exp(),
        tau_star: timescale_from_neg_ln_eta(c, t, beta, ln_z.exp())?,
    })
}

/// Backlog bound for one fixed β.
pub fn fbm_backlog_violation_at_beta(c: f64, t: &FbmTraffic, b: f64, beta: f64) -> Result<BacklogBoundResult> {
    t.check_rigorous()?;
    check_stable(c, t)?;
    check_positive("b", b)?;
    if !(beta > 0.0 && beta < 1.0 - t.hurst()) {
        return Err(Error::domain("beta", beta, format!("(0, {})", 1.0 - t.hurst())));
    }
    let ln_eps = ln_eps_from_ln_z(beta, ln_neg_ln_eta(c, t, beta, b));
    backlog_result(c, t, b, beta, ln_eps)
}

/// `P[B > b] ≤ ε_s` minimized over `β ∈ (0, 1−H)`.
pub fn fbm_backlog_violation(c: f64, t: &FbmTraffic, b: f64) -> Result<BacklogBoundResult> {
    fbm_backlog_violation_with(c, t, b, &MinimizeOptions::default())
}

/// [`fbm_backlog_violation`] with explicit optimizer settings, for use in
/// nested searches.
pub fn fbm_backlog_violation_with(
    c: f64,
    t: &FbmTraffic,
    b: f64,
    opts: &MinimizeOptions,
) -> Result<BacklogBoundResult> {
    t.check_rigorous()?;
    check_stable(c, t)?;
    check_positive("b", b)?;
    let dom = beta_domain(t, 1.0 - t.hurst())?;
    let lnv = |beta: f64| ln_eps_from_ln_z(beta, ln_neg_ln_eta(c, t, beta, b));
    let m = minimize_scalar_with(lnv, &dom, opts)?;
    backlog_result(c, t, b, m.arg, m.value)
}

/// Smallest `b` with optimized `P[B > b] ≤ eps`.
pub fn fbm_backlog_at_epsilon(c: f64, t: &FbmTraffic, eps: f64) -> Result<BacklogBoundResult> {
    t.check_rigorous()?;
    check_stable(c, t)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("epsilon", eps, "(0, 1)"));
    }
    let target = eps.ln();
    let f = |b: f64| fbm_backlog_violation(c, t, b).map(|r| r.ln_epsilon - target).unwrap_or(f64::NAN);
    let b = invert_decreasing(f, t.sigma().max(1e-300))?;
    fbm_backlog_violation(c, t, b)
}

/// Root of a decreasing `f` on `(0, ∞)` by bracketing from `start`.
pub(crate) fn invert_decreasing<F: FnMut(f64) -> f64>(mut f: F, start: f64) -> Result<f64> {
    let hi = grow_until(start, |x| f(x) <= 0.0).ok_or_else(|| Error::Infeasible("target not reached".into()))?;
    let lo = shrink_until(hi, |x| f(x) > 0.0).ok_or_else(|| Error::Infeasible("target exceeded at b → 0".into()))?;
    if lo == hi {
        return Ok(hi);
    }
    find_root(f, lo, hi, 1e-12)
}

/// Optimized bounds at every point of a backlog sweep, in input order.
pub fn fbm_backlog_sweep(c: f64, t: &FbmTraffic, bs: &[f64]) -> Vec<Result<BacklogBoundResult>> {
    bs.par_iter().map(|&b| fbm_backlog_violation(c, t, b)).collect()
}

/// Maximum horizontal distance `sup_t (E(t) − Ct)/C` of the sample-path
/// envelope with slack `s = √(−2 log η)` from the service line `Ct`.
fn horizontal_deviation(c: f64, t: &FbmTraffic, beta: f64, s: f64) -> f64 {
    let g = t.hurst() + beta;
    let excess = c - t.mean_rate();
    let gap = |u: f64| -(s * t.sigma() * u.powf(g) - excess * u);
    // the maximizer of s σ u^g − (C−λ) u
    let guess = (s * t.sigma() * g / excess).powf(1.0 / (1.0 - g));
    if !(guess > 1e-250) {
        return 0.0;
    }
    if !(guess < 1e250) {
        return f64::INFINITY;
    }
    let dom = Interval::open(guess * 1e-3, guess * 1e3).expect("positive bracket");
    let m = minimize_scalar_with(gap, &dom, &MinimizeOptions::coarse(16, 1e-10)).expect("finite gap");
    (-m.value).max(0.0) / c
}

/// Delay bound `P[W > d] ≤ ε` at a FCFS constant-rate server, found by
/// matching the horizontal envelope deviation to `d` and minimizing over β.
pub fn fbm_delay_violation(c: f64, t: &FbmTraffic, d: f64) -> Result<BacklogBoundResult> {
    t.check_rigorous()?;
    check_stable(c, t)?;
    check_positive("d", d)?;
    let dom = beta_domain(t, 1.0 - t.hurst())?;
    let slack_for = |beta: f64| -> Option<f64> {
        let f = |s: f64| horizontal_deviation(c, t, beta, s) - d;
        let hi = grow_until(1.0, |s| f(s) >= 0.0)?;
        let lo = shrink_until(hi, |s| f(s) < 0.0)?;
        if lo == hi {
            return Some(hi);
        }
        find_root(f, lo, hi, 1e-13).ok()
    };
    let objective = |beta: f64| match slack_for(beta) {
        Some(s) => ln_eps_from_ln_z(beta, (0.5 * s * s).ln()),
        None => f64::NAN,
    };
    let m = minimize_scalar_with(objective, &dom, &MinimizeOptions::coarse(64, 1e-9))?;
    let s = slack_for(m.arg).ok_or_else(|| Error::Infeasible("no slack matches the delay".into()))?;
    let neg_ln_eta = 0.5 * s * s;
    Ok(BacklogBoundResult {
        b: d * c,
        epsilon: to_probability(m.value),
        ln_epsilon: m.value,
        beta_opt: m.arg,
        ln_eta_opt: -neg_ln_eta,
        tau_star: timescale_from_neg_ln_eta(c, t, m.arg, neg_ln_eta)?,
    })
}

/// `log ε_a` with `ε_a = exp(−(1/2σ²)((C−λ)/H)^(2H) (b/(1−H))^(2−2H))`.
pub fn ln_asymptotic_epsilon(c: f64, t: &FbmTraffic, b: f64) -> Result<f64> {
    check_stable(c, t)?;
    if !(b >= 0.0) {
        return Err(Error::domain("b", b, "[0, ∞)"));
    }
    Ok(-upsilon(t, c) * b.powf(2.0 - 2.0 * t.hurst()))
}

/// Weibull-tail approximation of the overflow probability.
pub fn asymptotic_epsilon(c: f64, t: &FbmTraffic, b: f64) -> Result<f64> {
    Ok(ln_asymptotic_epsilon(c, t, b)?.exp())
}

/// Inverse of [`asymptotic_epsilon`] in `b`.
pub fn asymptotic_backlog_at_epsilon(c: f64, t: &FbmTraffic, eps: f64) -> Result<f64> {
    check_stable(c, t)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("epsilon", eps, "(0, 1)"));
    }
    Ok((-eps.ln() / upsilon(t, c)).powf(1.0 / (2.0 - 2.0 * t.hurst())))
}

/// Stirling approximation `√π / (√β (2eβ(−log η))^(1/2β))` of the
/// sample-path violation probability.
pub fn stirling_epsilon(beta: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain("eta", eta, "(0, 1)"));
    }
    Ok(ln_stirling_epsilon(beta, -eta.ln())?.exp())
}

/// `log` of [`stirling_epsilon`] given `z = −log η`.
pub fn ln_stirling_epsilon(beta: f64, neg_ln_eta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain("beta", beta, "(0, 1)"));
    }
    check_positive("-log eta", neg_ln_eta)?;
    let two_e_beta_z = 2.0 * beta * neg_ln_eta;
    Ok(LN_SQRT_PI - 0.5 * beta.ln() - (1.0 + two_e_beta_z.ln()) / (2.0 * beta))
}

/// Near-optimal β for a single server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearOptimalBeta {
    /// `1/(2(−log ε_a))`.
    pub linear: f64,
    /// `−W₀(1/(2 log ε_a))`; `None` when `ε_a ≥ e^(−e/2)`.
    pub lambert: Option<f64>,
}

impl NearOptimalBeta {
    /// True when only the linear approximation is available.
    pub fn lambert_unavailable(&self) -> bool {
        self.lambert.is_none()
    }
}

pub fn near_optimal_beta(eps_a: f64) -> Result<NearOptimalBeta> {
    if !(eps_a > 0.0 && eps_a < 1.0) {
        return Err(Error::domain("eps_a", eps_a, "(0, 1)"));
    }
    near_optimal_beta_ln(-eps_a.ln())
}

/// [`near_optimal_beta`] parameterized by `L = −log ε_a`.
pub fn near_optimal_beta_ln(neg_ln_eps_a: f64) -> Result<NearOptimalBeta> {
    check_positive("-log eps_a", neg_ln_eps_a)?;
    let linear = 1.0 / (2.0 * neg_ln_eps_a);
    let lambert = if neg_ln_eps_a > std::f64::consts::E / 2.0 {
        Some(-lambert_w0(-1.0 / (2.0 * neg_ln_eps_a))?)
    } else {
        None
    };
    Ok(NearOptimalBeta { linear, lambert })
}

/// `log χ`, `χ = (H^H (1−H)^(1−H) / (γ^γ (1−γ)^(1−γ)))²` with `γ = H+β`.
pub fn ln_chi(hurst: f64, beta: f64) -> Result<f64> {
    if !(hurst >= 0.5 && hurst < 1.0) {
        return Err(Error::domain("hurst", hurst, "[1/2, 1)"));
    }
    if !(beta > 0.0 && beta < 1.0 - hurst) {
        return Err(Error::domain("beta", beta, format!("(0, {})", 1.0 - hurst)));
    }
    let xlx = |x: f64| x * x.ln();
    let g = hurst + beta;
    Ok(2.0 * (xlx(hurst) + xlx(1.0 - hurst) - xlx(g) - xlx(1.0 - g)))
}

pub fn chi(hurst: f64, beta: f64) -> Result<f64> {
    Ok(ln_chi(hurst, beta)?.exp())
}

/// `log` of the closed-form near-optimal bound
/// `(b/(C−λ)) ε_a^(1+log χ) √(2π(−log ε_a))`, χ taken at the linear β*.
pub fn ln_closed_form_epsilon(c: f64, t: &FbmTraffic, b: f64) -> Result<f64> {
    t.check_rigorous()?;
    check_positive("b", b)?;
    let l = -ln_asymptotic_epsilon(c, t, b)?;
    let beta = near_optimal_beta_ln(l)?.linear;
    let lc = ln_chi(t.hurst(), beta)?;
    Ok((b / (c - t.mean_rate())).ln() - (1.0 + lc) * l + 0.5 * (2.0 * std::f64::consts::PI * l).ln())
}

pub fn closed_form_epsilon(c: f64, t: &FbmTraffic, b: f64) -> Result<f64> {
    Ok(to_probability(ln_closed_form_epsilon(c, t, b)?))
}

/// Optimized EBB backlog bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbbBacklogResult {
    pub b: f64,
    pub epsilon: f64,
    pub ln_epsilon: f64,
    /// `∞` when the peak rate of the aggregate fits the server.
    pub theta_opt: f64,
}

/// `log(e^(−θb) / (θ(C − mρ(θ))))`.
pub(crate) fn ln_ebb_epsilon(c: f64, a: &EbbOnOffAggregate, b: f64, theta: f64) -> f64 {
    match a.aggregate_envelope_rate(theta) {
        Ok(mr) if mr < c => -theta * b - theta.ln() - (c - mr).ln(),
        _ => f64::INFINITY,
    }
}

/// Admissible θ range `(0, θ_max)` at rate `c`, `None` if unbounded.
pub(crate) fn ebb_theta_domain(c: f64, a: &EbbOnOffAggregate) -> Result<Option<Interval>> {
    Ok(match a.max_admissible_theta(c)? {
        Some(th) => Some(Interval::open(th * 1e-9, th)?),
        None => None,
    })
}

/// `P[B > b] ≤ e^(−θb) / (θ(C − mρ(θ)))` minimized over admissible θ.
pub fn ebb_backlog_violation(c: f64, a: &EbbOnOffAggregate, b: f64) -> Result<EbbBacklogResult> {
    ebb_backlog_violation_with(c, a, b, &MinimizeOptions::default())
}

pub fn ebb_backlog_violation_with(
    c: f64,
    a: &EbbOnOffAggregate,
    b: f64,
    opts: &MinimizeOptions,
) -> Result<EbbBacklogResult> {
    if !(b >= 0.0) {
        return Err(Error::domain("b", b, "[0, ∞)"));
    }
    let Some(dom) = ebb_theta_domain(c, a)? else {
        return Ok(EbbBacklogResult {
            b,
            epsilon: 0.0,
            ln_epsilon: f64::NEG_INFINITY,
            theta_opt: f64::INFINITY,
        });
    };
    let m = minimize_scalar_with(|th| ln_ebb_epsilon(c, a, b, th), &dom, opts)?;
    Ok(EbbBacklogResult {
        b,
        epsilon: to_probability(m.value),
        ln_epsilon: m.value,
        theta_opt: m.arg,
    })
}

/// Smallest `b` with optimized EBB `P[B > b] ≤ eps`.
pub fn ebb_backlog_at_epsilon(c: f64, a: &EbbOnOffAggregate, eps: f64) -> Result<EbbBacklogResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("epsilon", eps, "(0, 1)"));
    }
    let target = eps.ln();
    if ebb_backlog_violation(c, a, 0.0)?.ln_epsilon <= target {
        return ebb_backlog_violation(c, a, 0.0);
    }
    let f = |b: f64| ebb_backlog_violation(c, a, b).map(|r| r.ln_epsilon - target).unwrap_or(f64::NAN);
    let b = invert_decreasing(f, a.peak())?;
    ebb_backlog_violation(c, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{fbm_sample_path_envelope, sample_path_epsilon};
    use approx::assert_relative_eq;

    fn fig3() -> FbmTraffic {
        FbmTraffic::new(0.5, 0.25, 0.75).unwrap()
    }

    #[test]
    fn eta_at_beta_zero_is_asymptotic_epsilon() {
        let t = fig3();
        for b in [0.1, 1.0, 17.0, 300.0] {
            assert_relative_eq!(
                fbm_backlog_ln_eta(1.0, &t, 0.0, b).unwrap(),
                ln_asymptotic_epsilon(1.0, &t, b).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn tangent_envelope_touches_service_line() {
        let t = fig3();
        let (c, b, beta) = (1.0, 20.0, 0.05);
        let eta = fbm_backlog_eta(c, &t, beta, b).unwrap();
        let tau = most_probable_timescale(c, &t, beta, eta).unwrap();
        let gap = |u: f64| fbm_sample_path_envelope(&t, beta, eta, u).unwrap() - b - c * u;
        assert!(gap(tau).abs() < 1e-9 * b);
        // dense grid: the envelope never rises above b + Ct
        let max = (1..200_000).map(|i| gap(i as f64 * 1e-3 * tau)).fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= 1e-9 * b, "{max}");
        // and its slope equals C there
        let h = 1e-5 * tau;
        let slope = (fbm_sample_path_envelope(&t, beta, eta, tau + h).unwrap()
            - fbm_sample_path_envelope(&t, beta, eta, tau - h).unwrap())
            / (2.0 * h);
        assert!((slope - c).abs() < 1e-8 * c);
    }

    #[test]
    fn timescale_special_case() {
        let t = fig3();
        let c = 1.0;
        let eta = fbm_backlog_eta(c, &t, 0.0, 1.0).unwrap();
        assert_relative_eq!(most_probable_timescale(c, &t, 0.0, eta).unwrap(), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn timescale_maximizes_gaussian_largest_term() {
        let t = fig3();
        let (c, b) = (1.0, 5.0);
        let eta = fbm_backlog_eta(c, &t, 0.0, b).unwrap();
        let tau = most_probable_timescale(c, &t, 0.0, eta).unwrap();
        // maximize Φ̄(((C−λ)u + b)/(σ u^H)) ⇔ minimize its argument
        let arg = |u: f64| (0.5 * u + b) / (0.25 * u.powf(0.75));
        let best = (1..100_000)
            .map(|i| i as f64 * 1e-3)
            .min_by(|x, y| arg(*x).partial_cmp(&arg(*y)).unwrap())
            .unwrap();
        assert!((best - tau).abs() < 2e-3, "{best} vs {tau}");
    }

    #[test]
    fn busy_period_crossing() {
        for h in [0.6, 0.8] {
            let t = FbmTraffic::new(0.5, 0.25, h).unwrap();
            let eps = 1e-3;
            let tp = busy_period_timescale(1.0, &t, eps).unwrap();
            let e = crate::envelope::fbm_pointwise_envelope(&t, eps, tp).unwrap();
            assert_relative_eq!(e, tp, max_relative = 1e-9);
        }
        let t6 = FbmTraffic::new(0.5, 0.25, 0.6).unwrap();
        let t8 = FbmTraffic::new(0.5, 0.25, 0.8).unwrap();
        let l6 = busy_period_timescale(1.0, &t6, 1e-3).unwrap().ln();
        let l8 = busy_period_timescale(1.0, &t8, 1e-3).unwrap().ln();
        assert!(l8 > 2.0 * l6);
        assert!(busy_period_timescale(1.0, &t6, 1.0 - 1e-14).unwrap() < 1e-6);
    }

    #[test]
    fn optimized_beta_beats_grid() {
        let t = fig3();
        let (c, b) = (1.0, 30.0);
        let r = fbm_backlog_violation(c, &t, b).unwrap();
        let grid_best = (1..100_000)
            .map(|i| i as f64 * 0.25 / 100_000.0)
            .map(|beta| fbm_backlog_violation_at_beta(c, &t, b, beta).unwrap().ln_epsilon)
            .fold(f64::INFINITY, f64::min);
        assert!(r.ln_epsilon <= grid_best + 1e-9 * grid_best.abs(), "{} vs {grid_best}", r.ln_epsilon);
        assert_relative_eq!(
            r.ln_epsilon,
            sample_path_epsilon(r.beta_opt, r.eta_opt()).unwrap().ln(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn backlog_bound_monotone_in_b() {
        let t = fig3();
        let eps: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 100.0]
            .iter()
            .map(|&b| fbm_backlog_violation(1.0, &t, b).unwrap().ln_epsilon)
            .collect();
        assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
    }

    #[test]
    fn inverse_backlog() {
        let t = fig3();
        let r = fbm_backlog_at_epsilon(1.0, &t, 1e-9).unwrap();
        assert_relative_eq!(r.ln_epsilon, 1e-9f64.ln(), max_relative = 1e-9);
        let ba = asymptotic_backlog_at_epsilon(1.0, &t, 1e-9).unwrap();
        assert_relative_eq!(asymptotic_epsilon(1.0, &t, ba).unwrap(), 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn delay_matches_backlog_over_capacity() {
        let t = fig3();
        let c = 1.0;
        for b in [2.0, 20.0] {
            let back = fbm_backlog_violation(c, &t, b).unwrap();
            let del = fbm_delay_violation(c, &t, b / c).unwrap();
            assert_relative_eq!(del.ln_epsilon, back.ln_epsilon, max_relative = 1e-6);
        }
        let c = 2.0;
        let back = fbm_backlog_violation(c, &t, 10.0).unwrap();
        let del = fbm_delay_violation(c, &t, 5.0).unwrap();
        assert_relative_eq!(del.ln_epsilon, back.ln_epsilon, max_relative = 1e-6);
    }

    #[test]
    fn asymptotic_exponential_at_half() {
        let t = FbmTraffic::new(0.5, 0.5, 0.5).unwrap();
        let a = ln_asymptotic_epsilon(1.0, &t, 1.0).unwrap();
        assert_relative_eq!(ln_asymptotic_epsilon(1.0, &t, 4.0).unwrap(), 4.0 * a, max_relative = 1e-14);
        assert!(matches!(asymptotic_epsilon(0.5, &t, 1.0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn stirling_ratio() {
        let eta = 0.37f64;
        let exact = sample_path_epsilon(0.04, eta).unwrap();
        let approx = stirling_epsilon(0.04, eta).unwrap();
        // Stirling underestimates Γ(x) by about 1/(12x), x = 1/(2β)
        assert_relative_eq!(approx / exact, 1.0 - 0.04 * 2.0 / 12.0, max_relative = 1e-3);
        let big = stirling_epsilon(0.5, eta).unwrap() / sample_path_epsilon(0.5, eta).unwrap();
        assert!((big - 0.92).abs() < 0.01, "{big}");
    }

    #[test]
    fn near_optimal_beta_cases() {
        let r = near_optimal_beta_ln(50.0).unwrap();
        assert_relative_eq!(r.linear, 0.01, max_relative = 1e-15);
        let w = r.lambert.unwrap();
        assert!(((w - r.linear) / w).abs() < 0.05);
        assert!(near_optimal_beta(0.5).unwrap().lambert_unavailable());
        assert!(near_optimal_beta(1.0).is_err());
    }

    #[test]
    fn lambert_root_is_stationary_point_of_stirling_form() {
        let l = 30.0f64;
        let beta = near_optimal_beta_ln(l).unwrap().lambert.unwrap();
        let f = |b: f64| ln_stirling_epsilon(b, l).unwrap();
        let h = 1e-6 * beta;
        let deriv = (f(beta + h) - f(beta - h)) / (2.0 * h);
        let scale = (f(beta + 0.1 * beta) - f(beta)).abs() / (0.1 * beta);
        assert!(deriv.abs() < 1e-5 * scale.max(1.0), "{deriv}");
    }

    #[test]
    fn chi_range() {
        assert_relative_eq!(chi(0.75, 1e-12).unwrap(), 1.0, max_relative = 1e-9);
        for i in 0..20 {
            let h = 0.5 + 0.025 * i as f64;
            for j in 1..20 {
                let beta = (1.0 - h) * j as f64 / 20.0;
                let x = chi(h, beta).unwrap();
                assert!((0.25..=1.0).contains(&x), "χ({h}, {beta}) = {x}");
            }
        }
        let direct = (0.75f64.powf(0.75) * 0.25f64.powf(0.25) / (0.85f64.powf(0.85) * 0.15f64.powf(0.15))).powi(2);
        assert_relative_eq!(chi(0.75, 0.1).unwrap(), direct, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_equals_stirling_at_linear_beta() {
        let t = fig3();
        let (c, b) = (1.0, 40.0);
        let l = -ln_asymptotic_epsilon(c, &t, b).unwrap();
        let beta = 1.0 / (2.0 * l);
        let z = -fbm_backlog_ln_eta(c, &t, beta, b).unwrap();
        assert_relative_eq!(
            ln_closed_form_epsilon(c, &t, b).unwrap(),
            ln_stirling_epsilon(beta, z).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn ebb_bound_optimum_and_slope() {
        let a = EbbOnOffAggregate::from_mean_and_burstiness(100, 50.0, 250.0, 10.0).unwrap();
        let c = 10_000.0;
        let r = ebb_backlog_violation(c, &a, 2000.0).unwrap();
        let th_max = a.max_admissible_theta(c).unwrap().unwrap();
        let grid = (1..100_000)
            .map(|i| th_max * i as f64 / 100_000.0)
            .map(|th| ln_ebb_epsilon(c, &a, 2000.0, th))
            .fold(f64::INFINITY, f64::min);
        assert!(r.ln_epsilon <= grid + 1e-9 * grid.abs());
        // e^{−θb}/(θ(C−mρ)) equals ∫₀^∞ e^{−θ(b+(C−mρ)τ)} dτ
        let th = r.theta_opt;
        let gap = c - a.aggregate_envelope_rate(th).unwrap();
        let n = 200_000;
        let upper = 40.0 / (th * gap);
        let h = upper / n as f64;
        let integral: f64 = (0..n)
            .map(|i| (-th * (2000.0 + gap * (i as f64 + 0.5) * h)).exp() * h)
            .sum();
        assert_relative_eq!(integral, r.epsilon, max_relative = 1e-6);
        let small_peak = EbbOnOffAggregate::from_mean_and_burstiness(10, 50.0, 250.0, 10.0).unwrap();
        assert_eq!(ebb_backlog_violation(c, &small_peak, 1.0).unwrap().epsilon, 0.0);
    }
}
