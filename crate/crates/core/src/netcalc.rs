//! Stochastic service curves and end-to-end delay bounds.
//!
//! A hop with capacity `C` and cross traffic enveloped by `r t` leaves the
//! through flow the service curve `(C−r)t` with the cross-traffic overflow
//! profile as deficit profile. A tandem of `n` such hops, relaxed by
//! `δ = Δ/(n−1)` per hop, composes into `(C−r−Δ)t` with deficit
//!
//! `ε^net(b) = inf_x {(n−1) ε_δ((b−x)/(n−1)) + ε(x)}`,
//!
//! the equal split of the first `n−1` hops being optimal because the
//! profiles are convex.

use crate::bounds::{
    beta_domain, ebb_backlog_violation_with, fbm_backlog_violation_with, to_probability,
};
use crate::envelope::{ebb_affine_profile, fbm_affine_profile, ln_vartheta, upsilon, AffineEnvelope, OverflowProfile};
use crate::numerics::{linear_fit, ln_add_exp, minimize_scalar_with, Interval, LinearFit, MinimizeOptions};
use crate::traffic::{CbrTraffic, EbbOnOffAggregate, FbmTraffic};
use crate::{Error, Result};

/// Cheap evaluator for `log ε(b)` of a closed-form profile.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    Power { ln_c: f64, k: f64 },
    Exp { ln_c: f64, theta: f64 },
    Weibull { upsilon: f64, shape: f64 },
    Zero,
}

impl Kernel {
    fn of(p: &OverflowProfile) -> Kernel {
        match *p {
            OverflowProfile::FbmRigorous { .. } => {
                let (ln_c, k) = p.power_law().expect("valid power-law profile");
                Kernel::Power { ln_c, k }
            }
            OverflowProfile::FbmAsymptotic { upsilon, hurst } => Kernel::Weibull {
                upsilon,
                shape: 2.0 - 2.0 * hurst,
            },
            OverflowProfile::EbbExponential { theta, prefactor } => Kernel::Exp {
                ln_c: prefactor.ln(),
                theta,
            },
            OverflowProfile::Zero => Kernel::Zero,
        }
    }

    #[inline]
    fn ln(&self, b: f64) -> f64 {
        match *self {
            Kernel::Power { ln_c, k } => {
                if b > 0.0 {
                    ln_c - k * b.ln()
                } else {
                    f64::INFINITY
                }
            }
            Kernel::Exp { ln_c, theta } => ln_c - theta * b.max(0.0),
            Kernel::Weibull { upsilon, shape } => -upsilon * b.max(0.0).powf(shape),
            Kernel::Zero => f64::NEG_INFINITY,
        }
    }
}

/// Optimal split of the network deficit between the relaxed hops and the
/// last hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerInfimum {
    /// Slack assigned to the last hop.
    pub x: f64,
    pub ln_epsilon: f64,
}

/// Deficit profile of a (network) service curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitProfile {
    hops: usize,
    relaxed: Option<OverflowProfile>,
    last: OverflowProfile,
    k_relaxed: Kernel,
    k_last: Kernel,
}

fn inner_options() -> MinimizeOptions {
    MinimizeOptions::coarse(64, 1e-10).linear()
}

impl DeficitProfile {
    /// Deficit of a single hop.
    pub fn single(profile: OverflowProfile) -> Self {
        DeficitProfile {
            hops: 1,
            relaxed: None,
            last: profile,
            k_relaxed: Kernel::Zero,
            k_last: Kernel::of(&profile),
        }
    }

    /// `inf_x {(n−1) ε_δ((b−x)/(n−1)) + ε(x)}` for `n ≥ 2` hops with
    /// per-hop sample-path deficit `relaxed` and last-hop deficit `last`.
    pub fn tandem(hops: usize, relaxed: OverflowProfile, last: OverflowProfile) -> Result<Self> {
        if hops < 2 {
            return Err(Error::domain("hops", hops as f64, "[2, ∞)"));
        }
        Ok(DeficitProfile {
            hops,
            relaxed: Some(relaxed),
            last,
            k_relaxed: Kernel::of(&relaxed),
            k_last: Kernel::of(&last),
        })
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    /// Last-hop (for a single hop: the only) profile.
    pub fn last(&self) -> &OverflowProfile {
        &self.last
    }

    pub fn relaxed(&self) -> Option<&OverflowProfile> {
        self.relaxed.as_ref()
    }

    /// Log of the objective inside the infimum at split `x`.
    pub fn ln_split_objective(&self, b: f64, x: f64) -> f64 {
        if self.hops == 1 {
            return self.k_last.ln(b);
        }
        let m = (self.hops - 1) as f64;
        ln_add_exp(m.ln() + self.k_relaxed.ln((b - x) / m), self.k_last.ln(x))
    }

    /// The infimum over `x ∈ (0, b)`. The objective is convex in `x`, so the
    /// minimizer is the root of its derivative: closed form for exponential
    /// profiles, safeguarded Newton for power laws, and a 64-point grid plus
    /// golden section otherwise.
    pub fn inner_infimum(&self, b: f64) -> InnerInfimum {
        if self.hops == 1 {
            return InnerInfimum {
                x: b,
                ln_epsilon: self.k_last.ln(b),
            };
        }
        let m = (self.hops - 1) as f64;
        if !(b > 0.0) {
            return InnerInfimum {
                x: 0.0,
                ln_epsilon: ln_add_exp(m.ln() + self.k_relaxed.ln(0.0), self.k_last.ln(0.0)),
            };
        }
        let x = match (self.k_relaxed, self.k_last) {
            (Kernel::Exp { ln_c: c1, theta: t1 }, Kernel::Exp { ln_c: c2, theta: t2 }) if t1 == t2 => {
                Some(((c2 - c1 + t1 * b / m) / (t1 * (m + 1.0) / m)).clamp(0.0, b))
            }
            (Kernel::Power { ln_c: c1, k: k1 }, Kernel::Power { ln_c: c2, k: k2 }) => {
                // log of |d/dx| of each term; their difference increases in x
                let g = |x: f64| {
                    (c1 + k1.ln() - (k1 + 1.0) * ((b - x) / m).ln()) - (c2 + k2.ln() - (k2 + 1.0) * x.ln())
                };
                let dg = |x: f64| (k1 + 1.0) / (b - x) + (k2 + 1.0) / x;
                Some(newton_increasing(g, dg, 0.0, b))
            }
            _ => None,
        };
        if let Some(x) = x {
            return InnerInfimum {
                x,
                ln_epsilon: self.ln_split_objective(b, x),
            };
        }
        let dom = Interval::open(0.0, b).expect("b > 0");
        match minimize_scalar_with(|x| self.ln_split_objective(b, x), &dom, &inner_options()) {
            Ok(m) => InnerInfimum {
                x: m.arg,
                ln_epsilon: m.value,
            },
            Err(_) => InnerInfimum {
                x: 0.5 * b,
                ln_epsilon: f64::INFINITY,
            },
        }
    }

    pub fn ln_epsilon(&self, b: f64) -> f64 {
        self.inner_infimum(b).ln_epsilon
    }

    pub fn epsilon(&self, b: f64) -> f64 {
        self.ln_epsilon(b).exp()
    }
}

/// Root of an increasing `g` on `(lo, hi)` with `g → −∞` at `lo` and
/// `g → +∞` at `hi`; Newton steps that leave the bracket fall back to
/// bisection.
fn newton_increasing(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = g(x);
        if v == 0.0 {
            return x;
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = x - v / dg(x);
        let next = if step > lo && step < hi && step.is_finite() { step } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-14 * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
            return next;
        }
        x = next;
    }
    x
}

/// Service curve `S(t) = rate · t` with a deficit profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateServiceCurve {
    pub rate: f64,
    pub deficit: DeficitProfile,
}

fn check_leftover_rate(c: f64, mean: f64, r: f64) -> Result<()> {
    if !(r > mean && r < c) {
        return Err(Error::Infeasible(format!(
            "cross envelope rate {r} outside the feasible interval ({mean}, {c})"
        )));
    }
    Ok(())
}

/// Leftover service `(C−r)t` under fBm cross traffic, deficit equal to the
/// affine envelope profile.
pub fn fbm_leftover(c: f64, cross: &FbmTraffic, r: f64, beta: f64) -> Result<RateServiceCurve> {
    check_leftover_rate(c, cross.mean_rate(), r)?;
    Ok(RateServiceCurve {
        rate: c - r,
        deficit: DeficitProfile::single(fbm_affine_profile(cross, r, beta)?),
    })
}

/// Leftover service with the Weibull approximation as deficit.
pub fn fbm_leftover_asymptotic(c: f64, cross: &FbmTraffic, r: f64) -> Result<RateServiceCurve> {
    check_leftover_rate(c, cross.mean_rate(), r)?;
    Ok(RateServiceCurve {
        rate: c - r,
        deficit: DeficitProfile::single(crate::envelope::fbm_affine_profile_asymptotic(cross, r)?),
    })
}

/// Leftover service `(C−r)t` under on-off cross traffic.
pub fn ebb_leftover(c: f64, cross: &EbbOnOffAggregate, r: f64, theta: f64) -> Result<RateServiceCurve> {
    check_leftover_rate(c, cross.mean_rate(), r)?;
    Ok(RateServiceCurve {
        rate: c - r,
        deficit: DeficitProfile::single(ebb_affine_profile(cross, r, theta)?),
    })
}

/// Sample-path deficit `ε_δ(b) = (1/δ) ∫_b^∞ ε(x) dx` of a single-hop
/// service curve.
pub fn sample_path_deficit(s: &RateServiceCurve, delta: f64) -> Result<OverflowProfile> {
    if s.deficit.hops() != 1 {
        return Err(Error::NotComposable("only single-hop deficits can be relaxed".into()));
    }
    s.deficit.last().sample_path_deficit(delta)
}

/// Minimal `ε^th(b^th) + ε(b)` over splits `b^th + b = d · s.rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySplit {
    pub d: f64,
    pub epsilon: f64,
    pub ln_epsilon: f64,
    pub b_through: f64,
    pub b_service: f64,
}

/// Delay bound `P[W > d] ≤ ε^th(b^th) + ε(b)` for a through envelope at a
/// service curve, minimized over the backlog split.
pub fn single_hop_delay_violation(s: &RateServiceCurve, through: &AffineEnvelope, d: f64) -> Result<DelaySplit> {
    if !(through.rate <= s.rate) {
        return Err(Error::Unstable {
            load: through.rate,
            capacity: s.rate,
        });
    }
    if !(d > 0.0) {
        return Err(Error::domain("d", d, "(0, ∞)"));
    }
    let total = d * s.rate;
    let th = Kernel::of(&through.profile);
    if th == Kernel::Zero {
        let ln = s.deficit.ln_epsilon(total);
        return Ok(DelaySplit {
            d,
            epsilon: to_probability(ln),
            ln_epsilon: ln,
            b_through: 0.0,
            b_service: total,
        });
    }
    let dom = Interval::open(0.0, total)?;
    let m = minimize_scalar_with(
        |bt| ln_add_exp(th.ln(bt), s.deficit.ln_epsilon(total - bt)),
        &dom,
        &MinimizeOptions::coarse(64, 1e-9).linear(),
    )?;
    Ok(DelaySplit {
        d,
        epsilon: to_probability(m.value),
        ln_epsilon: m.value,
        b_through: m.arg,
        b_service: total - m.arg,
    })
}

/// Cross traffic at every hop of a tandem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossTraffic {
    Fbm(FbmTraffic),
    Ebb(EbbOnOffAggregate),
}

impl CrossTraffic {
    pub fn mean_rate(&self) -> f64 {
        match self {
            CrossTraffic::Fbm(t) => t.mean_rate(),
            CrossTraffic::Ebb(a) => a.mean_rate(),
        }
    }
}

/// The analysed flow crossing all hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThroughTraffic {
    Cbr(CbrTraffic),
    Ebb(EbbOnOffAggregate),
    Fbm(FbmTraffic),
}

impl ThroughTraffic {
    pub fn mean_rate(&self) -> f64 {
        match self {
            ThroughTraffic::Cbr(t) => t.mean_rate(),
            ThroughTraffic::Ebb(a) => a.mean_rate(),
            ThroughTraffic::Fbm(t) => t.mean_rate(),
        }
    }
}

/// Free-parameter search settings of a tandem scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Fixed cross envelope rate `r^cr`; optimized when `None`.
    pub r_cr: Option<f64>,
    /// Fixed total slack `Δ`; optimized when `None`.
    pub delta: Option<f64>,
    /// Searches over `r^cr`, `Δ` and the through/network backlog split.
    pub outer: MinimizeOptions,
    /// Searches over the envelope parameters β and θ.
    pub envelope: MinimizeOptions,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            r_cr: None,
            delta: None,
            outer: MinimizeOptions::coarse(12, 1e-4),
            envelope: MinimizeOptions::coarse(24, 1e-6),
        }
    }
}

/// `n` homogeneous hops of capacity `C`, each with fresh cross traffic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TandemScenario {
    pub hops: usize,
    pub capacity: f64,
    pub cross: CrossTraffic,
    pub through: ThroughTraffic,
    pub search: SearchSettings,
}

impl TandemScenario {
    pub fn new(hops: usize, capacity: f64, cross: CrossTraffic, through: ThroughTraffic) -> Result<Self> {
        if hops == 0 {
            return Err(Error::domain("hops", 0.0, "[1, ∞)"));
        }
        if let CrossTraffic::Fbm(t) = &cross {
            t.check_rigorous()?;
        }
        if let ThroughTraffic::Fbm(t) = &through {
            t.check_rigorous()?;
        }
        let load = cross.mean_rate() + through.mean_rate();
        if !(load < capacity) {
            return Err(Error::Unstable { load, capacity });
        }
        Ok(TandemScenario {
            hops,
            capacity,
            cross,
            through,
            search: SearchSettings::default(),
        })
    }

    pub fn with_hops(&self, hops: usize) -> Result<Self> {
        let mut s = Self::new(hops, self.capacity, self.cross, self.through)?;
        s.search = self.search;
        Ok(s)
    }

    /// Upper end of the β range: `(1−H)/2` when deficits are relaxed, else
    /// `1−H`.
    fn beta_upper(&self, hurst: f64) -> f64 {
        if self.hops > 1 {
            0.5 * (1.0 - hurst)
        } else {
            1.0 - hurst
        }
    }

    /// Feasible `r^cr` interval `(λ^cr, C − λ^th)`.
    fn r_cr_range(&self) -> Result<Interval> {
        Interval::open(self.cross.mean_rate(), self.capacity - self.through.mean_rate())
    }

    fn delta_range(&self, r_cr: f64) -> Result<Interval> {
        Interval::open(0.0, self.capacity - r_cr - self.through.mean_rate())
            .map_err(|_| Error::Infeasible(format!("no slack left for Δ at r_cr = {r_cr}")))
    }
}

/// fBm network service curve `(C − r^cr − Δ)t`; `n = 1` is the leftover
/// service curve and ignores `Δ`.
pub fn fbm_network_service(sc: &TandemScenario, r_cr: f64, delta: f64, beta: f64) -> Result<RateServiceCurve> {
    let CrossTraffic::Fbm(cross) = &sc.cross else {
        return Err(Error::Infeasible("scenario cross traffic is not fBm".into()));
    };
    let hop = fbm_leftover(sc.capacity, cross, r_cr, beta)?;
    compose(sc, hop, r_cr, delta)
}

/// EBB network service curve; `n = 1` is the leftover service curve.
pub fn ebb_network_service(sc: &TandemScenario, r_cr: f64, delta: f64, theta: f64) -> Result<RateServiceCurve> {
    let CrossTraffic::Ebb(cross) = &sc.cross else {
        return Err(Error::Infeasible("scenario cross traffic is not EBB".into()));
    };
    let hop = ebb_leftover(sc.capacity, cross, r_cr, theta)?;
    compose(sc, hop, r_cr, delta)
}

/// Network service curve with cross envelope parameter `param` (β for fBm,
/// θ for EBB cross traffic).
pub fn network_service(sc: &TandemScenario, r_cr: f64, delta: f64, param: f64) -> Result<RateServiceCurve> {
    match sc.cross {
        CrossTraffic::Fbm(_) => fbm_network_service(sc, r_cr, delta, param),
        CrossTraffic::Ebb(_) => ebb_network_service(sc, r_cr, delta, param),
    }
}

fn compose(sc: &TandemScenario, hop: RateServiceCurve, r_cr: f64, delta: f64) -> Result<RateServiceCurve> {
    if sc.hops == 1 {
        return Ok(hop);
    }
    if !(delta > 0.0 && delta < sc.capacity - r_cr) {
        return Err(Error::Infeasible(format!(
            "slack Δ = {delta} outside (0, C − r_cr = {})",
            sc.capacity - r_cr
        )));
    }
    let per_hop = delta / (sc.hops - 1) as f64;
    let relaxed = sample_path_deficit(&hop, per_hop)?;
    Ok(RateServiceCurve {
        rate: sc.capacity - r_cr - delta,
        deficit: DeficitProfile::tandem(sc.hops, relaxed, *hop.deficit.last())?,
    })
}

/// Optimized end-to-end delay bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2eBound {
    pub d: f64,
    pub epsilon: f64,
    pub ln_epsilon: f64,
    pub r_cr: f64,
    /// Total slack `Δ`; zero for a single hop.
    pub delta: f64,
    /// β (fBm) or θ (EBB) of the cross envelope.
    pub cross_param: f64,
    /// β or θ of the through envelope; `None` for CBR.
    pub through_param: Option<f64>,
    pub b_through: f64,
    pub b_network: f64,
    /// Network service rate `C − r^cr − Δ`.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    ln: f64,
    param: f64,
}

/// Network deficit at `b` minimized over the cross envelope parameter.
fn best_network_deficit(sc: &TandemScenario, r_cr: f64, delta: f64, b: f64) -> Result<Partial> {
    if !(b > 0.0) {
        return Ok(Partial {
            ln: f64::INFINITY,
            param: f64::NAN,
        });
    }
    let opts = &sc.search.envelope;
    match (&sc.cross, sc.hops) {
        (CrossTraffic::Fbm(t), 1) => {
            let r = fbm_backlog_violation_with(r_cr, t, b, opts)?;
            Ok(Partial {
                ln: r.ln_epsilon,
                param: r.beta_opt,
            })
        }
        (CrossTraffic::Ebb(a), 1) => {
            let r = ebb_backlog_violation_with(r_cr, a, b, opts)?;
            Ok(Partial {
                ln: r.ln_epsilon,
                param: r.theta_opt,
            })
        }
        (CrossTraffic::Fbm(t), _) => {
            let dom = beta_domain(t, sc.beta_upper(t.hurst()))?;
            let m = minimize_scalar_with(
                |beta| match fbm_network_service(sc, r_cr, delta, beta) {
                    Ok(s) => s.deficit.ln_epsilon(b),
                    Err(_) => f64::INFINITY,
                },
                &dom,
                opts,
            )?;
            Ok(Partial {
                ln: m.value,
                param: m.arg,
            })
        }
        (CrossTraffic::Ebb(a), _) => {
            let Some(th_max) = a.max_admissible_theta(r_cr)? else {
                return Err(Error::Infeasible("cross peak rate below r_cr: deficit is zero".into()));
            };
            let dom = Interval::open(th_max * 1e-9, th_max)?;
            let m = minimize_scalar_with(
                |theta| match ebb_network_service(sc, r_cr, delta, theta) {
                    Ok(s) => s.deficit.ln_epsilon(b),
                    Err(_) => f64::INFINITY,
                },
                &dom,
                opts,
            )?;
            Ok(Partial {
                ln: m.value,
                param: m.arg,
            })
        }
    }
}

/// Through-flow profile at envelope rate `r`, minimized over its parameter.
fn best_through(sc: &TandemScenario, r: f64, b: f64) -> Result<Partial> {
    let opts = &sc.search.envelope;
    match &sc.through {
        ThroughTraffic::Cbr(_) => Ok(Partial {
            ln: f64::NEG_INFINITY,
            param: f64::NAN,
        }),
        ThroughTraffic::Fbm(t) => {
            let r = fbm_backlog_violation_with(r, t, b, opts)?;
            Ok(Partial {
                ln: r.ln_epsilon,
                param: r.beta_opt,
            })
        }
        ThroughTraffic::Ebb(a) => {
            let r = ebb_backlog_violation_with(r, a, b, opts)?;
            Ok(Partial {
                ln: r.ln_epsilon,
                param: r.theta_opt,
            })
        }
    }
}

/// Delay bound for fixed `r^cr` and `Δ`; the through envelope takes the
/// largest admissible rate `C − r^cr − Δ`.
fn bound_at_rates(sc: &TandemScenario, d: f64, r_cr: f64, delta: f64) -> Result<E2eBound> {
    let delta = if sc.hops == 1 { 0.0 } else { delta };
    let rate = sc.capacity - r_cr - delta;
    if !(rate >= sc.through.mean_rate()) {
        return Err(Error::Unstable {
            load: sc.through.mean_rate(),
            capacity: rate,
        });
    }
    let total = d * rate;
    let mut out = E2eBound {
        d,
        epsilon: 1.0,
        ln_epsilon: f64::INFINITY,
        r_cr,
        delta,
        cross_param: f64::NAN,
        through_param: None,
        b_through: 0.0,
        b_network: total,
        rate,
    };
    if let ThroughTraffic::Cbr(_) = sc.through {
        let p = best_network_deficit(sc, r_cr, delta, total)?;
        out.ln_epsilon = p.ln;
        out.cross_param = p.param;
    } else {
        if !(rate > sc.through.mean_rate()) {
            return Err(Error::Unstable {
                load: sc.through.mean_rate(),
                capacity: rate,
            });
        }
        let dom = Interval::open(0.0, 1.0)?;
        let eval = |u: f64| -> f64 {
            let th = best_through(sc, rate, u * total).map(|p| p.ln).unwrap_or(f64::INFINITY);
            let net = best_network_deficit(sc, r_cr, delta, (1.0 - u) * total)
                .map(|p| p.ln)
                .unwrap_or(f64::INFINITY);
            ln_add_exp(th, net)
        };
        let m = minimize_scalar_with(eval, &dom, &sc.search.outer.linear())?;
        let th = best_through(sc, rate, m.arg * total)?;
        let net = best_network_deficit(sc, r_cr, delta, (1.0 - m.arg) * total)?;
        out.ln_epsilon = ln_add_exp(th.ln, net.ln);
        out.cross_param = net.param;
        out.through_param = Some(th.param);
        out.b_through = m.arg * total;
        out.b_network = total - out.b_through;
    }
    out.epsilon = to_probability(out.ln_epsilon);
    Ok(out)
}

fn bound_at_r_cr(sc: &TandemScenario, d: f64, r_cr: f64) -> Result<E2eBound> {
    if sc.hops == 1 {
        return bound_at_rates(sc, d, r_cr, 0.0);
    }
    if let Some(delta) = sc.search.delta {
        return bound_at_rates(sc, d, r_cr, delta);
    }
    let dom = sc.delta_range(r_cr)?;
    let m = minimize_scalar_with(
        |delta| bound_at_rates(sc, d, r_cr, delta).map(|r| r.ln_epsilon).unwrap_or(f64::INFINITY),
        &dom,
        &sc.search.outer,
    )?;
    bound_at_rates(sc, d, r_cr, m.arg)
}

/// End-to-end delay bound `P[W > d] ≤ ε` minimized over `r^cr`, `Δ`, the
/// envelope parameters and the backlog split.
pub fn e2e_delay_violation(sc: &TandemScenario, d: f64) -> Result<E2eBound> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("d", d, "(0, ∞)"));
    }
    if let Some(r_cr) = sc.search.r_cr {
        return bound_at_r_cr(sc, d, r_cr);
    }
    let dom = sc.r_cr_range()?;
    let m = minimize_scalar_with(
        |r| bound_at_r_cr(sc, d, r).map(|x| x.ln_epsilon).unwrap_or(f64::INFINITY),
        &dom,
        &sc.search.outer,
    )
    .map_err(|_| Error::Infeasible("no feasible (r_cr, Δ) for this scenario".into()))?;
    bound_at_r_cr(sc, d, m.arg)
}

/// Smallest delay `d` whose optimized violation probability is at most
/// `eps`, by bisection on the monotone map `d ↦ ε(d)`.
pub fn e2e_delay_at_epsilon(sc: &TandemScenario, eps: f64) -> Result<E2eBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("epsilon", eps, "(0, 1)"));
    }
    let target = eps.ln();
    let f = |d: f64| {
        e2e_delay_violation(sc, d)
            .map(|r| r.ln_epsilon - target)
            .unwrap_or(f64::NAN)
    };
    let d = invert_decreasing_rel(f, 1.0, 1e-6)?;
    e2e_delay_violation(sc, d)
}

fn invert_decreasing_rel<F: FnMut(f64) -> f64>(mut f: F, start: f64, rel_tol: f64) -> Result<f64> {
    use crate::numerics::{find_root, grow_until, shrink_until};
    let hi = grow_until(start, |x| f(x) <= 0.0).ok_or_else(|| Error::Infeasible("target not reached".into()))?;
    let lo = shrink_until(hi, |x| f(x) > 0.0).ok_or_else(|| Error::Infeasible("target met at d → 0".into()))?;
    if lo == hi {
        return Ok(hi);
    }
    find_root(f, lo, hi, rel_tol)
}

/// Near-optimal network β, `n^(2−2H) / (2(−log ε_a))`.
pub fn network_near_optimal_beta(n: usize, eps_a: f64, hurst: f64) -> Result<f64> {
    if !(eps_a > 0.0 && eps_a < 1.0) {
        return Err(Error::domain("eps_a", eps_a, "(0, 1)"));
    }
    network_near_optimal_beta_ln(n, -eps_a.ln(), hurst)
}

/// [`network_near_optimal_beta`] given `L = −log ε_a`.
pub fn network_near_optimal_beta_ln(n: usize, neg_ln_eps_a: f64, hurst: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "[1, ∞)"));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::domain("hurst", hurst, "(0, 1)"));
    }
    if !(neg_ln_eps_a > 0.0) {
        return Err(Error::domain("-log eps_a", neg_ln_eps_a, "(0, ∞)"));
    }
    Ok((n as f64).powf(2.0 - 2.0 * hurst) / (2.0 * neg_ln_eps_a))
}

/// `log` of the simplified network deficit `n ε_δ(b/n)`, `δ = Δ/(n−1)`,
/// that replaces the last-hop term by a relaxed one.
fn ln_simplified_deficit(hop: &OverflowProfile, n: usize, delta: f64, b: f64) -> Result<f64> {
    let relaxed = hop.sample_path_deficit(delta / (n - 1) as f64)?;
    let nf = n as f64;
    Ok(nf.ln() + relaxed.ln_epsilon(b / nf))
}

/// Stirling form of the simplified fBm network deficit,
/// `√(πβ) n(n−1) (b/n)^(−(1−(H+2β))/β) / ((2eβϑ)^(1/2β) Δ (1−(H+2β)))`.
pub fn ln_stirling_network_deficit(t: &FbmTraffic, r_cr: f64, n: usize, delta: f64, beta: f64, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("n", n as f64, "[2, ∞)"));
    }
    let h = t.hurst();
    if !(beta > 0.0 && beta < 0.5 * (1.0 - h)) {
        return Err(Error::NotComposable(format!("beta = {beta} not in (0, (1-H)/2)")));
    }
    let g = 1.0 - (h + 2.0 * beta);
    let nf = n as f64;
    let lv = ln_vartheta(t, r_cr, beta);
    Ok(0.5 * (std::f64::consts::PI * beta).ln() + (nf * (nf - 1.0)).ln() - (g / beta) * (b / nf).ln()
        - (1.0 + (2.0 * beta).ln() + lv) / (2.0 * beta)
        - delta.ln()
        - g.ln())
}

/// Minimal delay of the simplified network deficit at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    /// Delay bound in slots at the target probability.
    pub delay: f64,
    /// Backlog bound `delay · (C − r^cr − Δ)`.
    pub b: f64,
    pub r_cr: f64,
    pub delta: f64,
    pub param: f64,
}

/// Outcome of [`scaling_law_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares fit of `log(b/n)` against `log log n`; the slope is
    /// the exponent `p` of `b ≈ c n (log n)^p`.
    pub fit: Option<LinearFit>,
    pub theoretical_p: f64,
    /// Fit of `(b/n)^(1/p₀)` against `log n` with `p₀` the theoretical
    /// exponent. Affine (R² near 1) when the growth law holds with an
    /// additive offset inside the logarithm.
    pub shape_fit: Option<LinearFit>,
    /// `(n, log ε̃^net)` at the witness `b = n (c₀ log n)^(1/(2−2H))`; fBm
    /// cross traffic only.
    pub witness: Vec<(usize, f64)>,
    pub witness_c0: Option<f64>,
    /// Whether the witness values are nonincreasing after the first point.
    pub witness_bounded: Option<bool>,
}

impl ScalingReport {
    pub fn fitted_p(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Delay at target `eps` under the simplified deficit, minimized over the
/// envelope parameter, `r^cr` and `Δ`. Each inner evaluation is closed
/// form because the simplified deficit is a single power law or
/// exponential in `b`.
fn simplified_delay(sc: &TandemScenario, eps: f64) -> Result<ScalingPoint> {
    let n = sc.hops;
    let ln_eps = eps.ln();
    let nf = n as f64;
    let opts = sc.search.outer;
    let env_opts = sc.search.envelope;
    // backlog at which the simplified deficit equals eps, for fixed parameters
    let backlog = |r_cr: f64, delta: f64, param: f64| -> f64 {
        let hop = match &sc.cross {
            CrossTraffic::Fbm(t) => fbm_affine_profile(t, r_cr, param),
            CrossTraffic::Ebb(a) => ebb_affine_profile(a, r_cr, param),
        };
        let Ok(hop) = hop else { return f64::INFINITY };
        let Ok(relaxed) = hop.sample_path_deficit(delta / (nf - 1.0)) else {
            return f64::INFINITY;
        };
        match Kernel::of(&relaxed) {
            Kernel::Power { ln_c, k } => nf * ((nf.ln() + ln_c - ln_eps) / k).exp(),
            Kernel::Exp { ln_c, theta } => nf * ((nf.ln() + ln_c - ln_eps) / theta).max(0.0),
            _ => f64::INFINITY,
        }
    };
    let best_param = |r_cr: f64, delta: f64| -> Option<(f64, f64)> {
        let dom = match &sc.cross {
            CrossTraffic::Fbm(t) => beta_domain(t, 0.5 * (1.0 - t.hurst())).ok()?,
            CrossTraffic::Ebb(a) => {
                let th = a.max_admissible_theta(r_cr).ok()??;
                Interval::open(th * 1e-9, th).ok()?
            }
        };
        let m = minimize_scalar_with(|p| backlog(r_cr, delta, p).ln(), &dom, &env_opts).ok()?;
        Some((m.arg, m.value.exp()))
    };
    let delay_at = |r_cr: f64, delta: f64| -> f64 {
        let rate = sc.capacity - r_cr - delta;
        match best_param(r_cr, delta) {
            Some((_, b)) if rate > 0.0 => b / rate,
            _ => f64::INFINITY,
        }
    };
    let best_delta = |r_cr: f64| -> Option<(f64, f64)> {
        if let Some(delta) = sc.search.delta {
            return Some((delta, delay_at(r_cr, delta)));
        }
        let dom = sc.delta_range(r_cr).ok()?;
        let m = minimize_scalar_with(|dl| delay_at(r_cr, dl).ln(), &dom, &opts).ok()?;
        Some((m.arg, m.value.exp()))
    };
    let r_cr = match sc.search.r_cr {
        Some(r) => r,
        None => {
            let dom = sc.r_cr_range()?;
            minimize_scalar_with(
                |r| best_delta(r).map(|(_, d)| d.ln()).unwrap_or(f64::INFINITY),
                &dom,
                &opts,
            )?
            .arg
        }
    };
    let (delta, delay) = best_delta(r_cr).ok_or_else(|| Error::Infeasible("no feasible Δ".into()))?;
    let (param, b) = best_param(r_cr, delta).ok_or_else(|| Error::Infeasible("no feasible envelope".into()))?;
    if !delay.is_finite() {
        return Err(Error::Infeasible(format!("no finite delay bound at n = {n}")));
    }
    Ok(ScalingPoint {
        n,
        delay,
        b,
        r_cr,
        delta,
        param,
    })
}

/// Fits the growth of the end-to-end delay bound at fixed `eps_target`
/// (simplified deficit) to `c n (log n)^p` and evaluates the boundedness
/// witness of the scaling argument.
pub fn scaling_law_check(sc: &TandemScenario, eps_target: f64, n_values: &[usize]) -> Result<ScalingReport> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::domain("epsilon", eps_target, "(0, 1)"));
    }
    if n_values.len() < 2 || n_values.iter().any(|&n| n < 2) {
        return Err(Error::Infeasible("need at least two hop counts, all ≥ 2".into()));
    }
    let mut points = Vec::with_capacity(n_values.len());
    for &n in n_values {
        points.push(simplified_delay(&sc.with_hops(n)?, eps_target)?);
    }
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln().ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| (p.b / p.n as f64).ln()).collect();
    let fit = linear_fit(&x, &y);
    let theoretical_p = match &sc.cross {
        CrossTraffic::Fbm(t) => 1.0 / (2.0 - 2.0 * t.hurst()),
        CrossTraffic::Ebb(_) => 1.0,
    };
    let ln_n: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let z: Vec<f64> = points
        .iter()
        .map(|p| (p.b / p.n as f64).powf(1.0 / theoretical_p))
        .collect();
    let shape_fit = linear_fit(&ln_n, &z);

    let (mut witness, mut witness_c0, mut witness_bounded) = (Vec::new(), None, None);
    if let CrossTraffic::Fbm(t) = &sc.cross {
        // fixed rates from the smallest-n optimum; c₂ ≈ υ(r^cr)
        let p0 = points[0];
        let c2 = upsilon(t, p0.r_cr);
        let c0 = 4.0 / c2;
        let shape = 2.0 - 2.0 * t.hurst();
        for &n in n_values {
            let nf = n as f64;
            let b = nf * (c0 * nf.ln()).powf(1.0 / shape);
            let l = upsilon(t, p0.r_cr) * b.powf(shape);
            let beta = network_near_optimal_beta_ln(n, l, t.hurst())?.min(0.5 * (1.0 - t.hurst()) * (1.0 - 1e-9));
            witness.push((n, ln_stirling_network_deficit(t, p0.r_cr, n, p0.delta, beta, b)?));
        }
        witness_c0 = Some(c0);
        witness_bounded = Some(witness.windows(2).skip(1).all(|w| w[1].1 <= w[0].1 + 1e-9));
    }
    Ok(ScalingReport {
        points,
        fit,
        theoretical_p,
        shape_fit,
        witness,
        witness_c0,
        witness_bounded,
    })
}

/// Simplified network deficit `n ε_δ(b/n)` for fixed parameters, exposed for
/// inspection and tests.
pub fn simplified_network_deficit(sc: &TandemScenario, r_cr: f64, delta: f64, param: f64, b: f64) -> Result<f64> {
    if sc.hops < 2 {
        return Err(Error::domain("hops", sc.hops as f64, "[2, ∞)"));
    }
    let hop = match &sc.cross {
        CrossTraffic::Fbm(t) => fbm_affine_profile(t, r_cr, param)?,
        CrossTraffic::Ebb(a) => ebb_affine_profile(a, r_cr, param)?,
    };
    Ok(ln_simplified_deficit(&hop, sc.hops, delta, b)?.exp())
}
