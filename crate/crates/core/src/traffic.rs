//! Traffic models: fBm aggregates, Markov on-off (EBB) aggregates and
//! constant bit rate flows. Rates are bits per slot.

use crate::{Error, Result};

/// Aggregate traffic `A(t) = λt + Z(t)` with `Z` an fBm of variance
/// `σ² t^(2H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmTraffic {
    lambda: f64,
    sigma: f64,
    hurst: f64,
}

impl FbmTraffic {
    pub fn new(lambda: f64, sigma: f64, hurst: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain("lambda", lambda, "[0, ∞)"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain("sigma", sigma, "(0, ∞)"));
        }
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::domain("hurst", hurst, "(0, 1)"));
        }
        Ok(FbmTraffic { lambda, sigma, hurst })
    }

    pub fn mean_rate(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// The rigorous envelopes need `H ≥ 1/2`. The long-range dependent case
    /// is `H ∈ (1/2, 1)`; `H = 1/2` (Brownian motion) is accepted as its
    /// short-memory limit.
    pub fn check_rigorous(&self) -> Result<()> {
        if self.hurst < 0.5 {
            return Err(Error::domain("hurst", self.hurst, "[1/2, 1)"));
        }
        Ok(())
    }

    /// Aggregate of `m` independent copies of this flow each scaled by
    /// `1/m`: same mean, standard deviation `σ/√m`.
    pub fn multiplexed(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("m", 0.0, "[1, ∞)"));
        }
        FbmTraffic::new(self.lambda, self.sigma / (m as f64).sqrt(), self.hurst)
    }

    /// Effective bandwidth `α(θ, t) = λ + θσ²t^(2H−1)/2`.
    pub fn effective_bandwidth(&self, theta: f64, t: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Err(Error::domain("theta", theta, "(0, ∞)"));
        }
        if !(t > 0.0) {
            return Err(Error::domain("t", t, "(0, ∞)"));
        }
        Ok(self.lambda + 0.5 * theta * self.sigma * self.sigma * t.powf(2.0 * self.hurst - 1.0))
    }

    /// Autocovariance of the increments (fractional Gaussian noise) at
    /// `lag` slots: `σ²/2 (|k+1|^2H − 2|k|^2H + |k−1|^2H)`.
    pub fn autocovariance(&self, lag: usize) -> f64 {
        fgn_autocovariance(self.sigma * self.sigma, self.hurst, lag)
    }
}

pub(crate) fn fgn_autocovariance(variance: f64, hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return variance;
    }
    let k = lag as f64;
    let h2 = 2.0 * hurst;
    0.5 * variance * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).powf(h2))
}

/// `m` independent two-state discrete-time Markov on-off sources. State 1 is
/// off, state 2 is on with peak rate `P` bits per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbbOnOffAggregate {
    m: usize,
    peak: f64,
    p12: f64,
    p21: f64,
}

impl EbbOnOffAggregate {
    pub fn new(m: usize, peak: f64, p12: f64, p21: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("m", 0.0, "[1, ∞)"));
        }
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::domain("peak", peak, "(0, ∞)"));
        }
        for (name, p) in [("p12", p12), ("p21", p21)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::domain(name, p, "(0, 1]"));
            }
        }
        Ok(EbbOnOffAggregate { m, peak, p12, p21 })
    }

    /// Solves `p_on = mean/peak` and `T = 1/p12 + 1/p21` for the transition
    /// probabilities: `p12 = 1/(T(1−p_on))`, `p21 = 1/(T p_on)`.
    pub fn from_mean_and_burstiness(m: usize, mean_per_source: f64, peak: f64, t: f64) -> Result<Self> {
        if !(mean_per_source > 0.0 && mean_per_source < peak) {
            return Err(Error::Infeasible(format!(
                "per-source mean {mean_per_source} must lie in (0, peak = {peak})"
            )));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain("T", t, "(0, ∞)"));
        }
        let p_on = mean_per_source / peak;
        let p12 = 1.0 / (t * (1.0 - p_on));
        let p21 = 1.0 / (t * p_on);
        if p12 > 1.0 || p21 > 1.0 {
            let t_min = 1.0 / p_on.min(1.0 - p_on);
            return Err(Error::Infeasible(format!(
                "burstiness T = {t} too small for p_on = {p_on}; need T ≥ {t_min}"
            )));
        }
        Self::new(m, peak, p12, p21)
    }

    pub fn sources(&self) -> usize {
        self.m
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn p12(&self) -> f64 {
        self.p12
    }

    pub fn p21(&self) -> f64 {
        self.p21
    }

    pub fn p_on(&self) -> f64 {
        self.p12 / (self.p12 + self.p21)
    }

    /// Mean rate of one source.
    pub fn mean_per_source(&self) -> f64 {
        self.p_on() * self.peak
    }

    /// Mean rate of the aggregate.
    pub fn mean_rate(&self) -> f64 {
        self.m as f64 * self.mean_per_source()
    }

    /// Average time for two state changes, `1/p12 + 1/p21`.
    pub fn burstiness(&self) -> f64 {
        1.0 / self.p12 + 1.0 / self.p21
    }

    /// Per-source envelope rate ρ(θ): `(1/θ) log` of the spectral radius of
    /// the exponentially tilted transition matrix. Evaluated with `e^{θP}`
    /// factored out so large `θP` does not overflow.
    pub fn envelope_rate(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Err(Error::domain("theta", theta, "(0, ∞)"));
        }
        let p11 = 1.0 - self.p12;
        let p22 = 1.0 - self.p21;
        let tp = theta * self.peak;
        let u = (-tp).exp();
        let a = p11 * u + p22;
        let disc = a * a - 4.0 * (p11 + p22 - 1.0) * u;
        let ln_radius = tp + (0.5 * (a + disc.max(0.0).sqrt())).ln();
        let rho = ln_radius / theta;
        Ok(rho.clamp(self.mean_per_source().min(self.peak), self.peak))
    }

    /// Aggregate envelope rate `m ρ(θ)`.
    pub fn aggregate_envelope_rate(&self, theta: f64) -> Result<f64> {
        Ok(self.m as f64 * self.envelope_rate(theta)?)
    }

    /// Largest θ with `m ρ(θ) < rate`, or `None` if `m P ≤ rate` (every θ is
    /// admissible). Errors if `rate` does not exceed the aggregate mean.
    pub fn max_admissible_theta(&self, rate: f64) -> Result<Option<f64>> {
        if rate <= self.mean_rate() {
            return Err(Error::Unstable {
                load: self.mean_rate(),
                capacity: rate,
            });
        }
        if self.m as f64 * self.peak <= rate {
            return Ok(None);
        }
        let excess = |th: f64| self.m as f64 * self.envelope_rate(th).unwrap_or(self.peak) - rate;
        let hi = crate::numerics::grow_until(1.0 / self.peak, |th| excess(th) > 0.0)
            .ok_or_else(|| Error::Infeasible("no θ bracket for envelope rate".into()))?;
        let lo = crate::numerics::shrink_until(hi, |th| excess(th) < 0.0)
            .ok_or_else(|| Error::Infeasible("no θ bracket for envelope rate".into()))?;
        Ok(Some(crate::numerics::find_root(excess, lo, hi, 1e-13)?))
    }
}

/// Constant bit rate flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbrTraffic {
    lambda: f64,
}

impl CbrTraffic {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain("lambda", lambda, "[0, ∞)"));
        }
        Ok(CbrTraffic { lambda })
    }

    pub fn mean_rate(&self) -> f64 {
        self.lambda
    }
}
