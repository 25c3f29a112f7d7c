//! Exact fGn synthesis, Reich's backlog recursion and Monte-Carlo checks of
//! the analytic bounds.
//!
//! Randomness is drawn from ChaCha8 streams keyed by `(seed, index)`, one
//! stream per unit of work, so results do not depend on the thread count.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::netcalc::{CrossTraffic, TandemScenario, ThroughTraffic};
use crate::numerics::gaussian_ccdf;
use crate::traffic::{fgn_autocovariance, EbbOnOffAggregate, FbmTraffic};
use crate::{Error, Result};

/// Upper limit on the number of slots simulated by one call, across trials.
pub const MAX_SLOT_BUDGET: u64 = 1 << 36;

/// Random stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A realisation of `A(t) = λt + Z(t)` kept as its fGn increments.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub increments: Vec<f64>,
    pub lambda: f64,
    pub seed: u64,
    pub hurst: f64,
    pub sigma: f64,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Arrivals per slot, `λ + z(t)`.
    pub fn arrivals(&self) -> impl Iterator<Item = f64> + '_ {
        self.increments.iter().map(move |z| self.lambda + z)
    }

    /// `A(0), A(1), …, A(len)` with `A(0) = 0`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for a in self.arrivals() {
            acc += a;
            out.push(acc);
        }
        out
    }
}

#[derive(Clone)]
enum Method {
    Circulant {
        /// `sqrt(λ_k / M)` of the circulant embedding.
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    /// Durbin–Levinson coefficients `φ_{k,j}` and innovation deviations.
    Sequential { phi: Vec<Vec<f64>>, sd: Vec<f64> },
}

/// fGn generator for a fixed length and traffic model. Each draw yields two
/// independent paths.
#[derive(Clone)]
pub struct FgnGenerator {
    len: usize,
    method: Method,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let m = match self.method {
            Method::Circulant { .. } => "circulant",
            Method::Sequential { .. } => "sequential",
        };
        f.debug_struct("FgnGenerator").field("len", &self.len).field("method", &m).finish()
    }
}

impl FgnGenerator {
    pub fn new(t: &FbmTraffic, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::domain("length", 0.0, "[1, ∞)"));
        }
        let var = t.sigma() * t.sigma();
        let h = t.hurst();
        let n = len.next_power_of_two().max(2);
        let m = 2 * n;
        let mut c: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= n { k } else { m - k };
                Complex64::new(fgn_autocovariance(var, h, lag), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut c);
        let max = c.iter().map(|z| z.re).fold(0.0, f64::max);
        let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let method = if min >= -1e-10 * max {
            Method::Circulant {
                scale: c.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect(),
                fft: fft.clone(),
            }
        } else {
            log::warn!("circulant embedding has negative eigenvalue {min:e}; using sequential synthesis");
            sequential(var, h, len)
        };
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(FgnGenerator {
            len,
            method,
            buf: vec![Complex64::default(); m],
            scratch,
        })
    }

    /// Forces the sequential method, for testing and for models whose
    /// embedding fails.
    pub fn new_sequential(t: &FbmTraffic, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::domain("length", 0.0, "[1, ∞)"));
        }
        Ok(FgnGenerator {
            len,
            method: sequential(t.sigma() * t.sigma(), t.hurst(), len),
            buf: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Fills `a` and `b` (each of length `len`) with two independent fGn
    /// paths.
    pub fn fill_pair<R: Rng + ?Sized>(&mut self, rng: &mut R, a: &mut [f64], b: &mut [f64]) {
        assert!(a.len() == self.len && b.len() == self.len);
        match &self.method {
            Method::Circulant { scale, fft } => {
                for (z, s) in self.buf.iter_mut().zip(scale) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(s * re, s * im);
                }
                fft.process_with_scratch(&mut self.buf, &mut self.scratch);
                for (i, z) in self.buf[..self.len].iter().enumerate() {
                    a[i] = z.re;
                    b[i] = z.im;
                }
            }
            Method::Sequential { phi, sd } => {
                for out in [a, b] {
                    for k in 0..self.len {
                        let mean: f64 = phi[k].iter().enumerate().map(|(j, p)| p * out[k - 1 - j]).sum();
                        let e: f64 = rng.sample(StandardNormal);
                        out[k] = mean + sd[k] * e;
                    }
                }
            }
        }
    }
}

fn sequential(var: f64, h: f64, len: usize) -> Method {
    let gamma: Vec<f64> = (0..=len).map(|k| fgn_autocovariance(var, h, k)).collect();
    let mut phi: Vec<Vec<f64>> = vec![Vec::new()];
    let mut v = gamma[0];
    let mut sd = vec![v.sqrt()];
    for k in 1..len {
        let prev = &phi[k - 1];
        let num = gamma[k] - prev.iter().enumerate().map(|(j, p)| p * gamma[k - 1 - j]).sum::<f64>();
        let kk = num / v;
        let mut next: Vec<f64> = prev.iter().enumerate().map(|(j, p)| p - kk * prev[k - 2 - j]).collect();
        next.push(kk);
        v *= 1.0 - kk * kk;
        sd.push(v.max(0.0).sqrt());
        phi.push(next);
    }
    Method::Sequential { phi, sd }
}

/// One exact fGn path of `length` slots; the real part of the circulant
/// draw on stream 0 of `seed`.
pub fn generate_fgn(t: &FbmTraffic, length: usize, seed: u64) -> Result<SamplePath> {
    let mut g = FgnGenerator::new(t, length)?;
    let mut a = vec![0.0; length];
    let mut b = vec![0.0; length];
    g.fill_pair(&mut stream(seed, 0), &mut a, &mut b);
    Ok(SamplePath {
        increments: a,
        lambda: t.mean_rate(),
        seed,
        hurst: t.hurst(),
        sigma: t.sigma(),
    })
}

/// `B(t) = max(0, B(t−1) + a(t) − C)`, `B(0) = 0`; returns `B(1..=len)`.
pub fn reich_backlog(p: &SamplePath, c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::domain("C", c, "(0, ∞)"));
    }
    Ok(lindley(p.arrivals(), c))
}

pub(crate) fn lindley(arrivals: impl Iterator<Item = f64>, c: f64) -> Vec<f64> {
    let mut b = 0.0f64;
    arrivals
        .map(|a| {
            b = (b + a - c).max(0.0);
            b
        })
        .collect()
}

/// Event count out of `trials` independent trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialEstimate {
    pub successes: u64,
    pub trials: u64,
}

impl BinomialEstimate {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Standard deviation of the frequency if the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Normal band `p̂ ± k σ(p̂)`, clipped to `[0, 1]`.
    pub fn normal_band(&self, k: f64) -> (f64, f64) {
        let f = self.frequency();
        let s = k * self.sigma_at(f);
        ((f - s).max(0.0), (f + s).min(1.0))
    }

    /// Whether the frequency is at most `bound + k σ(bound)`.
    pub fn below(&self, bound: f64, k: f64) -> bool {
        self.frequency() <= bound + k * self.sigma_at(bound)
    }

    /// Whether the frequency lies within `p ± k σ(p)`.
    pub fn consistent_with(&self, p: f64, k: f64) -> bool {
        (self.frequency() - p).abs() <= k * self.sigma_at(p)
    }

    /// Exact two-sided Clopper–Pearson interval at level `1 − alpha`.
    pub fn clopper_pearson(&self, alpha: f64) -> (f64, f64) {
        use statrs::function::beta::inv_beta_reg;
        let (x, n) = (self.successes as f64, self.trials as f64);
        let lo = if self.successes == 0 {
            0.0
        } else {
            inv_beta_reg(x, n - x + 1.0, alpha / 2.0)
        };
        let hi = if self.successes == self.trials {
            1.0
        } else {
            inv_beta_reg(x + 1.0, n - x, 1.0 - alpha / 2.0)
        };
        (lo, hi)
    }
}

/// Violation counts of the envelope `λt + √(−2 log η) σ t^(H+β)` for
/// `t = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationCurve {
    pub trials: u64,
    pub beta: f64,
    pub eta: f64,
    /// Paths violating the envelope at `t` (index `t−1`).
    pub pointwise: Vec<u64>,
    /// Paths violating the envelope at least once in `[1, t]`.
    pub cumulative: Vec<u64>,
}

impl ViolationCurve {
    pub fn horizon(&self) -> usize {
        self.pointwise.len()
    }

    pub fn pointwise_at(&self, t: usize) -> BinomialEstimate {
        BinomialEstimate {
            successes: self.pointwise[t - 1],
            trials: self.trials,
        }
    }

    pub fn cumulative_at(&self, t: usize) -> BinomialEstimate {
        BinomialEstimate {
            successes: self.cumulative[t - 1],
            trials: self.trials,
        }
    }

    /// Exact Gaussian point-wise violation probability `Φ̄(√(−2 log η) t^β)`.
    pub fn gaussian_oracle(&self, t: usize) -> f64 {
        gaussian_ccdf((-2.0 * self.eta.ln()).sqrt() * (t as f64).powf(self.beta))
    }
}

fn check_mc(beta: f64, eta: f64, horizon: usize, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "[1, ∞)"));
    }
    if horizon == 0 {
        return Err(Error::domain("horizon", 0.0, "[1, ∞)"));
    }
    if !(beta >= 0.0) {
        return Err(Error::domain("beta", beta, "[0, ∞)"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain("eta", eta, "(0, 1)"));
    }
    if trials.saturating_mul(horizon as u64) > MAX_SLOT_BUDGET {
        return Err(Error::Infeasible(format!(
            "{trials} trials × {horizon} slots exceeds the budget of {MAX_SLOT_BUDGET} slots"
        )));
    }
    Ok(())
}

/// Counts point-wise and first-passage envelope violations over `trials`
/// fGn paths. Paths `2p` and `2p+1` come from one circulant draw on stream
/// `p`.
pub fn envelope_violation_mc(
    t: &FbmTraffic,
    beta: f64,
    eta: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<ViolationCurve> {
    check_mc(beta, eta, horizon, trials)?;
    let gen = FgnGenerator::new(t, horizon)?;
    let s = (-2.0 * eta.ln()).sqrt() * t.sigma();
    let thresh: Vec<f64> = (1..=horizon).map(|k| s * (k as f64).powf(t.hurst() + beta)).collect();
    let pairs = trials.div_ceil(2);

    let count_path = |z: &[f64], point: &mut [u64], first: &mut [u64]| {
        let mut acc = 0.0;
        let mut hit = false;
        for (k, (dz, th)) in z.iter().zip(&thresh).enumerate() {
            acc += dz;
            if acc > *th {
                point[k] += 1;
                if !hit {
                    first[k] += 1;
                    hit = true;
                }
            }
        }
    };

    let (pointwise, first) = (0..pairs)
        .into_par_iter()
        .fold(
            || (gen.clone(), vec![0.0; horizon], vec![0.0; horizon], vec![0u64; horizon], vec![0u64; horizon]),
            |(mut g, mut a, mut b, mut point, mut first), p| {
                g.fill_pair(&mut stream(seed, p), &mut a, &mut b);
                count_path(&a, &mut point, &mut first);
                if 2 * p + 1 < trials {
                    count_path(&b, &mut point, &mut first);
                }
                (g, a, b, point, first)
            },
        )
        .map(|(_, _, _, p, f)| (p, f))
        .reduce(
            || (vec![0u64; horizon], vec![0u64; horizon]),
            |(mut p1, mut f1), (p2, f2)| {
                p1.iter_mut().zip(p2).for_each(|(x, y)| *x += y);
                f1.iter_mut().zip(f2).for_each(|(x, y)| *x += y);
                (p1, f1)
            },
        );
    let mut cumulative = first;
    for k in 1..horizon {
        cumulative[k] += cumulative[k - 1];
    }
    Ok(ViolationCurve {
        trials,
        beta,
        eta,
        pointwise,
        cumulative,
    })
}

/// Empirical `P[A(t) > E(t)]` per `t` for the envelope with parameters
/// `(β, η)`.
pub fn pointwise_violation_mc(
    t: &FbmTraffic,
    beta: f64,
    eta: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<BinomialEstimate>> {
    let c = envelope_violation_mc(t, beta, eta, horizon, trials, seed)?;
    Ok((1..=horizon).map(|k| c.pointwise_at(k)).collect())
}

/// Empirical probability of at least one violation in `[1, t]` per `t`.
pub fn samplepath_violation_mc(
    t: &FbmTraffic,
    beta: f64,
    eta: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<BinomialEstimate>> {
    let c = envelope_violation_mc(t, beta, eta, horizon, trials, seed)?;
    Ok((1..=horizon).map(|k| c.cumulative_at(k)).collect())
}

/// Settings of [`tandem_delay_mc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TandemMcSettings {
    /// Slots simulated before the tagged arrival.
    pub warmup: usize,
    /// Slots after the tagged arrival; longer delays are censored.
    pub window: usize,
}

impl Default for TandemMcSettings {
    fn default() -> Self {
        TandemMcSettings {
            warmup: 1024,
            window: 3071,
        }
    }
}

/// Through-flow end-to-end delays of a tandem simulation, in slots.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySample {
    /// Observed delays, sorted ascending; censored trials are excluded.
    pub delays: Vec<f64>,
    /// Trials whose tagged bit had not left the last hop within the window.
    pub censored: u64,
    pub window: usize,
}

impl DelaySample {
    pub fn trials(&self) -> u64 {
        self.delays.len() as u64 + self.censored
    }

    /// Trials with delay `> d`; censored trials count as exceeding.
    pub fn exceeding(&self, d: f64) -> BinomialEstimate {
        let below = self.delays.partition_point(|&w| w <= d) as u64;
        BinomialEstimate {
            successes: self.trials() - below,
            trials: self.trials(),
        }
    }

    /// Empirical `q`-quantile; `None` when it falls among censored trials.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        let n = self.trials();
        if n == 0 || !(0.0..=1.0).contains(&q) {
            return None;
        }
        let idx = ((q * n as f64).ceil() as usize).max(1) - 1;
        self.delays.get(idx).copied()
    }
}

/// Per-slot source of arrivals.
enum Source {
    Constant(f64),
    Fbm { lambda: f64, path: Vec<f64> },
    OnOff { agg: EbbOnOffAggregate, on: u64 },
}

impl Source {
    fn on_off<R: Rng>(agg: &EbbOnOffAggregate, rng: &mut R) -> Source {
        let on = Binomial::new(agg.sources() as u64, agg.p_on()).expect("valid p").sample(rng);
        Source::OnOff { agg: *agg, on }
    }

    fn next<R: Rng>(&mut self, slot: usize, rng: &mut R) -> f64 {
        match self {
            Source::Constant(r) => *r,
            Source::Fbm { lambda, path } => *lambda + path[slot],
            Source::OnOff { agg, on } => {
                let a = *on as f64 * agg.peak();
                let m = agg.sources() as u64;
                let off_now = Binomial::new(*on, agg.p21()).expect("valid p").sample(rng);
                let on_now = Binomial::new(m - *on, agg.p12()).expect("valid p").sample(rng);
                *on = *on - off_now + on_now;
                a
            }
        }
    }
}

/// FIFO hop serving slot batches; cross bits of a slot precede its through
/// bits.
struct Hop {
    queue: VecDeque<(f64, f64)>,
}

impl Hop {
    /// Serves one slot with `capacity` after enqueueing the arrivals;
    /// returns the through bits that left.
    fn step(&mut self, cross: f64, through: f64, capacity: f64) -> f64 {
        // negative cross increments act as extra capacity
        let (cross, capacity) = if cross < 0.0 { (0.0, capacity - cross) } else { (cross, capacity) };
        if cross > 0.0 || through > 0.0 {
            self.queue.push_back((cross, through));
        }
        let mut left = capacity;
        let mut out = 0.0;
        while left > 0.0 {
            let Some(front) = self.queue.front_mut() else { break };
            let take = front.0.min(left);
            front.0 -= take;
            left -= take;
            let take = front.1.min(left);
            front.1 -= take;
            left -= take;
            out += take;
            if front.0 <= 0.0 && front.1 <= 0.0 {
                self.queue.pop_front();
            }
        }
        out
    }
}

/// Simulates the tandem slot by slot and records the virtual delay of the
/// through bit arriving last in slot `warmup`: the number of slots until
/// the last hop has released all through traffic that arrived up to then.
/// Departures of a hop in a slot reach the next hop in the same slot.
pub fn tandem_delay_mc(sc: &TandemScenario, trials: u64, seed: u64) -> Result<DelaySample> {
    tandem_delay_mc_with(sc, trials, seed, &TandemMcSettings::default())
}

pub fn tandem_delay_mc_with(
    sc: &TandemScenario,
    trials: u64,
    seed: u64,
    settings: &TandemMcSettings,
) -> Result<DelaySample> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "[1, ∞)"));
    }
    if settings.window == 0 {
        return Err(Error::domain("window", 0.0, "[1, ∞)"));
    }
    if let ThroughTraffic::Fbm(_) = sc.through {
        return Err(Error::Infeasible(
            "fBm through traffic has negative increments and cannot be queued per slot".into(),
        ));
    }
    let len = settings.warmup + 1 + settings.window;
    let budget = trials.saturating_mul(len as u64).saturating_mul(sc.hops as u64);
    if budget > MAX_SLOT_BUDGET {
        return Err(Error::Infeasible(format!(
            "{trials} trials × {} hops × {len} slots exceeds the budget of {MAX_SLOT_BUDGET} slots",
            sc.hops
        )));
    }
    let gen = match &sc.cross {
        CrossTraffic::Fbm(t) => Some(FgnGenerator::new(t, len)?),
        CrossTraffic::Ebb(_) => None,
    };
    let tagged = settings.warmup;
    let eps = 1e-9;

    let run = |g: &mut Option<FgnGenerator>, buf: &mut (Vec<f64>, Vec<f64>), trial: u64| -> Option<f64> {
        let mut rng = stream(seed, trial);
        let mut cross: Vec<Source> = Vec::with_capacity(sc.hops);
        while cross.len() < sc.hops {
            match (&sc.cross, g.as_mut()) {
                (CrossTraffic::Fbm(t), Some(g)) => {
                    g.fill_pair(&mut rng, &mut buf.0, &mut buf.1);
                    cross.push(Source::Fbm {
                        lambda: t.mean_rate(),
                        path: buf.0.clone(),
                    });
                    if cross.len() < sc.hops {
                        cross.push(Source::Fbm {
                            lambda: t.mean_rate(),
                            path: buf.1.clone(),
                        });
                    }
                }
                (CrossTraffic::Ebb(a), _) => cross.push(Source::on_off(a, &mut rng)),
                _ => unreachable!(),
            }
        }
        let mut through = match &sc.through {
            ThroughTraffic::Cbr(c) => Source::Constant(c.mean_rate()),
            ThroughTraffic::Ebb(a) => Source::on_off(a, &mut rng),
            ThroughTraffic::Fbm(_) => unreachable!(),
        };
        let mut hops: Vec<Hop> = (0..sc.hops).map(|_| Hop { queue: VecDeque::new() }).collect();
        let (mut arrived, mut departed) = (0.0, 0.0);
        for slot in 0..len {
            let mut flow = through.next(slot, &mut rng);
            if slot <= tagged {
                arrived += flow;
            }
            for (hop, src) in hops.iter_mut().zip(cross.iter_mut()) {
                let c = src.next(slot, &mut rng);
                flow = hop.step(c, flow, sc.capacity);
            }
            departed += flow;
            if slot >= tagged && departed >= arrived - eps * arrived.max(1.0) {
                return Some((slot - tagged) as f64);
            }
        }
        None
    };

    let results: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map_init(
            || (gen.clone(), (vec![0.0; len], vec![0.0; len])),
            |(g, buf), trial| run(g, buf, trial),
        )
        .collect();
    let censored = results.iter().filter(|r| r.is_none()).count() as u64;
    let mut delays: Vec<f64> = results.into_iter().flatten().collect();
    delays.sort_by(f64::total_cmp);
    Ok(DelaySample {
        delays,
        censored,
        window: settings.window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::CbrTraffic;

    fn fbm(h: f64) -> FbmTraffic {
        FbmTraffic::new(0.5, 0.5, h).unwrap()
    }

    #[test]
    fn determinism() {
        let a = generate_fgn(&fbm(0.7), 300, 42).unwrap();
        let b = generate_fgn(&fbm(0.7), 300, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_fgn(&fbm(0.7), 300, 43).unwrap();
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn cumulative_starts_at_zero() {
        let p = generate_fgn(&fbm(0.8), 10, 1).unwrap();
        let a = p.cumulative();
        assert_eq!(a.len(), 11);
        assert_eq!(a[0], 0.0);
        assert!((a[10] - (5.0 + p.increments.iter().sum::<f64>())).abs() < 1e-12);
    }

    #[test]
    fn variance_of_increments() {
        // pooled over many pairs, lag-0 and lag-1 covariances match
        let t = FbmTraffic::new(0.0, 2.0, 0.8).unwrap();
        let mut g = FgnGenerator::new(&t, 64).unwrap();
        assert!(g.is_circulant());
        let (mut a, mut b) = (vec![0.0; 64], vec![0.0; 64]);
        let mut rng = stream(7, 0);
        let (mut s0, mut s1, mut n) = (0.0, 0.0, 0.0);
        for _ in 0..4000 {
            g.fill_pair(&mut rng, &mut a, &mut b);
            for p in [&a, &b] {
                s0 += p[10] * p[10];
                s1 += p[10] * p[11];
                n += 1.0;
            }
        }
        let v0 = fgn_autocovariance(4.0, 0.8, 0);
        let v1 = fgn_autocovariance(4.0, 0.8, 1);
        assert!((s0 / n - v0).abs() < 4.0 * v0 * (2.0 / n).sqrt(), "{} vs {v0}", s0 / n);
        assert!((s1 / n - v1).abs() < 4.0 * v0 * (2.0 / n).sqrt(), "{} vs {v1}", s1 / n);
    }

    #[test]
    fn sequential_matches_circulant_in_law() {
        let t = FbmTraffic::new(0.0, 1.0, 0.75).unwrap();
        let mut g = FgnGenerator::new_sequential(&t, 16).unwrap();
        let (mut a, mut b) = (vec![0.0; 16], vec![0.0; 16]);
        let mut rng = stream(3, 0);
        let (mut s, mut n) = (0.0, 0.0);
        for _ in 0..5000 {
            g.fill_pair(&mut rng, &mut a, &mut b);
            for p in [&a, &b] {
                let z: f64 = p.iter().sum();
                s += z * z;
                n += 1.0;
            }
        }
        let want = 16f64.powf(1.5);
        assert!((s / n - want).abs() < 4.0 * want * (2.0 / n).sqrt(), "{} vs {want}", s / n);
    }

    #[test]
    fn lindley_special_cases() {
        let p = SamplePath {
            increments: vec![0.0; 50],
            lambda: 1.0,
            seed: 0,
            hurst: 0.5,
            sigma: 0.0,
        };
        assert!(reich_backlog(&p, 2.0).unwrap().iter().all(|&b| b == 0.0));
        let b = reich_backlog(&p, 0.25).unwrap();
        for (i, x) in b.iter().enumerate() {
            assert!((x - 0.75 * (i + 1) as f64).abs() < 1e-12);
        }
        assert!(reich_backlog(&p, 0.0).is_err());
    }

    #[test]
    fn clopper_pearson_contains_frequency() {
        let e = BinomialEstimate {
            successes: 30,
            trials: 1000,
        };
        let (lo, hi) = e.clopper_pearson(0.05);
        assert!(lo < 0.03 && 0.03 < hi);
        // beta quantile oracle: P[X ≥ 30 | p = lo] = 0.025
        let tail = statrs::function::beta::beta_reg(30.0, 971.0, lo);
        assert!((tail - 0.025).abs() < 1e-9);
        let zero = BinomialEstimate { successes: 0, trials: 100 };
        let (lo, hi) = zero.clopper_pearson(0.05);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
    }

    #[test]
    fn mc_rejects_zero_trials() {
        assert!(pointwise_violation_mc(&fbm(0.7), 0.04, 1e-3, 10, 0, 1).is_err());
        assert!(samplepath_violation_mc(&fbm(0.7), 0.04, 1e-3, 10, 0, 1).is_err());
    }

    #[test]
    fn cumulative_dominates_pointwise() {
        let c = envelope_violation_mc(&fbm(0.7), 0.04, 0.05, 100, 2001, 9).unwrap();
        for k in 1..=100 {
            assert!(c.cumulative_at(k).successes >= c.pointwise_at(k).successes);
            if k > 1 {
                assert!(c.cumulative[k - 1] >= c.cumulative[k - 2]);
            }
        }
    }

    #[test]
    fn empty_network_has_zero_delay() {
        // zero-mean cross traffic of negligible variance
        let cross = FbmTraffic::new(0.0, 1e-12, 0.5).unwrap();
        let sc = TandemScenario::new(
            1,
            10.0,
            CrossTraffic::Fbm(cross),
            ThroughTraffic::Cbr(CbrTraffic::new(9.5).unwrap()),
        )
        .unwrap();
        let d = tandem_delay_mc_with(&sc, 20, 1, &TandemMcSettings { warmup: 10, window: 10 }).unwrap();
        assert_eq!(d.censored, 0);
        assert!(d.delays.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn more_hops_more_delay() {
        let cross = FbmTraffic::new(2500.0, 1250.0, 0.75).unwrap();
        let mk = |n| {
            TandemScenario::new(
                n,
                5000.0,
                CrossTraffic::Fbm(cross),
                ThroughTraffic::Cbr(CbrTraffic::new(1500.0).unwrap()),
            )
            .unwrap()
        };
        let s = TandemMcSettings { warmup: 256, window: 512 };
        let d1 = tandem_delay_mc_with(&mk(1), 400, 5, &s).unwrap();
        let d2 = tandem_delay_mc_with(&mk(2), 400, 5, &s).unwrap();
        let mean = |d: &DelaySample| d.delays.iter().sum::<f64>() / d.delays.len() as f64;
        assert!(mean(&d2) >= mean(&d1));
        for q in [0.5, 0.9, 0.99] {
            assert!(d2.quantile(q).unwrap() >= d1.quantile(q).unwrap());
        }
    }
}
