//! Special functions and one-dimensional search routines.
//!
//! Every bound in this crate ends up as a nested sequence of scalar
//! minimizations over open parameter intervals (β, η, θ, slack rates, the
//! backlog split x). [`Interval`] models those open domains and
//! [`minimize_scalar`] is the single optimizer used for all of them.

use std::f64::consts::E;

use statrs::function::gamma as sgamma;

use crate::{Error, Result};

/// Open interval `(lo, hi)` evaluated only at points clamped a relative
/// `margin` of the width away from either end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
    margin: f64,
}

impl Interval {
    pub const DEFAULT_MARGIN: f64 = 1e-9;

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::with_margin(lo, hi, Self::DEFAULT_MARGIN)
    }

    pub fn with_margin(lo: f64, hi: f64, margin: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Infeasible(format!("empty interval ({lo}, {hi})")));
        }
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::domain("margin", margin, "[0, 0.5)"));
        }
        Ok(Interval { lo, hi, margin })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Smallest point the interval is ever evaluated at.
    pub fn inner_lo(&self) -> f64 {
        self.lo + self.margin * self.width()
    }

    /// Largest point the interval is ever evaluated at.
    pub fn inner_hi(&self) -> f64 {
        self.hi - self.margin * self.width()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.inner_lo(), self.inner_hi())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Γ(y) for y > 0.
pub fn gamma_function(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("y", y, "(0, ∞)"));
    }
    Ok(sgamma::gamma(y))
}

/// log Γ(y) for y > 0; finite far beyond the point where Γ overflows.
pub fn ln_gamma(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("y", y, "(0, ∞)"));
    }
    Ok(sgamma::ln_gamma(y))
}

/// ∫₀^∞ x^(t^ξ) dt = Γ(1/ξ) / (ξ (−log x)^(1/ξ)) for x ∈ (0,1), ξ > 0.
pub fn gamma_tail_integral(x: f64, xi: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("x", x, "(0, 1)"));
    }
    Ok(ln_gamma_tail_integral(-x.ln(), xi)?.exp())
}

/// Logarithm of [`gamma_tail_integral`], parameterized by `z = −log x > 0`
/// so that bases far below `f64::MIN_POSITIVE` stay representable.
pub fn ln_gamma_tail_integral(z: f64, xi: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain("-log x", z, "(0, ∞)"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::domain("xi", xi, "(0, ∞)"));
    }
    let inv = 1.0 / xi;
    Ok(sgamma::ln_gamma(inv) - xi.ln() - inv * z.ln())
}

/// P[N(0,1) > x].
pub fn gaussian_ccdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Principal branch of the Lambert W function, the inverse of `w e^w` on
/// `[−1/e, ∞)`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if z.is_nan() || z < branch - 4.0 * f64::EPSILON {
        return Err(Error::domain("z", z, "[-1/e, ∞)"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = if z < -0.25 {
        // series in p around the branch point
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        let series = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
        if p < 1e-4 {
            return Ok(series);
        }
        series
    } else if z < 3.0 {
        z.ln_1p()
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    // Halley iteration
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Spacing of the bracketing scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Logarithmic when the clamped interval is positive, else linear.
    #[default]
    Auto,
    Linear,
}

/// Knobs of [`minimize_scalar_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Points of the coarse scan that brackets the minimum.
    pub scan_points: usize,
    /// Relative tolerance on the argument (on log x for log-spaced scans).
    pub tol: f64,
    pub max_iter: usize,
    pub scale: Scale,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            scan_points: 256,
            tol: 1e-9,
            max_iter: 200,
            scale: Scale::Auto,
        }
    }
}

impl MinimizeOptions {
    pub fn coarse(scan_points: usize, tol: f64) -> Self {
        MinimizeOptions {
            scan_points,
            tol,
            ..Self::default()
        }
    }

    pub fn linear(self) -> Self {
        MinimizeOptions {
            scale: Scale::Linear,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` over the clamped interior of `domain` with the default
/// 256-point scan followed by golden-section refinement.
pub fn minimize_scalar<F>(f: F, domain: &Interval, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    minimize_scalar_with(
        f,
        domain,
        &MinimizeOptions {
            tol,
            ..MinimizeOptions::default()
        },
    )
}

/// Scan-then-refine minimizer.
///
/// The scan is log-spaced when the clamped interval is strictly positive and
/// linear otherwise; golden-section search then refines the bracket around
/// the best scan point in the same coordinate. NaN values count as +∞. The
/// returned point is the best one ever evaluated, and `f` is never called
/// outside `[domain.inner_lo(), domain.inner_hi()]`.
pub fn minimize_scalar_with<F>(mut f: F, domain: &Interval, opts: &MinimizeOptions) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    let lo = domain.inner_lo();
    let hi = domain.inner_hi();
    let log_scale = lo > 0.0 && opts.scale == Scale::Auto;
    let (ua, ub) = if log_scale { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let to_x = |u: f64| {
        let x = if log_scale { u.exp() } else { u };
        x.clamp(lo, hi)
    };

    let mut best = Minimum {
        arg: to_x(ua),
        value: f64::INFINITY,
        evaluations: 0,
    };
    let mut eval = |u: f64, best: &mut Minimum| {
        let x = to_x(u);
        let mut v = f(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        best.evaluations += 1;
        if v < best.value {
            best.value = v;
            best.arg = x;
        }
        v
    };

    let n = opts.scan_points.max(3);
    let step = (ub - ua) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let v = eval(ua + step * i as f64, &mut best);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    if best_v == f64::INFINITY {
        return Err(Error::Optimization { lo, hi });
    }
    if best_v == f64::NEG_INFINITY {
        return Ok(best);
    }

    let mut a = ua + step * best_i.saturating_sub(1) as f64;
    let mut b = ua + step * (best_i + 1).min(n - 1) as f64;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut best);
    let mut fd = eval(d, &mut best);
    for _ in 0..opts.max_iter {
        let scale = if log_scale {
            1.0
        } else {
            (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE.sqrt())
        };
        if (b - a) <= opts.tol * scale {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut best);
        }
    }
    Ok(best)
}

/// Root of `f` on `[lo, hi]` given a sign change, by bisection. Bisects in
/// log-space when `lo > 0` and stops at relative width `rel_tol`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let log_scale = lo > 0.0;
    let (mut a, mut b) = if log_scale { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let x_of = |u: f64| if log_scale { u.exp() } else { u };
    let fa = f(x_of(a));
    let fb = f(x_of(b));
    if fa == 0.0 {
        return Ok(x_of(a));
    }
    if fb == 0.0 {
        return Ok(x_of(b));
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::Infeasible(format!(
            "no sign change on [{lo}, {hi}] (f = {fa}, {fb})"
        )));
    }
    let sa = fa.signum();
    for _ in 0..400 {
        let scale = if log_scale { 1.0 } else { b.abs().max(a.abs()).max(f64::MIN_POSITIVE) };
        if (b - a).abs() <= rel_tol * scale {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(x_of(m));
        if fm == 0.0 {
            return Ok(x_of(m));
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(x_of(0.5 * (a + b)))
}

/// Doubles `start` until `pred` holds; `None` after 2000 doublings.
pub fn grow_until<P>(start: f64, mut pred: P) -> Option<f64>
where
    P: FnMut(f64) -> bool,
{
    let mut x = start;
    for _ in 0..2000 {
        if pred(x) {
            return Some(x);
        }
        x *= 2.0;
        if !x.is_finite() {
            return None;
        }
    }
    None
}

/// Halves `start` until `pred` holds; `None` after 2000 halvings.
pub fn shrink_until<P>(start: f64, mut pred: P) -> Option<f64>
where
    P: FnMut(f64) -> bool,
{
    let mut x = start;
    for _ in 0..2000 {
        if pred(x) {
            return Some(x);
        }
        x *= 0.5;
        if x == 0.0 {
            return None;
        }
    }
    None
}

/// `log(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    if m == f64::INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub(crate) const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a degenerate constant `y`.
    pub r_squared: f64,
}

/// Least-squares fit; `None` with fewer than two points or constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(sxx > 0.0) || !sxy.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
