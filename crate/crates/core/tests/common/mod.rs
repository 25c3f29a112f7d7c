//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// `log ∫_a^b exp(g(s)) ds` by tanh-sinh quadrature on `pieces` equal
/// subintervals, with `g` shifted by `g_max` to keep the integrand O(1).
pub fn ln_integral(g: impl Fn(f64) -> f64, a: f64, b: f64, g_max: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    let total: f64 = (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            quadrature::double_exponential::integrate(|s| (g(s) - g_max).exp(), lo, lo + h, 1e-15).integral
        })
        .sum();
    g_max + total.ln()
}

/// `∫₀^∞ x^(t^ξ) dt` through `t = e^s`, integrated around the peak of
/// `s − z e^(ξ s)` where `z = −log x`.
pub fn ln_gamma_integral(z: f64, xi: f64) -> f64 {
    let peak = -(xi * z).ln() / xi;
    let g = |s: f64| s - z * (xi * s).exp();
    let g_max = g(peak);
    let left = peak - 45.0 - 1.0 / xi;
    // right cutoff: g has dropped by 45 below the peak
    let mut u = 1.0;
    while g(peak + u) > g_max - 45.0 {
        u *= 1.5;
    }
    ln_integral(g, left, peak + u, g_max, 64)
}

/// `log ∫_b^∞ exp(ln_f(x)) dx` for a profile that decays at least like a
/// power `x^(−k)` with `k > 1`, via `x = b e^u`.
pub fn ln_tail_integral(ln_f: impl Fn(f64) -> f64, b: f64, decay: f64) -> f64 {
    let g = |u: f64| ln_f(b * u.exp()) + b.ln() + u;
    let g0 = g(0.0);
    let u_max = 60.0 / decay;
    ln_integral(g, 0.0, u_max, g0, 64)
}

/// Minimum of `f` on an `n`-point uniform grid over `[a, b]`.
pub fn grid_min(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    (0..n)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            (x, f(x))
        })
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
}

/// Minimum of `f` on an `n`-point log-spaced grid over `[a, b]`, `a > 0`.
pub fn log_grid_min(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let (la, lb) = (a.ln(), b.ln());
    let (u, v) = grid_min(|u| f(u.exp()), la, lb, n);
    (u.exp(), v)
}

/// `sup_{τ ≤ t} {A(τ, t) − C (t − τ)}` by the double loop.
pub fn reich_direct(arrivals: &[f64], c: f64) -> Vec<f64> {
    let n = arrivals.len();
    let mut cum = vec![0.0; n + 1];
    for i in 0..n {
        cum[i + 1] = cum[i] + arrivals[i];
    }
    (1..=n)
        .map(|t| {
            (0..=t)
                .map(|tau| cum[t] - cum[tau] - c * (t - tau) as f64)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
