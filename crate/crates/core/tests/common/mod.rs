//! Shared helpers for the integration tests.

#![allow(dead_code)]

use underlay_core::{DiversityScheme, HopConfig};

pub fn hop(m: u32, n: u32, mean_gain: f64, ybar: f64, w: f64, kappa: f64) -> HopConfig {
    HopConfig {
        m_tx: m,
        n_rx: n,
        mean_gain,
        interference_mean_gain: ybar,
        interference_threshold: w,
        kappa_t: kappa,
        kappa_r: kappa,
        noise_psd: 1.0,
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// P(n, x) for integer n via the finite Poisson sum.
fn erlang_cdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x > 30.0 + 4.0 * n as f64 {
        let mut term = 1.0;
        let mut tail = 1.0;
        for k in 1..n {
            term *= x / k as f64;
            tail += term;
        }
        return 1.0 - (-x).exp() * tail;
    }
    // series form keeps small values exact
    let mut term = x.powi(n as i32) / factorial(n);
    let mut sum = 0.0;
    for k in 0..400 {
        sum += term;
        term *= x / (n + k + 1) as f64;
        if term < sum * 1e-18 {
            break;
        }
    }
    (-x).exp() * sum
}

fn gain_cdf(z: f64, m: u32, n: u32, mean_gain: f64, scheme: DiversityScheme) -> f64 {
    let x = z / mean_gain;
    match scheme {
        DiversityScheme::TasMrc => erlang_cdf(n, x).powi(m as i32),
        DiversityScheme::TasSc => (-(-x).exp_m1()).powi((m * n) as i32),
    }
}

/// Composite Simpson rule on [a, b] with `intervals` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Hop SNDR CDF by direct numerical averaging over the interference gain,
/// written without any of the library's machinery.
pub fn oracle_hop_cdf(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
) -> f64 {
    let k2 = hop.kappa_t * hop.kappa_t;
    if gamma * k2 >= 1.0 {
        return 1.0;
    }
    let noise = hop.kappa_r * hop.kappa_r * hop.n_rx as f64 + hop.noise_psd;
    let need = gamma * noise / (1.0 - k2 * gamma);
    let g = |p: f64| gain_cdf(need / p, hop.m_tx, hop.n_rx, hop.mean_gain, scheme);
    // t = h²/ȳ ~ Gamma(T_P, 1)
    let density = |t: f64| t.powi(t_p as i32 - 1) * (-t).exp() / factorial(t_p - 1);
    let t_star = hop.interference_threshold / (p_max * hop.interference_mean_gain);
    let power_limited = erlang_cdf(t_p, t_star) * g(p_max);
    let capped = |t: f64| {
        let p = hop.interference_threshold / (hop.interference_mean_gain * t);
        g(p) * density(t)
    };
    let end = t_star + 80.0 + 4.0 * t_p as f64;
    // dense panels near t* where the density and the CDF change fastest
    let mid = t_star + 10.0;
    power_limited + simpson(capped, t_star, mid, 40_000) + simpson(capped, mid, end, 40_000)
}
