//! Exact per-hop SNDR distribution and end-to-end outage probability.
//!
//! Conditioned on the aggregate interference gain h², the transmit power is
//! min(p_max, w/h²), so the hop CDF splits into a power-limited part and an
//! interference-limited integral. With the exponential-polynomial expansion of
//! the selected gain (see [`series`]) both parts are closed form:
//!
//! ```text
//! F(γ) = Σ_terms c · [ (a/p)^φ e^{-k a/p} P(T_P, w/(p ȳ))
//!                    + (a/(wβ))^φ (1/(ȳβ))^{T_P} Γ(φ+T_P)/Γ(T_P) · Q(φ+T_P, β w/p) ]
//! a = n γ / ((1 − κ_T² γ) x̄),   β = k a/w + 1/ȳ
//! ```
//!
//! `hop_sndr_cdf_quadrature` evaluates the conditional integral numerically
//! from the direct gain CDF and serves as the oracle for the series form.

pub mod quadrature;
pub mod series;

use crate::dd::{DoubleDouble, Real};
use crate::error::{OutageError, Result};
use crate::model::{DiversityScheme, HopConfig, SystemConfig};
use crate::specfun::{gamma_pq, ln_gamma_unchecked};

pub use quadrature::{QuadratureOptions, QuadratureResult};
pub use series::{
    probe_points, series_terms, Precision, SeriesCap, SeriesExpansion, SeriesTerm, SeriesValue,
};

/// How a hop CDF value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// γ at or above the SNDR ceiling; outage certain.
    Ceiling,
    ClosedForm,
    ExtendedPrecision,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopCdf {
    pub value: f64,
    pub method: Method,
    /// Cancellation ratio of the series sum (1 when no series was summed).
    pub guard: f64,
}

impl HopCdf {
    fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            guard: 1.0,
        }
    }
}

/// CDF of the selected gain at `z` straight from its definition:
/// P(N, z/x̄)^M for TAS/MRC and (1 − e^{-z/x̄})^{NM} for TAS/SC.
pub fn gain_cdf_direct(
    z: f64,
    m: u32,
    n: u32,
    mean_gain: f64,
    scheme: DiversityScheme,
) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(OutageError::Domain(format!("gain must be >= 0, got {z}")));
    }
    if m == 0 || n == 0 {
        return Err(OutageError::Domain(format!(
            "antenna counts must be >= 1, got {m}x{n}"
        )));
    }
    if !(mean_gain > 0.0) {
        return Err(OutageError::Domain(format!(
            "mean gain must be > 0, got {mean_gain}"
        )));
    }
    Ok(unit_gain_cdf(z / mean_gain, m, n, scheme))
}

fn unit_gain_cdf(x: f64, m: u32, n: u32, scheme: DiversityScheme) -> f64 {
    match scheme {
        DiversityScheme::TasMrc => gamma_pq(n as f64, x).0.powi(m as i32),
        DiversityScheme::TasSc => (-(-x).exp_m1()).powi((m * n) as i32),
    }
}

pub(crate) fn check_hop(hop: &HopConfig, t_p: u32) -> Result<()> {
    let ok = hop.m_tx >= 1
        && hop.n_rx >= 1
        && t_p >= 1
        && [
            hop.mean_gain,
            hop.interference_mean_gain,
            hop.interference_threshold,
            hop.noise_psd,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite())
        && (0.0..1.0).contains(&hop.kappa_t)
        && (0.0..1.0).contains(&hop.kappa_r);
    if ok {
        Ok(())
    } else {
        Err(OutageError::Domain(format!(
            "invalid hop configuration {hop:?} (t_p = {t_p})"
        )))
    }
}

/// n γ / ((1 − κ_T² γ) x̄): the gain scale at which this hop hits γ per unit power.
pub(crate) fn scaled_threshold(gamma: f64, hop: &HopConfig) -> f64 {
    hop.effective_noise() * gamma / ((1.0 - hop.kappa_t * hop.kappa_t * gamma) * hop.mean_gain)
}

/// e^{-x} Σ_{j<n} x^j/j!
fn erlang_sf_in<T: Real>(n: u32, x: T) -> T {
    let mut term = (-x).exp();
    let mut sum = term;
    for j in 1..n {
        term = term * x / T::of(j as f64);
        sum = sum + term;
    }
    sum
}

/// Inputs of the closed-form sum; `p_max = None` is the p_max → ∞ limit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub a: f64,
    pub w: f64,
    pub ybar: f64,
    pub t_p: u32,
    pub p_max: Option<f64>,
}

impl Kernel {
    fn sum_in<T: Real>(&self, expansion: &SeriesExpansion) -> (f64, f64) {
        let one = T::of(1.0);
        let zero = T::of(0.0);
        let a = T::of(self.a);
        let w = T::of(self.w);
        let inv_y = one / T::of(self.ybar);
        let a_over_w = a / w;
        let power_limited = self.p_max.map(|p| {
            let p = T::of(p);
            let x0 = w * inv_y / p;
            (a / p, x0, one - erlang_sf_in(self.t_p, x0))
        });
        let terms = expansion.groups().iter().map(|g| {
            let c = T::from_dd(g.weight);
            let k = T::of(g.k as f64);
            let beta = k * a_over_w + inv_y;
            let mut rising = one;
            for j in self.t_p..self.t_p + g.phi {
                rising = rising * T::of(j as f64);
            }
            let (direct, upper_arg) = match power_limited {
                Some((u, x0, lower)) => (c * u.powi(g.phi) * (-(k * u)).exp() * lower, k * u + x0),
                None => (zero, zero),
            };
            let tail = erlang_sf_in(self.t_p + g.phi, upper_arg);
            direct
                + c * (a_over_w / beta).powi(g.phi) * (inv_y / beta).powi(self.t_p) * rising * tail
        });
        T::sum_with_magnitude(terms)
    }

    pub(crate) fn evaluate(&self, expansion: &SeriesExpansion) -> Result<SeriesValue> {
        series::evaluate_escalating(|precision| match precision {
            Precision::Double => self.sum_in::<f64>(expansion),
            Precision::DoubleDouble => self.sum_in::<DoubleDouble>(expansion),
        })
    }
}

fn series_hop_cdf(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    expansion: &SeriesExpansion,
) -> Result<HopCdf> {
    check_hop(hop, t_p)?;
    if !(p_max > 0.0) {
        return Err(OutageError::Domain(format!(
            "p_max must be > 0, got {p_max}"
        )));
    }
    if !(gamma >= 0.0) {
        return Err(OutageError::Domain(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if gamma >= hop.sndr_ceiling() {
        return Ok(HopCdf::exact(1.0, Method::Ceiling));
    }
    if gamma == 0.0 {
        return Ok(HopCdf::exact(0.0, Method::ClosedForm));
    }
    let kernel = Kernel {
        a: scaled_threshold(gamma, hop),
        w: hop.interference_threshold,
        ybar: hop.interference_mean_gain,
        t_p,
        p_max: Some(p_max),
    };
    let sum = kernel.evaluate(expansion)?;
    let method = match sum.precision {
        Precision::Double => Method::ClosedForm,
        Precision::DoubleDouble => Method::ExtendedPrecision,
    };
    Ok(HopCdf {
        value: sum.value.clamp(0.0, 1.0),
        method,
        guard: sum.guard,
    })
}

/// Closed-form hop CDF with evaluation details.
pub fn hop_sndr_cdf_detailed(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
) -> Result<HopCdf> {
    let expansion = SeriesExpansion::cached(hop.m_tx, hop.n_rx, scheme)?;
    series_hop_cdf(gamma, hop, t_p, p_max, &expansion)
}

/// Closed-form hop CDF evaluated with a caller-supplied expansion.
pub fn hop_sndr_cdf_with(
    expansion: &SeriesExpansion,
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
) -> Result<HopCdf> {
    let (m, n, _) = expansion.dims();
    if (m, n) != (hop.m_tx, hop.n_rx) {
        return Err(OutageError::Contract(format!(
            "expansion is {m}x{n} but hop has {}x{}",
            hop.m_tx, hop.n_rx
        )));
    }
    series_hop_cdf(gamma, hop, t_p, p_max, expansion)
}

/// Closed-form CDF of one hop's SNDR at `gamma`.
///
/// Returns exactly 1 at or above the SNDR ceiling 1/κ_T². Fails with
/// [`OutageError::NumericalQuality`] when cancellation in the series is too
/// severe even in double-double; [`hop_sndr_cdf_robust`] falls back to
/// quadrature in that case.
pub fn hop_sndr_cdf(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
) -> Result<f64> {
    hop_sndr_cdf_detailed(gamma, hop, t_p, p_max, scheme).map(|r| r.value)
}

/// Closed form when usable, otherwise the quadrature oracle.
pub fn hop_sndr_cdf_robust(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
) -> Result<HopCdf> {
    match hop_sndr_cdf_detailed(gamma, hop, t_p, p_max, scheme) {
        Err(OutageError::NumericalQuality { guard }) => {
            let q = hop_sndr_cdf_quadrature(gamma, hop, t_p, p_max, scheme)?;
            Ok(HopCdf {
                value: q,
                method: Method::Quadrature,
                guard,
            })
        }
        other => other,
    }
}

pub fn hop_sndr_cdf_quadrature(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
) -> Result<f64> {
    hop_sndr_cdf_quadrature_with(
        gamma,
        hop,
        t_p,
        p_max,
        scheme,
        &QuadratureOptions::default(),
    )
}

/// Numerical evaluation of the conditional-CDF integral over h².
///
/// The semi-infinite range [w/p_max, ∞) is mapped onto [0, 1) by
/// h = w/p_max + s·ȳ·t/(1 − t), with s = T_P + m·n roughly centring the mass.
pub fn hop_sndr_cdf_quadrature_with(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
    opts: &QuadratureOptions,
) -> Result<f64> {
    check_hop(hop, t_p)?;
    if !(p_max > 0.0) {
        return Err(OutageError::Domain(format!(
            "p_max must be > 0, got {p_max}"
        )));
    }
    if !(gamma >= 0.0) {
        return Err(OutageError::Domain(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if gamma >= hop.sndr_ceiling() {
        return Ok(1.0);
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (m, n) = (hop.m_tx, hop.n_rx);
    let a = scaled_threshold(gamma, hop);
    let w = hop.interference_threshold;
    let ybar = hop.interference_mean_gain;
    let floor = w / p_max;
    let power_limited =
        unit_gain_cdf(a / p_max, m, n, scheme) * gamma_pq(t_p as f64, floor / ybar).0;

    let tp = t_p as f64;
    let log_norm = ln_gamma_unchecked(tp) + tp * ybar.ln();
    let density = |h: f64| {
        if t_p == 1 {
            (-h / ybar).exp() / ybar
        } else {
            ((tp - 1.0) * h.ln() - h / ybar - log_norm).exp()
        }
    };
    let scale = ybar * (tp + (m * n) as f64);
    let integrand = |t: f64| {
        let one_minus = 1.0 - t;
        let h = floor + scale * t / one_minus;
        let jac = scale / (one_minus * one_minus);
        let v = unit_gain_cdf(a * h / w, m, n, scheme) * density(h) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let r = quadrature::integrate(integrand, 0.0, 1.0, opts)?;
    Ok((power_limited + r.value).clamp(0.0, 1.0))
}

/// Outage of the decode-and-forward link from the two hop CDFs: F₁ + F₂ − F₁F₂.
pub fn combine_hops(f1: f64, f2: f64) -> f64 {
    f1 + f2 - f1 * f2
}

/// End-to-end result with the per-hop evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2eOutage {
    pub value: f64,
    pub hops: [HopCdf; 2],
}

/// P[min(SNDR₁, SNDR₂) ≤ γ_th] with closed-form hop CDFs. `gamma_th`
/// takes precedence over `cfg.gamma_th`.
pub fn e2e_outage(gamma_th: f64, cfg: &SystemConfig) -> Result<f64> {
    let f1 = hop_sndr_cdf(
        gamma_th,
        &cfg.hop1,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    let f2 = hop_sndr_cdf(
        gamma_th,
        &cfg.hop2,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    Ok(combine_hops(f1, f2))
}

/// As [`e2e_outage`], falling back to quadrature per hop when a series sum is unusable.
pub fn e2e_outage_robust(gamma_th: f64, cfg: &SystemConfig) -> Result<E2eOutage> {
    let h1 = hop_sndr_cdf_robust(
        gamma_th,
        &cfg.hop1,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    let h2 = hop_sndr_cdf_robust(
        gamma_th,
        &cfg.hop2,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    Ok(E2eOutage {
        value: combine_hops(h1.value, h2.value),
        hops: [h1, h2],
    })
}

/// Outage via the quadrature oracle on both hops.
pub fn e2e_outage_quadrature(gamma_th: f64, cfg: &SystemConfig) -> Result<f64> {
    let f1 = hop_sndr_cdf_quadrature(
        gamma_th,
        &cfg.hop1,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    let f2 = hop_sndr_cdf_quadrature(
        gamma_th,
        &cfg.hop2,
        cfg.primary_antennas,
        cfg.p_max,
        cfg.scheme,
    )?;
    Ok(combine_hops(f1, f2))
}

/// Fast path for single-antenna nodes and a single-antenna primary receiver:
///
/// ```text
/// P_out = 1 − exp(−Σᵢ aᵢ/p_max) · Πᵢ [1 − e^{−wᵢ/(p_max ȳᵢ)} · aᵢȳᵢ/(aᵢȳᵢ + wᵢ)]
/// ```
///
/// evaluated through `ln_1p`/`exp_m1` so small outages keep their digits.
pub fn single_antenna_outage(gamma_th: f64, cfg: &SystemConfig) -> Result<f64> {
    let single = |h: &HopConfig| h.m_tx == 1 && h.n_rx == 1;
    if !(single(&cfg.hop1) && single(&cfg.hop2) && cfg.primary_antennas == 1) {
        return Err(OutageError::Contract(
            "single_antenna_outage needs m_tx = n_rx = 1 on both hops and one primary antenna"
                .into(),
        ));
    }
    check_hop(&cfg.hop1, 1)?;
    check_hop(&cfg.hop2, 1)?;
    if !(cfg.p_max > 0.0) || !(gamma_th >= 0.0) {
        return Err(OutageError::Domain(
            "p_max must be > 0 and gamma_th >= 0".into(),
        ));
    }
    if cfg.hops().iter().any(|h| gamma_th >= h.sndr_ceiling()) {
        return Ok(1.0);
    }
    let mut log_survival = 0.0;
    for hop in cfg.hops() {
        let a = scaled_threshold(gamma_th, hop);
        let (w, ybar) = (hop.interference_threshold, hop.interference_mean_gain);
        let capped = (-w / (cfg.p_max * ybar)).exp() * a * ybar / (a * ybar + w);
        log_survival += -a / cfg.p_max + (-capped).ln_1p();
    }
    Ok(-log_survival.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::erlang_cdf;
    use DiversityScheme::*;

    fn unit_hop() -> HopConfig {
        HopConfig::default()
    }

    /// The worked single-antenna point: 1 − e^{-0.1}(1 − e^{-0.1}/2).
    fn worked_point() -> f64 {
        1.0 - (-0.1f64).exp() * (1.0 - (-0.1f64).exp() / 2.0)
    }

    #[test]
    fn direct_gain_cdf_examples() {
        let e1 = 1.0 - (-1f64).exp();
        assert!((gain_cdf_direct(1.0, 1, 1, 1.0, TasMrc).unwrap() - e1).abs() < 1e-15);
        assert!((gain_cdf_direct(1.0, 1, 1, 1.0, TasSc).unwrap() - e1).abs() < 1e-15);
        let mrc = erlang_cdf(2, 1.0).unwrap().powi(2);
        assert!((gain_cdf_direct(1.0, 2, 2, 1.0, TasMrc).unwrap() - mrc).abs() < 1e-15);
        assert!((mrc - 0.069_823_3).abs() < 1e-7);
        let sc = e1.powi(4);
        assert!((gain_cdf_direct(1.0, 2, 2, 1.0, TasSc).unwrap() - sc).abs() < 1e-15);
        assert!((sc - 0.159_661_3).abs() < 1e-7);
        assert!(gain_cdf_direct(-1.0, 1, 1, 1.0, TasSc).is_err());
    }

    #[test]
    fn worked_single_antenna_hop() {
        let v = hop_sndr_cdf(1.0, &unit_hop(), 1, 10.0, TasMrc).unwrap();
        assert!((v - worked_point()).abs() < 1e-14);
        assert!((v - 0.504_527_8).abs() < 1e-6);
        let q = hop_sndr_cdf_quadrature(1.0, &unit_hop(), 1, 10.0, TasMrc).unwrap();
        assert!((q - worked_point()).abs() < 1e-10);
    }

    #[test]
    fn ceiling_and_zero() {
        let hop = unit_hop().with_kappa(0.1);
        assert_eq!(hop_sndr_cdf(100.0, &hop, 1, 10.0, TasMrc).unwrap(), 1.0);
        assert_eq!(hop_sndr_cdf(250.0, &hop, 1, 10.0, TasSc).unwrap(), 1.0);
        assert_eq!(
            hop_sndr_cdf_quadrature(100.0, &hop, 1, 10.0, TasSc).unwrap(),
            1.0
        );
        assert_eq!(hop_sndr_cdf(0.0, &hop, 1, 10.0, TasMrc).unwrap(), 0.0);
        let tiny = hop_sndr_cdf(1e-9, &hop, 1, 10.0, TasMrc).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-8);
    }

    #[test]
    fn unconstrained_power_limit() {
        let hop = HopConfig {
            interference_threshold: 1e9,
            m_tx: 2,
            n_rx: 2,
            ..unit_hop()
        };
        let (gamma, p) = (1.5, 10.0);
        let expected = gain_cdf_direct(gamma / p, 2, 2, 1.0, TasMrc).unwrap();
        let q = hop_sndr_cdf_quadrature(gamma, &hop, 1, p, TasMrc).unwrap();
        assert!((q - expected).abs() < 1e-9);
        let c = hop_sndr_cdf(gamma, &hop, 1, p, TasMrc).unwrap();
        assert!((c - expected).abs() < 1e-9);
    }

    #[test]
    fn e2e_combination() {
        assert!((combine_hops(0.3, 0.5) - 0.65).abs() < 1e-15);
        assert_eq!(combine_hops(1.0, 0.37), 1.0);
        let cfg = SystemConfig::default();
        let v = e2e_outage(1.0, &cfg).unwrap();
        let f = worked_point();
        assert!((v - (1.0 - (1.0 - f).powi(2))).abs() < 1e-12);
        assert!((v - 0.754_507_3).abs() < 1e-6);
    }

    #[test]
    fn single_antenna_fast_path() {
        let cfg = SystemConfig::default();
        let fast = single_antenna_outage(1.0, &cfg).unwrap();
        assert!((fast - e2e_outage(1.0, &cfg).unwrap()).abs() < 1e-12);

        let mut wide = cfg;
        wide.hop1.interference_threshold = 1e9;
        wide.hop2.interference_threshold = 1e9;
        let (g, p) = (1.0, cfg.p_max);
        let unconstrained = 1.0 - (-2.0 * g / p).exp();
        assert!((single_antenna_outage(g, &wide).unwrap() - unconstrained).abs() < 1e-8);

        let impaired = SystemConfig::symmetric(unit_hop().with_kappa(0.2), 1, 10.0, TasSc, 1.0);
        assert_eq!(single_antenna_outage(25.0, &impaired).unwrap(), 1.0);
    }

    #[test]
    fn single_antenna_rejects_arrays() {
        let mut cfg = SystemConfig::default();
        cfg.hop2.n_rx = 2;
        assert!(matches!(
            single_antenna_outage(1.0, &cfg),
            Err(OutageError::Contract(_))
        ));
        let mut cfg = SystemConfig::default();
        cfg.primary_antennas = 2;
        assert!(single_antenna_outage(1.0, &cfg).is_err());
    }

    #[test]
    fn invalid_hop_is_domain_error() {
        let hop = HopConfig {
            mean_gain: 0.0,
            ..unit_hop()
        };
        assert!(matches!(
            hop_sndr_cdf(1.0, &hop, 1, 10.0, TasMrc),
            Err(OutageError::Domain(_))
        ));
        assert!(hop_sndr_cdf(-1.0, &unit_hop(), 1, 10.0, TasMrc).is_err());
    }

    #[test]
    fn mismatched_expansion_is_contract_error() {
        let e = SeriesExpansion::new(2, 2, TasMrc).unwrap();
        let r = hop_sndr_cdf_with(&e, 1.0, &unit_hop(), 1, 10.0);
        assert!(matches!(r, Err(OutageError::Contract(_))));
    }
}
