//! High-SNDR approximations of the hop and end-to-end outage, diversity and
//! array order.
//!
//! Two constant conventions are available. [`ConstantVariant::Derived`]
//! normalizes by the Gamma(T_P, ȳ) density of the aggregate interference
//! gain, i.e. it divides by Γ(T_P) and uses E[h^{2NM}] = ȳ^{NM}Γ(NM+T_P)/Γ(T_P).
//! [`ConstantVariant::Printed`] keeps the constants as commonly quoted
//! (no Γ(T_P) divisor, and ȳ^{NM+T_P} in the high-gain form). The two agree
//! only when ȳ^{T_P}Γ(T_P) = 1 (high-gain form) or Γ(T_P) = 1 (high-power form).

use serde::{Deserialize, Serialize};

use crate::analytic::{check_hop, scaled_threshold, Kernel, SeriesExpansion};
use crate::error::{OutageError, Result};
use crate::model::{DiversityScheme, HopConfig, SystemConfig};
use crate::specfun::ln_gamma_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    /// p_max → ∞: the interference-limited outage floor.
    #[serde(rename = "HIGH_PMAX")]
    HighPmax,
    /// p_max → ∞ and x̄ → ∞: leading power-law term.
    #[serde(rename = "HIGH_PMAX_AND_GAIN")]
    HighPmaxAndGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantVariant {
    #[default]
    Derived,
    Printed,
}

fn check_below_ceiling(gamma: f64, hop: &HopConfig) -> Result<()> {
    if !(gamma >= 0.0) || gamma >= hop.sndr_ceiling() {
        return Err(OutageError::Domain(format!(
            "asymptotic forms need 0 <= gamma < 1/kappa_t^2 = {}, got {gamma}",
            hop.sndr_ceiling()
        )));
    }
    Ok(())
}

/// Outage floor of one hop as p_max → ∞.
pub fn hop_cdf_high_pmax(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    scheme: DiversityScheme,
) -> Result<f64> {
    hop_cdf_high_pmax_variant(gamma, hop, t_p, scheme, ConstantVariant::Derived)
}

pub fn hop_cdf_high_pmax_variant(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    scheme: DiversityScheme,
    variant: ConstantVariant,
) -> Result<f64> {
    check_hop(hop, t_p)?;
    check_below_ceiling(gamma, hop)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let expansion = SeriesExpansion::cached(hop.m_tx, hop.n_rx, scheme)?;
    let kernel = Kernel {
        a: scaled_threshold(gamma, hop),
        w: hop.interference_threshold,
        ybar: hop.interference_mean_gain,
        t_p,
        p_max: None,
    };
    let derived = kernel.evaluate(&expansion)?.value.max(0.0);
    Ok(match variant {
        ConstantVariant::Derived => derived,
        ConstantVariant::Printed => derived * ln_gamma_unchecked(t_p as f64).exp(),
    })
}

/// Leading term of one hop's CDF as p_max, x̄ → ∞.
pub fn hop_cdf_high_pmax_and_gain(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    scheme: DiversityScheme,
) -> Result<f64> {
    hop_cdf_high_pmax_and_gain_variant(gamma, hop, t_p, scheme, ConstantVariant::Derived)
}

pub fn hop_cdf_high_pmax_and_gain_variant(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    scheme: DiversityScheme,
    variant: ConstantVariant,
) -> Result<f64> {
    check_hop(hop, t_p)?;
    check_below_ceiling(gamma, hop)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (m, n) = (hop.m_tx as f64, hop.n_rx as f64);
    let order = m * n;
    let tp = t_p as f64;
    let a = scaled_threshold(gamma, hop);
    let ybar = hop.interference_mean_gain;
    // ln of N^M Γ(N)^M for MRC, 0 for SC
    let ln_combining = match scheme {
        DiversityScheme::TasMrc => m * (n.ln() + ln_gamma_unchecked(n)),
        DiversityScheme::TasSc => 0.0,
    };
    let ln_core = order * (a / hop.interference_threshold).ln() + ln_gamma_unchecked(order + tp)
        - ln_combining;
    let ln_value = match variant {
        ConstantVariant::Derived => ln_core + order * ybar.ln() - ln_gamma_unchecked(tp),
        ConstantVariant::Printed => ln_core + (order + tp) * ybar.ln(),
    };
    Ok(ln_value.exp())
}

pub fn hop_asymptotic(
    gamma: f64,
    hop: &HopConfig,
    t_p: u32,
    scheme: DiversityScheme,
    regime: AsymptoticRegime,
    variant: ConstantVariant,
) -> Result<f64> {
    match regime {
        AsymptoticRegime::HighPmax => hop_cdf_high_pmax_variant(gamma, hop, t_p, scheme, variant),
        AsymptoticRegime::HighPmaxAndGain => {
            hop_cdf_high_pmax_and_gain_variant(gamma, hop, t_p, scheme, variant)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOutage {
    /// F₁ + F₂; not clamped.
    pub value: f64,
    pub hops: [f64; 2],
    /// The dropped F₁F₂ term exceeds 1% of the sum, or the sum exceeds 1.
    pub outside_regime: bool,
}

/// End-to-end outage approximated by the sum of the hop approximations.
pub fn e2e_outage_asymptotic(
    gamma_th: f64,
    cfg: &SystemConfig,
    regime: AsymptoticRegime,
) -> Result<AsymptoticOutage> {
    e2e_outage_asymptotic_variant(gamma_th, cfg, regime, ConstantVariant::Derived)
}

pub fn e2e_outage_asymptotic_variant(
    gamma_th: f64,
    cfg: &SystemConfig,
    regime: AsymptoticRegime,
    variant: ConstantVariant,
) -> Result<AsymptoticOutage> {
    let f1 = hop_asymptotic(
        gamma_th,
        &cfg.hop1,
        cfg.primary_antennas,
        cfg.scheme,
        regime,
        variant,
    )?;
    let f2 = hop_asymptotic(
        gamma_th,
        &cfg.hop2,
        cfg.primary_antennas,
        cfg.scheme,
        regime,
        variant,
    )?;
    let value = f1 + f2;
    let outside_regime = value > 1.0 || f1 * f2 > 0.01 * value;
    Ok(AsymptoticOutage {
        value,
        hops: [f1, f2],
        outside_regime,
    })
}

/// min(T_S·T_R, T_R·T_D).
pub fn diversity_order(cfg: &SystemConfig) -> u32 {
    (cfg.hop1.m_tx * cfg.hop1.n_rx).min(cfg.hop2.m_tx * cfg.hop2.n_rx)
}

/// Per-hop statistics shared by both hops, the premise of the array-order expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSystem {
    pub w: f64,
    pub kappa: f64,
    /// Effective noise n = κ_R²N + N₀.
    pub noise: f64,
    pub gamma_th: f64,
    pub ybar: f64,
    pub t_p: u32,
    pub t_s: u32,
    pub t_r: u32,
    pub t_d: u32,
}

impl SymmetricSystem {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let (h1, h2) = (&cfg.hop1, &cfg.hop2);
        let mut mismatched = Vec::new();
        if h1.kappa_t != h2.kappa_t {
            mismatched.push("kappa_t");
        }
        if h1.interference_threshold != h2.interference_threshold {
            mismatched.push("interference_threshold");
        }
        if h1.effective_noise() != h2.effective_noise() {
            mismatched.push("effective noise");
        }
        if h1.interference_mean_gain != h2.interference_mean_gain {
            mismatched.push("interference_mean_gain");
        }
        if h1.mean_gain != h2.mean_gain {
            mismatched.push("mean_gain");
        }
        if h1.n_rx != h2.m_tx {
            mismatched.push("relay antenna count");
        }
        if !mismatched.is_empty() {
            return Err(OutageError::Contract(format!(
                "array order needs identical hop statistics; differing: {}",
                mismatched.join(", ")
            )));
        }
        Ok(Self {
            w: h1.interference_threshold,
            kappa: h1.kappa_t,
            noise: h1.effective_noise(),
            gamma_th: cfg.gamma_th,
            ybar: h1.interference_mean_gain,
            t_p: cfg.primary_antennas,
            t_s: h1.m_tx,
            t_r: h1.n_rx,
            t_d: h2.n_rx,
        })
    }

    pub fn diversity(&self) -> u32 {
        (self.t_s * self.t_r).min(self.t_r * self.t_d)
    }
}

/// Array order split into its impairment-dependent TAS/SC part and the
/// combining gain, which depends only on antenna counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayOrder {
    pub selection_part: f64,
    pub combining_gain: f64,
}

impl ArrayOrder {
    pub fn value(&self) -> f64 {
        self.selection_part * self.combining_gain
    }
}

pub fn array_order_parts(sym: &SymmetricSystem, scheme: DiversityScheme) -> ArrayOrder {
    let d = sym.diversity() as f64;
    let tp = sym.t_p as f64;
    let k2 = sym.kappa * sym.kappa;
    let selection_part = 2.0 * sym.w * (1.0 - k2 * sym.gamma_th)
        / (sym.noise * sym.gamma_th * sym.ybar.powf(1.0 + tp / d))
        * (-ln_gamma_unchecked(d + tp) / d).exp();
    let combining_gain = match scheme {
        DiversityScheme::TasSc => 1.0,
        DiversityScheme::TasMrc => mrc_sc_gain(sym.t_r, sym.t_d),
    };
    ArrayOrder {
        selection_part,
        combining_gain,
    }
}

/// Array order of the dual-hop system with identical hop statistics.
pub fn array_order(sym: &SymmetricSystem, scheme: DiversityScheme) -> f64 {
    array_order_parts(sym, scheme).value()
}

/// TAS/MRC over TAS/SC array-order gain, (Γ(m)·m)^{1/m} with m = min(T_R, T_D).
pub fn mrc_sc_gain(t_r: u32, t_d: u32) -> f64 {
    let m = t_r.min(t_d).max(1) as f64;
    if m == 1.0 {
        return 1.0;
    }
    ((ln_gamma_unchecked(m) + m.ln()) / m).exp()
}

/// Least-squares slope of log10(y) against log10(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
