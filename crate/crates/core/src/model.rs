//! System configuration types, unit conversions and validation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(value_db: f64) -> f64 {
    10f64.powf(value_db / 10.0)
}

pub fn linear_to_db(value: f64) -> f64 {
    10.0 * value.log10()
}

/// Receive strategy paired with transmit antenna selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiversityScheme {
    /// Best transmit antenna, maximum ratio combining over all receive antennas.
    #[serde(rename = "TAS_MRC")]
    TasMrc,
    /// Best (transmit, receive) antenna pair.
    #[serde(rename = "TAS_SC")]
    TasSc,
}

impl DiversityScheme {
    pub fn label(self) -> &'static str {
        match self {
            DiversityScheme::TasMrc => "TAS_MRC",
            DiversityScheme::TasSc => "TAS_SC",
        }
    }
}

impl fmt::Display for DiversityScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Physical parameters of one hop. All gains and powers are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopConfig {
    /// Transmit antennas.
    pub m_tx: u32,
    /// Receive antennas.
    pub n_rx: u32,
    /// Mean power gain of each desired-link antenna pair.
    pub mean_gain: f64,
    /// Mean power gain of each link toward a primary-receiver antenna.
    pub interference_mean_gain: f64,
    /// Tolerable interfering power at the primary receiver.
    pub interference_threshold: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    pub noise_psd: f64,
}

impl Default for HopConfig {
    fn default() -> Self {
        Self {
            m_tx: 1,
            n_rx: 1,
            mean_gain: 1.0,
            interference_mean_gain: 1.0,
            interference_threshold: 1.0,
            kappa_t: 0.0,
            kappa_r: 0.0,
            noise_psd: 1.0,
        }
    }
}

impl HopConfig {
    /// Noise plus receiver distortion, κ_R²·N + N₀.
    pub fn effective_noise(&self) -> f64 {
        self.kappa_r * self.kappa_r * self.n_rx as f64 + self.noise_psd
    }

    /// Upper bound 1/κ_T² on the SNDR; infinite for an ideal transmitter.
    pub fn sndr_ceiling(&self) -> f64 {
        if self.kappa_t == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (self.kappa_t * self.kappa_t)
        }
    }

    /// Sets κ_T = κ_R = κ.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_t = kappa;
        self.kappa_r = kappa;
        self
    }

    fn check(&self, name: &str, report: &mut ValidationReport) {
        if self.m_tx < 1 {
            report.violation(format!("{name}.m_tx must be >= 1"));
        }
        if self.n_rx < 1 {
            report.violation(format!("{name}.n_rx must be >= 1"));
        }
        for (field, value) in [
            ("mean_gain", self.mean_gain),
            ("interference_mean_gain", self.interference_mean_gain),
            ("interference_threshold", self.interference_threshold),
            ("noise_psd", self.noise_psd),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                report.violation(format!(
                    "{name}.{field} must be positive and finite, got {value}"
                ));
            }
        }
        for (field, value) in [("kappa_t", self.kappa_t), ("kappa_r", self.kappa_r)] {
            if !(0.0..1.0).contains(&value) {
                report.violation(format!("{name}.{field} must lie in [0, 1), got {value}"));
            }
        }
    }
}

pub fn effective_noise(hop: &HopConfig) -> f64 {
    hop.effective_noise()
}

pub fn sndr_ceiling(hop: &HopConfig) -> f64 {
    hop.sndr_ceiling()
}

/// Source → relay → destination system sharing one primary receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub hop1: HopConfig,
    pub hop2: HopConfig,
    /// Antennas at the primary receiver (T_P).
    pub primary_antennas: u32,
    pub p_max: f64,
    pub scheme: DiversityScheme,
    pub gamma_th: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            hop1: HopConfig::default(),
            hop2: HopConfig::default(),
            primary_antennas: 1,
            p_max: 10.0,
            scheme: DiversityScheme::TasMrc,
            gamma_th: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn hops(&self) -> [&HopConfig; 2] {
        [&self.hop1, &self.hop2]
    }

    /// Both hops get the same parameters.
    pub fn symmetric(
        hop: HopConfig,
        primary_antennas: u32,
        p_max: f64,
        scheme: DiversityScheme,
        gamma_th: f64,
    ) -> Self {
        Self {
            hop1: hop,
            hop2: hop,
            primary_antennas,
            p_max,
            scheme,
            gamma_th,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    /// A type invariant does not hold; no computation should proceed.
    Violation(String),
    /// Physically questionable but computable.
    Warning(String),
    /// γ_th at or above a hop's SNDR ceiling: outage is certain.
    OutageCertain(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn violation(&mut self, msg: String) {
        self.issues.push(Issue::Violation(msg));
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_violations(&self) -> bool {
        self.issues.iter().any(|i| matches!(i, Issue::Violation(_)))
    }

    pub fn outage_certain(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i, Issue::OutageCertain(_)))
    }

    pub fn violations(&self) -> impl Iterator<Item = &str> {
        self.issues.iter().filter_map(|i| match i {
            Issue::Violation(s) => Some(s.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            match issue {
                Issue::Violation(s) => writeln!(f, "error: {s}")?,
                Issue::Warning(s) => writeln!(f, "warning: {s}")?,
                Issue::OutageCertain(s) => writeln!(f, "notice: {s}")?,
            }
        }
        Ok(())
    }
}

/// Checks every invariant of `cfg` and reports, rather than fails on, problems.
pub fn validate(cfg: &SystemConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    cfg.hop1.check("hop1", &mut report);
    cfg.hop2.check("hop2", &mut report);
    if cfg.primary_antennas < 1 {
        report.violation("primary_antennas must be >= 1".into());
    }
    if !(cfg.p_max > 0.0 && cfg.p_max.is_finite()) {
        report.violation(format!(
            "p_max must be positive and finite, got {}",
            cfg.p_max
        ));
    }
    if !(cfg.gamma_th > 0.0 && cfg.gamma_th.is_finite()) {
        report.violation(format!(
            "gamma_th must be positive and finite, got {}",
            cfg.gamma_th
        ));
    }
    if cfg.hop1.n_rx != cfg.hop2.m_tx {
        report.issues.push(Issue::Warning(format!(
            "relay antenna count differs across hops (hop1.n_rx = {}, hop2.m_tx = {})",
            cfg.hop1.n_rx, cfg.hop2.m_tx
        )));
    }
    for (name, hop) in [("hop1", &cfg.hop1), ("hop2", &cfg.hop2)] {
        let ceiling = hop.sndr_ceiling();
        if cfg.gamma_th >= ceiling {
            report.issues.push(Issue::OutageCertain(format!(
                "gamma_th = {} reaches the {name} SNDR ceiling 1/kappa_t^2 = {ceiling}",
                cfg.gamma_th
            )));
        }
    }
    report
}
