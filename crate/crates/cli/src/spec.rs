//! Sweep description: a base system, one swept dB parameter and a family of curves.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use underlay_core::{db_to_linear, DiversityScheme, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    PMaxDb,
    /// Desired-link mean gain x̄ on both hops.
    MeanGainDb,
    GammaThDb,
    /// Interference threshold w on both hops.
    WDb,
}

impl SweptParameter {
    pub fn apply(self, cfg: &mut SystemConfig, value_db: f64) {
        let v = db_to_linear(value_db);
        match self {
            SweptParameter::PMaxDb => cfg.p_max = v,
            SweptParameter::MeanGainDb => {
                cfg.hop1.mean_gain = v;
                cfg.hop2.mean_gain = v;
            }
            SweptParameter::GammaThDb => cfg.gamma_th = v,
            SweptParameter::WDb => {
                cfg.hop1.interference_threshold = v;
                cfg.hop2.interference_threshold = v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start_db: f64,
    pub stop_db: f64,
    pub points: usize,
}

impl SweepRange {
    /// Uniform dB grid with both endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop_db - self.start_db) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop_db
                } else {
                    self.start_db + i as f64 * step
                }
            })
            .collect()
    }
}

/// Per-hop `[m_tx, n_rx]` antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Antennas {
    pub hop1: [u32; 2],
    pub hop2: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub label: String,
    pub scheme: DiversityScheme,
    /// Applied as κ_T = κ_R on both hops.
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antennas: Option<Antennas>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub trials: u64,
    pub seed: u64,
    pub enabled: bool,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 42,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub swept_parameter: SweptParameter,
    pub range: SweepRange,
    pub curves: Vec<CurveSpec>,
    #[serde(default)]
    pub mc: McSpec,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let spec: SweepSpec =
            serde_json::from_str(text).context("malformed sweep specification")?;
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep spec serializes")
    }

    pub fn check(&self) -> anyhow::Result<()> {
        let r = &self.range;
        if r.points < 2 {
            bail!("range.points must be >= 2, got {}", r.points);
        }
        if !(r.start_db < r.stop_db) || !r.start_db.is_finite() || !r.stop_db.is_finite() {
            bail!(
                "range needs finite start_db < stop_db, got {} .. {}",
                r.start_db,
                r.stop_db
            );
        }
        if self.curves.is_empty() {
            bail!("at least one curve is required");
        }
        let mut seen = HashSet::new();
        for c in &self.curves {
            if !seen.insert(c.label.as_str()) {
                bail!("duplicate curve label {:?}", c.label);
            }
            if !(0.0..1.0).contains(&c.kappa) {
                bail!(
                    "curve {:?}: kappa must lie in [0, 1), got {}",
                    c.label,
                    c.kappa
                );
            }
        }
        if self.mc.enabled && self.mc.trials == 0 {
            bail!("mc.trials must be >= 1");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        self.range.grid()
    }

    /// The base system with `curve` applied, before the swept value is set.
    pub fn curve_config(&self, curve: &CurveSpec) -> SystemConfig {
        let mut cfg = self.base;
        cfg.scheme = curve.scheme;
        for hop in [&mut cfg.hop1, &mut cfg.hop2] {
            hop.kappa_t = curve.kappa;
            hop.kappa_r = curve.kappa;
        }
        if let Some(a) = curve.antennas {
            [cfg.hop1.m_tx, cfg.hop1.n_rx] = a.hop1;
            [cfg.hop2.m_tx, cfg.hop2.n_rx] = a.hop2;
        }
        cfg
    }

    /// System for `curve` at swept value `value_db`.
    pub fn point_config(&self, curve: &CurveSpec, value_db: f64) -> SystemConfig {
        let mut cfg = self.curve_config(curve);
        self.swept_parameter.apply(&mut cfg, value_db);
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> SweepSpec {
        SweepSpec {
            base: SystemConfig::default(),
            swept_parameter: SweptParameter::PMaxDb,
            range: SweepRange {
                start_db: 0.0,
                stop_db: 10.0,
                points: 3,
            },
            curves: vec![CurveSpec {
                label: "a".into(),
                scheme: DiversityScheme::TasMrc,
                kappa: 0.0,
                antennas: None,
            }],
            mc: McSpec::default(),
        }
    }

    #[test]
    fn grid_is_inclusive() {
        let g = SweepRange {
            start_db: 0.0,
            stop_db: 40.0,
            points: 21,
        }
        .grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 40.0);
        assert!((g[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invariants_enforced() {
        assert!(minimal().check().is_ok());
        let mut s = minimal();
        s.range.points = 1;
        assert!(s.check().is_err());
        let mut s = minimal();
        s.range.stop_db = -1.0;
        assert!(s.check().is_err());
        let mut s = minimal();
        s.curves.push(s.curves[0].clone());
        assert!(s.check().is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s = minimal();
        let back = SweepSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let mut v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(SweepSpec::from_json(&v.to_string()).is_err());
        v.as_object_mut().unwrap().remove("extra");
        v["base"]["hop1"]["typo"] = serde_json::json!(1);
        assert!(SweepSpec::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn curve_overrides_apply() {
        let mut s = minimal();
        s.curves[0].kappa = 0.15;
        s.curves[0].antennas = Some(Antennas {
            hop1: [1, 2],
            hop2: [2, 3],
        });
        let cfg = s.point_config(&s.curves[0], 20.0);
        assert_eq!(
            (cfg.hop1.m_tx, cfg.hop1.n_rx, cfg.hop2.m_tx, cfg.hop2.n_rx),
            (1, 2, 2, 3)
        );
        assert_eq!(cfg.hop2.kappa_r, 0.15);
        assert!((cfg.p_max - 100.0).abs() < 1e-12);
    }
}
