//! Sweep presets for the three reference figures.
//!
//! The captions fix T_P, γ_th, w, ȳ, x̄ and p_max where stated. The rest is
//! chosen here: κ_T = κ_R = 0.15 for impaired curves, N₀ = 1, and w = γ_th
//! where the caption does not give w. The zero-forcing curve of the first
//! figure has no closed form and is left out.

use anyhow::bail;
use underlay_core::{db_to_linear, DiversityScheme, HopConfig, SystemConfig};

use crate::spec::{Antennas, CurveSpec, McSpec, SweepRange, SweepSpec, SweptParameter};

pub const PRESET_NAMES: [&str; 3] = ["fig2", "fig3", "fig4"];
pub const IMPAIRED_KAPPA: f64 = 0.15;

fn hop(antennas: u32, mean_gain_db: f64, ybar_db: f64, w_db: f64) -> HopConfig {
    HopConfig {
        m_tx: antennas,
        n_rx: antennas,
        mean_gain: db_to_linear(mean_gain_db),
        interference_mean_gain: db_to_linear(ybar_db),
        interference_threshold: db_to_linear(w_db),
        kappa_t: 0.0,
        kappa_r: 0.0,
        noise_psd: 1.0,
    }
}

fn curve(label: &str, scheme: DiversityScheme, kappa: f64, antennas: Option<u32>) -> CurveSpec {
    CurveSpec {
        label: label.to_string(),
        scheme,
        kappa,
        antennas: antennas.map(|a| Antennas {
            hop1: [a, a],
            hop2: [a, a],
        }),
    }
}

pub fn figure_preset(name: &str) -> anyhow::Result<SweepSpec> {
    use DiversityScheme::*;
    let k = IMPAIRED_KAPPA;
    let spec = match name {
        "fig2" => {
            let h = hop(2, 4.0, 1.0, 3.0);
            SweepSpec {
                base: SystemConfig::symmetric(h, 2, 1.0, TasMrc, db_to_linear(3.0)),
                swept_parameter: SweptParameter::PMaxDb,
                range: SweepRange {
                    start_db: 0.0,
                    stop_db: 40.0,
                    points: 21,
                },
                curves: vec![
                    curve("single antenna k=0", TasMrc, 0.0, Some(1)),
                    CurveSpec {
                        label: "SC 1x2 k=0.15".into(),
                        scheme: TasSc,
                        kappa: k,
                        antennas: Some(Antennas {
                            hop1: [1, 2],
                            hop2: [1, 2],
                        }),
                    },
                    curve("TAS/SC 2x2 k=0.15", TasSc, k, None),
                    curve("TAS/MRC 2x2 k=0.15", TasMrc, k, None),
                ],
                mc: McSpec::default(),
            }
        }
        "fig3" => {
            let h = hop(2, 0.0, 1.0, 6.0);
            SweepSpec {
                base: SystemConfig::symmetric(h, 1, db_to_linear(10.0), TasMrc, db_to_linear(6.0)),
                swept_parameter: SweptParameter::MeanGainDb,
                range: SweepRange {
                    start_db: 0.0,
                    stop_db: 40.0,
                    points: 21,
                },
                curves: vec![
                    curve("TAS/MRC k=0", TasMrc, 0.0, None),
                    curve("TAS/SC k=0", TasSc, 0.0, None),
                    curve("TAS/MRC k=0.15", TasMrc, k, None),
                    curve("TAS/SC k=0.15", TasSc, k, None),
                ],
                mc: McSpec::default(),
            }
        }
        "fig4" => {
            let h = hop(2, 1.0, 1.0, 8.0);
            let mut curves = Vec::new();
            for a in [2, 8] {
                for (scheme, tag) in [(TasMrc, "TAS/MRC"), (TasSc, "TAS/SC")] {
                    for kappa in [0.0, k] {
                        curves.push(curve(
                            &format!("{tag} {a}x{a} k={kappa}"),
                            scheme,
                            kappa,
                            Some(a),
                        ));
                    }
                }
            }
            SweepSpec {
                base: SystemConfig::symmetric(h, 1, 1.0, TasMrc, db_to_linear(8.0)),
                swept_parameter: SweptParameter::PMaxDb,
                range: SweepRange {
                    start_db: 0.0,
                    stop_db: 60.0,
                    points: 31,
                },
                curves,
                mc: McSpec::default(),
            }
        }
        other => bail!(
            "unknown figure preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ),
    };
    spec.check()?;
    Ok(spec)
}
