//! Three-way check of a sweep: closed form against the quadrature oracle,
//! Monte Carlo against the analytic value, and asymptotes against the exact
//! outage in their regime.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use underlay_core::analytic::{combine_hops, e2e_outage_quadrature, hop_sndr_cdf_with, HopCdf};
use underlay_core::{
    estimate_outage, AsymptoticRegime, ConstantVariant, OutageError, SeriesExpansion, SystemConfig,
};

use crate::spec::{CurveSpec, SweepSpec};
use crate::sweep::{
    asymptote, grid_indices, in_pool, mc_trials, point_seed, regime_for, validate_points,
    CurvePoint, McPoint, RunOptions,
};

/// Closed form vs. quadrature, relative, on points with F ≥ [`COMPARE_FLOOR`].
pub const CLOSED_FORM_TOL: f64 = 1e-6;
pub const COMPARE_FLOOR: f64 = 1e-12;
/// MC points may miss the 3σ band at most this often.
pub const MC_MISS_FRACTION: f64 = 0.05;
pub const FLOOR_TOL: f64 = 1e-3;
/// p_max / w at which the outage floor is checked.
pub const FLOOR_PROBE_RATIO: f64 = 1e6;
pub const HIGH_GAIN_TOL: f64 = 0.02;
/// The high-gain form is checked once the exact outage is at most this.
pub const HIGH_GAIN_ONSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    pub run: Option<RunOptions>,
    /// Scales series weights by (1 + δ) with alternating sign; a negative control.
    pub corrupt_series: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub curve: String,
    pub sweep_db: f64,
    pub closed_form: Result<f64, String>,
    pub quadrature: Result<f64, String>,
    /// |closed − quadrature| / quadrature when both exist and F ≥ [`COMPARE_FLOOR`].
    pub rel_error: Option<f64>,
    pub mc: Option<McPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteCheck {
    pub curve: String,
    pub regime: AsymptoticRegime,
    pub variant: ConstantVariant,
    /// Configuration value (dB) of the probe: p_max for the floor, x̄ for the high-gain form.
    pub probe_db: f64,
    pub exact: f64,
    pub asymptotic: f64,
    pub tolerance: f64,
}

impl AsymptoteCheck {
    pub fn ratio(&self) -> f64 {
        self.asymptotic / self.exact
    }

    pub fn passes(&self) -> bool {
        (self.ratio() - 1.0).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub rows: Vec<CurvePoint>,
    pub points: Vec<PointCheck>,
    pub asymptotes: Vec<AsymptoteCheck>,
    pub variant: ConstantVariant,
    pub gates: Vec<Gate>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.points
            .iter()
            .filter_map(|p| p.rel_error)
            .fold(0.0, f64::max)
    }

    /// (points with MC, points whose MC estimate misses analytic ± 3σ).
    pub fn mc_misses(&self) -> (usize, usize) {
        let mut total = 0;
        let mut missed = 0;
        for (p, row) in self.points.iter().zip(&self.rows) {
            if let (Some(m), Some(a)) = (p.mc, row.analytic) {
                total += 1;
                if (m.estimate - a).abs() > 3.0 * m.stderr {
                    missed += 1;
                }
            }
        }
        (total, missed)
    }
}

struct Evaluator {
    corrupted: Option<f64>,
}

impl Evaluator {
    fn expansion(
        &self,
        cfg: &SystemConfig,
        hop: usize,
    ) -> Result<Arc<SeriesExpansion>, OutageError> {
        let h = cfg.hops()[hop];
        let e = SeriesExpansion::cached(h.m_tx, h.n_rx, cfg.scheme)?;
        Ok(match self.corrupted {
            None => e,
            Some(rel) => Arc::new(e.corrupted(rel)),
        })
    }

    fn closed_form(&self, cfg: &SystemConfig) -> Result<f64, OutageError> {
        let mut f = [0.0; 2];
        for (i, slot) in f.iter_mut().enumerate() {
            let e = self.expansion(cfg, i)?;
            let r: HopCdf = hop_sndr_cdf_with(
                &e,
                cfg.gamma_th,
                cfg.hops()[i],
                cfg.primary_antennas,
                cfg.p_max,
            )?;
            *slot = r.value;
        }
        Ok(combine_hops(f[0], f[1]))
    }
}

fn check_point(
    spec: &SweepSpec,
    opts: &RunOptions,
    eval: &Evaluator,
    c: usize,
    p: usize,
    v: f64,
) -> (CurvePoint, PointCheck) {
    let curve = &spec.curves[c];
    let cfg = spec.point_config(curve, v);
    let closed = eval.closed_form(&cfg).map_err(|e| e.to_string());
    let quad = e2e_outage_quadrature(cfg.gamma_th, &cfg).map_err(|e| e.to_string());
    let (analytic, status) = match (&closed, &quad) {
        (Ok(c), _) => (Some(*c), "closed_form".to_string()),
        (Err(_), Ok(q)) => (Some(*q), "quadrature".to_string()),
        (Err(e), Err(_)) => (None, format!("error: {e}")),
    };
    let rel_error = match (&closed, &quad) {
        (Ok(c), Ok(q)) if *q >= COMPARE_FLOOR => Some(((c - q) / q).abs()),
        _ => None,
    };
    let mc = analytic
        .filter(|_| opts.mc_enabled)
        .and_then(|a| mc_trials(a, opts.trials))
        .and_then(|trials| {
            estimate_outage(&cfg, trials, point_seed(opts.seed, c, p))
                .ok()
                .map(|m| McPoint {
                    estimate: m.estimate,
                    stderr: m.stderr,
                    trials,
                })
        });
    let asymptotic =
        regime_for(spec.swept_parameter).and_then(|r| asymptote(&cfg, r, opts.variant));
    let row = CurvePoint {
        curve: curve.label.clone(),
        sweep_db: v,
        analytic,
        asymptotic,
        mc,
        status,
    };
    let check = PointCheck {
        curve: curve.label.clone(),
        sweep_db: v,
        closed_form: closed,
        quadrature: quad,
        rel_error,
        mc,
    };
    (row, check)
}

fn exact_outage(cfg: &SystemConfig) -> Option<f64> {
    underlay_core::e2e_outage_robust(cfg.gamma_th, cfg)
        .ok()
        .map(|e| e.value)
}

fn asymptote_checks(
    spec: &SweepSpec,
    curve: &CurveSpec,
    rows: &[&CurvePoint],
) -> Vec<AsymptoteCheck> {
    let variants = [ConstantVariant::Derived, ConstantVariant::Printed];
    let mut out = Vec::new();
    let mut push = |cfg: &SystemConfig, regime, probe_db, exact: f64, tolerance| {
        for variant in variants {
            if let Some(a) = asymptote(cfg, regime, variant) {
                out.push(AsymptoteCheck {
                    curve: curve.label.clone(),
                    regime,
                    variant,
                    probe_db,
                    exact,
                    asymptotic: a,
                    tolerance,
                });
            }
        }
    };
    match regime_for(spec.swept_parameter) {
        Some(AsymptoticRegime::HighPmax) => {
            let mut cfg = spec.curve_config(curve);
            cfg.p_max = FLOOR_PROBE_RATIO
                * cfg
                    .hop1
                    .interference_threshold
                    .max(cfg.hop2.interference_threshold);
            if let Some(exact) = exact_outage(&cfg) {
                push(
                    &cfg,
                    AsymptoticRegime::HighPmax,
                    10.0 * cfg.p_max.log10(),
                    exact,
                    FLOOR_TOL,
                );
            }
        }
        Some(AsymptoticRegime::HighPmaxAndGain) => {
            let mut probes: Vec<f64> = rows
                .iter()
                .filter(|r| r.analytic.is_some_and(|a| a > 0.0 && a <= HIGH_GAIN_ONSET))
                .map(|r| r.sweep_db)
                .collect();
            // Extend past the grid when it never reaches the regime.
            let mut v = spec.range.stop_db;
            while probes.is_empty() && v < spec.range.stop_db + 100.0 {
                v += 10.0;
                let cfg = spec.point_config(curve, v);
                if exact_outage(&cfg).is_some_and(|a| a > 0.0 && a <= HIGH_GAIN_ONSET) {
                    probes.push(v);
                }
            }
            for v in probes {
                let cfg = spec.point_config(curve, v);
                if let Some(exact) = exact_outage(&cfg) {
                    push(
                        &cfg,
                        AsymptoticRegime::HighPmaxAndGain,
                        v,
                        exact,
                        HIGH_GAIN_TOL,
                    );
                }
            }
        }
        None => {}
    }
    out
}

fn gates(outcome: &ValidationOutcome, mc_enabled: bool) -> Vec<Gate> {
    let mut gates = Vec::new();
    let compared = outcome
        .points
        .iter()
        .filter(|p| p.rel_error.is_some())
        .count();
    let unusable: Vec<&PointCheck> = outcome
        .points
        .iter()
        .filter(|p| {
            p.closed_form.is_err() && p.quadrature.as_ref().is_ok_and(|q| *q >= COMPARE_FLOOR)
        })
        .collect();
    let max_err = outcome.max_rel_error();
    gates.push(Gate {
        name: "closed_form_vs_quadrature".into(),
        passed: max_err <= CLOSED_FORM_TOL && unusable.is_empty(),
        detail: format!(
            "max relative error {max_err:.3e} over {compared} points (tolerance {CLOSED_FORM_TOL:e}); closed form unusable at {} points",
            unusable.len()
        ),
    });
    if mc_enabled {
        let (total, missed) = outcome.mc_misses();
        gates.push(Gate {
            name: "mc_within_3_stderr".into(),
            passed: (missed as f64) <= MC_MISS_FRACTION * total as f64,
            detail: format!("{missed} of {total} MC points outside 3 stderr"),
        });
    }
    let selected: Vec<&AsymptoteCheck> = outcome
        .asymptotes
        .iter()
        .filter(|a| a.variant == outcome.variant)
        .collect();
    if !selected.is_empty() {
        let failing = selected.iter().filter(|a| !a.passes()).count();
        let worst = selected
            .iter()
            .map(|a| (a.ratio() - 1.0).abs())
            .fold(0.0, f64::max);
        gates.push(Gate {
            name: format!("asymptote_convergence_{}", variant_name(outcome.variant)),
            passed: failing == 0,
            detail: format!(
                "{failing} of {} probes outside tolerance; worst |ratio - 1| = {worst:.3e}",
                selected.len()
            ),
        });
    }
    gates
}

pub fn variant_name(v: ConstantVariant) -> &'static str {
    match v {
        ConstantVariant::Derived => "derived",
        ConstantVariant::Printed => "printed",
    }
}

fn regime_name(r: AsymptoticRegime) -> &'static str {
    match r {
        AsymptoticRegime::HighPmax => "floor",
        AsymptoticRegime::HighPmaxAndGain => "high_gain",
    }
}

pub fn validate_mode(
    spec: &SweepSpec,
    opts: &ValidateOptions,
) -> anyhow::Result<ValidationOutcome> {
    validate_points(spec)?;
    let run = opts.run.unwrap_or_else(|| RunOptions::from_spec(spec));
    let eval = Evaluator {
        corrupted: opts.corrupt_series,
    };
    let jobs = grid_indices(spec);
    let (rows, points): (Vec<CurvePoint>, Vec<PointCheck>) = in_pool(run.workers, || {
        jobs.par_iter()
            .map(|&(c, p, v)| check_point(spec, &run, &eval, c, p, v))
            .unzip()
    })?;
    let asymptotes = in_pool(run.workers, || {
        spec.curves
            .par_iter()
            .flat_map_iter(|curve| {
                let own: Vec<&CurvePoint> =
                    rows.iter().filter(|r| r.curve == curve.label).collect();
                asymptote_checks(spec, curve, &own)
            })
            .collect()
    })?;
    let mut outcome = ValidationOutcome {
        rows,
        points,
        asymptotes,
        variant: run.variant,
        gates: Vec::new(),
    };
    outcome.gates = gates(&outcome, run.mc_enabled);
    Ok(outcome)
}

impl fmt::Display for ValidationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points: {}", self.points.len())?;
        let fallback = self
            .points
            .iter()
            .filter(|p| p.closed_form.is_err())
            .count();
        writeln!(
            f,
            "max |closed - quadrature| / quadrature: {:.3e}",
            self.max_rel_error()
        )?;
        writeln!(f, "closed form unavailable: {fallback} points")?;
        let (total, missed) = self.mc_misses();
        writeln!(f, "mc points: {total}, outside 3 stderr: {missed}")?;
        if !self.asymptotes.is_empty() {
            writeln!(f, "asymptote ratios (asymptotic / exact):")?;
            for a in &self.asymptotes {
                writeln!(
                    f,
                    "  {:<24} {:<9} {:<7} at {:>7.2} dB: {:.6} [{}]",
                    a.curve,
                    regime_name(a.regime),
                    variant_name(a.variant),
                    a.probe_db,
                    a.ratio(),
                    if a.passes() { "ok" } else { "off" }
                )?;
            }
        }
        for g in &self.gates {
            writeln!(
                f,
                "[{}] {}: {}",
                if g.passed { "PASS" } else { "FAIL" },
                g.name,
                g.detail
            )?;
        }
        Ok(())
    }
}
