//! Evaluates a [`SweepSpec`] point by point: analytic outage, the matching
//! asymptote and an optional Monte-Carlo estimate.

use anyhow::{bail, Context};
use rayon::prelude::*;
use underlay_core::analytic::{combine_hops, E2eOutage};
use underlay_core::asymptotic::{e2e_outage_asymptotic_variant, AsymptoticRegime};
use underlay_core::model::validate;
use underlay_core::{e2e_outage_robust, estimate_outage, ConstantVariant, Method, SystemConfig};

use crate::spec::{SweepSpec, SweptParameter};

/// Below this analytic outage the MC trial count is multiplied by [`MC_BOOST`].
pub const MC_BOOST_BELOW: f64 = 1e-4;
pub const MC_BOOST: u64 = 10;
/// Below this analytic outage MC is skipped.
pub const MC_SKIP_BELOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub curve: String,
    pub sweep_db: f64,
    /// Absent only when the evaluation failed; see `status`.
    pub analytic: Option<f64>,
    pub asymptotic: Option<f64>,
    pub mc: Option<McPoint>,
    pub status: String,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub variant: ConstantVariant,
    pub mc_enabled: bool,
    pub trials: u64,
    pub seed: u64,
}

impl RunOptions {
    pub fn from_spec(spec: &SweepSpec) -> Self {
        Self {
            workers: None,
            variant: ConstantVariant::Derived,
            mc_enabled: spec.mc.enabled,
            trials: spec.mc.trials,
            seed: spec.mc.seed,
        }
    }
}

/// Asymptote matching the swept parameter, if any.
pub fn regime_for(parameter: SweptParameter) -> Option<AsymptoticRegime> {
    match parameter {
        SweptParameter::PMaxDb => Some(AsymptoticRegime::HighPmax),
        SweptParameter::MeanGainDb => Some(AsymptoticRegime::HighPmaxAndGain),
        SweptParameter::GammaThDb | SweptParameter::WDb => None,
    }
}

/// End-to-end asymptote. The outage floor keeps the exact two-hop
/// combination of the hop floors; the high-gain form is the sum of the hop terms.
pub fn asymptote(
    cfg: &SystemConfig,
    regime: AsymptoticRegime,
    variant: ConstantVariant,
) -> Option<f64> {
    let a = e2e_outage_asymptotic_variant(cfg.gamma_th, cfg, regime, variant).ok()?;
    Some(match regime {
        AsymptoticRegime::HighPmax => combine_hops(a.hops[0], a.hops[1]),
        AsymptoticRegime::HighPmaxAndGain => a.value,
    })
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Ceiling => "ceiling",
        Method::ClosedForm => "closed_form",
        Method::ExtendedPrecision => "extended_precision",
        Method::Quadrature => "quadrature",
    }
}

/// Status of an end-to-end evaluation: `ceiling` if either hop is at its
/// SNDR ceiling, otherwise the most expensive method used.
pub fn status_of(e: &E2eOutage) -> &'static str {
    let rank = |m: Method| match m {
        Method::Ceiling => 3,
        Method::Quadrature => 2,
        Method::ExtendedPrecision => 1,
        Method::ClosedForm => 0,
    };
    let worst = if rank(e.hops[0].method) >= rank(e.hops[1].method) {
        e.hops[0].method
    } else {
        e.hops[1].method
    };
    method_label(worst)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// MC seed of grid point (`curve`, `point`) in a run seeded with `seed`.
pub fn point_seed(seed: u64, curve: usize, point: usize) -> u64 {
    mix(mix(seed) ^ mix(((curve as u64) << 32) | point as u64))
}

/// Trials to spend on a point with analytic outage `analytic`, or `None` to skip MC.
pub fn mc_trials(analytic: f64, base: u64) -> Option<u64> {
    if analytic < MC_SKIP_BELOW {
        None
    } else if analytic < MC_BOOST_BELOW {
        Some(base.saturating_mul(MC_BOOST))
    } else {
        Some(base)
    }
}

/// Checks every point's system before any work starts.
pub fn validate_points(spec: &SweepSpec) -> anyhow::Result<()> {
    spec.check()?;
    for curve in &spec.curves {
        for v in spec.grid() {
            let report = validate(&spec.point_config(curve, v));
            if report.has_violations() {
                bail!("curve {:?} at {v} dB: {report}", curve.label);
            }
        }
    }
    Ok(())
}

pub(crate) fn in_pool<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("starting worker pool")?;
            Ok(pool.install(job))
        }
    }
}

pub(crate) fn grid_indices(spec: &SweepSpec) -> Vec<(usize, usize, f64)> {
    let grid = spec.grid();
    spec.curves
        .iter()
        .enumerate()
        .flat_map(|(c, _)| grid.iter().enumerate().map(move |(p, &v)| (c, p, v)))
        .collect()
}

fn evaluate_point(
    spec: &SweepSpec,
    opts: &RunOptions,
    c: usize,
    p: usize,
    value_db: f64,
) -> CurvePoint {
    let curve = &spec.curves[c];
    let cfg = spec.point_config(curve, value_db);
    let asymptotic =
        regime_for(spec.swept_parameter).and_then(|r| asymptote(&cfg, r, opts.variant));
    let mut point = CurvePoint {
        curve: curve.label.clone(),
        sweep_db: value_db,
        analytic: None,
        asymptotic,
        mc: None,
        status: String::new(),
    };
    match e2e_outage_robust(cfg.gamma_th, &cfg) {
        Ok(e) => {
            point.analytic = Some(e.value);
            point.status = status_of(&e).to_string();
            if opts.mc_enabled {
                if let Some(trials) = mc_trials(e.value, opts.trials) {
                    match estimate_outage(&cfg, trials, point_seed(opts.seed, c, p)) {
                        Ok(m) => {
                            point.mc = Some(McPoint {
                                estimate: m.estimate,
                                stderr: m.stderr,
                                trials,
                            })
                        }
                        Err(err) => point.status = format!("{}; mc error: {err}", point.status),
                    }
                }
            }
        }
        Err(err) => point.status = format!("error: {err}"),
    }
    point
}

/// One [`CurvePoint`] per (curve, grid value), curve-major in grid order.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> anyhow::Result<Vec<CurvePoint>> {
    validate_points(spec)?;
    let jobs = grid_indices(spec);
    in_pool(opts.workers, || {
        jobs.par_iter()
            .map(|&(c, p, v)| evaluate_point(spec, opts, c, p, v))
            .collect()
    })
}
