//! Channel-level Monte-Carlo estimate of the end-to-end outage probability.
//!
//! Trials are split into fixed-size blocks. Block `b` draws from a ChaCha8
//! stream keyed by `(seed, b)`, and block counts are merged in block order, so
//! an estimate depends only on `(cfg, trials, seed)` and never on how many
//! worker threads ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::check_hop;
use crate::error::{OutageError, Result};
use crate::model::{DiversityScheme, HopConfig, SystemConfig};

pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub estimate: f64,
    /// Binomial standard error sqrt(p̂(1 − p̂)/trials).
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub outage_count: u64,
}

impl OutageEstimate {
    pub fn from_counts(outage_count: u64, trials: u64, seed: u64) -> Self {
        let estimate = outage_count as f64 / trials as f64;
        let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
        Self {
            estimate,
            stderr,
            trials,
            seed,
            outage_count,
        }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.stderr
    }
}

/// Exponential draw by inversion, −mean·ln(u) with u uniform on (0, 1].
#[inline]
pub fn sample_exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -mean * u.ln()
}

/// Aggregate gain toward a `t_p`-antenna primary receiver: a sum of `t_p`
/// exponential gains of mean `mean`.
pub fn sample_interference_gain<R: Rng + ?Sized>(t_p: u32, mean: f64, rng: &mut R) -> f64 {
    (0..t_p).map(|_| sample_exponential(mean, rng)).sum()
}

/// Desired-link gain after antenna selection and combining, from m·n fresh
/// exponential draws.
pub fn sample_hop_gain<R: Rng + ?Sized>(
    m: u32,
    n: u32,
    mean_gain: f64,
    scheme: DiversityScheme,
    rng: &mut R,
) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..m {
        let candidate = match scheme {
            DiversityScheme::TasMrc => (0..n).map(|_| sample_exponential(mean_gain, rng)).sum(),
            DiversityScheme::TasSc => (0..n)
                .map(|_| sample_exponential(mean_gain, rng))
                .fold(0.0, f64::max),
        };
        best = best.max(candidate);
    }
    best
}

/// pX / (pκ_T²X + n) for transmit power `p` and selected gain `x`.
#[inline]
pub fn sndr_from_gains(hop: &HopConfig, power: f64, gain: f64) -> f64 {
    let signal = power * gain;
    signal / (signal * hop.kappa_t * hop.kappa_t + hop.effective_noise())
}

/// One SNDR draw with the interference-capped power min(p_max, w/h²).
pub fn hop_sndr_sample<R: Rng + ?Sized>(
    hop: &HopConfig,
    t_p: u32,
    p_max: f64,
    scheme: DiversityScheme,
    rng: &mut R,
) -> f64 {
    let h2 = sample_interference_gain(t_p, hop.interference_mean_gain, rng);
    let power = p_max.min(hop.interference_threshold / h2);
    let gain = sample_hop_gain(hop.m_tx, hop.n_rx, hop.mean_gain, scheme, rng);
    sndr_from_gains(hop, power, gain)
}

/// The generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn count_block(cfg: &SystemConfig, seed: u64, block: u64, trials: u64) -> u64 {
    let mut rng = block_rng(seed, block);
    let t_p = cfg.primary_antennas;
    let mut outages = 0;
    for _ in 0..trials {
        let s1 = hop_sndr_sample(&cfg.hop1, t_p, cfg.p_max, cfg.scheme, &mut rng);
        let s2 = hop_sndr_sample(&cfg.hop2, t_p, cfg.p_max, cfg.scheme, &mut rng);
        if s1.min(s2) <= cfg.gamma_th {
            outages += 1;
        }
    }
    outages
}

fn check(cfg: &SystemConfig, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(OutageError::Domain("trials must be >= 1".into()));
    }
    check_hop(&cfg.hop1, cfg.primary_antennas)?;
    check_hop(&cfg.hop2, cfg.primary_antennas)?;
    if !(cfg.p_max > 0.0) || !(cfg.gamma_th >= 0.0) {
        return Err(OutageError::Domain(
            "p_max must be > 0 and gamma_th >= 0".into(),
        ));
    }
    Ok(())
}

/// Outage estimate at `cfg.gamma_th`, run on the current rayon pool.
pub fn estimate_outage(cfg: &SystemConfig, trials: u64, seed: u64) -> Result<OutageEstimate> {
    check(cfg, trials)?;
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let counts: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let size = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            count_block(cfg, seed, b, size)
        })
        .collect();
    Ok(OutageEstimate::from_counts(
        counts.iter().sum(),
        trials,
        seed,
    ))
}

/// As [`estimate_outage`] on a dedicated pool of `workers` threads.
pub fn estimate_outage_with_workers(
    cfg: &SystemConfig,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutageEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| OutageError::Contract(format!("cannot start worker pool: {e}")))?;
    pool.install(|| estimate_outage(cfg, trials, seed))
}
