//! Exponential-polynomial expansion of the selected-gain CDF.
//!
//! For TAS/MRC the gain CDF is P(N, x)^M with x = z/x̄. Writing
//! P(N, x) = 1 − e^{-x} Σ_{j<N} x^j/j! and expanding both the binomial and
//! the multinomial power gives
//!
//! ```text
//! F(x) = Σ_k Σ_{k ≥ p_1 ≥ … ≥ p_{N-1} ≥ 0} c(k, p) · x^φ · e^{-k x},   φ = p_1 + … + p_{N-1}
//! c(k, p) = C(M,k) (-1)^k k! / [ Π_{t=0}^{N-1} (p_t - p_{t+1})! · Π_{t=1}^{N-1} (t!)^{p_t - p_{t+1}} ]
//! ```
//!
//! with p_0 = k and p_N = 0. TAS/SC is the single-index binomial
//! (1 − e^{-x})^{NM}.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dd::{DoubleDouble, Real};
use crate::error::{OutageError, Result};
use crate::model::DiversityScheme;

use super::gain_cdf_direct;

/// Above this cancellation ratio the f64 sum is recomputed in double-double.
pub const EXTENDED_PRECISION_SWITCH: f64 = 1e6;
/// Above this ratio even the double-double sum is rejected. Each term carries
/// a relative error below about 4e-31, so accepted sums keep ~9 digits.
pub const EXTENDED_PRECISION_LIMIT: f64 = 1e21;

/// Largest m·n accepted for TAS/MRC by default; 8×8 has C(16, 8) = 12870 terms.
pub const DEFAULT_MAX_PRODUCT: u32 = 64;

/// One signed term of the expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    /// Binomial index: the term carries e^{-k x}.
    pub k: u32,
    /// Nested multinomial indices p_1 ≥ … ≥ p_{N-1}; empty for TAS/SC.
    pub p: Vec<u32>,
    /// Polynomial exponent.
    pub phi: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesCap {
    pub max_product: u32,
}

impl Default for SeriesCap {
    fn default() -> Self {
        Self {
            max_product: DEFAULT_MAX_PRODUCT,
        }
    }
}

/// Terms sharing (k, φ), with the weight also kept in double-double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TermGroup {
    pub k: u32,
    pub phi: u32,
    pub weight: DoubleDouble,
}

/// Precision a series sum was finally evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    DoubleDouble,
}

/// Value of a signed series together with its cancellation ratio Σ|t|/|Σt|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub guard: f64,
    pub precision: Precision,
}

pub fn series_terms(m: u32, n: u32, scheme: DiversityScheme) -> Result<Vec<SeriesTerm>> {
    series_terms_with_cap(m, n, scheme, SeriesCap::default())
}

pub fn series_terms_with_cap(
    m: u32,
    n: u32,
    scheme: DiversityScheme,
    cap: SeriesCap,
) -> Result<Vec<SeriesTerm>> {
    Ok(enumerate(m, n, scheme, cap)?
        .into_iter()
        .map(|(t, _)| t)
        .collect())
}

fn factorial_dd(n: u32) -> DoubleDouble {
    (2..=n).fold(DoubleDouble::ONE, |acc, j| {
        acc * DoubleDouble::from_f64(j as f64)
    })
}

fn binomial_dd(n: u32, k: u32) -> DoubleDouble {
    let k = k.min(n - k);
    let mut acc = DoubleDouble::ONE;
    for j in 0..k {
        acc = acc * DoubleDouble::from_f64((n - j) as f64) / DoubleDouble::from_f64((j + 1) as f64);
    }
    acc
}

fn enumerate(
    m: u32,
    n: u32,
    scheme: DiversityScheme,
    cap: SeriesCap,
) -> Result<Vec<(SeriesTerm, DoubleDouble)>> {
    if m == 0 || n == 0 {
        return Err(OutageError::Domain(format!(
            "antenna counts must be >= 1, got {m}x{n}"
        )));
    }
    let mut out = Vec::new();
    match scheme {
        DiversityScheme::TasSc => {
            let total = m * n;
            for k in 0..=total {
                let mut w = binomial_dd(total, k);
                if k % 2 == 1 {
                    w = -w;
                }
                out.push((
                    SeriesTerm {
                        k,
                        p: Vec::new(),
                        phi: 0,
                        weight: w.to_f64(),
                    },
                    w,
                ));
            }
        }
        DiversityScheme::TasMrc => {
            if m.saturating_mul(n) > cap.max_product {
                return Err(OutageError::SeriesTooLarge {
                    m,
                    n,
                    cap: cap.max_product,
                });
            }
            let fact: Vec<DoubleDouble> = (0..=m.max(n)).map(factorial_dd).collect();
            for k in 0..=m {
                let mut head = binomial_dd(m, k) * fact[k as usize];
                if k % 2 == 1 {
                    head = -head;
                }
                let mut p = vec![0u32; (n - 1) as usize];
                loop {
                    // p_0 = k, p_N = 0
                    let at = |t: usize| -> u32 {
                        if t == 0 {
                            k
                        } else if t == n as usize {
                            0
                        } else {
                            p[t - 1]
                        }
                    };
                    let mut denom = DoubleDouble::ONE;
                    for t in 0..n as usize {
                        let count = at(t) - at(t + 1);
                        denom = denom * fact[count as usize] * fact[t].powi(count);
                    }
                    let w = head / denom;
                    let phi = p.iter().sum();
                    out.push((
                        SeriesTerm {
                            k,
                            p: p.clone(),
                            phi,
                            weight: w.to_f64(),
                        },
                        w,
                    ));
                    if !advance(&mut p, k) {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Next nonincreasing vector bounded by `k`, ordered so the last index moves fastest.
fn advance(p: &mut [u32], k: u32) -> bool {
    for i in (0..p.len()).rev() {
        let bound = if i == 0 { k } else { p[i - 1] };
        if p[i] < bound {
            p[i] += 1;
            for later in p.iter_mut().skip(i + 1) {
                *later = 0;
            }
            return true;
        }
    }
    false
}

/// A validated expansion ready for evaluation.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    m: u32,
    n: u32,
    scheme: DiversityScheme,
    terms: Vec<SeriesTerm>,
    groups: Vec<TermGroup>,
}

impl SeriesExpansion {
    /// Builds the expansion; for m, n ≤ 4 it must also pass the
    /// reconstruction check against the direct CDF before it is returned.
    pub fn new(m: u32, n: u32, scheme: DiversityScheme) -> Result<Self> {
        Self::with_cap(m, n, scheme, SeriesCap::default())
    }

    pub fn with_cap(m: u32, n: u32, scheme: DiversityScheme, cap: SeriesCap) -> Result<Self> {
        let raw = enumerate(m, n, scheme, cap)?;
        let mut by_key: Vec<TermGroup> = Vec::new();
        for (term, w) in &raw {
            match by_key
                .iter_mut()
                .find(|g| g.k == term.k && g.phi == term.phi)
            {
                Some(g) => g.weight = g.weight + *w,
                None => by_key.push(TermGroup {
                    k: term.k,
                    phi: term.phi,
                    weight: *w,
                }),
            }
        }
        by_key.sort_by_key(|g| (g.k, g.phi));
        let expansion = Self {
            m,
            n,
            scheme,
            terms: raw.into_iter().map(|(t, _)| t).collect(),
            groups: by_key,
        };
        if m <= 4 && n <= 4 {
            let err = expansion.max_reconstruction_error(64)?;
            if !(err <= 1e-9) {
                return Err(OutageError::SeriesGate(format!(
                    "{m}x{n} {scheme}: max relative error {err:.3e} against the direct CDF"
                )));
            }
        }
        Ok(expansion)
    }

    /// Shared, lazily built expansion for the default cap.
    pub fn cached(m: u32, n: u32, scheme: DiversityScheme) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(u32, u32, DiversityScheme), Arc<SeriesExpansion>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().unwrap().get(&(m, n, scheme)) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(Self::new(m, n, scheme)?);
        cache
            .lock()
            .unwrap()
            .insert((m, n, scheme), Arc::clone(&built));
        Ok(built)
    }

    /// Copy with every grouped weight scaled by `1 + (-1)^k·rel`. Only for
    /// exercising downstream validation gates; skips the reconstruction check.
    #[doc(hidden)]
    pub fn corrupted(&self, rel: f64) -> Self {
        let mut out = self.clone();
        for g in &mut out.groups {
            let sign = if g.k % 2 == 0 { 1.0 } else { -1.0 };
            g.weight = g.weight * DoubleDouble::from_f64(1.0 + sign * rel);
        }
        out
    }

    pub fn dims(&self) -> (u32, u32, DiversityScheme) {
        (self.m, self.n, self.scheme)
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub(crate) fn groups(&self) -> &[TermGroup] {
        &self.groups
    }

    /// Largest polynomial exponent in the expansion.
    pub fn max_phi(&self) -> u32 {
        self.groups.iter().map(|g| g.phi).max().unwrap_or(0)
    }

    fn reconstruct_in<T: Real>(&self, x: f64) -> (f64, f64) {
        let xt = T::of(x);
        let terms = self
            .groups
            .iter()
            .map(|g| T::from_dd(g.weight) * xt.powi(g.phi) * (-(T::of(g.k as f64) * xt)).exp());
        T::sum_with_magnitude(terms)
    }

    /// Σ c·x^φ·e^{-kx} at normalized gain `x = z/x̄`, escalating to
    /// double-double when cancellation demands it.
    pub fn reconstruct(&self, x: f64) -> Result<SeriesValue> {
        evaluate_escalating(|precision| match precision {
            Precision::Double => self.reconstruct_in::<f64>(x),
            Precision::DoubleDouble => self.reconstruct_in::<DoubleDouble>(x),
        })
    }

    /// Max relative deviation from the direct CDF over `count` probe points.
    pub fn max_reconstruction_error(&self, count: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in probe_points(self.m, self.n, self.scheme, count)? {
            let direct = gain_cdf_direct(x, self.m, self.n, 1.0, self.scheme)?;
            let series = self.reconstruct(x)?.value;
            worst = worst.max(((series - direct) / direct).abs());
        }
        Ok(worst)
    }
}

/// Runs `eval` in f64, redoing it in double-double when the cancellation
/// ratio passes [`EXTENDED_PRECISION_SWITCH`].
pub(crate) fn evaluate_escalating(
    mut eval: impl FnMut(Precision) -> (f64, f64),
) -> Result<SeriesValue> {
    let guard_of = |(total, mag): (f64, f64)| if mag == 0.0 { 1.0 } else { mag / total.abs() };
    let fast = eval(Precision::Double);
    let guard = guard_of(fast);
    if guard <= EXTENDED_PRECISION_SWITCH {
        return Ok(SeriesValue {
            value: fast.0,
            guard,
            precision: Precision::Double,
        });
    }
    let slow = eval(Precision::DoubleDouble);
    let guard = guard_of(slow);
    if guard <= EXTENDED_PRECISION_LIMIT {
        Ok(SeriesValue {
            value: slow.0,
            guard,
            precision: Precision::DoubleDouble,
        })
    } else {
        Err(OutageError::NumericalQuality { guard })
    }
}

/// `count` log-spaced normalized gains spanning direct-CDF values from 1e-12
/// up to 1 − 1e-9.
pub fn probe_points(m: u32, n: u32, scheme: DiversityScheme, count: usize) -> Result<Vec<f64>> {
    let cdf = |x: f64| gain_cdf_direct(x, m, n, 1.0, scheme);
    let lo = bisect_quantile(&cdf, |f| f >= 1e-12)?;
    let hi = bisect_quantile(&cdf, |f| f >= 1.0 - 1e-9)?;
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| {
            let t = if count == 1 {
                0.0
            } else {
                i as f64 / (count - 1) as f64
            };
            (llo + t * (lhi - llo)).exp()
        })
        .collect())
}

fn bisect_quantile(
    cdf: &impl Fn(f64) -> Result<f64>,
    reached: impl Fn(f64) -> bool,
) -> Result<f64> {
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    while !reached(cdf(hi)?) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if reached(cdf(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-12 {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use DiversityScheme::*;

    fn summary(terms: &[SeriesTerm]) -> Vec<(u32, Vec<u32>, u32, f64)> {
        terms
            .iter()
            .map(|t| (t.k, t.p.clone(), t.phi, t.weight))
            .collect()
    }

    #[test]
    fn single_antenna_expansion() {
        let t = series_terms(1, 1, TasMrc).unwrap();
        assert_eq!(summary(&t), vec![(0, vec![], 0, 1.0), (1, vec![], 0, -1.0)]);
    }

    #[test]
    fn one_by_two_mrc_matches_hand_expansion() {
        // 1 − e^{-z}(1 + z)
        let t = series_terms(1, 2, TasMrc).unwrap();
        assert_eq!(
            summary(&t),
            vec![
                (0, vec![0], 0, 1.0),
                (1, vec![0], 0, -1.0),
                (1, vec![1], 1, -1.0)
            ]
        );
    }

    #[test]
    fn two_by_one_sc_is_binomial() {
        let t = series_terms(2, 1, TasSc).unwrap();
        let got: Vec<(u32, u32, f64)> = t.iter().map(|t| (t.k, t.phi, t.weight)).collect();
        assert_eq!(got, vec![(0, 0, 1.0), (1, 0, -2.0), (2, 0, 1.0)]);
    }

    #[test]
    fn indices_are_nonincreasing_and_phi_is_their_sum() {
        for term in series_terms(3, 4, TasMrc).unwrap() {
            assert_eq!(term.p.len(), 3);
            assert!(term.p[0] <= term.k);
            assert!(term.p.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(term.phi, term.p.iter().sum::<u32>());
        }
    }

    #[test]
    fn term_count_is_central_binomial() {
        // Σ_k C(k+N-1, N-1) = C(M+N, N)
        assert_eq!(series_terms(8, 8, TasMrc).unwrap().len(), 12_870);
        assert_eq!(series_terms(2, 3, TasMrc).unwrap().len(), 10);
    }

    #[test]
    fn weights_vanish_at_zero_gain() {
        // F(0) = 0 means Σ_{φ=0} c = 0.
        for (m, n) in [(1, 1), (2, 2), (3, 4), (8, 8)] {
            let e = SeriesExpansion::cached(m, n, TasMrc).unwrap();
            let s: f64 = e
                .groups()
                .iter()
                .filter(|g| g.phi == 0)
                .map(|g| g.weight.to_f64())
                .sum();
            assert!(s.abs() < 1e-12, "{m}x{n}: {s}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = series_terms(9, 8, TasMrc).unwrap_err();
        assert!(matches!(
            err,
            OutageError::SeriesTooLarge {
                m: 9,
                n: 8,
                cap: 64
            }
        ));
        let tight = SeriesCap { max_product: 4 };
        assert!(series_terms_with_cap(2, 3, TasMrc, tight).is_err());
        assert!(series_terms_with_cap(9, 9, TasSc, tight).is_ok());
    }

    #[test]
    fn zero_antennas_rejected() {
        assert!(matches!(
            series_terms(0, 2, TasMrc),
            Err(OutageError::Domain(_))
        ));
    }

    #[test]
    fn corrupted_expansion_disagrees() {
        let e = SeriesExpansion::new(2, 2, TasMrc).unwrap();
        let bad = e.corrupted(1e-3);
        assert!(bad.max_reconstruction_error(16).unwrap() > 1e-6);
    }

    #[test]
    fn escalates_on_cancellation() {
        let e = SeriesExpansion::cached(4, 4, TasMrc).unwrap();
        let x = probe_points(4, 4, TasMrc, 2).unwrap()[0];
        let v = e.reconstruct(x).unwrap();
        assert_eq!(v.precision, Precision::DoubleDouble);
        assert!(v.guard > EXTENDED_PRECISION_SWITCH);
    }
}
