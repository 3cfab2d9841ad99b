mod common;

use common::hop;
use underlay_core::asymptotic::{
    array_order, diversity_order, e2e_outage_asymptotic_variant, hop_cdf_high_pmax,
    hop_cdf_high_pmax_and_gain, hop_cdf_high_pmax_and_gain_variant, hop_cdf_high_pmax_variant,
    loglog_slope, mrc_sc_gain, SymmetricSystem,
};
use underlay_core::{
    e2e_outage_robust, hop_sndr_cdf_robust, AsymptoticRegime, ConstantVariant, DiversityScheme,
    SystemConfig,
};
use DiversityScheme::*;

fn exact(
    gamma: f64,
    h: &underlay_core::HopConfig,
    t_p: u32,
    p_max: f64,
    s: DiversityScheme,
) -> f64 {
    hop_sndr_cdf_robust(gamma, h, t_p, p_max, s).unwrap().value
}

#[test]
fn floor_is_the_large_power_limit() {
    for (h, t_p, s) in [
        (hop(2, 2, 2.5, 1.3, 2.0, 0.15), 2, TasMrc),
        (hop(2, 2, 2.5, 1.3, 2.0, 0.15), 2, TasSc),
        (hop(1, 3, 1.0, 0.5, 6.0, 0.0), 1, TasMrc),
        (hop(3, 1, 4.0, 2.0, 1.0, 0.1), 3, TasSc),
    ] {
        let floor = hop_cdf_high_pmax(2.0, &h, t_p, s).unwrap();
        let mut last = f64::INFINITY;
        for p_max in [1e2, 1e4, 1e6, 1e8] {
            let dev =
                (exact(2.0, &h, t_p, p_max * h.interference_threshold, s) / floor - 1.0).abs();
            assert!(
                dev <= last + 1e-12,
                "{h:?}: deviation grew to {dev} at {p_max}"
            );
            last = dev;
        }
        assert!(last < 1e-6, "{h:?}: {last}");
    }
}

#[test]
fn high_gain_form_converges_with_rate_one_over_mean_gain() {
    let t_p = 1;
    for s in [TasMrc, TasSc] {
        let mut devs = Vec::new();
        for x_db in [30.0, 40.0, 50.0] {
            let h = hop(2, 1, 10f64.powf(x_db / 10.0), 1.3, 4.0, 0.1);
            let lead = hop_cdf_high_pmax_and_gain(2.0, &h, t_p, s).unwrap();
            let f = exact(2.0, &h, t_p, 1e12, s);
            devs.push((f / lead - 1.0).abs());
        }
        assert!(devs[2] < 2e-3, "{s:?}: {devs:?}");
        for pair in devs.windows(2) {
            let shrink = pair[0] / pair[1];
            assert!((8.0..12.5).contains(&shrink), "{s:?}: {devs:?}");
        }
    }
}

#[test]
fn printed_constants_differ_by_the_interference_normalization() {
    let ybar: f64 = 1.7;
    let h = hop(2, 2, 3.0, ybar, 2.0, 0.05);
    for t_p in 1..=3u32 {
        let gamma_tp: f64 = (1..t_p).map(f64::from).product();
        for s in [TasMrc, TasSc] {
            let d = hop_cdf_high_pmax_variant(1.5, &h, t_p, s, ConstantVariant::Derived).unwrap();
            let p = hop_cdf_high_pmax_variant(1.5, &h, t_p, s, ConstantVariant::Printed).unwrap();
            assert!((p / d - gamma_tp).abs() < 1e-12 * gamma_tp);
            let d = hop_cdf_high_pmax_and_gain_variant(1.5, &h, t_p, s, ConstantVariant::Derived)
                .unwrap();
            let p = hop_cdf_high_pmax_and_gain_variant(1.5, &h, t_p, s, ConstantVariant::Printed)
                .unwrap();
            let expected = ybar.powi(t_p as i32) * gamma_tp;
            assert!((p / d - expected).abs() < 1e-12 * expected);
        }
    }
}

#[test]
fn printed_high_gain_form_misses_the_limit_with_three_primary_antennas() {
    let h = hop(2, 1, 1e6, 1.0, 4.0, 0.0);
    let cfg = SystemConfig::symmetric(h, 3, 1e14, TasMrc, 2.0);
    let f = e2e_outage_robust(2.0, &cfg).unwrap().value;
    let value = |v| {
        e2e_outage_asymptotic_variant(2.0, &cfg, AsymptoticRegime::HighPmaxAndGain, v)
            .unwrap()
            .value
    };
    assert!((f / value(ConstantVariant::Derived) - 1.0).abs() < 1e-3);
    assert!((f / value(ConstantVariant::Printed) - 0.5).abs() < 1e-3);
}

#[test]
fn slope_matches_diversity_order() {
    for (m, n, s) in [(2, 2, TasMrc), (2, 2, TasSc), (1, 3, TasMrc), (3, 1, TasSc)] {
        let xs: Vec<f64> = (0..=10).map(|i| 10f64.powf(3.0 + 0.1 * i as f64)).collect();
        let cfg_at = |x: f64| SystemConfig::symmetric(hop(m, n, x, 1.3, 4.0, 0.1), 1, 1e12, s, 2.0);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| e2e_outage_robust(2.0, &cfg_at(x)).unwrap().value)
            .collect();
        let slope = loglog_slope(&xs, &ys);
        let d = diversity_order(&cfg_at(1.0)) as f64;
        assert!((slope + d).abs() < 0.05, "{m}x{n} {s:?}: slope {slope}");
    }
}

#[test]
fn combining_gain_does_not_depend_on_impairments() {
    for t in 1..=6u32 {
        let ratios: Vec<f64> = [0.0, 0.05, 0.1, 0.2]
            .iter()
            .map(|&k| {
                let cfg =
                    SystemConfig::symmetric(hop(t, t, 1.0, 1.3, 4.0, k), 2, 10.0, TasMrc, 2.0);
                let sym = SymmetricSystem::from_config(&cfg).unwrap();
                array_order(&sym, TasMrc) / array_order(&sym, TasSc)
            })
            .collect();
        let expected = mrc_sc_gain(t, t);
        for r in &ratios {
            assert!((r / expected - 1.0).abs() < 1e-14, "T={t}: {ratios:?}");
        }
    }
    let factorial = |m: u32| (1..=m).map(f64::from).product::<f64>();
    for m in 1..=8u32 {
        let direct = (factorial(m - 1) * m as f64).powf(1.0 / m as f64);
        assert!((mrc_sc_gain(m, m + 2) / direct - 1.0).abs() < 1e-13);
    }
}

#[test]
fn asymptote_refuses_gamma_at_ceiling() {
    let h = hop(2, 2, 1.0, 1.0, 1.0, 0.2);
    assert!(hop_cdf_high_pmax(25.0, &h, 1, TasMrc).is_err());
    assert!(hop_cdf_high_pmax_and_gain(25.0, &h, 1, TasSc).is_err());
}
