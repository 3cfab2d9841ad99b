use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use underlay_core::{
    estimate_outage, hop_sndr_cdf, hop_sndr_cdf_quadrature, DiversityScheme, HopConfig,
    SeriesExpansion, SystemConfig,
};

fn hop(antennas: u32) -> HopConfig {
    HopConfig {
        m_tx: antennas,
        n_rx: antennas,
        mean_gain: 2.5,
        interference_mean_gain: 1.26,
        interference_threshold: 6.3,
        kappa_t: 0.15,
        kappa_r: 0.15,
        noise_psd: 1.0,
    }
}

fn hop_cdf(c: &mut Criterion) {
    let mut g = c.benchmark_group("hop_cdf");
    for antennas in [2, 8] {
        let h = hop(antennas);
        for scheme in [DiversityScheme::TasMrc, DiversityScheme::TasSc] {
            // warm the expansion cache so only evaluation is timed
            SeriesExpansion::cached(antennas, antennas, scheme).unwrap();
            g.bench_function(format!("closed_form {antennas}x{antennas} {scheme:?}"), |b| {
                b.iter(|| hop_sndr_cdf(black_box(6.3), &h, 1, black_box(100.0), scheme).unwrap())
            });
        }
    }
    let h = hop(2);
    g.bench_function("quadrature 2x2 TasMrc", |b| {
        b.iter(|| {
            hop_sndr_cdf_quadrature(black_box(6.3), &h, 1, 100.0, DiversityScheme::TasMrc)
                .unwrap()
        })
    });
    g.finish();
}

fn series_build(c: &mut Criterion) {
    c.bench_function("expansion 8x8 TasMrc", |b| {
        b.iter(|| SeriesExpansion::new(black_box(8), 8, DiversityScheme::TasMrc).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = SystemConfig::symmetric(hop(2), 1, 100.0, DiversityScheme::TasMrc, 6.3);
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("100k trials 2x2", |b| {
        b.iter(|| estimate_outage(&cfg, 100_000, black_box(1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, hop_cdf, series_build, monte_carlo);
criterion_main!(benches);
