use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use curlra::cross::select_columns;
use curlra::generate::{geometric_spectrum, low_rank, spsd_dense};
use curlra::hss::perturbed_nodes;
use curlra::linalg::random_gaussian;
use curlra::{
    brute_force_max_volume, build_hss, ca_iterations, cauchy_oracle, spsd_cur, CaConfig, EntryOracle, HssConfig,
    SpsdConfig,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spsd(c: &mut Criterion) {
    let mut group = c.benchmark_group("spsd_cur");
    for n in [256, 1024] {
        let w = spsd_dense(&geometric_spectrum(n, 0.7), &mut rng(1));
        for (label, k) in [("K=r", 8), ("K=2r-1", 15)] {
            let cfg = SpsdConfig::new(8, 0.1).with_gen_size(k);
            group.bench_with_input(BenchmarkId::new(label, n), &w, |b, w| {
                b.iter(|| spsd_cur(&EntryOracle::from_matrix(w.clone()), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn maxvol(c: &mut Criterion) {
    let mut group = c.benchmark_group("maxvol_columns");
    for q in [256, 2048] {
        let strip = random_gaussian(8, q, &mut rng(2));
        group.bench_with_input(BenchmarkId::from_parameter(q), &strip, |b, s| {
            b.iter(|| select_columns(s, 8, 8, None).unwrap())
        });
    }
    group.finish();
}

fn cross(c: &mut Criterion) {
    let w = low_rank(1000, 800, 6, &mut rng(3));
    let cfg = CaConfig::new(6, 4, 1e-8, 7).with_generator(8, 8);
    c.bench_function("ca_iterations/1000x800", |b| {
        b.iter(|| ca_iterations(&EntryOracle::from_matrix(w.clone()), &cfg).unwrap())
    });
}

fn hss(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_hss");
    group.sample_size(10);
    for n in [256, 512] {
        let cfg = HssConfig::new(32, 1e-8, 24, 1, 5);
        let (x, y) = perturbed_nodes(n, &mut rng(5));
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| build_hss(&cauchy_oracle(x.clone(), y.clone()).unwrap(), &cfg).unwrap())
        });
    }
    group.finish();
}

fn brute(c: &mut Criterion) {
    let w = random_gaussian(14, 14, &mut rng(4));
    c.bench_function("brute_force_max_volume/14x14_k3", |b| {
        b.iter(|| brute_force_max_volume(&w, 3, 3, 3).unwrap())
    });
}

criterion_group!(benches, spsd, maxvol, cross, hss, brute);
criterion_main!(benches);
