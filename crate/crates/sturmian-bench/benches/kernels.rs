use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sturmian::cf::{cf_expand, convergents, golden_enclosure, Frequency, GaussSampler};
use sturmian::coding::{count_words, enumerate_words, Start, DEFAULT_ENUMERATION_CAP};
use sturmian::dimension::{partition_log, solve_sn, CocycleSample};
use sturmian::dos::{band_eigen_counts, dos_masses_of_order, FiberSampler, PeriodicApproximant};
use sturmian::spectrum::{build_band_tree, chebyshev_family, traces};
use sturmian_bench::frequencies;

fn continued_fractions(c: &mut Criterion) {
    let mut g = c.benchmark_group("cf");
    let f = Frequency::periodic(vec![], vec![1, 2, 3]).unwrap();
    g.bench_function("convergents/1000", |b| {
        b.iter(|| convergents(black_box(&f), 1000).unwrap())
    });
    let (lo, _) = golden_enclosure(2048);
    g.bench_function("cf_expand/golden/200", |b| {
        b.iter(|| cf_expand(black_box(&lo), 200).unwrap())
    });
    g.bench_function("gauss_sample/200", |b| {
        b.iter(|| GaussSampler::new(7, black_box(3)).sample(200).unwrap())
    });
    g.finish();
}

fn coding(c: &mut Criterion) {
    let mut g = c.benchmark_group("coding");
    let levels: Vec<u32> = (0..200).map(|i| 1 + i % 4).collect();
    g.bench_function("count_words/200", |b| {
        b.iter(|| count_words(Start::Boundary, black_box(&levels), None))
    });
    let short: Vec<u32> = vec![1, 2, 1, 3, 1, 2, 1];
    g.bench_function("enumerate_words/7", |b| {
        b.iter(|| {
            enumerate_words(
                Start::Boundary,
                black_box(&short),
                None,
                DEFAULT_ENUMERATION_CAP,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    for (name, f) in frequencies() {
        g.bench_with_input(BenchmarkId::new("band_tree/depth6", name), &f, |b, f| {
            b.iter(|| build_band_tree(f, 24.0, 6).unwrap())
        });
    }
    let digits = vec![1u32; 30];
    let lambda = rug::Float::with_val(256, 24);
    let e = rug::Float::with_val(256, 1.5);
    g.bench_function("traces/30", |b| {
        b.iter(|| traces(black_box(&digits), &lambda, &e))
    });
    g.bench_function("chebyshev_family/50", |b| {
        b.iter(|| chebyshev_family(black_box(50)).unwrap())
    });
    g.finish();
}

fn dimension(c: &mut Criterion) {
    let mut g = c.benchmark_group("dimension");
    g.sample_size(10);
    let tree = build_band_tree(&Frequency::constant(1).unwrap(), 24.0, 10).unwrap();
    g.bench_function("partition_log/golden/10", |b| {
        b.iter(|| partition_log(&tree, black_box(0.3), 10).unwrap())
    });
    g.bench_function("solve_sn/golden/10", |b| {
        b.iter(|| solve_sn(&tree, black_box(10)).unwrap())
    });
    let sample = CocycleSample::draw(1000, 20, 7).unwrap();
    g.bench_function("phi/1000x20", |b| b.iter(|| sample.phi(black_box(0.5))));
    g.finish();
}

fn density_of_states(c: &mut Criterion) {
    let mut g = c.benchmark_group("dos");
    g.sample_size(10);
    let golden = Frequency::constant(1).unwrap();
    let approx = PeriodicApproximant::new(&golden, 24.0, 12).unwrap();
    g.bench_function("eigenvalues/q233", |b| {
        b.iter(|| black_box(&approx).eigenvalues())
    });
    let tree = build_band_tree(&golden, 24.0, 8).unwrap();
    let small = PeriodicApproximant::new(&golden, 24.0, 8).unwrap();
    g.bench_function("band_eigen_counts/q34", |b| {
        b.iter(|| band_eigen_counts(&tree, &small, None).unwrap())
    });
    let one_two = Frequency::periodic(vec![], vec![1, 2]).unwrap();
    g.bench_function("dos_masses/order5/m8", |b| {
        b.iter(|| dos_masses_of_order(&one_two, black_box(5), 8).unwrap())
    });
    let sampler = FiberSampler::new(&one_two, 30, 8, 7, 0).unwrap();
    g.bench_function("fiber_sample/30", |b| {
        b.iter(|| sampler.sample(black_box(30)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    continued_fractions,
    coding,
    spectrum,
    dimension,
    density_of_states
);
criterion_main!(benches);
