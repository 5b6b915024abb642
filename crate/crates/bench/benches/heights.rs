use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use heightlab::harness::{run_check, SampleSpec};
use heightlab::heights::{
    canonical_height_local_method, canonical_height_naive_method, green_arch, green_nonarch_default,
};
use heightlab::roots::{all_roots, DEFAULT_ROOT_TOL};
use heightlab_bench::{dense_poly, height_cases};

fn greens(c: &mut Criterion) {
    let mut g = c.benchmark_group("green");
    for (name, phi, alpha) in height_cases() {
        g.bench_with_input(BenchmarkId::new("arch", name), &(&phi, &alpha), |b, (phi, a)| {
            b.iter(|| green_arch(phi, a, 1e-9).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("2-adic", name), &(&phi, &alpha), |b, (phi, a)| {
            b.iter(|| green_nonarch_default(phi, a, 2).unwrap())
        });
    }
    g.finish();
}

fn canonical(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonical_height");
    for (name, phi, alpha) in height_cases() {
        g.bench_with_input(BenchmarkId::new("local", name), &(&phi, &alpha), |b, (phi, a)| {
            b.iter(|| canonical_height_local_method(phi, a, 1e-9).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("naive40", name), &(&phi, &alpha), |b, (phi, a)| {
            b.iter(|| canonical_height_naive_method(phi, a, 40).unwrap())
        });
    }
    g.finish();
}

fn roots(c: &mut Criterion) {
    let mut g = c.benchmark_group("all_roots");
    for d in [3, 8, 27, 64] {
        let p = dense_poly(d).to_polyc();
        g.bench_with_input(BenchmarkId::from_parameter(d), &p, |b, p| {
            b.iter(|| all_roots(black_box(p), DEFAULT_ROOT_TOL).unwrap())
        });
    }
    g.finish();
}

fn harness(c: &mut Criterion) {
    let spec = SampleSpec { samples: 20, ..SampleSpec::default() };
    let mut g = c.benchmark_group("harness");
    g.sample_size(10);
    for id in ["method-agreement", "transformation-rule"] {
        g.bench_function(id, |b| b.iter(|| run_check(id, &spec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, greens, canonical, roots, harness);
criterion_main!(benches);
