//! Wall-clock benchmarks for the hot kernels: interval reductions, rule
//! construction, range grids, the float Galerkin solver, the verified
//! residual, and the spectral certification matrices.  Sizes are kept small
//! so the suite finishes in a couple of minutes on one core.

use criterion::{criterion_group, criterion_main, Criterion};
use ellipcert_core::eigen;
use ellipcert_core::galerkin::{solve, ProblemSpec, SolveOptions};
use ellipcert_core::interval::{self, Interval};
use ellipcert_core::legendre::QuadratureRule;
use ellipcert_core::rigor;
use std::hint::black_box;

fn bench_interval_dot(c: &mut Criterion) {
    let a: Vec<Interval> = (0..256)
        .map(|i| Interval::point(1.0 + i as f64) * Interval::new(0.999, 1.001))
        .collect();
    let b: Vec<Interval> = (0..256)
        .map(|i| Interval::new(-1.0 - (i as f64) * 1e-3, 1.0))
        .collect();
    c.bench_function("interval_dot_256", |bch| {
        bch.iter(|| interval::dot(black_box(&a), black_box(&b)))
    });
}

fn bench_gauss_rule(c: &mut Criterion) {
    c.bench_function("gauss_rule_order_64", |bch| {
        bch.iter(|| QuadratureRule::gauss(black_box(64)).unwrap())
    });
}

fn bench_range_grid(c: &mut Criterion) {
    let problem = ProblemSpec::emden(3);
    let (u, _) = solve(&problem, &SolveOptions::new(8)).unwrap();
    c.bench_function("range_grid_n8_depth4", |bch| {
        bch.iter(|| rigor::range_grid(black_box(&u), 4).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let problem = ProblemSpec::emden(3);
    let mut g = c.benchmark_group("galerkin");
    g.sample_size(10);
    g.bench_function("solve_n16_cubic", |bch| {
        bch.iter(|| solve(black_box(&problem), &SolveOptions::new(16)).unwrap())
    });
    g.finish();
}

fn bench_residual(c: &mut Criterion) {
    let problem = ProblemSpec::emden(3);
    let (u, _) = solve(&problem, &SolveOptions::new(16)).unwrap();
    let mut g = c.benchmark_group("rigor");
    g.sample_size(10);
    g.bench_function("residual_l2_n16", |bch| {
        bch.iter(|| rigor::residual_l2(black_box(&u), black_box(&problem)).unwrap())
    });
    g.finish();
}

fn bench_spectral(c: &mut Criterion) {
    let problem = ProblemSpec::emden(3);
    let (u, _) = solve(&problem, &SolveOptions::new(8)).unwrap();
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    g.bench_function("assemble_n8_m24", |bch| {
        bch.iter(|| eigen::assemble(black_box(&u), black_box(&problem), 24).unwrap())
    });
    let mats = eigen::assemble(&u, &problem, 24).unwrap();
    g.bench_function("inverse_norm_m24", |bch| {
        bch.iter(|| eigen::inverse_norm_bound(black_box(&mats)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_interval_dot,
    bench_gauss_rule,
    bench_range_grid,
    bench_solve,
    bench_residual,
    bench_spectral
);
criterion_main!(benches);
