//! Rayon pool versus a single-thread pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the sequential backend
//! instead (both groups then run the same code).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;

use alam::envelope::{EnvelopeSolver, GridFunction};
use alam::hull::{hull_iterate, HullParams};
use alam::laminate::{lemma1_construct, solve_one_level, InclusionProblem, Schedule};
use alam::operator::builtin;
use alam::verify::{seeded_bumps, weak_residual, DEFAULT_QUAD_ORDER};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1];
    if all > 1 {
        sizes.push(all);
    }
    sizes
        .into_iter()
        .map(|k| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
            (format!("{k}-threads"), pool)
        })
        .collect()
}

fn kernels(c: &mut Criterion) {
    let op = builtin("div2").unwrap();
    let v = |x: &[f64]| DVector::from_column_slice(x);

    let grid = GridFunction::from_fn(vec![-2.0; 2], vec![2.0; 2], vec![65; 2], |x| (x.norm_squared() - 1.0).powi(2)).unwrap();
    let solver = EnvelopeSolver::new(&grid, &op, 8, 0).unwrap();
    let triangle = [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let hull = HullParams {
        t_grid: 9,
        dedup_eps: Some(0.01),
        ..Default::default()
    };
    let a = v(&[0.0, 1.0]);
    let lemma = lemma1_construct(&op, &a, &-&a, 0.5, 64).unwrap();
    let bumps = seeded_bumps(&lemma.domain, 20, 0);
    let circle = InclusionProblem::circle(op.clone(), v(&[0.5, 0.0])).unwrap();

    let mut g = c.benchmark_group("parallel");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("envelope_sweep_65", &name), |b| {
            b.iter(|| pool.install(|| black_box(solver.sweep(&grid))))
        });
        g.bench_function(BenchmarkId::new("hull_iterate_triangle_d2", &name), |b| {
            b.iter(|| pool.install(|| black_box(hull_iterate(&triangle, &op, 2, &hull).unwrap())))
        });
        g.bench_function(BenchmarkId::new("weak_residual_lemma64", &name), |b| {
            b.iter(|| pool.install(|| black_box(weak_residual(&lemma, &op, &bumps, DEFAULT_QUAD_ORDER).unwrap())))
        });
        g.bench_function(BenchmarkId::new("solve_circle", &name), |b| {
            b.iter(|| pool.install(|| black_box(solve_one_level(&circle, 8, 0.05, &Schedule::default()).unwrap())))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
