use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use infreg_bench::{annulus_problem, disk_condenser};
use infreg_core::capacity::{grid_capacity, shell_capacity, Grid, SolveOptions};
use infreg_core::inversion::{dt_apply, invert};
use infreg_core::pde::solve_dirichlet;
use infreg_core::wiener::wiener_partial_sum;
use infreg_core::{CapacityBackend, CriterionVariant, Exponents, Family, Weight};

fn inversion(c: &mut Criterion) {
    let x = [0.3, -1.7, 2.2];
    let q = [1.0, 0.5, -0.25];
    c.bench_function("invert point", |b| b.iter(|| invert(black_box(&x))));
    c.bench_function("differential of the inversion", |b| b.iter(|| dt_apply(black_box(&x), black_box(&q))));
}

fn capacities(c: &mut Criterion) {
    let exp = Exponents::new(2, 3.0).unwrap();
    c.bench_function("weighted shell capacity", |b| {
        b.iter(|| shell_capacity(black_box(0.5), black_box(3.0), exp, Weight::power(2.0)))
    });
    let mut group = c.benchmark_group("grid capacity of (B1, B2)");
    group.sample_size(10);
    let cond = disk_condenser();
    let opts = SolveOptions::default();
    for cells in [64usize, 128, 256] {
        let grid = Grid::centered(2, 2.0, cells).unwrap();
        for p in [2.0, 3.0] {
            let exp = Exponents::new(2, p).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("p={p}"), cells), &grid, |b, g| {
                b.iter(|| grid_capacity(&cond, exp, g, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn wiener(c: &mut Criterion) {
    let dom = Family::SparseBalls.domain(2).unwrap();
    let exp = Exponents::new(2, 2.0).unwrap();
    let mut group = c.benchmark_group("wiener partial sums");
    group.sample_size(10);
    group.bench_function("sparse balls, square shell, 1..1e4", |b| {
        b.iter(|| {
            let caps = CapacityBackend::without_grid();
            wiener_partial_sum(&CriterionVariant::square_shell(), &dom, exp, 1.0, 1e4, 16, &caps).unwrap()
        })
    });
    group.finish();
}

fn dirichlet(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet annulus");
    group.sample_size(10);
    for p in [2.0, 3.0] {
        let prob = annulus_problem(p, 128).unwrap();
        group.bench_function(BenchmarkId::new("p", p), |b| b.iter(|| solve_dirichlet(&prob, 1e-10, 100_000).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, inversion, capacities, wiener, dirichlet);
criterion_main!(benches);
