use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlheat_bench::{config_a, config_b, unit_ball_forcing};
use nlheat_core::hankel::HankelOptions;
use nlheat_core::kernel::profile_point;
use nlheat_core::mildsol::{duhamel_hat, solve_radial_with_table, ModeTable};
use nlheat_core::specfun::{bessel_j, MittagLeffler, MlfAccuracy};
use nlheat_core::SolverOptions;

fn mittag_leffler(c: &mut Criterion) {
    let mut g = c.benchmark_group("mittag_leffler");
    let ml = MittagLeffler::new(0.5, 0.5, MlfAccuracy::default()).unwrap();
    for x in [0.5, 20.0, 500.0] {
        g.bench_with_input(BenchmarkId::from_parameter(x), &x, |b, &x| b.iter(|| ml.eval(black_box(-x)).unwrap()));
    }
    g.finish();
}

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_j");
    for (nu, x) in [(1.5, 3.0), (2.0, 15.0), (0.3, 12.0), (2.5, 200.0)] {
        let id = format!("nu={nu},x={x}");
        g.bench_function(id, |b| b.iter(|| bessel_j(black_box(nu), black_box(x)).unwrap()));
    }
    g.finish();
}

fn kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("profile_point");
    g.sample_size(20);
    for (name, params) in [("A", config_a()), ("B", config_b())] {
        let ml = MittagLeffler::new(params.alpha(), params.alpha(), MlfAccuracy::default()).unwrap();
        let opts = HankelOptions::default();
        g.bench_function(name, |b| b.iter(|| profile_point(&params, &ml, black_box(1.0), &opts).unwrap()));
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let params = config_a();
    let f = unit_ball_forcing(&params);
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("duhamel_hat", |b| b.iter(|| duhamel_hat(&params, &f, black_box(2.0), 100.0, 1e-11).unwrap()));
    let opts = SolverOptions::default();
    g.bench_function("mode_table_t100", |b| b.iter(|| ModeTable::build(&params, 2.0, black_box(100.0), &opts).unwrap()));
    let table = ModeTable::build(&params, 2.0, 100.0, &opts).unwrap();
    g.bench_function("slice_16_radii", |b| {
        let radii = nlheat_core::quad::geomspace(0.05, 50.0, 16);
        b.iter(|| solve_radial_with_table(&params, &f, &table, black_box(&radii), &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, mittag_leffler, bessel, kernel, solver);
criterion_main!(benches);
