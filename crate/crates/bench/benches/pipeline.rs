use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use harmdom::{
    lipschitz_sample_check, majorize_spherical_polygon, run_pipeline, solve_harmonic, spherical_polygon_radius,
    emit_fixture, Method, SolverParams,
};
use harmdom_bench::{dented_polygon, octagon_start, solved_octagon};

fn solver(c: &mut Criterion) {
    let (t, rep, init) = octagon_start();
    let mut group = c.benchmark_group("solve_octagon");
    for method in [Method::CoordinateDescent, Method::Proximal] {
        let params = SolverParams { method, ..SolverParams::default() };
        group.bench_function(format!("{method:?}"), |b| {
            b.iter(|| solve_harmonic(&t, &rep, black_box(&init), &params).unwrap())
        });
    }
    group.finish();
}

fn domination(c: &mut Criterion) {
    let s = solved_octagon();
    c.bench_function("lipschitz_check_1000_pairs", |b| {
        b.iter(|| {
            lipschitz_sample_check(&s.surface, &s.triangulation, &s.representation, &s.map, black_box(1000), 7).unwrap()
        })
    });
}

fn polygons(c: &mut Criterion) {
    let mut group = c.benchmark_group("spherical_polygon");
    for n in [6, 12, 24] {
        let p = dented_polygon(n);
        group.bench_with_input(BenchmarkId::new("radius", n), &p, |b, p| b.iter(|| spherical_polygon_radius(p)));
        group.bench_with_input(BenchmarkId::new("majorize", n), &p, |b, p| {
            b.iter(|| majorize_spherical_polygon(p).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut config = emit_fixture("tree_overlapping_axes").unwrap();
    config.sampling.pairs = 1000;
    c.bench_function("pipeline_tree_fixture", |b| b.iter(|| run_pipeline(black_box(&config)).unwrap()));
}

criterion_group!(benches, solver, domination, polygons, pipeline);
criterion_main!(benches);
