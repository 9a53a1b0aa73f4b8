use criterion::{black_box, criterion_group, criterion_main, Criterion};

use monoflux::monotonicity::{build_profile, default_radii};
use monoflux::oracle::{embed, OracleKind};
use monoflux::quadrature::{ball_integral, sphere_integral, Density, SurfaceDensity};
use monoflux::solver::{minimize_energy, seed, InitialGuess, SolveConfig};
use monoflux::tensor::{divergence_residual, tensor_report};
use monoflux::{Field, Grid, PotentialSpec};

fn heteroclinic(n: usize, points: usize) -> Field {
    let grid = Grid::new(n, 4.0, points).unwrap();
    embed(
        &OracleKind::Heteroclinic,
        grid,
        &PotentialSpec::double_well(),
    )
    .unwrap()
}

fn tensor(c: &mut Criterion) {
    let f2 = heteroclinic(2, 161);
    let f3 = heteroclinic(3, 41);
    c.bench_function("divergence n=2 N=161", |b| {
        b.iter(|| divergence_residual(black_box(&f2)))
    });
    c.bench_function("tensor_report n=2 N=161", |b| {
        b.iter(|| tensor_report(black_box(&f2), &[1.0, 2.0]).unwrap())
    });
    c.bench_function("tensor_report n=3 N=41", |b| {
        b.iter(|| tensor_report(black_box(&f3), &[1.0]).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let f2 = heteroclinic(2, 161);
    let f3 = heteroclinic(3, 41);
    c.bench_function("ball_integral n=2 R=2", |b| {
        b.iter(|| ball_integral(black_box(&f2), Density::Energy, 2.0).unwrap())
    });
    c.bench_function("ball_integral n=3 R=2", |b| {
        b.iter(|| ball_integral(black_box(&f3), Density::Energy, 2.0).unwrap())
    });
    c.bench_function("sphere_integral n=3 R=2", |b| {
        b.iter(|| sphere_integral(black_box(&f3), SurfaceDensity::NormalStress, 2.0).unwrap())
    });
    let radii = default_radii(f2.grid(), 32);
    c.bench_function("build_profile n=2 K=32", |b| {
        b.iter(|| build_profile(black_box(&f2), &radii).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let boundary = heteroclinic(2, 41);
    let start = seed(&boundary, &InitialGuess::Constant(vec![0.0])).unwrap();
    let cfg = SolveConfig {
        tolerance: Some(1e-9),
        ..SolveConfig::default()
    };
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("minimize_energy n=2 N=41 from u=0", |b| {
        b.iter(|| minimize_energy(black_box(start.clone()), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, tensor, quadrature, solver);
criterion_main!(benches);
