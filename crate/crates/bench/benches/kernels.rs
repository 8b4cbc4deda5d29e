//! Benchmarks for the hot kernels: forward/backward transforms, full RHS
//! evaluations per system, and a complete IF-RK4 step.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsm_core::{
    dealias, leray_project, make_grid, rhs, step, Grid, PhysParams, PhysicalField, PlasmaState,
    SpectralField, SystemKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn random_field(grid: &Arc<Grid>, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = PhysicalField::zeros(grid);
    for m in 0..3 {
        for x in f.comp_mut(m).iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    leray_project(&dealias(&f.to_spectral()))
}

fn state_for(grid: &Arc<Grid>, with_e: bool) -> PlasmaState {
    let v = random_field(grid, 1);
    let b = random_field(grid, 2);
    let e = with_e.then(|| {
        let mut e = random_field(grid, 3);
        e.divfree = false;
        e
    });
    PlasmaState::new(0.0, v, e, b)
}

fn params_for(system: SystemKind) -> PhysParams {
    PhysParams {
        nu: 0.1,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.1,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0, 0.0, 1.0],
        system,
    }
}

fn bench_transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for &(d, n) in &[(2usize, 64usize), (2, 128), (3, 16), (3, 32)] {
        let grid = make_grid(d, n, TAU).unwrap();
        let u = random_field(&grid, 7);
        let p = u.to_physical();
        group.bench_with_input(
            BenchmarkId::new("to_physical", format!("d{d}_n{n}")),
            &u,
            |bench, u| bench.iter(|| u.to_physical()),
        );
        group.bench_with_input(
            BenchmarkId::new("to_spectral", format!("d{d}_n{n}")),
            &p,
            |bench, p| bench.iter(|| p.to_spectral()),
        );
    }
    group.finish();
}

fn bench_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    let grid = make_grid(3, 32, TAU).unwrap();
    for system in [
        SystemKind::Nsm,
        SystemKind::NsmStar,
        SystemKind::Hmhd,
        SystemKind::Mhd,
        SystemKind::Maxwell,
    ] {
        let params = params_for(system);
        let state = state_for(&grid, params.system.has_e());
        group.bench_function(format!("{system:?}_d3_n32"), |bench| {
            bench.iter(|| rhs(&state, &params).unwrap())
        });
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for &(d, n) in &[(2usize, 64usize), (3, 16), (3, 32)] {
        let grid = make_grid(d, n, TAU).unwrap();
        let params = params_for(SystemKind::Nsm);
        let state = state_for(&grid, true);
        group.bench_function(format!("nsm_ifrk4_d{d}_n{n}"), |bench| {
            bench.iter(|| step(&state, &params, 1e-3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_transforms, bench_rhs, bench_step);
criterion_main!(benches);
