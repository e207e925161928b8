//! Criterion benches for the data-parallel hot paths: coefficient
//! precomputation, 2-D transforms and full stepper steps.
//!
//! Run `cargo bench` for the rayon build and
//! `cargo bench --no-default-features` for the sequential fallback; the
//! bench IDs carry the mode label so both result sets coexist under
//! `target/criterion` for comparison.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use expnls::coefficients::{erk_alpha_set, gauss_nodes, precompute_tables};
use expnls::integrators::{Engine, MethodSpec, SplittingScheme, StepperConfig};
use expnls::problems;
use expnls::spectral::{Grid, Repr, SpectralField};
use num_complex::Complex64;

fn mode() -> &'static str {
    expnls::par::mode()
}

fn bench_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("tables");
    group.sample_size(20);
    let nodes = gauss_nodes(3).unwrap();
    let alphas = erk_alpha_set(&nodes);

    let grid1 = Grid::line(-15.0, 15.0, 12).unwrap();
    group.bench_function(BenchmarkId::new("erk-s3-1d-4096", mode()), |b| {
        b.iter(|| precompute_tables(&grid1, 1e-3, &nodes, 1.0, &alphas).unwrap())
    });

    let grid2 = Grid::square(-16.0, 16.0, 8).unwrap();
    group.bench_function(BenchmarkId::new("erk-s3-2d-256", mode()), |b| {
        b.iter(|| precompute_tables(&grid2, 1e-3, &nodes, 0.5, &alphas).unwrap())
    });
    group.finish();
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft2d");
    group.sample_size(30);
    let grid = Grid::square(-38.0, 38.0, 9).unwrap();
    let field = grid.sample(|x| Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.1));
    group.bench_function(BenchmarkId::new("roundtrip-512", mode()), |b| {
        b.iter(|| {
            let hat = field.to_spectral().unwrap();
            hat.to_physical().unwrap()
        })
    });
    group.finish();

    let z = SpectralField::zeros(&grid);
    assert_eq!(z.repr(), Repr::Physical);
}

fn bench_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    let grid = Grid::line(-15.0, 15.0, 10).unwrap();
    let problem = problems::cubic_soliton_1d(8.0, 4.0, 0.5, 0.0, &grid).unwrap();
    let psi0 = problem.initial_state().into_values();

    let erk = Engine::new(
        &problem,
        &MethodSpec::Erk {
            nodes: gauss_nodes(2).unwrap(),
        },
        1e-3,
        StepperConfig::default(),
    )
    .unwrap();
    group.bench_function(BenchmarkId::new("erk-s2-soliton-1024", mode()), |b| {
        b.iter(|| erk.step(&psi0, 0.0).unwrap())
    });

    let split = Engine::new(
        &problem,
        &MethodSpec::Splitting {
            scheme: SplittingScheme::order4(),
        },
        1e-3,
        StepperConfig::default(),
    )
    .unwrap();
    group.bench_function(BenchmarkId::new("splitting-4-soliton-1024", mode()), |b| {
        b.iter(|| split.step(&psi0, 0.0).unwrap())
    });

    // a 2-D ERK step exercises the parallel transform path
    let grid2 = Grid::square(-16.0, 16.0, 8).unwrap();
    let trap = problems::RotatingTrap {
        gamma_x: 1.05,
        gamma_y: 0.95,
        omega: 0.9,
        delta: 32.0,
    };
    let tf = problems::thomas_fermi_initial(&trap, 1000.0, &grid2).unwrap();
    let bec = problems::rotating_gpe_2d(&trap, 1000.0, tf.values().to_vec(), &grid2).unwrap();
    let psi_bec = bec.initial_state().into_values();
    let erk_bec = Engine::new(
        &bec,
        &MethodSpec::Erk {
            nodes: gauss_nodes(3).unwrap(),
        },
        1e-3,
        StepperConfig::default(),
    )
    .unwrap();
    group.bench_function(BenchmarkId::new("erk-s3-bec-256", mode()), |b| {
        b.iter(|| erk_bec.step(&psi_bec, 0.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_tables, bench_fft, bench_steps);
criterion_main!(benches);
