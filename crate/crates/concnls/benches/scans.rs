//! Sequential against parallel execution on the data-parallel kernels.

use std::hint::black_box;

use concnls::exec::Execution;
use concnls::fermionic::{self, TwoCenterOptions};
use concnls::grid::CylGrid;
use concnls::shoot::{self, ShootOptions};
use concnls::ModelParams;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mu_curve(c: &mut Criterion) {
    let p = ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).unwrap();
    let mus: Vec<f64> = (0..16).map(|k| 10f64.powf(-1.0 + 4.0 * k as f64 / 15.0)).collect();
    let o = ShootOptions::default();
    let mut g = c.benchmark_group("lambda_of_mu_curve");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| shoot::lambda_of_mu_curve(&p, black_box(&mus), &o, exec)));
    }
    g.finish();
}

fn cyl_integrate(c: &mut Criterion) {
    let grid = CylGrid::new(-10.0, 10.0, 800, 10.0, 400).unwrap();
    let mut g = c.benchmark_group("cyl_integrate");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| grid.integrate(exec, |z, s| (-(z * z + s * s)).exp().powf(black_box(1.4))))
        });
    }
    g.finish();
}

fn two_center(c: &mut Criterion) {
    let p = ModelParams::new(3, 1.8, 1.4, 2e7).unwrap();
    let orb = fermionic::mass_one_orbital(&p, &ShootOptions::default()).unwrap();
    let r = 8.0 / orb.mu.sqrt();
    let mut g = c.benchmark_group("two_center_energy");
    g.sample_size(10);
    for (name, exec) in MODES {
        let o = TwoCenterOptions { exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| fermionic::two_center_energy(&orb, black_box(r), &o)));
    }
    g.finish();
}

criterion_group!(benches, mu_curve, cyl_integrate, two_center);
criterion_main!(benches);
