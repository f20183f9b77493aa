use std::hint::black_box;

use capfilm::cap::cap_for_volume;
use capfilm::foliation::{geometric_grid, sweep, SolverKind, SweepOptions};
use capfilm::geometry::{Tube, WireCurve};
use capfilm::mesh::{area_and_gradient, cap_mesh};
use capfilm::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn gradient(c: &mut Criterion) {
    let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
    let cap = cap_for_volume(0.1, 0.05).unwrap();
    let mut group = c.benchmark_group("area_gradient");
    for h in [0.02, 0.01] {
        let mesh = cap_mesh(&tube, &cap, h).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, mesh.triangles.len()), &mesh, |b, m| {
                b.iter(|| area_and_gradient(black_box(m), exec))
            });
        }
    }
    group.finish();
}

fn ode_sweep(c: &mut Criterion) {
    let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
    let grid = geometric_grid(1e-4, 0.05, 8).unwrap();
    let mut group = c.benchmark_group("ode_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SweepOptions {
            exec,
            ..Default::default()
        };
        group.bench_function(name, |b| b.iter(|| sweep(&tube, black_box(&grid), SolverKind::Ode, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, gradient, ode_sweep);
criterion_main!(benches);
