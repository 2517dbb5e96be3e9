use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use inertial_core::lyapunov::{check_grad_h_bounds, coefficients, critical_index, instrument, MonitorOptions};
use inertial_core::objectives::{ill_conditioned_quadratic, power, rosenbrock};
use inertial_core::ode::{integrate, OdeSpec, OdeVariant};
use inertial_core::solver::{run, InertialParams, StopRule};
use inertial_core::Objective;

fn fixed_run(obj: &Objective, iters: usize) -> inertial_core::Trajectory {
    let p = InertialParams::with_step_fraction(3.0, 0.5, 0.8, obj.lipschitz).unwrap();
    let stop = StopRule {
        grad_tol: f64::NEG_INFINITY,
        max_iter: iters,
        ..StopRule::default()
    };
    run(obj, &p, &obj.default_start, &stop).unwrap()
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_10k");
    for obj in [
        ill_conditioned_quadratic(10, 100.0).unwrap(),
        rosenbrock(),
        power(4, 1).unwrap(),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(&obj.id), &obj, |b, obj| {
            b.iter(|| fixed_run(black_box(obj), 10_000))
        });
    }
    group.finish();
}

fn monitors(c: &mut Criterion) {
    let obj = ill_conditioned_quadratic(10, 100.0).unwrap();
    let traj = fixed_run(&obj, 10_000);
    let opts = MonitorOptions::default();
    c.bench_function("instrument_10k", |b| {
        b.iter(|| instrument(black_box(&traj), &obj, &opts).unwrap())
    });
    c.bench_function("grad_h_bounds_10k", |b| {
        b.iter(|| check_grad_h_bounds(black_box(&traj), &obj, &opts).unwrap())
    });
    let p = InertialParams::new(3.0, 0.5, 0.5).unwrap();
    c.bench_function("coefficients", |b| b.iter(|| coefficients(black_box(12_345), &p, 1.0)));
    c.bench_function("critical_index_1e6", |b| {
        b.iter(|| critical_index(black_box(&p), 1.0, 1_000_000).unwrap())
    });
}

fn ode(c: &mut Criterion) {
    let obj = ill_conditioned_quadratic(10, 100.0).unwrap();
    let spec = OdeSpec {
        variant: OdeVariant::Damped,
        alpha: 4.0,
        gamma: 1.0,
        t0: 0.5,
        x0: obj.default_start.clone(),
        v0: vec![0.0; 10],
    };
    c.bench_function("rk4_t5_dt1e-3", |b| {
        b.iter(|| integrate(black_box(&spec), &obj, 5.0, 1e-3).unwrap())
    });
}

criterion_group!(benches, solver, monitors, ode);
criterion_main!(benches);
