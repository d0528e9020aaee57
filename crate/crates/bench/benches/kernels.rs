use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use vns_core::functionals::wasserstein1;
use vns_core::kinetic::{deposit, push, sample_initial, InitialDataSpec, ScalingRegime, VelocitySpec};
use vns_core::{ns_step, FluidState, TorusField, TorusGrid};

fn taylor_green(g: &TorusGrid, a: f64) -> TorusField {
    TorusField::vector_from_fn(g, |x| [a * x[0].sin() * x[1].cos(), -a * x[0].cos() * x[1].sin(), 0.0])
}

fn fluid(c: &mut Criterion) {
    let g = TorusGrid::new(2, 64).unwrap();
    let s = FluidState::new(taylor_green(&g, 1.0), 0.0).unwrap();
    let f = TorusField::vector_zeros(&g);
    c.bench_function("ns_step 64^2", |b| b.iter(|| ns_step(black_box(&s), &f, 1e-3).unwrap()));
}

fn kinetic(c: &mut Criterion) {
    let g = TorusGrid::new(2, 64).unwrap();
    let u = taylor_green(&g, 0.5);
    let reg = ScalingRegime::light(0.05).unwrap();
    let spec = InitialDataSpec {
        rho0: TorusField::constant_scalar(&g, 1.0),
        velocity: VelocitySpec::Maxwellian { mean: u.clone(), theta: 0.1 },
    };
    let ens = sample_initial(&spec, 200_000, 7).unwrap();
    c.bench_function("push 2e5", |b| {
        b.iter_batched(|| ens.clone(), |mut e| push(&mut e, &u, &reg, 1e-3).unwrap(), criterion::BatchSize::LargeInput)
    });
    c.bench_function("deposit 2e5", |b| b.iter(|| deposit(black_box(&ens), &u, &reg).unwrap()));
}

fn w1(c: &mut Criterion) {
    let g = TorusGrid::new(2, 16).unwrap();
    let a = TorusField::scalar_from_fn(&g, |x| 1.0 + 0.5 * x[0].cos());
    let b2 = TorusField::scalar_from_fn(&g, |x| 1.0 + 0.5 * (x[0] + x[1]).sin());
    c.bench_function("w1 16^2", |b| b.iter(|| wasserstein1(black_box(&a), &b2).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = fluid, kinetic, w1
}
criterion_main!(benches);
