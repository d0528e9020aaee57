use std::f64::consts::PI;

use vns_core::fluid::{ns_step, FluidState};
use vns_core::grid_spectral::{TorusField, TorusGrid};
use vns_core::limit::{ins_step, tns_step, InsState, TnsState};

fn taylor_green(g: &TorusGrid, amp: f64) -> TorusField {
    TorusField::vector_from_fn(g, |x| [amp * x[0].sin() * x[1].cos(), -amp * x[0].cos() * x[1].sin(), 0.0])
}

fn bump(g: &TorusGrid) -> TorusField {
    TorusField::scalar_from_fn(g, |x| 0.5 + 0.4 * (x[0] - PI).cos() * (x[1]).sin().powi(2))
}

#[test]
fn tns_rest_state_keeps_density() {
    let g = TorusGrid::new(2, 32).unwrap();
    let rho = bump(&g);
    let mut s = TnsState::new(TorusField::vector_zeros(&g), rho.clone(), 0.0).unwrap();
    for _ in 0..10 {
        s = tns_step(&s, 0.01).unwrap();
    }
    assert!(s.rho.sub(&rho).linf() < 1e-14);
}

#[test]
fn tns_constant_velocity_translates_density() {
    let g = TorusGrid::new(2, 64).unwrap();
    let c = [0.7, -0.3];
    let rho0 = |x: &[f64; 3]| 1.0 + 0.3 * x[0].sin() * (x[1]).cos();
    let mut s = TnsState::new(
        TorusField::constant_vector(&g, &c),
        TorusField::scalar_from_fn(&g, rho0),
        0.0,
    )
    .unwrap();
    let dt = 0.01;
    for _ in 0..50 {
        s = tns_step(&s, dt).unwrap();
    }
    let t = s.t;
    let exact = TorusField::scalar_from_fn(&g, |x| rho0(&[x[0] - c[0] * t, x[1] - c[1] * t, 0.0]));
    let err = s.rho.sub(&exact).linf();
    assert!(err < 5e-4, "translation error {err}");
    assert!((s.rho.mean(0) - exact.mean(0)).abs() < 1e-12);
}

#[test]
fn tns_uniform_density_stays_uniform() {
    let g = TorusGrid::new(2, 32).unwrap();
    let mut s = TnsState::new(taylor_green(&g, 1.0), TorusField::constant_scalar(&g, 1.0), 0.0).unwrap();
    for _ in 0..20 {
        s = tns_step(&s, 0.01).unwrap();
    }
    assert!(s.rho.sub(&TorusField::constant_scalar(&g, 1.0)).linf() < 1e-13);
}

#[test]
fn tns_maximum_principle_and_mass() {
    let g = TorusGrid::new(2, 32).unwrap();
    let rho = bump(&g);
    let mass = rho.mean(0);
    let mut s = TnsState::new(taylor_green(&g, 1.0), rho.clone(), 0.0).unwrap();
    let mut sup = rho.max(0);
    for _ in 0..50 {
        s = tns_step(&s, 0.01).unwrap();
        let m = s.rho.max(0);
        assert!(m <= sup + 1e-8);
        assert!(s.rho.min(0) >= -1e-10);
        sup = m;
        assert!((s.rho.mean(0) / mass - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ins_constant_density_taylor_green_decay() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u0 = taylor_green(&g, 1.0);
    let mut s = InsState::new(u0.clone(), TorusField::constant_scalar(&g, 1.0), 0.0).unwrap();
    let dt = 1e-2;
    for _ in 0..50 {
        s = ins_step(&s, dt).unwrap();
    }
    // effective viscosity 1/(1+ρ₀) = 1/2, amplitude e^{-2t/2} = e^{-0.5} at t = 0.5
    let amp = (-0.5f64).exp();
    assert!((amp - 0.606_530_659_712_633_4).abs() < 1e-15);
    let err = s.u.sub(&u0.scaled(amp)).l2_norm() / (amp * u0.l2_norm());
    assert!(err < 1e-8, "relative error {err}");
}

#[test]
fn ins_zero_density_matches_navier_stokes() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u0 = TorusField::vector_from_fn(&g, |x| {
        [x[1].sin() + 0.5 * (2.0 * x[1]).cos(), 0.8 * x[0].cos() + 0.3 * (x[0] + x[1]).sin(), 0.0]
    });
    let u0 = FluidState::projected(u0, 0.0).unwrap().u;
    let mut a = InsState::new(u0.clone(), TorusField::scalar_zeros(&g), 0.0).unwrap();
    let mut b = FluidState::new(u0, 0.0).unwrap();
    let zero = TorusField::vector_zeros(&g);
    for _ in 0..20 {
        a = ins_step(&a, 0.01).unwrap();
        b = ns_step(&b, &zero, 0.01).unwrap();
    }
    let err = a.u.sub(&b.u).l2_norm() / b.u.l2_norm();
    assert!(err < 1e-9, "{err}");
}

#[test]
fn ins_rest_state() {
    let g = TorusGrid::new(2, 16).unwrap();
    let rho = bump(&g);
    let mut s = InsState::new(TorusField::vector_zeros(&g), rho.clone(), 0.0).unwrap();
    for _ in 0..5 {
        s = ins_step(&s, 0.01).unwrap();
    }
    assert_eq!(s.u.linf(), 0.0);
    assert!(s.rho.sub(&rho).linf() < 1e-14);
}

#[test]
fn ins_constant_density_energy_decreases() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u0 = FluidState::projected(
        TorusField::vector_from_fn(&g, |x| [x[1].sin() + (2.0 * x[1]).cos(), x[0].cos() * 0.7, 0.0]),
        0.0,
    )
    .unwrap()
    .u;
    let mut s = InsState::new(u0, TorusField::constant_scalar(&g, 0.5), 0.0).unwrap();
    let mut e = s.kinetic_energy();
    for _ in 0..30 {
        s = ins_step(&s, 0.01).unwrap();
        let e1 = s.kinetic_energy();
        assert!(e1 <= e * (1.0 + 1e-10));
        e = e1;
    }
}

#[test]
fn ins_variable_density_momentum_and_mass() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u0 = taylor_green(&g, 0.5);
    let rho = bump(&g);
    let mass = rho.mean(0);
    let mut s = InsState::new(u0, rho, 0.0).unwrap();
    let m0 = s.momentum();
    let scale = s.kinetic_energy().sqrt() + m0[0].abs() + m0[1].abs();
    for _ in 0..100 {
        s = ins_step(&s, 0.01).unwrap();
        assert!(s.rho.min(0) >= 0.0);
    }
    let m1 = s.momentum();
    let drift = ((m1[0] - m0[0]).powi(2) + (m1[1] - m0[1]).powi(2)).sqrt();
    assert!(drift <= 3e-3 * scale, "momentum drift {drift} vs scale {scale}");
    assert!((s.rho.mean(0) / mass - 1.0).abs() < 1e-10);
}
