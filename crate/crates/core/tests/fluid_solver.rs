use proptest::prelude::*;
use vns_core::fluid::{ExistenceMonitor, GRAD_THRESHOLD};
use vns_core::grid_spectral::leray_project;
use vns_core::{ns_step, FluidState, TorusField, TorusGrid, VnsError};

fn taylor_green(g: &TorusGrid) -> TorusField {
    TorusField::vector_from_fn(g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0])
}

#[test]
fn taylor_green_decays_analytically() {
    let g = TorusGrid::new(2, 64).unwrap();
    let u0 = taylor_green(&g);
    let zero = TorusField::vector_zeros(&g);
    let mut s = FluidState::new(u0.clone(), 0.0).unwrap();
    for _ in 0..500 {
        s = ns_step(&s, &zero, 1e-3).unwrap();
    }
    let exact = u0.scaled((-2.0 * s.t).exp());
    let err = s.u.sub(&exact).l2_norm() / exact.l2_norm();
    assert!((s.t - 0.5).abs() < 1e-12);
    assert!(err <= 1e-6, "relative error {err:e}");
}

#[test]
fn one_step_local_error_is_tiny() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u0 = taylor_green(&g);
    let s = ns_step(&FluidState::new(u0.clone(), 0.0).unwrap(), &TorusField::vector_zeros(&g), 1e-3)
        .unwrap();
    let exact = u0.scaled((-2e-3f64).exp());
    assert!(s.u.sub(&exact).l2_norm() < 1e-13);
}

#[test]
fn zero_and_constant_states_are_steady() {
    let g = TorusGrid::new(2, 16).unwrap();
    let zero = TorusField::vector_zeros(&g);
    let s = ns_step(&FluidState::new(zero.clone(), 0.0).unwrap(), &zero, 0.01).unwrap();
    assert_eq!(s.u.linf(), 0.0);

    let c = TorusField::constant_vector(&g, &[0.4, -0.7]);
    let mut s = FluidState::new(c.clone(), 0.0).unwrap();
    for _ in 0..20 {
        s = ns_step(&s, &zero, 0.01).unwrap();
    }
    assert!(s.u.sub(&c).linf() < 1e-14);
}

#[test]
fn cfl_violation_is_rejected() {
    let g = TorusGrid::new(2, 16).unwrap();
    let u = taylor_green(&g).scaled(4.0);
    let s = FluidState::new(u, 0.0).unwrap();
    let err = ns_step(&s, &TorusField::vector_zeros(&g), 0.2).unwrap_err();
    assert!(matches!(err, VnsError::Cfl { .. }));
}

#[test]
fn rejects_divergent_initial_velocity() {
    let g = TorusGrid::new(2, 16).unwrap();
    let u = TorusField::vector_from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
    assert!(FluidState::new(u, 0.0).is_err());
}

#[test]
fn forced_step_stays_divergence_free() {
    let g = TorusGrid::new(2, 32).unwrap();
    let f = TorusField::vector_from_fn(&g, |x| [x[0].cos() + x[1].sin(), x[0].sin() * x[1].cos(), 0.0]);
    let mut s = FluidState::new(taylor_green(&g), 0.0).unwrap();
    for _ in 0..10 {
        s = ns_step(&s, &f, 0.01).unwrap();
    }
    assert!(FluidState::new(s.u.clone(), s.t).is_ok());
}

#[test]
fn monitor_zero_field() {
    let g = TorusGrid::new(2, 16).unwrap();
    let z = TorusField::vector_zeros(&g);
    let mut m = ExistenceMonitor::new(&z, None);
    for i in 0..=10 {
        let flags = m.update(0.1 * i as f64, &z, &z);
        assert!(flags.strong_grad_ok);
        assert_eq!(flags.small_data_ok, None);
    }
    assert_eq!(m.accum_grad, 0.0);
    assert_eq!(m.accum_heat, 0.0);
}

#[test]
fn monitor_boundary_is_inclusive() {
    let mut m = ExistenceMonitor::bare();
    // two samples at t = 0 and t = 2 of the constant 1/60
    m.record(0.0, 1.0 / 60.0, 0.0, 0.0);
    let f = m.record(2.0, 1.0 / 60.0, 0.0, 0.0);
    assert_eq!(m.accum_grad, GRAD_THRESHOLD);
    assert!(f.strong_grad_ok);
}

#[test]
fn monitor_exponential_crossing() {
    // ‖∇u‖∞ = e^{-t}: flag turns false at t* = -ln(1 - 1/30)
    let g = TorusGrid::new(2, 32).unwrap();
    let shape = TorusField::vector_from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
    let z = TorusField::vector_zeros(&g);
    let mut m = ExistenceMonitor::bare();
    let t_star = -(1.0f64 - 1.0 / 30.0).ln();
    assert!((t_star - 0.0339).abs() < 1e-4);
    let dt = 1e-4;
    let mut crossed = None;
    for i in 0..=1000 {
        let t = i as f64 * dt;
        let f = m.update(t, &shape.scaled((-t).exp()), &z);
        if !f.strong_grad_ok && crossed.is_none() {
            crossed = Some(t);
        }
    }
    let tc = crossed.expect("flag never dropped");
    assert!((tc - t_star).abs() <= dt, "crossing at {tc}, expected {t_star}");
}

#[test]
fn monitor_heat_term_matches_single_mode() {
    // u⁰ = (sin x₂, 0): ‖e^{tΔ}u⁰‖²_{Ḣ¹} = ½ e^{-2t}
    let g = TorusGrid::new(2, 16).unwrap();
    let u0 = TorusField::vector_from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
    let m = ExistenceMonitor::new(&u0, Some(0.5));
    for t in [0.0, 0.3, 1.0] {
        let want = (0.5 * (-2.0 * t as f64).exp()).powi(2);
        assert!((m.heat_term(t) - want).abs() < 1e-14);
    }
}

#[test]
fn monitor_reports_c_star_flag() {
    let g = TorusGrid::new(2, 16).unwrap();
    let u0 = TorusField::vector_from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
    let z = TorusField::vector_zeros(&g);
    let mut m = ExistenceMonitor::new(&u0, Some(1e-6));
    m.update(0.0, &u0, &z);
    let f = m.update(0.1, &u0, &z);
    assert_eq!(f.small_data_ok, Some(false));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn unforced_energy_and_mean(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64,
        m1 in -0.5..0.5f64, m2 in -0.5..0.5f64,
    ) {
        let g = TorusGrid::new(2, 16).unwrap();
        let raw = TorusField::vector_from_fn(&g, |x| [
            m1 + a * x[1].sin() + b * (x[0] + 2.0 * x[1]).cos(),
            m2 + c * (2.0 * x[0]).sin() + a * b * (x[0] - x[1]).cos(),
            0.0,
        ]);
        let mut s = FluidState::new(leray_project(&raw).unwrap(), 0.0).unwrap();
        let zero = TorusField::vector_zeros(&g);
        let mean0 = s.u.mean_vector();
        for _ in 0..20 {
            let e0 = s.kinetic_energy();
            s = ns_step(&s, &zero, 0.01).unwrap();
            prop_assert!(s.kinetic_energy() <= e0 * (1.0 + 1e-12));
        }
        let mean = s.u.mean_vector();
        prop_assert!((mean[0] - mean0[0]).abs() < 1e-12);
        prop_assert!((mean[1] - mean0[1]).abs() < 1e-12);
    }
}
