//! Built-in oracle suite behind `vns validate`.

use std::f64::consts::PI;

use super::sweep::fit_slope;
use crate::error::Result;
use crate::fluid::{ns_step, FluidState};
use crate::functionals::{torus_distance, w1_exact_points, wasserstein1};
use crate::grid_spectral::{leray_project, spectral_divergence_max, TorusField, TorusGrid};
use crate::kinetic::{jacobian_probe, push, FieldTrajectory, ParticleEnsemble, ScalingRegime};

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<(bool, String)>;

const CHECKS: [(&str, CheckFn); 8] = [
    ("taylor_green", taylor_green),
    ("pusher_closed_form", pusher_closed_form),
    ("projector", projector),
    ("w1_atoms", w1_atoms),
    ("w1_split_mass", w1_split_mass),
    ("w1_metric_axioms", w1_metric_axioms),
    ("jacobian_probe", jacobian),
    ("rate_fit", rate_fit),
];

/// Names of all checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check whose name contains `filter`. Errors become failed
/// checks.
pub fn validate(filter: Option<&str>) -> Vec<ValidationCheck> {
    CHECKS
        .iter()
        .filter(|(n, _)| filter.is_none_or(|f| n.contains(f)))
        .map(|(name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            ValidationCheck { name: name.to_string(), passed, detail }
        })
        .collect()
}

fn taylor_green() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 64)?;
    let u0 = TorusField::vector_from_fn(&g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
    let zero = TorusField::vector_zeros(&g);
    let mut s = FluidState::new(u0.clone(), 0.0)?;
    for _ in 0..500 {
        s = ns_step(&s, &zero, 1e-3)?;
    }
    let exact = u0.scaled((-2.0 * s.t).exp());
    let err = s.u.sub(&exact).l2_norm() / exact.l2_norm();
    Ok((err <= 1e-6, format!("relative L2 error {err:.3e} at t = 0.5")))
}

fn pusher_closed_form() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 16)?;
    let big_u = [0.4, -0.25];
    let u = TorusField::constant_vector(&g, &big_u);
    let dt = 1e-3;
    let mut worst: f64 = 0.0;
    for eps in [1.0, 1e-2, 1e-6] {
        let reg = ScalingRegime::light(eps)?;
        let (x0, v0) = ([1.3, 4.1], [2.0, -1.5]);
        let mut ens = ParticleEnsemble::new(2, x0.to_vec(), v0.to_vec(), vec![1.0])?;
        push(&mut ens, &u, &reg, dt)?;
        for a in 0..2 {
            let decay = (-dt / eps).exp();
            let v = big_u[a] + (v0[a] - big_u[a]) * decay;
            let x = x0[a] + dt * big_u[a] + eps * (1.0 - decay) * (v0[a] - big_u[a]);
            worst = worst.max((ens.vel[a] - v).abs());
            worst = worst.max(torus_distance(&[ens.pos[a]], &[x]));
        }
    }
    Ok((worst <= 1e-14, format!("max deviation {worst:.3e} over eps in {{1, 1e-2, 1e-6}}")))
}

fn projector() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 32)?;
    let v = TorusField::vector_from_fn(&g, |x| {
        [x[0].sin() + (x[0] + 2.0 * x[1]).cos(), (2.0 * x[1]).cos() * x[0].sin(), 0.0]
    });
    let p = leray_project(&v)?;
    let pp = leray_project(&p)?;
    let idem = pp.sub(&p).linf();
    let div = spectral_divergence_max(&p);
    Ok((idem <= 1e-13 && div <= 1e-12, format!("idempotence {idem:.2e}, divergence {div:.2e}")))
}

fn atom(g: &TorusGrid, node: [usize; 3]) -> TorusField {
    let mut f = TorusField::scalar_zeros(g);
    f.values_mut(0)[g.flat_index(&node)] = g.len() as f64;
    f
}

fn w1_atoms() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 8)?;
    let h = g.spacing();
    let mut worst: f64 = 0.0;
    for (a, b, ell) in [
        ([0, 0, 0], [3, 0, 0], 3.0 * h),
        ([1, 1, 0], [7, 1, 0], 2.0 * h),
        ([0, 0, 0], [4, 4, 0], 32f64.sqrt() * h),
    ] {
        worst = worst.max((wasserstein1(&atom(&g, a), &atom(&g, b))? - ell).abs());
    }
    Ok((worst <= 1e-3, format!("max error {worst:.3e}")))
}

fn w1_split_mass() -> Result<(bool, String)> {
    let ys = [0.0, PI];
    let w = w1_exact_points(&[1.0], &[0.5, 0.5], |_, t| torus_distance(&[0.0], &[ys[t]]));
    let err = (w - PI / 2.0).abs();
    Ok((err <= 1e-3, format!("W1 = {w:.6}, expected pi/2")))
}

fn w1_metric_axioms() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 8)?;
    let dens = |k: f64| TorusField::scalar_from_fn(&g, move |x| 1.0 + 0.6 * (k * x[0] + x[1]).cos());
    let (a, b, c) = (dens(1.0), dens(2.0), dens(3.0));
    let ab = wasserstein1(&a, &b)?;
    let ba = wasserstein1(&b, &a)?;
    let bc = wasserstein1(&b, &c)?;
    let ac = wasserstein1(&a, &c)?;
    let aa = wasserstein1(&a, &a)?;
    let ok = (ab - ba).abs() <= 1e-9 && ac <= ab + bc + 1e-9 && aa <= 1e-10 && ab > 0.0;
    Ok((ok, format!("d(a,b) = {ab:.4}, d(b,c) = {bc:.4}, d(a,c) = {ac:.4}")))
}

fn jacobian() -> Result<(bool, String)> {
    let g = TorusGrid::new(2, 32)?;
    let reg = ScalingRegime::fine(0.05)?;
    let t = 0.1;
    let u = TorusField::vector_from_fn(&g, |x| [0.3 * x[1].sin(), 0.0, 0.0]);
    let traj = FieldTrajectory::new(vec![(0.0, u.clone()), (t, u.scaled(0.9))])?;
    let mut failed = 0;
    for k in 0..100 {
        let kf = k as f64;
        let x = [(0.61 * kf) % (2.0 * PI), (0.37 * kf + 0.1) % (2.0 * PI)];
        let v = [(0.13 * kf).sin(), (0.29 * kf).cos()];
        let p = jacobian_probe(&x, &v, &traj, t, &reg)?;
        if !(p.guaranteed && p.satisfies_bound()) {
            failed += 1;
        }
    }
    Ok((failed == 0, format!("{failed} of 100 probes below the bound")))
}

fn rate_fit() -> Result<(bool, String)> {
    let eps = [0.1, 0.05, 0.02, 0.01];
    let err: Vec<f64> = eps.iter().map(|e| 3.0 * e).collect();
    let f = fit_slope(&eps, &err)?;
    let ok = (f.slope - 1.0).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12;
    Ok((ok, format!("slope {:.6}, intercept {:.6}", f.slope, f.intercept)))
}
