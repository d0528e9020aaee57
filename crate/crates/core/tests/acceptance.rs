//! Desk-scale acceptance suite. Runs every criterion, prints one
//! PASS/FAIL line each and exits nonzero if any fails.
//!
//! `cargo test -p vns-core --test acceptance [-- <substring>...]` runs the
//! criteria whose label contains one of the substrings.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vns_core::functionals::{torus_distance, w1_exact_points, wasserstein1};
use vns_core::harness::{initial_state, run_sweep, simulate, RateFit, RunConfig, RunOutput};
use vns_core::kinetic::{jacobian_probe, push, FieldTrajectory, ParticleEnsemble, ScalingRegime};
use vns_core::{ns_step, FluidState, TorusField, TorusGrid};

const SWEEP: &str = "0.1, 0.05, 0.02, 0.01, 0.005";

/// Baseline configuration: d = 2, 64², N = 2·10⁵, T = 1, dt = 1e-3, small
/// Taylor–Green velocity and a cosine density.
fn config(dir: &Path, regime: &str, kinetic: &str, extra: &str) -> RunConfig {
    let text = format!(
        "[fluid]\nn = 64\ndt = 1e-3\nt_final = 1\nu0 = taylor_green\nu0_amplitude = 0.03\n\
         [kinetic]\nregime = {regime}\nalpha = 0.25\nparticles = 200000\nrho0 = cosine\nrho0_amplitude = 0.5\n{kinetic}\
         {extra}[output]\ndir = {}\n",
        dir.display()
    );
    RunConfig::parse(&text).expect("acceptance config")
}

fn sweep_config(dir: &Path, regime: &str, kinetic: &str) -> RunConfig {
    let reference = if regime == "fine" { "ins" } else { "tns" };
    let mut cfg = config(dir, regime, kinetic, &format!("[sweep]\nepsilons = {SWEEP}\nw1_samples = 0\n"));
    cfg.reference = if reference == "ins" {
        vns_core::harness::ReferenceModel::Ins
    } else {
        vns_core::harness::ReferenceModel::Tns
    };
    cfg.validate().unwrap();
    cfg
}

fn run(cfg: &RunConfig) -> RunOutput {
    simulate(cfg, initial_state(cfg).expect("initial data"), None).expect("run")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

// ------------------------------------------------------------ criterion 1

fn taylor_green() -> Outcome {
    let g = TorusGrid::new(2, 64).unwrap();
    let u0 = TorusField::vector_from_fn(&g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
    let zero = TorusField::vector_zeros(&g);
    let mut s = FluidState::new(u0.clone(), 0.0).unwrap();
    for _ in 0..500 {
        s = ns_step(&s, &zero, 1e-3).unwrap();
    }
    // u(t) = e^{-2t} u⁰ for the k = (1, 1) mode
    let exact = u0.scaled((-2.0 * s.t).exp());
    let err = s.u.sub(&exact).l2_norm() / exact.l2_norm();
    outcome(err <= 1e-6, format!("relative L2 error {err:.3e} at t = {:.3} (tol 1e-6)", s.t))
}

// ------------------------------------------------------------ criterion 2

fn pusher() -> Outcome {
    let g = TorusGrid::new(2, 16).unwrap();
    let big_u = [0.4, -0.25];
    let u = TorusField::constant_vector(&g, &big_u);
    let mut worst: f64 = 0.0;
    for eps in [1.0, 1e-2, 1e-6] {
        let reg = ScalingRegime::light(eps).unwrap();
        for dt in [1e-3, 1e-2] {
            let (x0, v0) = ([1.3, 4.1], [2.0, -1.5]);
            let mut ens = ParticleEnsemble::new(2, x0.to_vec(), v0.to_vec(), vec![1.0]).unwrap();
            push(&mut ens, &u, &reg, dt).unwrap();
            for a in 0..2 {
                // V = U + (v₀ - U)e^{-t/ε},  X = x₀ + tU + ε(1 - e^{-t/ε})(v₀ - U)
                let decay = (-dt / eps).exp();
                let v = big_u[a] + (v0[a] - big_u[a]) * decay;
                let x = x0[a] + dt * big_u[a] + eps * (1.0 - decay) * (v0[a] - big_u[a]);
                worst = worst.max((ens.vel[a] - v).abs());
                worst = worst.max(torus_distance(&[ens.pos[a]], &[x]));
            }
        }
    }
    outcome(worst <= 1e-14, format!("max deviation {worst:.2e} for eps in {{1, 1e-2, 1e-6}} (tol 1e-14)"))
}

// ---------------------------------------------------------- criteria 3–5

struct Baselines {
    light: RunOutput,
    light_fast: RunOutput,
    fine: RunOutput,
}

/// Light and light-fast at ε = 0.1, fine at ε = 0.02; the light runs carry
/// a small solenoidal velocity offset (mildly well-prepared), the fine run
/// a potential one. The fine run records the fine-key trace.
fn baselines(root: &Path) -> Baselines {
    let light_kin = "epsilon = 0.1\nvelocity = monokinetic\nvelocity_offset = 0.03\n";
    let light = run(&config(&root.join("light"), "light", light_kin, ""));
    let light_fast = run(&config(&root.join("light_fast"), "light_fast", light_kin, ""));
    let mut fine_cfg = config(
        &root.join("fine"),
        "fine",
        "epsilon = 0.02\nvelocity = monokinetic\nvelocity_offset = 0.03\noffset_profile = potential\n",
        "",
    );
    fine_cfg.fine_key = true;
    let fine = run(&fine_cfg);
    Baselines { light, light_fast, fine }
}

fn conservation(b: &Baselines) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, out) in [("light", &b.light), ("light_fast", &b.light_fast), ("fine", &b.fine)] {
        let s = &out.summary;
        let mass_exact = s.mass_final == s.mass_initial;
        ok &= mass_exact && s.momentum_drift <= 3e-3;
        parts.push(format!("{name}: mass exact {mass_exact}, momentum drift {:.2e}", s.momentum_drift));
    }
    outcome(ok, format!("{} (tol 3e-3)", parts.join("; ")))
}

fn energy_inequality(b: &Baselines) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, out) in [("light", &b.light), ("light_fast", &b.light_fast), ("fine", &b.fine)] {
        let r = out.summary.energy_ratio_max;
        ok &= r <= 1.0 + 1e-3;
        parts.push(format!("{name}: max (E + int D)/E0 = {r:.7}"));
    }
    outcome(ok, format!("{} (tol 1 + 1e-3)", parts.join("; ")))
}

fn modulated_energy(b: &Baselines) -> Outcome {
    let out = &b.light;
    let inc = out.summary.modulated_increase_max;
    let late: Vec<_> = out.records.iter().filter(|r| r.t >= 0.5 - 1e-12).collect();
    let (n, mut sx, mut sy) = (late.len() as f64, 0.0, 0.0);
    for r in &late {
        sx += r.t;
        sy += r.modulated_energy.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for r in &late {
        sxx += (r.t - mx).powi(2);
        sxy += (r.t - mx) * (r.modulated_energy.ln() - my);
    }
    let slope = sxy / sxx;
    let lambda = late.iter().map(|r| r.lambda_bound).fold(f64::INFINITY, f64::min);
    let ok = inc <= 1e-6 && slope <= -0.8 * lambda;
    outcome(
        ok,
        format!(
            "max per-step relative increase {inc:.2e} (tol 1e-6); log-slope on [0.5, 1] {slope:.3} vs -0.8 lambda = {:.3}",
            -0.8 * lambda
        ),
    )
}

// ------------------------------------------------------------ criterion 9

fn jacobian() -> Outcome {
    let g = TorusGrid::new(2, 32).unwrap();
    let eps = 0.05;
    let reg = ScalingRegime::fine(eps).unwrap();
    let t = 0.1;
    let u = TorusField::vector_from_fn(&g, |x| [0.25 * x[1].sin(), 0.15 * (x[0] + 0.4).cos(), 0.0]);
    let u = vns_core::grid_spectral::leray_project(&u).unwrap();
    let traj = FieldTrajectory::new(vec![(0.0, u.clone()), (0.05, u.scaled(0.95)), (t, u.scaled(0.9))]).unwrap();
    let accum = traj.accum_grad(t);
    let bound = 0.5 * (2.0 * t / eps).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    let mut failed = 0;
    for _ in 0..100 {
        let x = [rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI];
        let v = [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
        let p = jacobian_probe(&x, &v, &traj, t, &reg).unwrap();
        worst = worst.min(p.det / bound);
        if p.det < bound {
            failed += 1;
        }
    }
    outcome(
        accum <= 1.0 / 30.0 && failed == 0,
        format!("accum_grad {accum:.4} (<= 1/30); {failed} of 100 probes below e^(dt/eps)/2; min det/bound {worst:.4}"),
    )
}

// ----------------------------------------------------------- criterion 10

fn fine_key(b: &Baselines, root: &Path) -> Outcome {
    let mut coarse = config(
        &root.join("fine_coarse"),
        "fine",
        "epsilon = 0.02\nvelocity = monokinetic\nvelocity_offset = 0.03\noffset_profile = potential\n",
        "",
    );
    coarse.n = 32;
    coarse.dt = 2e-3;
    coarse.particles = 50_000;
    coarse.fine_key = true;
    let c = run(&coarse);
    let res = |o: &RunOutput| o.summary.fine_key.iter().find(|(r, _)| *r == 2.0).map(|(_, f)| f.residual);
    match (res(&c), res(&b.fine)) {
        (Some(rc), Some(rf)) => outcome(
            rc <= 1e-2 && rf < rc,
            format!("r = 2 residual {rc:.3e} on 32^2/dt 2e-3 (tol 1e-2), {rf:.3e} on 64^2/dt 1e-3"),
        ),
        _ => outcome(false, "fine-key trace missing".into()),
    }
}

// ----------------------------------------------------------- criterion 11

fn atom(g: &TorusGrid, node: [usize; 3]) -> TorusField {
    let mut f = TorusField::scalar_zeros(g);
    f.values_mut(0)[g.flat_index(&node)] = g.len() as f64;
    f
}

fn w1_oracles() -> Outcome {
    let g = TorusGrid::new(2, 8).unwrap();
    let h = g.spacing();
    let mut err: f64 = 0.0;
    for (a, b, ell) in [
        ([0, 0, 0], [3, 0, 0], 3.0 * h),
        ([1, 1, 0], [7, 1, 0], 2.0 * h),
        ([0, 0, 0], [4, 4, 0], 32f64.sqrt() * h),
        ([2, 5, 0], [5, 1, 0], 5.0 * h),
    ] {
        err = err.max((wasserstein1(&atom(&g, a), &atom(&g, b)).unwrap() - ell).abs());
    }
    // δ₀ against ½δ₀ + ½δ_π on the circle
    let ys = [0.0, PI];
    let split = w1_exact_points(&[1.0], &[0.5, 0.5], |_, t| torus_distance(&[0.0], &[ys[t]]));
    err = err.max((split - PI / 2.0).abs());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random = || {
        let vals = (0..g.len()).map(|_| 0.05 + rng.random::<f64>()).collect();
        let f = TorusField::from_components(&g, vec![vals]).unwrap();
        let m = f.mean(0);
        f.scaled(1.0 / m)
    };
    let (mut sym, mut selfd, mut tri): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for _ in 0..50 {
        let (a, b, c) = (random(), random(), random());
        let ab = wasserstein1(&a, &b).unwrap();
        let ba = wasserstein1(&b, &a).unwrap();
        let bc = wasserstein1(&b, &c).unwrap();
        let ac = wasserstein1(&a, &c).unwrap();
        sym = sym.max((ab - ba).abs());
        selfd = selfd.max(wasserstein1(&a, &a).unwrap());
        tri = tri.min(ab + bc - ac);
    }
    let ok = err <= 1e-3 && sym <= 1e-10 && selfd <= 1e-10 && tri >= -1e-6;
    outcome(
        ok,
        format!(
            "oracle error {err:.2e} (tol 1e-3); 50 triples: asymmetry {sym:.1e}, self-distance {selfd:.1e}, min triangle slack {tri:.2e}"
        ),
    )
}

// ------------------------------------------------------ criteria 6, 7, 8, 12

fn slope_of(fit: &RateFit, metric: &str) -> f64 {
    fit.slope(metric).map(|s| s.slope).unwrap_or(f64::NAN)
}

fn list(xs: impl Iterator<Item = f64>) -> String {
    xs.map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn light_rate(root: &Path) -> Outcome {
    let cfg = sweep_config(&root.join("sweep_light"), "light", "velocity = monokinetic\n");
    let fit = run_sweep(&cfg).expect("light sweep");
    let s = slope_of(&fit, "u_err_sup");
    outcome(
        s >= 0.45,
        format!("slope {s:.3} (>= 0.45); sup ||u - u_TNS|| = [{}]", list(fit.members.iter().map(|m| m.u_err_sup))),
    )
}

fn light_fast_rate(root: &Path) -> Outcome {
    let cfg = sweep_config(&root.join("sweep_light_fast"), "light_fast", "velocity = monokinetic\n");
    let fit = run_sweep(&cfg).expect("light-fast sweep");
    let s = slope_of(&fit, "u_err_sup");
    let speeds: Vec<f64> = fit.members.iter().map(|m| m.speed_final).collect();
    let monotone = speeds.windows(2).all(|w| w[1] < w[0]);
    outcome(
        s >= 0.45 && monotone,
        format!(
            "slope {s:.3} (>= 0.45); int f|v| at t=1 = [{}] monotone {monotone}",
            list(speeds.iter().copied())
        ),
    )
}

fn fine_rate(root: &Path) -> Outcome {
    let cfg = sweep_config(
        &root.join("sweep_fine"),
        "fine",
        "velocity = monokinetic\nvelocity_offset = 0.03\noffset_profile = potential\n",
    );
    let fit = run_sweep(&cfg).expect("fine sweep");
    let s = slope_of(&fit, "combined");
    let m = &fit.members;
    // ∫∫f|v - u|² ∝ ε: ratio of consecutive values over the ε ratio
    let ratios: Vec<f64> = m
        .windows(2)
        .map(|w| (w[0].misalignment_integral / w[1].misalignment_integral) / (w[0].epsilon / w[1].epsilon))
        .collect();
    let linear = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let strong = m.iter().all(|x| x.strong_grad_ok);
    outcome(
        s >= 0.45 && linear,
        format!(
            "combined slope {s:.3} (>= 0.45), errors [{}]; misalignment integral [{}], normalized ratios [{}] (within x2); strong flag {strong}",
            list(m.iter().map(|x| x.combined)),
            list(m.iter().map(|x| x.misalignment_integral)),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn relative_entropy(root: &Path) -> Outcome {
    let cfg = sweep_config(
        &root.join("sweep_fine_entropy"),
        "fine",
        "velocity = maxwellian\ntheta = 0.01\ntheta_eps_power = 1\n",
    );
    let fit = run_sweep(&cfg).expect("fine well-prepared sweep");
    let c: Vec<f64> = fit.members.iter().map(|m| m.c_fit).collect();
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let cmax = hi;
    let bounded = fit.members.iter().all(|m| m.rel_entropy_sup <= cmax * (m.initial_gap + m.epsilon) * (1.0 + 1e-12));
    outcome(
        bounded && hi <= 2.0 * lo && lo > 0.0,
        format!(
            "C_fit = [{}], spread {:.3} (<= 2); sup H = [{}]",
            list(c.iter().copied()),
            hi / lo,
            list(fit.members.iter().map(|m| m.rel_entropy_sup))
        ),
    )
}

// -------------------------------------------------------------------- main

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |label: &str| filters.is_empty() || filters.iter().any(|f| label.contains(f.as_str()));
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();

    let mut results: Vec<(String, Outcome, f64)> = Vec::new();
    let mut record = |label: &str, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(label) {
            return;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {label}: {} [{secs:.0}s]", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((label.to_string(), o, secs));
    };

    record("criterion 1 fluid oracle", &mut taylor_green);
    record("criterion 2 pusher oracle", &mut pusher);
    let needs_baselines = [
        "criterion 3 conservation",
        "criterion 4 energy inequality",
        "criterion 5 modulated energy",
        "criterion 10 fine-key identity",
    ]
    .iter()
    .any(|l| wanted(l));
    let base = needs_baselines.then(|| baselines(root));
    if let Some(b) = &base {
        record("criterion 3 conservation", &mut || conservation(b));
        record("criterion 4 energy inequality", &mut || energy_inequality(b));
        record("criterion 5 modulated energy", &mut || modulated_energy(b));
    }
    record("criterion 6 light rate", &mut || light_rate(root));
    record("criterion 7 light-fast rate", &mut || light_fast_rate(root));
    record("criterion 8 fine rate", &mut || fine_rate(root));
    record("criterion 9 jacobian bound", &mut jacobian);
    if let Some(b) = &base {
        record("criterion 10 fine-key identity", &mut || fine_key(b, root));
    }
    record("criterion 11 wasserstein oracles", &mut w1_oracles);
    record("criterion 12 relative entropy", &mut || relative_entropy(root));

    let failed = results.iter().filter(|(_, o, _)| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
