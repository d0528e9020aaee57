//! The coupled particle–fluid time loop.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{ReferenceModel, RunConfig, Splitting};
use super::presets::{build_grid, initial_data, initial_velocity};
use super::reference::{is_sample, run_reference, step_count, ReferenceTrajectory};
use crate::error::{Result, VnsError};
use crate::fluid::{ns_rhs, ns_step, ExistenceMonitor, FluidState};
use crate::functionals::{
    fine_key_residual, higher_dissipation, lambda_bound, modulated_energy, relative_entropy,
    wasserstein1_with, write_csv, DiagnosticRecord, FineKeyResidual, FineKeyTrace, ReferenceFields,
};
use crate::grid_spectral::{gradient, leray_project, snapshot, sobolev_norm, TorusField};
use crate::kinetic::{
    deposit, deposit_with_sums, push_exchange, sample_initial, DepositOptions, ParticleEnsemble,
    ScalingRegime,
};

/// Distances to the reference solution at one diagnostic time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    /// `‖u_ε - u_ref‖_{L²}`.
    pub u_l2: f64,
    /// `‖ρ_ε - ρ_ref‖_{Ḣ⁻¹}`.
    pub rho_hm1: f64,
    pub w1: Option<f64>,
}

/// Scalar outcomes of a run.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// `⟨(ε/γ) j + u⟩` at start and end.
    pub momentum_initial: [f64; 3],
    pub momentum_final: [f64; 3],
    /// `|⟨u⁰⟩| + ‖u⁰‖ + (ε/γ) Σ w |v|/σ`, the normalization of the drift.
    pub momentum_scale: f64,
    /// Largest `|P(t) - P(0)| / scale` over all steps.
    pub momentum_drift: f64,
    pub energy_initial: f64,
    /// Largest `(E(t) + ∫₀ᵗ D) / E(0)`; zero when `E(0) = 0`.
    pub energy_ratio_max: f64,
    /// Largest per-step relative increase of the modulated energy.
    pub modulated_increase_max: f64,
    /// Same, restricted to steps where the strong-existence flag holds.
    pub modulated_increase_flagged: f64,
    /// `∫ Σ w |v/σ - u|² dt`.
    pub misalignment_integral: f64,
    /// `‖F‖_{L∞}` of the first deposit.
    pub initial_force_linf: f64,
    pub accum_grad: f64,
    pub strong_grad_ok: bool,
    pub fine_key: Vec<(f64, FineKeyResidual)>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticRecord>,
    pub errors: Vec<ErrorSample>,
    pub summary: RunSummary,
    pub u: TorusField,
    pub rho: TorusField,
    pub ensemble: ParticleEnsemble,
}

/// Starting point of a run.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub u: TorusField,
    pub ensemble: ParticleEnsemble,
    pub t: f64,
}

pub const U_SNAPSHOT: &str = "u_final.vnsf";
pub const RHO_SNAPSHOT: &str = "rho_final.vnsf";
pub const PARTICLE_SNAPSHOT: &str = "particles_final.vnsp";
pub const STATE_FILE: &str = "state.txt";

/// Samples the configured initial data, or loads the restart snapshots.
pub fn initial_state(cfg: &RunConfig) -> Result<InitialState> {
    if let Some(dir) = &cfg.restart {
        return load_restart(cfg, dir);
    }
    let grid = build_grid(cfg)?;
    let regime = cfg.scaling()?;
    let u = initial_velocity(cfg, &grid)?;
    let spec = initial_data(cfg, &regime, &u);
    let ensemble = sample_initial(&spec, cfg.particles, cfg.seed)?;
    Ok(InitialState { u, ensemble, t: 0.0 })
}

fn load_restart(cfg: &RunConfig, dir: &Path) -> Result<InitialState> {
    let u = snapshot::load_field(&dir.join(U_SNAPSHOT))?;
    let ensemble = ParticleEnsemble::load(&dir.join(PARTICLE_SNAPSHOT))?;
    let text = fs::read_to_string(dir.join(STATE_FILE))?;
    let t = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == "t")
        .and_then(|(_, v)| v.trim().parse::<f64>().ok())
        .ok_or_else(|| VnsError::Format(format!("no 't = ...' line in {STATE_FILE}")))?;
    if u.grid().dim() != cfg.dim || u.grid().n() != cfg.n || ensemble.dim() != cfg.dim {
        return Err(VnsError::Config("restart snapshots do not match dim and n".into()));
    }
    Ok(InitialState { u, ensemble, t })
}

/// Reference trajectory for `cfg`, started from the configured `u⁰` and
/// the deposited initial particle density.
pub fn reference_for(cfg: &RunConfig) -> Result<ReferenceTrajectory> {
    let init = initial_state(cfg)?;
    let regime = cfg.scaling()?;
    let rho0 = deposit(&init.ensemble, &init.u, &regime)?.rho;
    run_reference(cfg, &init.u, &rho0)
}

/// One coupled step of length `dt`; `f_n` is the force deposited at the
/// start of the step.
///
/// `fkf`: half fluid step with `f_n`, particle push against the half-step
/// velocity, then a half fluid step with `2 F_eff - f_n`, where `F_eff` is
/// the momentum the push removed from the particles per unit time. `kfk`:
/// half push, full fluid step, half push, with the second exchange applied
/// as a projected impulse. Both move exactly the momentum lost by the
/// particles into the fluid.
pub fn coupled_step(
    fluid: &FluidState,
    ens: &mut ParticleEnsemble,
    f_n: &TorusField,
    regime: &ScalingRegime,
    dt: f64,
    splitting: Splitting,
) -> Result<FluidState> {
    match splitting {
        Splitting::Fkf => {
            let half = ns_step(fluid, f_n, 0.5 * dt)?;
            let f_eff = push_exchange(ens, &half.u, regime, dt)?;
            let second = f_eff.lincomb(2.0, f_n, -1.0);
            ns_step(&half, &second, 0.5 * dt)
        }
        Splitting::Kfk => {
            let f1 = push_exchange(ens, &fluid.u, regime, 0.5 * dt)?;
            let mid = ns_step(fluid, &f1.scaled(0.5), dt)?;
            let f2 = push_exchange(ens, &mid.u, regime, 0.5 * dt)?;
            let mut u = mid.u;
            u.axpy(0.5 * dt, &leray_project(&f2)?);
            Ok(FluidState { u, t: mid.t })
        }
    }
}

fn total_momentum(sums_current: &[f64; 3], u: &TorusField, regime: &ScalingRegime) -> [f64; 3] {
    let mu = u.mean_vector();
    let k = regime.epsilon / regime.gamma;
    let mut p = [0.0; 3];
    for a in 0..u.grid().dim() {
        p[a] = k * sums_current[a] + mu[a];
    }
    p
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Indices (among the `count` diagnostic samples) at which W₁ is evaluated.
fn w1_indices(count: usize, m: usize) -> Vec<usize> {
    match (count, m) {
        (0, _) | (_, 0) => Vec::new(),
        (_, 1) => vec![count - 1],
        _ => {
            let mut v: Vec<usize> = (0..m)
                .map(|i| ((i as f64) * (count - 1) as f64 / (m - 1) as f64).round() as usize)
                .collect();
            v.dedup();
            v
        }
    }
}

/// Runs the coupled system without touching the file system.
///
/// With `reference` given, error samples and the relative entropy are
/// computed against it at every diagnostic time.
pub fn simulate(cfg: &RunConfig, init: InitialState, reference: Option<&ReferenceTrajectory>) -> Result<RunOutput> {
    cfg.validate()?;
    let regime = cfg.scaling()?;
    let dt = cfg.dt;
    let (eps, gamma, sigma) = (regime.epsilon, regime.gamma, regime.sigma);
    let InitialState { u, ensemble: mut ens, t: t0 } = init;
    let mut fluid = FluidState::new(u, t0)?;
    let nsteps = step_count(cfg, t0);
    let step0 = (t0 / dt).round() as usize;
    let last = step0 + nsteps;
    let sample_count = (step0..=last).filter(|&s| is_sample(cfg, s, last)).count();
    let w1_at = w1_indices(sample_count, if reference.is_some() { cfg.w1_samples } else { 0 });
    let opts = DepositOptions { smooth_force: cfg.smooth_force };
    let mut monitor = ExistenceMonitor::new(&fluid.u, cfg.c_star);
    let mut traces: Vec<FineKeyTrace> = if cfg.fine_key {
        cfg.higher_r.iter().map(|&r| FineKeyTrace::new(r, eps)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut summary = RunSummary { t_start: t0, steps: nsteps, strong_grad_ok: true, ..Default::default() };
    let mut diss_int = 0.0;
    let mut mis_int = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None; // (D, misalignment², 𝓔)
    let mut sample_idx = 0;
    let mut last_rho = TorusField::scalar_zeros(fluid.u.grid());

    for s in 0..=nsteps {
        let t = t0 + s as f64 * dt;
        let global = step0 + s;
        let fail = |e: VnsError| VnsError::RunFailed { t, source: Box::new(e) };
        let (moments, sums) = deposit_with_sums(&ens, &fluid.u, &regime, opts).map_err(fail)?;
        let grad = gradient(&fluid.u);
        let d = grad.l2_norm_sq() + sums.misalignment_sq / gamma;
        let energy = 0.5 * (eps / gamma) * sums.second_moment + 0.5 * fluid.u.l2_norm_sq();
        let me = modulated_energy(&ens, &fluid.u, &regime);
        let momentum = total_momentum(&sums.current, &fluid.u, &regime);
        let flags = monitor.update(t - t0, &fluid.u, &moments.brinkman);

        if let Some((d_prev, mis_prev, me_prev)) = prev {
            diss_int += 0.5 * dt * (d_prev + d);
            mis_int += 0.5 * dt * (mis_prev + sums.misalignment_sq);
            if me_prev > 0.0 {
                let inc = (me - me_prev) / me_prev;
                summary.modulated_increase_max = summary.modulated_increase_max.max(inc);
                if flags.strong_grad_ok {
                    summary.modulated_increase_flagged = summary.modulated_increase_flagged.max(inc);
                }
            }
        } else {
            summary.mass_initial = sums.mass;
            summary.momentum_initial = momentum;
            summary.energy_initial = energy;
            summary.initial_force_linf = moments.brinkman.linf();
            summary.momentum_scale = norm3(&fluid.u.mean_vector())
                + fluid.u.l2_norm()
                + (eps / gamma) * sums.speed / sigma;
        }
        prev = Some((d, sums.misalignment_sq, me));
        if summary.energy_initial > 0.0 {
            summary.energy_ratio_max = summary.energy_ratio_max.max((energy + diss_int) / summary.energy_initial);
        }
        let drift = {
            let p0 = summary.momentum_initial;
            norm3(&[momentum[0] - p0[0], momentum[1] - p0[1], momentum[2] - p0[2]])
        };
        if summary.momentum_scale > 0.0 {
            summary.momentum_drift = summary.momentum_drift.max(drift / summary.momentum_scale);
        }

        if !traces.is_empty() {
            let dudt = ns_rhs(&fluid.u, &moments.brinkman).map_err(fail)?;
            for tr in &mut traces {
                tr.record(t, &ens, &fluid.u, &dudt, &grad);
            }
        }

        if is_sample(cfg, global, last) {
            let rho_linf = moments.rho.max(0).max(0.0);
            let mut rec = DiagnosticRecord {
                t,
                energy,
                dissipation: d,
                dissipation_integral: diss_int,
                modulated_energy: me,
                lambda_bound: lambda_bound(rho_linf, &regime),
                concentration_l2: sums.misalignment_sq,
                concentration_l1: sums.misalignment_abs,
                brinkman_l2: moments.brinkman.l2_norm(),
                rho_linf,
                accum_grad: monitor.accum_grad,
                accum_f_l2: monitor.accum_f_l2,
                accum_heat: monitor.accum_heat,
                strong_grad_ok: flags.strong_grad_ok,
                small_data_ok: flags.small_data_ok,
                momentum,
                higher: cfg
                    .higher_r
                    .iter()
                    .map(|&r| (r, higher_dissipation(&ens, &fluid.u, r, &regime)))
                    .collect(),
                ..Default::default()
            };
            if let Some(sample) = reference.and_then(|r| r.at_step(global)) {
                let fields = ReferenceFields { u: &sample.u, rho: &sample.rho, g: &sample.g };
                let h = relative_entropy(&ens, &fluid.u, &moments.rho, &fields, &regime).map_err(fail)?;
                rec.rel_entropy = Some(h.value);
                rec.entropy_terms = Some(h.terms);
                let w1 = if w1_at.contains(&sample_idx) {
                    let clipped = TorusField::from_components(
                        sample.rho.grid(),
                        vec![sample.rho.values(0).iter().map(|x| x.max(0.0)).collect()],
                    )?;
                    Some(wasserstein1_with(&moments.rho, &clipped, cfg.w1_method).map_err(fail)?)
                } else {
                    None
                };
                errors.push(ErrorSample {
                    t,
                    u_l2: fluid.u.sub(&sample.u).l2_norm(),
                    rho_hm1: sobolev_norm(&moments.rho.sub(&sample.rho), -1.0, true),
                    w1,
                });
            }
            records.push(rec);
            sample_idx += 1;
        }

        if s == nsteps {
            summary.mass_final = sums.mass;
            summary.momentum_final = momentum;
            last_rho = moments.rho;
            break;
        }
        fluid = coupled_step(&fluid, &mut ens, &moments.brinkman, &regime, dt, cfg.splitting).map_err(fail)?;
    }

    summary.t_end = t0 + nsteps as f64 * dt;
    summary.misalignment_integral = mis_int;
    summary.accum_grad = monitor.accum_grad;
    summary.strong_grad_ok = monitor.flags().strong_grad_ok;
    for tr in &traces {
        if tr.len() >= 3 {
            summary.fine_key.push((tr.r, fine_key_residual(tr)?));
        }
    }
    Ok(RunOutput { records, errors, summary, u: fluid.u, rho: last_rho, ensemble: ens })
}

fn write_errors(path: &Path, errors: &[ErrorSample]) -> Result<()> {
    let mut s = String::from("t,u_l2,rho_hm1,w1\n");
    for e in errors {
        let w1 = e.w1.map(|w| format!("{w:.17e}")).unwrap_or_default();
        let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{}", e.t, e.u_l2, e.rho_hm1, w1);
    }
    fs::write(path, s)?;
    Ok(())
}

impl RunSummary {
    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let v3 = |x: &[f64; 3]| format!("{:e}, {:e}, {:e}", x[0], x[1], x[2]);
        let _ = writeln!(s, "t_start = {:?}\nt_end = {:?}\nsteps = {}", self.t_start, self.t_end, self.steps);
        let _ = writeln!(s, "mass_initial = {:?}\nmass_final = {:?}", self.mass_initial, self.mass_final);
        let _ = writeln!(s, "momentum_initial = {}", v3(&self.momentum_initial));
        let _ = writeln!(s, "momentum_final = {}", v3(&self.momentum_final));
        let _ = writeln!(s, "momentum_scale = {:e}\nmomentum_drift = {:e}", self.momentum_scale, self.momentum_drift);
        let _ = writeln!(s, "energy_initial = {:e}\nenergy_ratio_max = {:?}", self.energy_initial, self.energy_ratio_max);
        let _ = writeln!(s, "modulated_increase_max = {:e}", self.modulated_increase_max);
        let _ = writeln!(s, "modulated_increase_flagged = {:e}", self.modulated_increase_flagged);
        let _ = writeln!(s, "misalignment_integral = {:e}", self.misalignment_integral);
        let _ = writeln!(s, "initial_force_linf = {:e}", self.initial_force_linf);
        let _ = writeln!(s, "accum_grad = {:e}\nstrong_grad_ok = {}", self.accum_grad, self.strong_grad_ok);
        for (r, fk) in &self.fine_key {
            let _ = writeln!(s, "fine_key_r{r} = {:e} (lhs {:e}, rhs {:e})", fk.residual, fk.lhs, fk.rhs);
        }
        s
    }
}

/// Writes diagnostics, error samples, summary and final snapshots to `dir`.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &out.records, &cfg.higher_r)?;
    fs::write(dir.join("diagnostics.csv"), csv)?;
    if !out.errors.is_empty() {
        write_errors(&dir.join("errors.csv"), &out.errors)?;
    }
    fs::write(dir.join("summary.txt"), out.summary.to_text())?;
    fs::write(dir.join("config.resolved"), cfg.to_text())?;
    if cfg.snapshots {
        snapshot::save_field(&dir.join(U_SNAPSHOT), &out.u)?;
        snapshot::save_field(&dir.join(RHO_SNAPSHOT), &out.rho)?;
        out.ensemble.save(&dir.join(PARTICLE_SNAPSHOT))?;
        fs::write(dir.join(STATE_FILE), format!("t = {:?}\n", out.summary.t_end))?;
    }
    Ok(())
}

/// Machine-readable failure record.
pub fn write_error_record(dir: &Path, err: &VnsError) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (t, kind) = match err {
        VnsError::RunFailed { t, source } => (Some(*t), format!("{source:?}")),
        other => (None, format!("{other:?}")),
    };
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or("").to_string();
    let mut s = String::new();
    let _ = writeln!(s, "status = failed\nkind = {kind}");
    if let Some(t) = t {
        let _ = writeln!(s, "t = {t:?}");
    }
    let _ = writeln!(s, "message = {}", err.to_string().replace('\n', " "));
    fs::write(dir.join("error.txt"), s)?;
    Ok(())
}

/// Full run: initial data, optional reference, time loop, outputs in
/// `cfg.dir`. Failures leave an `error.txt` record.
pub fn run_coupled(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let result = (|| {
        let reference = match cfg.reference {
            ReferenceModel::None => None,
            _ => Some(reference_for(cfg)?),
        };
        let init = initial_state(cfg)?;
        simulate(cfg, init, reference.as_ref())
    })();
    match result {
        Ok(out) => {
            write_outputs(cfg, &out, &cfg.dir)?;
            Ok(out)
        }
        Err(e) => {
            let _ = write_error_record(&cfg.dir, &e);
            Err(e)
        }
    }
}
