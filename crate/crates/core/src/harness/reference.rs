//! Limit-model trajectories sampled on the diagnostic cadence.

use super::config::{ReferenceModel, RunConfig};
use crate::error::{Result, VnsError};
use crate::grid_spectral::TorusField;
use crate::limit::{ins_step, tns_step, InsState, TnsState};

/// Reference fields at one diagnostic time.
#[derive(Clone, Debug)]
pub struct ReferenceSample {
    /// Global step index, `t = step * dt`.
    pub step: usize,
    pub t: f64,
    pub u: TorusField,
    pub rho: TorusField,
    /// `G = -(∂t u + u·∇u)` of the limit model.
    pub g: TorusField,
}

#[derive(Clone, Debug)]
pub struct ReferenceTrajectory {
    pub model: ReferenceModel,
    pub samples: Vec<ReferenceSample>,
}

impl ReferenceTrajectory {
    pub fn at_step(&self, step: usize) -> Option<&ReferenceSample> {
        self.samples
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.samples[i])
    }
}

/// Number of steps needed to reach `t_final` from `t0`.
pub fn step_count(cfg: &RunConfig, t0: f64) -> usize {
    ((cfg.t_final - t0) / cfg.dt).round().max(0.0) as usize
}

/// True when global step `step` (of `last`) is a diagnostic sample.
pub fn is_sample(cfg: &RunConfig, step: usize, last: usize) -> bool {
    step % cfg.cadence_steps() == 0 || step == last
}

enum Limit {
    Tns(TnsState),
    Ins(InsState),
}

impl Limit {
    fn fields(&self) -> Result<(TorusField, TorusField, TorusField)> {
        match self {
            Limit::Tns(s) => Ok((s.u.clone(), s.rho.clone(), s.pressure_term()?)),
            Limit::Ins(s) => Ok((s.u.clone(), s.rho.clone(), s.pressure_term()?)),
        }
    }

    fn t(&self) -> f64 {
        match self {
            Limit::Tns(s) => s.t,
            Limit::Ins(s) => s.t,
        }
    }

    fn step(&self, dt: f64) -> Result<Limit> {
        Ok(match self {
            Limit::Tns(s) => Limit::Tns(tns_step(s, dt)?),
            Limit::Ins(s) => Limit::Ins(ins_step(s, dt)?),
        })
    }
}

/// Runs the configured limit model from `(u0, rho0)` at time 0 with the
/// run's step and cadence.
pub fn run_reference(cfg: &RunConfig, u0: &TorusField, rho0: &TorusField) -> Result<ReferenceTrajectory> {
    let mut state = match cfg.reference {
        ReferenceModel::Tns => Limit::Tns(TnsState::new(u0.clone(), rho0.clone(), 0.0)?),
        ReferenceModel::Ins => Limit::Ins(InsState::new(u0.clone(), rho0.clone(), 0.0)?),
        ReferenceModel::None => {
            return Err(VnsError::Config("no reference model selected".into()));
        }
    };
    let last = step_count(cfg, 0.0);
    let mut samples = Vec::new();
    for step in 0..=last {
        if is_sample(cfg, step, last) {
            let (u, rho, g) = state.fields()?;
            samples.push(ReferenceSample { step, t: step as f64 * cfg.dt, u, rho, g });
        }
        if step < last {
            let t = state.t();
            state = state
                .step(cfg.dt)
                .map_err(|e| VnsError::RunFailed { t, source: Box::new(e) })?;
        }
    }
    Ok(ReferenceTrajectory { model: cfg.reference, samples })
}
