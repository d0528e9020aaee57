//! Initial data built from the named presets of a [`RunConfig`].

use super::config::{DensityPreset, OffsetProfile, RunConfig, VelocityLaw, VelocityPreset};
use crate::error::Result;
use crate::grid_spectral::{leray_project, TorusField, TorusGrid};
use crate::kinetic::{InitialDataSpec, ScalingRegime, VelocitySpec};

pub fn build_grid(cfg: &RunConfig) -> Result<TorusGrid> {
    TorusGrid::new(cfg.dim, cfg.n)
}

/// Divergence-free initial velocity.
pub fn initial_velocity(cfg: &RunConfig, grid: &TorusGrid) -> Result<TorusField> {
    let a = cfg.u0_amplitude;
    let d = grid.dim();
    let raw = match cfg.u0 {
        VelocityPreset::Zero => TorusField::vector_zeros(grid),
        VelocityPreset::Constant => TorusField::constant_vector(grid, &cfg.u0_constant),
        VelocityPreset::TaylorGreen if d == 2 => TorusField::vector_from_fn(grid, |x| {
            [a * x[0].sin() * x[1].cos(), -a * x[0].cos() * x[1].sin(), 0.0]
        }),
        VelocityPreset::TaylorGreen => TorusField::vector_from_fn(grid, |x| {
            [
                a * x[0].sin() * x[1].cos() * x[2].cos(),
                -a * x[0].cos() * x[1].sin() * x[2].cos(),
                0.0,
            ]
        }),
        VelocityPreset::Shear => TorusField::vector_from_fn(grid, |x| [a * x[1].sin(), 0.0, 0.0]),
        // a few low modes, projected below
        VelocityPreset::Modes => TorusField::vector_from_fn(grid, |x| {
            let z = if d == 3 { x[2] } else { 0.0 };
            [
                a * (x[1].sin() + 0.5 * (x[0] + 2.0 * x[1] + 0.3).cos() + 0.25 * (2.0 * x[1] - z).sin()),
                a * (0.8 * (x[0] + 0.7).cos() - 0.4 * (2.0 * x[0] - x[1]).sin()),
                a * 0.3 * (x[0] - x[1]).cos(),
            ]
        }),
    };
    leray_project(&raw)
}

/// Initial particle density with total mass `cfg.mass`.
pub fn initial_density(cfg: &RunConfig, grid: &TorusGrid) -> TorusField {
    let m = cfg.mass;
    let a = cfg.rho0_amplitude;
    match cfg.rho0 {
        DensityPreset::Uniform => TorusField::constant_scalar(grid, m),
        DensityPreset::Cosine => TorusField::scalar_from_fn(grid, |x| m * (1.0 + a * x[0].cos())),
        DensityPreset::Bump => {
            let d = grid.dim();
            let b = TorusField::scalar_from_fn(grid, |x| {
                let s: f64 = (0..d).map(|k| x[k].cos() - 1.0).sum();
                (2.0 * s).exp()
            });
            let mean = b.mean(0);
            let vals = b.values(0).iter().map(|v| m * ((1.0 - a) + a * v / mean)).collect();
            TorusField::from_components(grid, vec![vals]).expect("layout")
        }
    }
}

/// Mean velocity field of the particles: `σ (u⁰ + δ w)`, with `δ` the
/// `velocity_offset` and `w` given by the offset profile.
pub fn particle_mean_velocity(cfg: &RunConfig, regime: &ScalingRegime, u0: &TorusField) -> TorusField {
    let grid = u0.grid();
    let delta = cfg.velocity_offset;
    let mut w = u0.clone();
    if delta != 0.0 {
        let pert = match cfg.offset_profile {
            OffsetProfile::Solenoidal => TorusField::vector_from_fn(grid, |x| [x[1].cos(), x[0].sin(), x[0].cos()]),
            OffsetProfile::Potential => {
                let rho = initial_density(cfg, grid);
                let d = grid.dim();
                let mut p = TorusField::vector_from_fn(grid, |x| [x[0].cos(), x[1].cos(), x[2].cos()]);
                for c in 0..d {
                    for (pv, r) in p.values_mut(c).iter_mut().zip(rho.values(0)) {
                        *pv = if *r > 0.0 { *pv / r } else { 0.0 };
                    }
                }
                p
            }
        };
        w.axpy(delta, &pert);
    }
    w.scale(regime.sigma);
    w
}

pub fn initial_data(cfg: &RunConfig, regime: &ScalingRegime, u0: &TorusField) -> InitialDataSpec {
    let grid = u0.grid();
    let mean = particle_mean_velocity(cfg, regime, u0);
    let velocity = match cfg.velocity {
        VelocityLaw::Monokinetic => VelocitySpec::Monokinetic(mean),
        VelocityLaw::Maxwellian => VelocitySpec::Maxwellian { mean, theta: cfg.effective_theta() },
        VelocityLaw::PairedMaxwellian => VelocitySpec::PairedMaxwellian { mean, theta: cfg.effective_theta() },
    };
    InitialDataSpec { rho0: initial_density(cfg, grid), velocity }
}
