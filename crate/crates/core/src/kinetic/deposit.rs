use rayon::prelude::*;

use super::ensemble::ParticleEnsemble;
use super::interp::Stencil;
use super::regime::ScalingRegime;
use super::CHUNK;
use crate::error::{Result, VnsError};
use crate::grid_spectral::{dealias_spectrum, TorusField};

/// Grid moments of the particle distribution.
#[derive(Clone, Debug)]
pub struct MomentFields {
    /// `ρ = ∫ f dv`.
    pub rho: TorusField,
    /// `j = (1/σ) ∫ v f dv`.
    pub current: TorusField,
    /// Brinkman force `F = (j - ρu)/γ`, deposited in relative-flux form.
    pub brinkman: TorusField,
}

/// Particle sums gathered during deposition, all with the `1/σ` scaling of
/// the velocity: `w = v/σ`, `U = u(x)` interpolated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DepositSums {
    /// `Σ w_i`.
    pub mass: f64,
    /// `Σ w_i v_i/σ`.
    pub current: [f64; 3],
    /// `Σ w_i |v_i/σ|²`.
    pub second_moment: f64,
    /// `Σ w_i |v_i/σ - u(x_i)|²`.
    pub misalignment_sq: f64,
    /// `Σ w_i |v_i/σ - u(x_i)|`.
    pub misalignment_abs: f64,
    /// `Σ w_i |v_i|`.
    pub speed: f64,
}

impl DepositSums {
    fn merge(&mut self, o: &DepositSums) {
        self.mass += o.mass;
        for a in 0..3 {
            self.current[a] += o.current[a];
        }
        self.second_moment += o.second_moment;
        self.misalignment_sq += o.misalignment_sq;
        self.misalignment_abs += o.misalignment_abs;
        self.speed += o.speed;
    }
}

/// Deposition options.
#[derive(Clone, Copy, Debug, Default)]
pub struct DepositOptions {
    /// Apply the 2/3 spectral filter to the deposited force.
    pub smooth_force: bool,
}

/// Cloud-in-cell deposition of `ρ`, `j` and `F`.
pub fn deposit(ens: &ParticleEnsemble, u: &TorusField, regime: &ScalingRegime) -> Result<MomentFields> {
    deposit_with_sums(ens, u, regime, DepositOptions::default()).map(|(m, _)| m)
}

/// [`deposit`] plus the particle sums used by the diagnostics.
pub fn deposit_with_sums(
    ens: &ParticleEnsemble,
    u: &TorusField,
    regime: &ScalingRegime,
    opts: DepositOptions,
) -> Result<(MomentFields, DepositSums)> {
    if !u.is_vector() || u.grid().dim() != ens.dim() {
        return Err(VnsError::Mismatch("velocity field does not match ensemble dimension".into()));
    }
    u.check_finite()?;
    let grid = u.grid().clone();
    let d = ens.dim();
    let len = grid.len();
    let scale = len as f64;
    let (gamma, sigma) = (regime.gamma, regime.sigma);
    // buffer layout: [ρ, j_0..j_d, F_0..F_d]
    let parts: Vec<(Vec<Vec<f64>>, DepositSums)> = ens
        .pos
        .par_chunks(CHUNK * d)
        .zip(ens.vel.par_chunks(CHUNK * d))
        .zip(ens.weight.par_chunks(CHUNK))
        .map(|((xs, vs), ws)| {
            let mut buf = vec![vec![0.0; len]; 1 + 2 * d];
            let mut sums = DepositSums::default();
            for ((x, v), &w) in xs.chunks_exact(d).zip(vs.chunks_exact(d)).zip(ws) {
                let st = Stencil::new(&grid, x);
                let ux = st.interp(u);
                let mut ws_ = [0.0; 3];
                let mut rel = [0.0; 3];
                let (mut r2, mut v2, mut s2) = (0.0, 0.0, 0.0);
                for a in 0..d {
                    ws_[a] = v[a] / sigma;
                    rel[a] = ws_[a] - ux[a];
                    r2 += rel[a] * rel[a];
                    v2 += ws_[a] * ws_[a];
                    s2 += v[a] * v[a];
                }
                sums.mass += w;
                for a in 0..d {
                    sums.current[a] += w * ws_[a];
                }
                sums.second_moment += w * v2;
                sums.misalignment_sq += w * r2;
                sums.misalignment_abs += w * r2.sqrt();
                sums.speed += w * s2.sqrt();
                let wm = w * scale;
                for k in 0..st.len {
                    let s = wm * st.w[k];
                    let i = st.idx[k];
                    buf[0][i] += s;
                    for a in 0..d {
                        buf[1 + a][i] += s * ws_[a];
                        buf[1 + d + a][i] += s * rel[a] / gamma;
                    }
                }
            }
            (buf, sums)
        })
        .collect();
    let mut total = vec![vec![0.0; len]; 1 + 2 * d];
    let mut sums = DepositSums::default();
    for (buf, s) in parts {
        for (t, p) in total.iter_mut().zip(buf) {
            t.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        sums.merge(&s);
    }
    let force: Vec<Vec<f64>> = total.drain(1 + d..).collect();
    let current: Vec<Vec<f64>> = total.drain(1..).collect();
    let rho = TorusField::from_components(&grid, total)?;
    let current = TorusField::from_components(&grid, current)?;
    let mut brinkman = TorusField::from_components(&grid, force)?;
    if opts.smooth_force {
        let mut s = brinkman.spectrum();
        dealias_spectrum(&mut s);
        brinkman = s.to_field();
    }
    Ok((MomentFields { rho, current, brinkman }, sums))
}
