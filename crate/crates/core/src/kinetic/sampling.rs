//! Deterministic stratified sampling of initial particle ensembles.
//!
//! Cell `c` receives a particle count proportional to its mass (largest
//! remainder rounding). Inside a cell, points follow an additive
//! low-discrepancy sequence shifted by a random offset. Randomness comes
//! from ChaCha8 seeded with the run seed, using stream `2c` for positions
//! and `2c + 1` for velocities, so each cell is reproducible on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ensemble::ParticleEnsemble;
use super::interp::interpolate;
use crate::error::{Result, VnsError};
use crate::grid_spectral::{TorusField, TorusGrid};

/// Velocity law of the initial distribution.
#[derive(Clone, Debug)]
pub enum VelocitySpec {
    /// `v = w(x)` for a given vector field `w`.
    Monokinetic(TorusField),
    /// `v = m(x) + √θ ξ` with standard Gaussian `ξ`.
    Maxwellian { mean: TorusField, theta: f64 },
    /// Maxwellian drawn in antithetic pairs: consecutive particles of a
    /// cell share a position and get `m(x) ± √θ ξ`, so the sampled current
    /// carries no thermal noise. An odd last particle of a cell gets `m(x)`.
    PairedMaxwellian { mean: TorusField, theta: f64 },
}

/// Initial density and velocity law.
#[derive(Clone, Debug)]
pub struct InitialDataSpec {
    pub rho0: TorusField,
    pub velocity: VelocitySpec,
}

// Additive recurrence constants: 1/φ_d for the generalized golden ratio.
fn kronecker_alpha(d: usize) -> [f64; 3] {
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let mut a = [0.0; 3];
    for (k, ak) in a.iter_mut().enumerate().take(d) {
        *ak = (1.0 / phi.powi(k as i32 + 1)).fract();
    }
    a
}

/// Mass of each grid cell `[i h, (i+1) h)^d`, from the multilinear
/// interpolant of `rho0`; cells are indexed like their lower corner node.
fn cell_masses(rho0: &TorusField) -> Vec<f64> {
    let grid = rho0.grid();
    let d = grid.dim();
    let n = grid.n();
    let vals = rho0.values(0);
    (0..grid.len())
        .map(|c| {
            let m = grid.multi_index(c);
            let mut acc = 0.0;
            for corner in 0..(1 << d) {
                let mut flat = 0;
                for a in 0..d {
                    let up = (corner >> (d - 1 - a)) & 1;
                    flat = flat * n + (m[a] + up) % n;
                }
                acc += vals[flat];
            }
            acc / (1 << d) as f64
        })
        .collect()
}

fn allocate(masses: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = masses.iter().sum();
    if n == 0 || total <= 0.0 {
        return vec![0; masses.len()];
    }
    let ideal: Vec<f64> = masses.iter().map(|m| m / total * n as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    // stable: ties resolved by cell index
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &c in order.iter().take(n.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples `n` equal-weight particles; total weight equals `∫ρ₀`.
pub fn sample_initial(spec: &InitialDataSpec, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    let rho0 = &spec.rho0;
    if rho0.components() != 1 {
        return Err(VnsError::InvalidArgument("rho0 must be a scalar field".into()));
    }
    rho0.check_finite()?;
    if rho0.min(0) < 0.0 {
        return Err(VnsError::InvalidArgument("rho0 is negative somewhere".into()));
    }
    let grid: &TorusGrid = rho0.grid();
    let d = grid.dim();
    match &spec.velocity {
        VelocitySpec::Monokinetic(w) => {
            w.same_layout(&TorusField::vector_zeros(grid))?;
            w.check_finite()?;
        }
        VelocitySpec::Maxwellian { mean, theta } | VelocitySpec::PairedMaxwellian { mean, theta } => {
            mean.same_layout(&TorusField::vector_zeros(grid))?;
            mean.check_finite()?;
            if !(*theta >= 0.0 && theta.is_finite()) {
                return Err(VnsError::InvalidArgument(format!("temperature {theta} must be nonnegative")));
            }
        }
    }
    let mass = rho0.mean(0);
    if n == 0 || mass == 0.0 {
        return Ok(ParticleEnsemble::empty(d));
    }
    let counts = allocate(&cell_masses(rho0), n);
    let alpha = kronecker_alpha(d);
    let h = grid.spacing();
    let w = mass / n as f64;
    let mut pos = Vec::with_capacity(n * d);
    let mut vel = Vec::with_capacity(n * d);
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let origin = grid.node(c);
        let mut prng = cell_rng(seed, 2 * c as u64);
        let shift: [f64; 3] = [prng.random(), prng.random(), prng.random()];
        let mut vrng = cell_rng(seed, 2 * c as u64 + 1);
        let paired = matches!(spec.velocity, VelocitySpec::PairedMaxwellian { .. });
        let mut xi_prev = [0.0; 3];
        for j in 0..count {
            // pairs share the stratified point of their first member
            let slot = if paired { j - j % 2 } else { j };
            let mut x = [0.0; 3];
            for a in 0..d {
                let u = (shift[a] + (slot as f64 + 0.5) * alpha[a]).fract();
                x[a] = super::interp::wrap(origin[a] + u * h);
            }
            let v = match &spec.velocity {
                VelocitySpec::Monokinetic(field) => interpolate(field, &x[..d]),
                VelocitySpec::Maxwellian { mean, theta } => {
                    let m = interpolate(mean, &x[..d]);
                    let s = theta.sqrt();
                    let mut v = [0.0; 3];
                    for a in 0..d {
                        let xi: f64 = vrng.sample(StandardNormal);
                        v[a] = m[a] + s * xi;
                    }
                    v
                }
                VelocitySpec::PairedMaxwellian { mean, theta } => {
                    let m = interpolate(mean, &x[..d]);
                    let s = theta.sqrt();
                    let mut v = [0.0; 3];
                    let second = j % 2 == 1;
                    let unpaired = !second && j + 1 == count;
                    for a in 0..d {
                        if second {
                            v[a] = m[a] - s * xi_prev[a];
                        } else if !unpaired {
                            xi_prev[a] = vrng.sample(StandardNormal);
                            v[a] = m[a] + s * xi_prev[a];
                        } else {
                            v[a] = m[a];
                        }
                    }
                    v
                }
            };
            pos.extend_from_slice(&x[..d]);
            vel.extend_from_slice(&v[..d]);
        }
    }
    ParticleEnsemble::new(d, pos, vel, vec![w; n])
}
