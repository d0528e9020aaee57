use rayon::prelude::*;

use super::ensemble::ParticleEnsemble;
use super::interp::{wrap, Stencil};
use super::regime::ScalingRegime;
use super::CHUNK;
use crate::error::{Result, VnsError};
use crate::grid_spectral::TorusField;

/// Exponential update of one particle against the frozen value `U`.
///
/// Returns the relative velocity `v - σU` before the update.
#[inline]
pub fn push_particle(
    x: &mut [f64],
    v: &mut [f64],
    big_u: &[f64; 3],
    regime: &ScalingRegime,
    dt: f64,
) -> [f64; 3] {
    let (eps, sigma) = (regime.epsilon, regime.sigma);
    let e = (-dt / eps).exp();
    let om = -(-dt / eps).exp_m1();
    let mut rel = [0.0; 3];
    for a in 0..x.len() {
        let su = sigma * big_u[a];
        let dv = v[a] - su;
        rel[a] = dv;
        v[a] = su + dv * e;
        x[a] = wrap(x[a] + dt * big_u[a] + (eps / sigma) * om * dv);
    }
    rel
}

fn check(ens: &ParticleEnsemble, u: &TorusField, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VnsError::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    if !u.is_vector() || u.grid().dim() != ens.dim() {
        return Err(VnsError::Mismatch("velocity field does not match ensemble dimension".into()));
    }
    u.check_finite()
}

/// Advances every particle by `dt` along the characteristics, with `u`
/// sampled at the predicted midpoint `x + dt v / (2σ)`.
pub fn push(ens: &mut ParticleEnsemble, u: &TorusField, regime: &ScalingRegime, dt: f64) -> Result<()> {
    push_inner(ens, u, regime, dt, false).map(|_| ())
}

/// Same as [`push`], and returns the force field exerted on the fluid
/// during the step: the momentum lost by the particles divided by `dt`,
/// deposited at the midpoints with the interpolation kernel.
pub fn push_exchange(
    ens: &mut ParticleEnsemble,
    u: &TorusField,
    regime: &ScalingRegime,
    dt: f64,
) -> Result<TorusField> {
    push_inner(ens, u, regime, dt, true).map(|f| f.expect("exchange requested"))
}

fn push_inner(
    ens: &mut ParticleEnsemble,
    u: &TorusField,
    regime: &ScalingRegime,
    dt: f64,
    exchange: bool,
) -> Result<Option<TorusField>> {
    check(ens, u, dt)?;
    let grid = u.grid().clone();
    let d = ens.dim();
    let len = grid.len();
    let (eps, gamma, sigma) = (regime.epsilon, regime.gamma, regime.sigma);
    let om = -(-dt / eps).exp_m1();
    let coef = len as f64 * eps * om / (gamma * sigma * dt);
    let weights = &ens.weight;
    let pos = &mut ens.pos;
    let vel = &mut ens.vel;
    let partials: Vec<Option<Vec<Vec<f64>>>> = pos
        .par_chunks_mut(CHUNK * d)
        .zip(vel.par_chunks_mut(CHUNK * d))
        .enumerate()
        .map(|(chunk, (xs, vs))| {
            let mut buf = exchange.then(|| vec![vec![0.0; len]; d]);
            for (p, (x, v)) in xs.chunks_exact_mut(d).zip(vs.chunks_exact_mut(d)).enumerate() {
                let mut xm = [0.0; 3];
                for a in 0..d {
                    xm[a] = x[a] + dt / (2.0 * sigma) * v[a];
                }
                let st = Stencil::new(&grid, &xm[..d]);
                let big_u = st.interp(u);
                let rel = push_particle(x, v, &big_u, regime, dt);
                if let Some(buf) = buf.as_mut() {
                    let w = weights[chunk * CHUNK + p] * coef;
                    for k in 0..st.len {
                        let s = w * st.w[k];
                        for a in 0..d {
                            buf[a][st.idx[k]] += s * rel[a];
                        }
                    }
                }
            }
            buf
        })
        .collect();
    if !exchange {
        return Ok(None);
    }
    let mut total = vec![vec![0.0; len]; d];
    for part in partials.into_iter().flatten() {
        for (t, p) in total.iter_mut().zip(part) {
            t.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
    }
    Ok(Some(TorusField::from_components(&grid, total)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::TorusGrid;

    #[test]
    fn closed_form_with_zero_field() {
        let g = TorusGrid::new(2, 8).unwrap();
        let regime = ScalingRegime::light(0.1).unwrap();
        let mut ens = ParticleEnsemble::new(2, vec![1.0, 2.0], vec![1.0, 0.0], vec![1.0]).unwrap();
        push(&mut ens, &TorusField::vector_zeros(&g), &regime, 0.1).unwrap();
        assert!((ens.vel[0] - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((ens.pos[0] - (1.0 + 0.063_212_055_882_855_77)).abs() < 1e-15);
        assert_eq!(ens.pos[1], 2.0);
    }

    #[test]
    fn rejects_nonfinite_field() {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut u = TorusField::vector_zeros(&g);
        u.values_mut(0)[3] = f64::NAN;
        let regime = ScalingRegime::light(0.5).unwrap();
        let mut ens = ParticleEnsemble::new(2, vec![1.0, 2.0], vec![1.0, 0.0], vec![1.0]).unwrap();
        assert!(push(&mut ens, &u, &regime, 0.1).is_err());
    }
}
