use crate::error::{Result, VnsError};
use crate::grid_spectral::{pairwise_sum, TorusField};
use crate::kinetic::interp::{interpolate_gradient, Stencil};
use crate::kinetic::ParticleEnsemble;

/// Per-time particle sums entering the higher-dissipation identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FineKeySample {
    pub t: f64,
    /// `D^(r) = Σ w |v - u|^r / ε^r`.
    pub dissipation: f64,
    /// `Σ w |v - u|^r / ε^(r-1)`.
    pub boundary: f64,
    /// `Σ w (∂t u + (∇u) v)·(v - u) |v - u|^(r-2) / ε^(r-1)`.
    pub source: f64,
}

/// Time series of [`FineKeySample`] for one exponent `r`.
///
/// Along the fine-regime characteristics
/// `∫_0^T D^(r) = -(1/r) [Σ w |v-u|^r/ε^(r-1)]_0^T - ∫_0^T source`.
#[derive(Clone, Debug)]
pub struct FineKeyTrace {
    pub r: f64,
    pub epsilon: f64,
    pub samples: Vec<FineKeySample>,
}

/// Both sides of the identity and their relative mismatch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FineKeyResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Denominator floor of the relative residual.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

impl FineKeyTrace {
    pub fn new(r: f64, epsilon: f64) -> Result<Self> {
        if !(r >= 2.0) {
            return Err(VnsError::InvalidArgument(format!("exponent r = {r} must be at least 2")));
        }
        Ok(Self { r, epsilon, samples: Vec::new() })
    }

    /// Records the ensemble at time `t` against the fluid velocity `u`, its
    /// time derivative `dudt` and gradient `grad_u` (component `i*d + j`
    /// holding `∂_j u_i`).
    pub fn record(
        &mut self,
        t: f64,
        ens: &ParticleEnsemble,
        u: &TorusField,
        dudt: &TorusField,
        grad_u: &TorusField,
    ) {
        self.samples.push(sample(t, ens, u, dudt, grad_u, self.r, self.epsilon));
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn sample(
    t: f64,
    ens: &ParticleEnsemble,
    u: &TorusField,
    dudt: &TorusField,
    grad_u: &TorusField,
    r: f64,
    eps: f64,
) -> FineKeySample {
    let d = ens.dim();
    let grid = u.grid();
    let rel_pow = |x: &[f64], v: &[f64]| -> (f64, f64) {
        let st = Stencil::new(grid, x);
        let ux = st.interp(u);
        let ut = st.interp(dudt);
        let g = interpolate_gradient(grad_u, &st, d);
        let mut rel = [0.0; 3];
        let mut m2 = 0.0;
        for a in 0..d {
            rel[a] = v[a] - ux[a];
            m2 += rel[a] * rel[a];
        }
        let m = m2.sqrt();
        let mut drive = 0.0;
        for i in 0..d {
            let gv: f64 = (0..d).map(|j| g[i][j] * v[j]).sum();
            drive += (ut[i] + gv) * rel[i];
        }
        let mr = if r == 2.0 { m2 } else { m.powf(r) };
        let mr2 = if r == 2.0 { 1.0 } else { m.powf(r - 2.0) };
        (mr, drive * mr2)
    };
    let (mr, src): (Vec<f64>, Vec<f64>) = (0..ens.len())
        .map(|i| {
            let (mr, src) = rel_pow(ens.position(i), ens.velocity(i));
            (ens.weight[i] * mr, ens.weight[i] * src)
        })
        .unzip();
    let mr = pairwise_sum(&mr);
    let src = pairwise_sum(&src);
    FineKeySample {
        t,
        dissipation: mr / eps.powf(r),
        boundary: mr / eps.powf(r - 1.0),
        source: src / eps.powf(r - 1.0),
    }
}

fn trapezoid(samples: &[FineKeySample], f: impl Fn(&FineKeySample) -> f64) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

/// Evaluates both sides of the identity by trapezoid quadrature.
pub fn fine_key_residual(trace: &FineKeyTrace) -> Result<FineKeyResidual> {
    let s = &trace.samples;
    if s.len() < 3 {
        return Err(VnsError::TraceTooShort(s.len()));
    }
    let lhs = trapezoid(s, |x| x.dissipation);
    let first = s[0].boundary;
    let last = s[s.len() - 1].boundary;
    let rhs = -(last - first) / trace.r - trapezoid(s, |x| x.source);
    let residual = (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + RESIDUAL_FLOOR);
    Ok(FineKeyResidual { lhs, rhs, residual })
}
