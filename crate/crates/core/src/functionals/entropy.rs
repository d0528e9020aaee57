use crate::error::{Result, VnsError};
use crate::grid_spectral::{gradient, pairwise_sum, TorusField};
use crate::kinetic::interp::{interpolate_gradient, Stencil};
use crate::kinetic::{ParticleEnsemble, RegimeKind, ScalingRegime};

/// Which relative entropy is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyForm {
    /// `½ Σ w |v - u|² + ½‖u_ε - u‖²`, terms `I₁..I₄`.
    Fine,
    /// `(ε/2) Σ w |v/σ - u|² + ½‖u_ε - u‖²`, terms `J₁..J₄`.
    Light,
}

impl EntropyForm {
    pub fn for_regime(regime: &ScalingRegime) -> Self {
        if regime.kind == RegimeKind::Fine {
            EntropyForm::Fine
        } else {
            EntropyForm::Light
        }
    }
}

/// Limit-system fields the relative entropy is measured against.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceFields<'a> {
    pub u: &'a TorusField,
    pub rho: &'a TorusField,
    /// `(∇p - Δu)/(1+ρ)` for the inhomogeneous reference, `∇p - Δu` for
    /// the homogeneous one.
    pub g: &'a TorusField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeEntropy {
    pub form: EntropyForm,
    pub value: f64,
    pub terms: [f64; 4],
}

/// `A:B` for `A = a ⊗ a` and `B[i][j] = ∂_j u_i`.
fn tensor_contract(a: &[f64], g: &[[f64; 3]; 3]) -> f64 {
    let d = a.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += a[i] * a[j] * g[i][j];
        }
    }
    s
}

/// Relative entropy of `(f_ε, u_ε)` with respect to the reference pair and
/// the four terms of its evolution law. `rho_eps` is the deposited density
/// of `ens`.
pub fn relative_entropy(
    ens: &ParticleEnsemble,
    u_eps: &TorusField,
    rho_eps: &TorusField,
    reference: &ReferenceFields<'_>,
    regime: &ScalingRegime,
) -> Result<RelativeEntropy> {
    u_eps.same_layout(reference.u)?;
    u_eps.same_layout(reference.g)?;
    rho_eps.same_layout(reference.rho)?;
    if rho_eps.components() != 1 {
        return Err(VnsError::Mismatch("densities must be scalar".into()));
    }
    let form = EntropyForm::for_regime(regime);
    let grid = u_eps.grid();
    let d = grid.dim();
    let (eps, sigma) = (regime.epsilon, regime.sigma);
    let (kin_w, scale) = match form {
        EntropyForm::Fine => (0.5, 1.0),
        EntropyForm::Light => (0.5 * eps, eps),
    };
    let u = reference.u;
    let gu = gradient(u);
    // particle sums: |w - u|², (w - u)⊗(w - u):∇u, (w - u_ε)·G
    let mut s_rel = Vec::with_capacity(ens.len());
    let mut s_tensor = Vec::with_capacity(ens.len());
    let mut s_drive = Vec::with_capacity(ens.len());
    for i in 0..ens.len() {
        let x = ens.position(i);
        let v = ens.velocity(i);
        let w = ens.weight[i];
        let st = Stencil::new(grid, x);
        let ur = st.interp(u);
        let ue = st.interp(u_eps);
        let g = st.interp(reference.g);
        let grad = interpolate_gradient(&gu, &st, d);
        let mut rel = [0.0; 3];
        let mut drive = 0.0;
        for a in 0..d {
            let wv = v[a] / sigma;
            rel[a] = wv - ur[a];
            drive += (wv - ue[a]) * g[a];
        }
        s_rel.push(w * rel[..d].iter().map(|r| r * r).sum::<f64>());
        s_tensor.push(w * tensor_contract(&rel[..d], &grad));
        s_drive.push(w * drive);
    }
    let rel_sq = pairwise_sum(&s_rel);
    let tensor = pairwise_sum(&s_tensor);
    let drive = pairwise_sum(&s_drive);
    // grid integrals
    let du = u_eps.sub(u);
    let len = grid.len();
    let mut t2 = Vec::with_capacity(len);
    let mut t4 = Vec::with_capacity(len);
    for n in 0..len {
        let a = du.at(n);
        let mut gm = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                gm[i][j] = gu.values(i * d + j)[n];
            }
        }
        t2.push(tensor_contract(&a[..d], &gm));
        let gn = reference.g.at(n);
        let dot: f64 = (0..d).map(|k| a[k] * gn[k]).sum();
        let weight = match form {
            EntropyForm::Fine => rho_eps.values(0)[n] - reference.rho.values(0)[n],
            EntropyForm::Light => rho_eps.values(0)[n],
        };
        t4.push(weight * dot);
    }
    let i2 = -pairwise_sum(&t2) / len as f64;
    let i4 = scale * pairwise_sum(&t4) / len as f64;
    let value = kin_w * rel_sq + 0.5 * du.l2_norm_sq();
    let terms = [-scale * tensor, i2, scale * drive, i4];
    Ok(RelativeEntropy { form, value, terms })
}
