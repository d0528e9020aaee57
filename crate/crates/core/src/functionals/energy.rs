use crate::grid_spectral::{gradient, pairwise_sum, TorusField};
use crate::kinetic::interp::Stencil;
use crate::kinetic::{ParticleEnsemble, ScalingRegime};

/// Poincaré–Wirtinger constant on the 2π-torus: `‖∇u‖² ≥ c_P ‖u - ⟨u⟩‖²`.
pub const C_P: f64 = 1.0;

/// Sum over particles of `f(w_i, x_i, v_i)`, pairwise in fixed chunks.
pub(crate) fn particle_sum(ens: &ParticleEnsemble, f: impl Fn(f64, &[f64], &[f64]) -> f64) -> f64 {
    let terms: Vec<f64> = (0..ens.len())
        .map(|i| f(ens.weight[i], ens.position(i), ens.velocity(i)))
        .collect();
    pairwise_sum(&terms)
}

fn norm_pow(x: &[f64], p: f64) -> f64 {
    let s: f64 = x.iter().map(|a| a * a).sum();
    if p == 2.0 {
        s
    } else {
        s.sqrt().powf(p)
    }
}

/// `|v/σ - u(x)|^p` for one particle.
fn misalignment(u: &TorusField, sigma: f64, x: &[f64], v: &[f64], p: f64) -> f64 {
    let ux = Stencil::new(u.grid(), x).interp(u);
    let mut rel = [0.0; 3];
    for a in 0..x.len() {
        rel[a] = v[a] / sigma - ux[a];
    }
    norm_pow(&rel[..x.len()], p)
}

/// `E = (ε/(σ²γ)) ½ Σ w |v|² + ½ ‖u‖²`.
pub fn energy(ens: &ParticleEnsemble, u: &TorusField, regime: &ScalingRegime) -> f64 {
    let kin = particle_sum(ens, |w, _, v| w * norm_pow(v, 2.0));
    0.5 * regime.kinetic_weight() * kin + 0.5 * u.l2_norm_sq()
}

/// `D = ‖∇u‖² + (1/γ) Σ w |v/σ - u(x)|²`.
pub fn dissipation(ens: &ParticleEnsemble, u: &TorusField, regime: &ScalingRegime) -> f64 {
    gradient(u).l2_norm_sq() + phase_space_concentration(ens, u, regime, 2.0) / regime.gamma
}

/// Modulated energy
/// `(ε/2γ) Σ w |v/σ - ⟨j⟩/⟨ρ⟩|² + ½‖u - ⟨u⟩‖² + ε⟨ρ⟩/(2(γ+ε⟨ρ⟩)) |⟨j⟩/⟨ρ⟩ - ⟨u⟩|²`.
///
/// With zero total mass the particle terms vanish.
pub fn modulated_energy(ens: &ParticleEnsemble, u: &TorusField, regime: &ScalingRegime) -> f64 {
    let (eps, gamma, sigma) = (regime.epsilon, regime.gamma, regime.sigma);
    let d = ens.dim();
    let mean_u = u.mean_vector();
    let mut fluid = 0.0;
    for c in 0..d {
        let m = mean_u[c];
        let dev: Vec<f64> = u.values(c).iter().map(|x| (x - m) * (x - m)).collect();
        fluid += pairwise_sum(&dev) / dev.len() as f64;
    }
    let mass = ens.total_mass();
    if mass <= 0.0 {
        return 0.5 * fluid;
    }
    let mom = ens.momentum();
    let mut mean_w = [0.0; 3];
    for a in 0..d {
        mean_w[a] = mom[a] / sigma / mass;
    }
    let spread = particle_sum(ens, |w, _, v| {
        w * (0..d).map(|a| (v[a] / sigma - mean_w[a]).powi(2)).sum::<f64>()
    });
    let gap: f64 = (0..d).map(|a| (mean_w[a] - mean_u[a]).powi(2)).sum();
    eps / (2.0 * gamma) * spread + 0.5 * fluid + eps * mass / (2.0 * (gamma + eps * mass)) * gap
}

/// Decay rate `λ = min(c_P / (ε (c_P + 4R)), c_P / 2)` for `R = ‖ρ‖_{L∞}`.
pub fn lambda_bound(rho_linf: f64, regime: &ScalingRegime) -> f64 {
    let r = rho_linf.max(0.0);
    (C_P / (regime.epsilon * (C_P + 4.0 * r))).min(C_P / 2.0)
}

/// Higher dissipation `Σ w |v/σ - u(x)|^r / ε^r` (with `σ = 1` in the fine
/// regime this is `Σ w |v - u|^r / ε^r`).
pub fn higher_dissipation(ens: &ParticleEnsemble, u: &TorusField, r: f64, regime: &ScalingRegime) -> f64 {
    phase_space_concentration(ens, u, regime, r) / regime.epsilon.powf(r)
}

/// `Σ w |v/σ - u(x)|^p`.
pub fn phase_space_concentration(ens: &ParticleEnsemble, u: &TorusField, regime: &ScalingRegime, power: f64) -> f64 {
    let sigma = regime.sigma;
    particle_sum(ens, |w, x, v| w * misalignment(u, sigma, x, v, power))
}

/// Gagliardo–Nirenberg exponents `(α_p, β_p) = ((5p-6)/(7p-6), 5p/(7p-6))`.
/// Informational only.
pub fn gagliardo_nirenberg_exponents(p: f64) -> (f64, f64) {
    let den = 7.0 * p - 6.0;
    ((5.0 * p - 6.0) / den, 5.0 * p / den)
}
