//! Pseudospectral incompressible Navier–Stokes with external forcing.

mod monitor;

pub use monitor::{ExistenceMonitor, MonitorFlags, GRAD_THRESHOLD};

use crate::error::{Result, VnsError};
use crate::grid_spectral::{
    curl_3d, dealias_spectrum, leray_spectrum, spectral_divergence_max, vorticity_2d, Spectrum,
    TorusField,
};

/// Courant number allowed by [`ns_step`].
pub const CFL_LIMIT: f64 = 0.5;

/// Fluid velocity together with the current time.
#[derive(Clone, Debug)]
pub struct FluidState {
    pub u: TorusField,
    pub t: f64,
}

impl FluidState {
    /// Wraps a divergence-free velocity field; fails if the spectral
    /// divergence exceeds `1e-10` times the field magnitude.
    pub fn new(u: TorusField, t: f64) -> Result<Self> {
        if !u.is_vector() {
            return Err(VnsError::InvalidArgument("velocity must be a vector field".into()));
        }
        u.check_finite()?;
        let div = spectral_divergence_max(&u);
        if div > 1e-10 * u.linf().max(1e-300) && div > 1e-14 {
            return Err(VnsError::InvalidArgument(format!(
                "velocity is not divergence-free (max |k·û| = {div:e})"
            )));
        }
        Ok(Self { u, t })
    }

    /// Leray-projects `u` first.
    pub fn projected(u: TorusField, t: f64) -> Result<Self> {
        let p = crate::grid_spectral::leray_project(&u)?;
        Ok(Self { u: p, t })
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.u.l2_norm_sq()
    }
}

/// Largest stable step for a velocity of sup-norm `umax` on spacing `h`.
pub fn cfl_limit(h: f64, umax: f64) -> f64 {
    CFL_LIMIT * h / umax.max(1.0)
}

pub fn check_cfl(u: &TorusField, dt: f64) -> Result<()> {
    let limit = cfl_limit(u.grid().spacing(), u.linf());
    if dt > limit {
        return Err(VnsError::Cfl { dt, limit });
    }
    Ok(())
}

/// Projected, dealiased `-(u·∇)u` in rotational form, from `û`.
pub(crate) fn convection(u_hat: &Spectrum) -> Spectrum {
    let mut s = rotational(u_hat);
    leray_spectrum(&mut s);
    s
}

/// Dealiased `-ω × u`, which differs from `-(u·∇)u` by `∇(|u|²/2)`.
pub(crate) fn rotational(u_hat: &Spectrum) -> Spectrum {
    let grid = u_hat.grid.clone();
    let d = grid.dim();
    let u = u_hat.to_field();
    let prod = if d == 2 {
        let w = vorticity_2d(u_hat).to_field();
        let (w, u0, u1) = (w.values(0), u.values(0), u.values(1));
        // -(ω e₃ × u) = (ω u₂, -ω u₁)
        let p0 = (0..grid.len()).map(|i| w[i] * u1[i]).collect();
        let p1 = (0..grid.len()).map(|i| -w[i] * u0[i]).collect();
        TorusField::from_raw(&grid, vec![p0, p1])
    } else {
        let w = curl_3d(u_hat).to_field();
        let mut comps = vec![vec![0.0; grid.len()]; 3];
        for i in 0..grid.len() {
            let a = w.at(i);
            let b = u.at(i);
            comps[0][i] = -(a[1] * b[2] - a[2] * b[1]);
            comps[1][i] = -(a[2] * b[0] - a[0] * b[2]);
            comps[2][i] = -(a[0] * b[1] - a[1] * b[0]);
        }
        TorusField::from_raw(&grid, comps)
    };
    let mut s = prod.spectrum();
    dealias_spectrum(&mut s);
    s
}

/// Dealiased convective derivative `(u·∇)u`.
pub fn convective_term(u: &TorusField) -> TorusField {
    let grid = u.grid();
    let d = grid.dim();
    let g = crate::grid_spectral::gradient(u);
    let comps = (0..d)
        .map(|i| {
            (0..grid.len())
                .map(|n| (0..d).map(|j| u.values(j)[n] * g.values(i * d + j)[n]).sum())
                .collect()
        })
        .collect();
    let mut s = TorusField::from_raw(grid, comps).spectrum();
    dealias_spectrum(&mut s);
    s.to_field()
}

/// Projected and dealiased spectrum of a forcing field.
pub(crate) fn forcing_spectrum(f: &TorusField) -> Spectrum {
    let mut s = f.spectrum();
    dealias_spectrum(&mut s);
    leray_spectrum(&mut s);
    s
}

fn integrating_factor(s: &mut Spectrum, nu: f64, tau: f64) {
    s.apply(|k| (-nu * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * tau).exp());
}

/// One Lawson (integrating-factor) RK4 step of `∂t û = -ν|k|² û + N_s(û)`,
/// where `stage` (0..4) is passed to the nonlinear operator.
pub(crate) fn lawson_rk4(
    u_hat: &Spectrum,
    h: f64,
    nu: f64,
    mut nonlinear: impl FnMut(usize, &Spectrum) -> Result<Spectrum>,
) -> Result<Spectrum> {
    let half = |s: &Spectrum| {
        let mut o = s.clone();
        integrating_factor(&mut o, nu, 0.5 * h);
        o
    };
    let full = |s: &Spectrum| {
        let mut o = s.clone();
        integrating_factor(&mut o, nu, h);
        o
    };
    let a = nonlinear(0, u_hat)?;
    let mut y = u_hat.clone();
    y.axpy(0.5 * h, &a);
    let b = nonlinear(1, &half(&y))?;
    let eu = half(u_hat);
    let mut y = eu.clone();
    y.axpy(0.5 * h, &b);
    let c = nonlinear(2, &y)?;
    let mut y = eu.clone();
    y.axpy(h, &c);
    let d = nonlinear(3, &half(&y))?;
    let mut out = full(u_hat);
    let mut bc = b;
    bc.axpy(1.0, &c);
    let mut acc = full(&a);
    acc.axpy(2.0, &half(&bc));
    acc.axpy(1.0, &d);
    out.axpy(h / 6.0, &acc);
    Ok(out)
}

/// Advances the forced Navier–Stokes equation by `dt`.
///
/// The viscous term is integrated exactly per mode; convection and forcing
/// go through RK4 and are projected at every stage.
pub fn ns_step(state: &FluidState, forcing: &TorusField, dt: f64) -> Result<FluidState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VnsError::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    state.u.same_layout(forcing)?;
    forcing.check_finite()?;
    check_cfl(&state.u, dt)?;
    let f_hat = forcing_spectrum(forcing);
    let u_hat = state.u.spectrum();
    let next = lawson_rk4(&u_hat, dt, 1.0, |_, s| {
        let mut n = convection(s);
        n.axpy(1.0, &f_hat);
        Ok(n)
    })?;
    let mut next = next;
    leray_spectrum(&mut next);
    let u = next.to_field();
    u.check_finite()?;
    Ok(FluidState { u, t: state.t + dt })
}

/// Right-hand side `P[-(u·∇)u + F] + Δu` of the momentum equation, the
/// stage derivative used for `∂t u`.
pub fn ns_rhs(u: &TorusField, forcing: &TorusField) -> Result<TorusField> {
    u.same_layout(forcing)?;
    let u_hat = u.spectrum();
    let mut r = convection(&u_hat);
    r.axpy(1.0, &forcing_spectrum(forcing));
    let mut visc = u_hat;
    crate::grid_spectral::laplacian_spectrum(&mut visc);
    r.axpy(1.0, &visc);
    Ok(r.to_field())
}
