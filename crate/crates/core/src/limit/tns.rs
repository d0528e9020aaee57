use super::semi_lagrangian::sl_transport;
use crate::error::{Result, VnsError};
use crate::fluid::{convective_term, ns_rhs, ns_step, FluidState};
use crate::grid_spectral::TorusField;

/// Transport–Navier–Stokes state: `u` solves Navier–Stokes, `ρ` is carried
/// along by `u`.
#[derive(Clone, Debug)]
pub struct TnsState {
    pub u: TorusField,
    pub rho: TorusField,
    pub t: f64,
}

impl TnsState {
    pub fn new(u: TorusField, rho: TorusField, t: f64) -> Result<Self> {
        let fluid = FluidState::new(u, t)?;
        if rho.components() != 1 || rho.grid() != fluid.u.grid() {
            return Err(VnsError::Mismatch("density must be a scalar on the velocity grid".into()));
        }
        rho.check_finite()?;
        Ok(Self { u: fluid.u, rho, t })
    }

    /// `G = ∇p - Δu = -(∂t u + u·∇u)` at the current state.
    pub fn pressure_term(&self) -> Result<TorusField> {
        ns_pressure_term(&self.u)
    }
}

/// `∇p - Δu` for a Navier–Stokes velocity `u` without forcing.
pub fn ns_pressure_term(u: &TorusField) -> Result<TorusField> {
    let dudt = ns_rhs(u, &TorusField::vector_zeros(u.grid()))?;
    let mut g = convective_term(u);
    g.axpy(1.0, &dudt);
    g.scale(-1.0);
    Ok(g)
}

pub fn tns_step(state: &TnsState, dt: f64) -> Result<TnsState> {
    let zero = TorusField::vector_zeros(state.u.grid());
    let fluid = ns_step(&FluidState { u: state.u.clone(), t: state.t }, &zero, dt)?;
    let u_mid = state.u.lincomb(0.5, &fluid.u, 0.5);
    let rho = sl_transport(&state.rho, &u_mid, dt)?;
    Ok(TnsState { u: fluid.u, rho, t: fluid.t })
}
