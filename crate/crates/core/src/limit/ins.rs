use num_complex::Complex64;

use super::semi_lagrangian::sl_transport;
use crate::error::{Result, VnsError};
use crate::fluid::{check_cfl, convective_term, lawson_rk4, rotational, FluidState};
use crate::grid_spectral::{
    dealias_spectrum, divergence_spectrum, gradient_spectrum, laplacian_spectrum, leray_spectrum,
    pairwise_sum_map, Spectrum, TorusField, TorusGrid,
};

/// Relative residual at which the pressure solve stops.
pub const CG_TOLERANCE: f64 = 1e-10;
/// Iteration cap of the pressure solve.
pub const CG_MAX_ITER: usize = 500;

/// Inhomogeneous Navier–Stokes state with total density `1 + ρ`.
#[derive(Clone, Debug)]
pub struct InsState {
    pub u: TorusField,
    pub rho: TorusField,
    pub t: f64,
    prev_u: Option<TorusField>,
    pressure: Vec<f64>,
}

impl InsState {
    pub fn new(u: TorusField, rho: TorusField, t: f64) -> Result<Self> {
        let fluid = FluidState::new(u, t)?;
        if rho.components() != 1 || rho.grid() != fluid.u.grid() {
            return Err(VnsError::Mismatch("density must be a scalar on the velocity grid".into()));
        }
        rho.check_finite()?;
        if rho.min(0) < 0.0 {
            return Err(VnsError::InvalidArgument("INS density perturbation must be nonnegative".into()));
        }
        let len = rho.grid().len();
        Ok(Self { u: fluid.u, rho, t, prev_u: None, pressure: vec![0.0; len] })
    }

    /// `G = (∇p - Δu)/(1 + ρ) = -(∂t u + u·∇u)` at the current state.
    pub fn pressure_term(&self) -> Result<TorusField> {
        let c = inverse_density(&self.rho);
        let mut p = self.pressure.clone();
        let r = momentum_rhs(&self.u.spectrum(), &c, &mut p)?.to_field();
        let mut g = convective_term(&self.u);
        g.axpy(1.0, &r);
        g.scale(-1.0);
        Ok(g)
    }

    /// `∫ (1 + ρ) u` against the normalized measure.
    pub fn momentum(&self) -> [f64; 3] {
        let d = self.u.grid().dim();
        let mut out = [0.0; 3];
        let rho = self.rho.values(0);
        for (a, o) in out.iter_mut().enumerate().take(d) {
            let m: Vec<f64> = self.u.values(a).iter().zip(rho).map(|(u, r)| (1.0 + r) * u).collect();
            *o = m.iter().sum::<f64>() / m.len() as f64;
        }
        out
    }

    /// `½ ∫ (1 + ρ) |u|²`.
    pub fn kinetic_energy(&self) -> f64 {
        let rho = self.rho.values(0);
        let len = rho.len();
        let mut acc = 0.0;
        for c in 0..self.u.components() {
            let terms: Vec<f64> = self.u.values(c).iter().zip(rho).map(|(u, r)| (1.0 + r) * u * u).collect();
            acc += pairwise_sum_map(&terms, |x| x);
        }
        0.5 * acc / len as f64
    }
}

fn inverse_density(rho: &TorusField) -> Vec<f64> {
    rho.values(0).iter().map(|r| 1.0 / (1.0 + r)).collect()
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn norm(x: &[f64]) -> f64 {
    (pairwise_sum_map(x, |v| v * v) / x.len() as f64).sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    pairwise_sum_map(&p, |v| v)
}

/// `∇p` as a vector spectrum.
fn grad_of(grid: &TorusGrid, p: &[f64]) -> Spectrum {
    let mut s = Spectrum::zeros(grid, 1);
    s.comps[0] = to_complex(p);
    grid.forward(&mut s.comps[0]);
    gradient_spectrum(&s)
}

/// `A p = -∇·(c ∇p)`, symmetric positive semi-definite.
fn apply_operator(grid: &TorusGrid, c: &[f64], p: &[f64]) -> Vec<f64> {
    let mut g = grad_of(grid, p).to_field();
    for a in 0..grid.dim() {
        g.values_mut(a).iter_mut().zip(c).for_each(|(x, ci)| *x *= ci);
    }
    let mut div = divergence_spectrum(&g.spectrum());
    grid.inverse(&mut div.comps[0]);
    div.comps[0].iter().map(|z| -z.re).collect()
}

/// Inverse of `-c̄ Δ` on mean-zero functions.
fn precondition(grid: &TorusGrid, cbar: f64, r: &[f64]) -> Vec<f64> {
    let mut buf = to_complex(r);
    grid.forward(&mut buf);
    for (i, z) in buf.iter_mut().enumerate() {
        let k = grid.kvec(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        *z = if k2 == 0.0 { Complex64::default() } else { *z / (cbar * k2) };
    }
    grid.inverse(&mut buf);
    buf.iter().map(|z| z.re).collect()
}

/// Solves `-∇·(c∇p) = rhs` by preconditioned conjugate gradients, starting
/// from `p`. Returns the iteration count.
pub fn pressure_cg(grid: &TorusGrid, c: &[f64], rhs: &[f64], p: &mut [f64]) -> Result<usize> {
    let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cbar = 0.5 * (cmin + cmax);
    let ap = apply_operator(grid, c, p);
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let target = CG_TOLERANCE * norm(rhs) + 1e-15;
    if norm(&r) <= target {
        return Ok(0);
    }
    let mut z = precondition(grid, cbar, &r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=CG_MAX_ITER {
        let ad = apply_operator(grid, c, &d);
        let dad = dot(&d, &ad);
        if dad <= 0.0 {
            return Err(VnsError::CgNotConverged { iterations: it, residual: norm(&r) });
        }
        let alpha = rz / dad;
        p.iter_mut().zip(&d).for_each(|(x, y)| *x += alpha * y);
        r.iter_mut().zip(&ad).for_each(|(x, y)| *x -= alpha * y);
        if norm(&r) <= target {
            return Ok(it);
        }
        z = precondition(grid, cbar, &r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        d.iter_mut().zip(&z).for_each(|(x, y)| *x = y + beta * *x);
    }
    Err(VnsError::CgNotConverged { iterations: CG_MAX_ITER, residual: norm(&r) })
}

/// `∂t u = P[b - c∇p]` with `b = -ω×u + cΔu` and `p` from the variable
/// coefficient pressure equation; `p` is warm-started and updated.
fn momentum_rhs(u_hat: &Spectrum, c: &[f64], p: &mut Vec<f64>) -> Result<Spectrum> {
    let grid = u_hat.grid.clone();
    let d = grid.dim();
    let mut lap = u_hat.clone();
    laplacian_spectrum(&mut lap);
    let mut clap = lap.to_field();
    for a in 0..d {
        clap.values_mut(a).iter_mut().zip(c).for_each(|(x, ci)| *x *= ci);
    }
    let mut b = clap.spectrum();
    dealias_spectrum(&mut b);
    b.axpy(1.0, &rotational(u_hat));
    let mut div = divergence_spectrum(&b);
    grid.inverse(&mut div.comps[0]);
    let rhs: Vec<f64> = div.comps[0].iter().map(|z| -z.re).collect();
    pressure_cg(&grid, c, &rhs, p)?;
    let mut cg = grad_of(&grid, p).to_field();
    for a in 0..d {
        cg.values_mut(a).iter_mut().zip(c).for_each(|(x, ci)| *x *= ci);
    }
    let mut out = b;
    out.axpy(-1.0, &cg.spectrum());
    leray_spectrum(&mut out);
    Ok(out)
}

/// Advances the inhomogeneous Navier–Stokes system by `dt`.
///
/// `ρ` is transported first, semi-Lagrangian, with the velocity
/// extrapolated to the half step. The momentum equation is then integrated
/// with RK4 and an exact integrating factor for `ν̄Δ`, where `ν̄` is the
/// midrange of `1/(1+ρ)`; the pressure is solved at every stage.
pub fn ins_step(state: &InsState, dt: f64) -> Result<InsState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VnsError::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    check_cfl(&state.u, dt)?;
    let u_ext = match &state.prev_u {
        Some(prev) => state.u.lincomb(1.5, prev, -0.5),
        None => state.u.clone(),
    };
    let rho_new = sl_transport(&state.rho, &u_ext, dt)?;
    let rho_half = state.rho.lincomb(0.5, &rho_new, 0.5);
    let cs = [
        inverse_density(&state.rho),
        inverse_density(&rho_half),
        inverse_density(&rho_half),
        inverse_density(&rho_new),
    ];
    let c0 = &cs[0];
    let nu = 0.5
        * (c0.iter().copied().fold(f64::INFINITY, f64::min)
            + c0.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let mut p = state.pressure.clone();
    let next = lawson_rk4(&state.u.spectrum(), dt, nu, |stage, s| {
        let mut r = momentum_rhs(s, &cs[stage], &mut p)?;
        let mut lap = s.clone();
        laplacian_spectrum(&mut lap);
        r.axpy(-nu, &lap);
        Ok(r)
    })?;
    let mut next = next;
    leray_spectrum(&mut next);
    let u = next.to_field();
    u.check_finite()?;
    Ok(InsState {
        u,
        rho: rho_new,
        t: state.t + dt,
        prev_u: Some(state.u.clone()),
        pressure: p,
    })
}
