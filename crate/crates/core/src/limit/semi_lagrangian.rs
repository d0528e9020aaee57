use crate::error::{Result, VnsError};
use crate::grid_spectral::{pairwise_sum, TorusField, TorusGrid};
use crate::kinetic::interp::{wrap, Stencil};

fn lagrange_cubic(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Tensor-product cubic interpolation of a scalar field, clipped to the
/// range of the `2^d` nodes of the enclosing cell.
pub fn cubic_clipped(f: &[f64], grid: &TorusGrid, x: &[f64]) -> f64 {
    let d = grid.dim();
    let n = grid.n() as i64;
    let inv_h = 1.0 / grid.spacing();
    let mut base = [0i64; 3];
    let mut wts = [[0.0; 4]; 3];
    for a in 0..d {
        let s = x[a] * inv_h;
        let fl = s.floor();
        base[a] = fl as i64;
        wts[a] = lagrange_cubic(s - fl);
    }
    let idx = |off: &[i64; 3]| -> usize {
        let mut flat = 0usize;
        for a in 0..d {
            flat = flat * n as usize + (base[a] + off[a]).rem_euclid(n) as usize;
        }
        flat
    };
    let mut acc = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let span = if d == 2 { 1 } else { 4 };
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..span {
                let off = [i as i64 - 1, j as i64 - 1, k as i64 - 1];
                let w = if d == 2 { wts[0][i] * wts[1][j] } else { wts[0][i] * wts[1][j] * wts[2][k] };
                let v = f[idx(&off)];
                acc += w * v;
                let inner = (1..=2).contains(&i) && (1..=2).contains(&j) && (d == 2 || (1..=2).contains(&k));
                if inner {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
    }
    acc.clamp(lo, hi)
}

/// Adds mass `target - current` with weights vanishing at the extrema, so
/// that no new extrema appear.
fn fix_mass(vals: &mut [f64], target: f64, lo: f64, hi: f64) {
    for _ in 0..20 {
        let current = pairwise_sum(vals);
        let deficit = target - current;
        if deficit.abs() <= 1e-14 * target.abs().max(1e-300) {
            return;
        }
        let weights: Vec<f64> = vals.iter().map(|&r| ((r - lo) * (hi - r)).max(0.0)).collect();
        let total = pairwise_sum(&weights);
        if total <= 0.0 {
            return;
        }
        let lambda = deficit / total;
        for (r, w) in vals.iter_mut().zip(&weights) {
            *r = (*r + lambda * w).clamp(lo, hi);
        }
    }
}

/// One semi-Lagrangian step of `∂t ρ + u·∇ρ = 0` with the velocity `u_mid`
/// taken at the half step. Departure points use the midpoint rule; the
/// result keeps the total mass and the range of `rho`.
pub fn sl_transport(rho: &TorusField, u_mid: &TorusField, dt: f64) -> Result<TorusField> {
    if rho.components() != 1 || !u_mid.is_vector() || rho.grid() != u_mid.grid() {
        return Err(VnsError::Mismatch("transport expects scalar density and vector velocity".into()));
    }
    rho.check_finite()?;
    u_mid.check_finite()?;
    let grid = rho.grid();
    let d = grid.dim();
    let src = rho.values(0);
    let lo = rho.min(0);
    let hi = rho.max(0);
    let mut out = vec![0.0; grid.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let x = grid.node(i);
        let u0 = u_mid.at(i);
        let mut xm = [0.0; 3];
        for a in 0..d {
            xm[a] = wrap(x[a] - 0.5 * dt * u0[a]);
        }
        let um = Stencil::new(grid, &xm[..d]).interp(u_mid);
        let mut xd = [0.0; 3];
        for a in 0..d {
            xd[a] = wrap(x[a] - dt * um[a]);
        }
        *o = cubic_clipped(src, grid, &xd[..d]);
    }
    let target = pairwise_sum(src);
    if hi > lo {
        fix_mass(&mut out, target, lo, hi);
    }
    TorusField::from_components(grid, vec![out])
}
