//! Cloud-in-cell kernel shared by interpolation and deposition.

use crate::grid_spectral::{TorusField, TorusGrid};

/// Nodes and weights of the multilinear kernel around one point.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub idx: [usize; 8],
    pub w: [f64; 8],
    pub len: usize,
}

impl Stencil {
    pub fn new(grid: &TorusGrid, x: &[f64]) -> Self {
        let d = grid.dim();
        let n = grid.n();
        let inv_h = 1.0 / grid.spacing();
        let mut lo = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let s = x[a] * inv_h;
            let f = s.floor();
            frac[a] = s - f;
            lo[a] = (f as i64).rem_euclid(n as i64) as usize;
        }
        let len = 1 << d;
        let mut idx = [0usize; 8];
        let mut w = [0.0; 8];
        for (corner, (slot, wt)) in idx.iter_mut().zip(w.iter_mut()).enumerate().take(len) {
            let mut flat = 0;
            let mut weight = 1.0;
            for a in 0..d {
                let up = (corner >> (d - 1 - a)) & 1;
                let i = if up == 1 { (lo[a] + 1) % n } else { lo[a] };
                flat = flat * n + i;
                weight *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            *slot = flat;
            *wt = weight;
        }
        Self { idx, w, len }
    }

    /// Multilinear interpolation of every component of `f`.
    #[inline]
    pub fn interp(&self, f: &TorusField) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate().take(f.components().min(3)) {
            let vals = f.values(c);
            *o = (0..self.len).map(|k| self.w[k] * vals[self.idx[k]]).sum();
        }
        out
    }

    /// Interpolation of component `c` only.
    #[inline]
    pub fn interp_component(&self, f: &TorusField, c: usize) -> f64 {
        let vals = f.values(c);
        (0..self.len).map(|k| self.w[k] * vals[self.idx[k]]).sum()
    }
}

/// Multilinear interpolation of `f` at `x`.
pub fn interpolate(f: &TorusField, x: &[f64]) -> [f64; 3] {
    Stencil::new(f.grid(), x).interp(f)
}

/// Interpolated velocity gradient, `g[i][j] = ∂_j u_i`, from a gradient
/// field laid out as in [`crate::grid_spectral::gradient`].
pub fn interpolate_gradient(grad: &TorusField, st: &Stencil, d: usize) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for (i, row) in g.iter_mut().enumerate().take(d) {
        for (j, gij) in row.iter_mut().enumerate().take(d) {
            *gij = st.interp_component(grad, i * d + j);
        }
    }
    g
}

/// Wraps a coordinate into `[0, 2π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let p = 2.0 * std::f64::consts::PI;
    let y = x.rem_euclid(p);
    if y >= p {
        0.0
    } else {
        y
    }
}
