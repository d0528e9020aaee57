use num_complex::Complex64;

use super::field::{Spectrum, TorusField};
use super::grid::TorusGrid;
use crate::error::{Result, VnsError};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wavenumber used for first derivatives along `axis` of spectral index
/// `flat`; the Nyquist mode has no odd derivative.
fn dk(grid: &TorusGrid, flat: usize, axis: usize) -> f64 {
    let m = grid.multi_index(flat)[axis];
    if m == grid.n() / 2 {
        0.0
    } else {
        grid.wavenumber(m) as f64
    }
}

fn require_vector(v: &TorusField) -> Result<()> {
    if !v.is_vector() {
        return Err(VnsError::InvalidArgument(format!(
            "expected a vector field, got {} components",
            v.components()
        )));
    }
    Ok(())
}

/// Leray projection in place on a vector spectrum: `v̂ - k (k·v̂)/|k|²`.
pub fn leray_spectrum(s: &mut Spectrum) {
    let grid = s.grid.clone();
    let d = grid.dim();
    for i in 0..grid.len() {
        let mut k = [0.0; 3];
        for a in 0..d {
            k[a] = dk(&grid, i, a);
        }
        let k2: f64 = k[..d].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut kv = Complex64::default();
        for a in 0..d {
            kv += s.comps[a][i] * k[a];
        }
        for a in 0..d {
            s.comps[a][i] -= kv * (k[a] / k2);
        }
    }
}

/// Orthogonal projection onto divergence-free fields; keeps the mean.
pub fn leray_project(v: &TorusField) -> Result<TorusField> {
    require_vector(v)?;
    v.check_finite()?;
    let mut s = v.spectrum();
    leray_spectrum(&mut s);
    Ok(s.to_field())
}

/// Multiplies every mode by `exp(-|k|² t)`.
pub fn heat_spectrum(s: &mut Spectrum, t: f64) {
    s.apply(|k| (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * t).exp());
}

/// Solution at time `t` of the heat equation started from `v`.
pub fn heat_semigroup(v: &TorusField, t: f64) -> Result<TorusField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(VnsError::InvalidArgument(format!("heat time {t} must be finite and nonnegative")));
    }
    v.check_finite()?;
    let mut s = v.spectrum();
    heat_spectrum(&mut s, t);
    Ok(s.to_field())
}

/// Sobolev norm from a precomputed spectrum.
pub fn sobolev_norm_spectrum(s: &Spectrum, order: f64, homogeneous: bool) -> f64 {
    let grid = &s.grid;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let k = grid.kvec(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let w = if homogeneous {
            if k2 == 0.0 {
                continue;
            }
            k2.powf(order)
        } else {
            (1.0 + k2).powf(order)
        };
        let e: f64 = s.comps.iter().map(|c| c[i].norm_sqr()).sum();
        acc += w * e;
    }
    acc.sqrt()
}

/// `(Σ_k weight(k)^{2s} |ĉ_k|²)^{1/2}` with weight `|k|` (homogeneous,
/// `k = 0` excluded) or `(1 + |k|²)^{1/2}`.
pub fn sobolev_norm(v: &TorusField, s: f64, homogeneous: bool) -> f64 {
    sobolev_norm_spectrum(&v.spectrum(), s, homogeneous)
}

/// Spectral gradient. For a field with `C` components the result has
/// `C * d` components, component `c * d + j` holding `∂_j v_c`.
pub fn gradient_spectrum(s: &Spectrum) -> Spectrum {
    let grid = s.grid.clone();
    let d = grid.dim();
    let mut out = Spectrum::zeros(&grid, s.components() * d);
    for (c, comp) in s.comps.iter().enumerate() {
        for j in 0..d {
            let dst = &mut out.comps[c * d + j];
            for i in 0..grid.len() {
                dst[i] = comp[i] * I * dk(&grid, i, j);
            }
        }
    }
    out
}

pub fn gradient(v: &TorusField) -> TorusField {
    gradient_spectrum(&v.spectrum()).to_field()
}

/// Max over nodes of the Frobenius norm of the spectral gradient.
pub fn grad_linf(v: &TorusField) -> f64 {
    gradient(v).linf()
}

pub fn divergence_spectrum(s: &Spectrum) -> Spectrum {
    let grid = s.grid.clone();
    let mut out = Spectrum::zeros(&grid, 1);
    for i in 0..grid.len() {
        let mut acc = Complex64::default();
        for (a, comp) in s.comps.iter().enumerate() {
            acc += comp[i] * I * dk(&grid, i, a);
        }
        out.comps[0][i] = acc;
    }
    out
}

pub fn divergence(v: &TorusField) -> Result<TorusField> {
    require_vector(v)?;
    Ok(divergence_spectrum(&v.spectrum()).to_field())
}

/// Max modulus of `k · v̂` over modes.
pub fn spectral_divergence_max(v: &TorusField) -> f64 {
    let div = divergence_spectrum(&v.spectrum());
    div.comps[0].iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn laplacian_spectrum(s: &mut Spectrum) {
    s.apply(|k| -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
}

pub fn laplacian(v: &TorusField) -> TorusField {
    let mut s = v.spectrum();
    laplacian_spectrum(&mut s);
    s.to_field()
}

/// Scalar gradient of a scalar spectrum, returned as a vector spectrum.
pub fn grad_scalar_spectrum(s: &Spectrum) -> Spectrum {
    gradient_spectrum(s)
}

/// Zeroes every mode with some `|k_i| > n/3`.
pub fn dealias_spectrum(s: &mut Spectrum) {
    let grid = s.grid.clone();
    for i in 0..grid.len() {
        if !grid.keeps_mode(i) {
            for c in s.comps.iter_mut() {
                c[i] = Complex64::default();
            }
        }
    }
}

pub fn dealias(v: &TorusField) -> TorusField {
    let mut s = v.spectrum();
    dealias_spectrum(&mut s);
    s.to_field()
}

/// Two-dimensional vorticity `∂₁u₂ - ∂₂u₁` of a vector spectrum.
pub fn vorticity_2d(s: &Spectrum) -> Spectrum {
    let grid = s.grid.clone();
    let mut out = Spectrum::zeros(&grid, 1);
    for i in 0..grid.len() {
        out.comps[0][i] =
            I * (s.comps[1][i] * dk(&grid, i, 0) - s.comps[0][i] * dk(&grid, i, 1));
    }
    out
}

/// Three-dimensional curl of a vector spectrum.
pub fn curl_3d(s: &Spectrum) -> Spectrum {
    let grid = s.grid.clone();
    let mut out = Spectrum::zeros(&grid, 3);
    for i in 0..grid.len() {
        let k = [dk(&grid, i, 0), dk(&grid, i, 1), dk(&grid, i, 2)];
        let v = [s.comps[0][i], s.comps[1][i], s.comps[2][i]];
        out.comps[0][i] = I * (v[2] * k[1] - v[1] * k[2]);
        out.comps[1][i] = I * (v[0] * k[2] - v[2] * k[0]);
        out.comps[2][i] = I * (v[1] * k[0] - v[0] * k[1]);
    }
    out
}
