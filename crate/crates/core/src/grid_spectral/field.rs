use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{ensure_finite, Result, VnsError};

/// Real scalar or vector field sampled on a [`TorusGrid`].
///
/// Components are stored separately, each row-major with the last axis
/// contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField {
    grid: TorusGrid,
    comps: Vec<Vec<f64>>,
}

/// Fourier coefficients of a field, one complex array per component.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: TorusGrid,
    pub comps: Vec<Vec<Complex64>>,
}

impl TorusField {
    pub fn zeros(grid: &TorusGrid, components: usize) -> Self {
        assert!(components >= 1);
        Self {
            grid: grid.clone(),
            comps: vec![vec![0.0; grid.len()]; components],
        }
    }

    pub fn scalar_zeros(grid: &TorusGrid) -> Self {
        Self::zeros(grid, 1)
    }

    pub fn vector_zeros(grid: &TorusGrid) -> Self {
        Self::zeros(grid, grid.dim())
    }

    /// Builds a field from raw component arrays, rejecting non-finite samples.
    pub fn from_components(grid: &TorusGrid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.is_empty() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(VnsError::Mismatch("component length differs from grid size".into()));
        }
        for c in &comps {
            ensure_finite(c, "field samples")?;
        }
        Ok(Self { grid: grid.clone(), comps })
    }

    /// Builds a field without validation; callers check finiteness later.
    pub(crate) fn from_raw(grid: &TorusGrid, comps: Vec<Vec<f64>>) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.len()));
        Self { grid: grid.clone(), comps }
    }

    pub fn scalar_from_fn(grid: &TorusGrid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let vals = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self { grid: grid.clone(), comps: vec![vals] }
    }

    /// Vector field whose component `c` at node `x` is `f(x)[c]`.
    pub fn vector_from_fn(grid: &TorusGrid, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> Self {
        let d = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; d];
        for i in 0..grid.len() {
            let v = f(&grid.node(i));
            for c in 0..d {
                comps[c][i] = v[c];
            }
        }
        Self { grid: grid.clone(), comps }
    }

    pub fn constant_vector(grid: &TorusGrid, value: &[f64]) -> Self {
        let comps = (0..grid.dim()).map(|c| vec![value[c]; grid.len()]).collect();
        Self { grid: grid.clone(), comps }
    }

    pub fn constant_scalar(grid: &TorusGrid, value: f64) -> Self {
        Self { grid: grid.clone(), comps: vec![vec![value; grid.len()]] }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn is_vector(&self) -> bool {
        self.comps.len() == self.grid.dim()
    }

    pub fn values(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn values_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Vector sample at node `i` (unused trailing entries are zero).
    pub fn at(&self, i: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, comp) in self.comps.iter().enumerate().take(3) {
            out[c] = comp[i];
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        for c in &self.comps {
            ensure_finite(c, "field samples")?;
        }
        Ok(())
    }

    pub fn same_layout(&self, other: &TorusField) -> Result<()> {
        if self.grid != other.grid || self.components() != other.components() {
            return Err(VnsError::Mismatch(format!(
                "{:?}x{} vs {:?}x{}",
                self.grid,
                self.components(),
                other.grid,
                other.components()
            )));
        }
        Ok(())
    }

    /// Mean of component `c` (its integral against the normalized measure).
    pub fn mean(&self, c: usize) -> f64 {
        pairwise_sum(&self.comps[c]) / self.grid.len() as f64
    }

    pub fn mean_vector(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for c in 0..self.components().min(3) {
            out[c] = self.mean(c);
        }
        out
    }

    /// `‖f‖²_{L²}` summed over components.
    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .map(|c| pairwise_sum_map(c, |x| x * x))
            .sum();
        s / self.grid.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Max over nodes of the Euclidean norm of the sample.
    pub fn linf(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn min(&self, c: usize) -> f64 {
        self.comps[c].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self, c: usize) -> f64 {
        self.comps[c].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ f·g` against the normalized measure.
    pub fn dot(&self, other: &TorusField) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                pairwise_sum(&prod)
            })
            .sum();
        s / self.grid.len() as f64
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|x| *x *= s);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &TorusField) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += a * q);
        }
    }

    pub fn add(&self, other: &TorusField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &TorusField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Linear combination `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &TorusField, b: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Self { grid: self.grid.clone(), comps }
    }

    pub fn component_field(&self, c: usize) -> Self {
        Self { grid: self.grid.clone(), comps: vec![self.comps[c].clone()] }
    }

    pub fn spectrum(&self) -> Spectrum {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut buf: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.grid.forward(&mut buf);
                buf
            })
            .collect();
        Spectrum { grid: self.grid.clone(), comps }
    }

    pub fn from_spectrum(spec: &Spectrum) -> Self {
        let comps = spec
            .comps
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                spec.grid.inverse(&mut buf);
                buf.iter().map(|z| z.re).collect()
            })
            .collect();
        Self { grid: spec.grid.clone(), comps }
    }
}

impl Spectrum {
    pub fn zeros(grid: &TorusGrid, components: usize) -> Self {
        Self {
            grid: grid.clone(),
            comps: vec![vec![Complex64::default(); grid.len()]; components],
        }
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    /// `Σ_k |c_k|²` over components, equal to `‖f‖²_{L²}` by Parseval.
    pub fn energy(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| pairwise_sum_map_c(c, |z| z.norm_sqr()))
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|z| *z *= s);
    }

    pub fn axpy(&mut self, a: f64, other: &Spectrum) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += q * a);
        }
    }

    /// Multiplies each mode by `g(k)` with `k` the wavevector.
    pub fn apply(&mut self, g: impl Fn(&[f64; 3]) -> f64) {
        for i in 0..self.grid.len() {
            let m = g(&self.grid.kvec(i));
            for c in self.comps.iter_mut() {
                c[i] *= m;
            }
        }
    }

    pub fn to_field(&self) -> TorusField {
        TorusField::from_spectrum(self)
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_map(xs, |x| x)
}

pub fn pairwise_sum_map(xs: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    if xs.len() <= 64 {
        xs.iter().map(|&x| f(x)).sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_map(&xs[..mid], f) + pairwise_sum_map(&xs[mid..], f)
    }
}

fn pairwise_sum_map_c(xs: &[Complex64], f: impl Fn(&Complex64) -> f64 + Copy) -> f64 {
    if xs.len() <= 64 {
        xs.iter().map(f).sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_map_c(&xs[..mid], f) + pairwise_sum_map_c(&xs[mid..], f)
    }
}
