use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, VnsError};

/// Uniform periodic grid on the torus `[0, 2π)^d` with `n` nodes per axis.
///
/// Integrals are taken against the normalized Lebesgue measure, so the
/// measure of the whole torus is 1 and each cell carries `1 / n^d`.
#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(VnsError::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(VnsError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * PI
    }

    /// Node spacing `h = 2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Cell volume against the normalized measure.
    pub fn cell_volume(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Signed wavenumber of FFT index `i`: `{-n/2+1, ..., n/2}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Stride of `axis` in the row-major layout (last axis contiguous).
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Multi-index of a flat node index.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of node `flat`.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let m = self.multi_index(flat);
        let h = self.spacing();
        [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h]
    }

    /// Wavevector of spectral index `flat`.
    pub fn kvec(&self, flat: usize) -> [f64; 3] {
        let m = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(m[a]) as f64;
        }
        k
    }

    /// True when any component of the mode is the unpaired Nyquist wavenumber.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let m = self.multi_index(flat);
        (0..self.dim).any(|a| m[a] == self.n / 2)
    }

    /// True when the mode survives the 2/3 truncation.
    pub fn keeps_mode(&self, flat: usize) -> bool {
        let cut = (self.n / 3) as i64;
        let m = self.multi_index(flat);
        (0..self.dim).all(|a| self.wavenumber(m[a]).abs() <= cut)
    }

    /// Forward transform in place; coefficients are scaled by `1 / n^d` so
    /// that `mean |f|^2 = Σ |c_k|^2`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        let n = self.n;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // last axis is contiguous
        fft.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut lines = vec![Complex64::default(); data.len()];
        for axis in 0..self.dim - 1 {
            let stride = self.stride(axis);
            let block = stride * n;
            // gather every line along `axis` into contiguous storage
            let mut l = 0;
            for b in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for i in 0..n {
                        lines[l * n + i] = data[b + off + i * stride];
                    }
                    l += 1;
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            let mut l = 0;
            for b in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for i in 0..n {
                        data[b + off + i * stride] = lines[l * n + i];
                    }
                    l += 1;
                }
            }
        }
    }
}
