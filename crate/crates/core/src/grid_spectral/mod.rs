//! Periodic grid, Fourier transforms and spectral operators.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{pairwise_sum, pairwise_sum_map, Spectrum, TorusField};
pub use grid::TorusGrid;
pub use ops::{
    curl_3d, dealias, dealias_spectrum, divergence, divergence_spectrum, grad_linf,
    grad_scalar_spectrum, gradient, gradient_spectrum, heat_semigroup, heat_spectrum,
    laplacian, laplacian_spectrum, leray_project, leray_spectrum, sobolev_norm,
    sobolev_norm_spectrum, spectral_divergence_max, vorticity_2d,
};
