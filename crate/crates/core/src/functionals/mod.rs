//! Energies, dissipations, relative entropies and transport distances.

mod energy;
mod entropy;
mod fine_key;
pub mod record;
mod wasserstein;

pub use energy::{
    dissipation, energy, gagliardo_nirenberg_exponents, higher_dissipation, lambda_bound,
    modulated_energy, phase_space_concentration, C_P,
};
pub use entropy::{relative_entropy, EntropyForm, ReferenceFields, RelativeEntropy};
pub use fine_key::{fine_key_residual, FineKeyResidual, FineKeySample, FineKeyTrace, RESIDUAL_FLOOR};
pub use record::{csv_header, write_csv, DiagnosticRecord};
pub use wasserstein::{
    torus_diameter, torus_distance, w1_entropic_points, w1_exact_points, wasserstein1,
    wasserstein1_with, W1Method, ENTROPIC_REG_FACTOR, EXACT_MAX_N,
};
