//! Particle representation of the kinetic distribution.

mod deposit;
mod ensemble;
pub mod interp;
mod jacobian;
mod push;
mod regime;
mod sampling;

pub use deposit::{deposit, deposit_with_sums, DepositOptions, DepositSums, MomentFields};
pub use ensemble::{ParticleEnsemble, ENSEMBLE_MAGIC, ENSEMBLE_VERSION};
pub use jacobian::{jacobian_probe, FieldTrajectory, JacobianProbe};
pub use push::{push, push_exchange, push_particle};
pub use regime::{RegimeKind, ScalingRegime};
pub use sampling::{sample_initial, InitialDataSpec, VelocitySpec};

/// Particles per work unit in the parallel loops. Fixed so that reductions
/// happen in the same order on every run.
pub(crate) const CHUNK: usize = 8192;
