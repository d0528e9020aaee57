//! Configuration, the coupled time loop, ε-sweeps and the oracle suite.

pub mod config;
pub mod coupled;
pub mod presets;
pub mod reference;
pub mod sweep;
pub mod validate;

pub use config::{DensityPreset, OffsetProfile, ReferenceModel, RunConfig, Splitting, VelocityLaw, VelocityPreset};
pub use coupled::{
    coupled_step, initial_state, reference_for, run_coupled, simulate, write_error_record, write_outputs,
    ErrorSample, InitialState, RunOutput, RunSummary,
};
pub use reference::{run_reference, ReferenceSample, ReferenceTrajectory};
pub use sweep::{fit_slope, run_sweep, MemberMetrics, RateFit, SlopeFit};
pub use validate::{check_names, validate, ValidationCheck};
