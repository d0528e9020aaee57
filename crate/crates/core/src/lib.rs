//! Multiscale Vlasov–Navier–Stokes simulator on the periodic torus.
//!
//! Particles carry the kinetic distribution, a pseudospectral solver
//! carries the fluid, and the two exchange momentum through the Brinkman
//! force. Limit models, functionals and an ε-sweep harness sit on top.

pub mod error;
pub mod fluid;
pub mod functionals;
pub mod grid_spectral;
pub mod harness;
pub mod kinetic;
pub mod limit;

pub use error::{Result, VnsError};
pub use fluid::{ns_step, ExistenceMonitor, FluidState};
pub use grid_spectral::{TorusField, TorusGrid};
