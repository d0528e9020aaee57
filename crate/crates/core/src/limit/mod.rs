//! Reference solvers for the limit systems.

mod ins;
mod semi_lagrangian;
mod tns;

pub use ins::{ins_step, pressure_cg, InsState, CG_MAX_ITER, CG_TOLERANCE};
pub use semi_lagrangian::{cubic_clipped, sl_transport};
pub use tns::{ns_pressure_term, tns_step, TnsState};
