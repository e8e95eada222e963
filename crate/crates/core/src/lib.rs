//! Scheduled Relaxation Jacobi.
//!
//! * [`amplification`]: Γ(κ), its slope, κ_m and effective grid sizes.
//! * [`optimizer`]: optimal weights ω and fractions β for P levels.
//! * [`scheduler`]: integer repetition counts and the M-cycle layout.
//! * [`params_db`]: parameter tables, including the published ones.
//! * [`scalar`]: `f64` and extended-precision scalars.

pub mod amplification;
pub mod error;
pub mod optimizer;
pub mod params_db;
pub mod scalar;
pub mod scheduler;

pub use amplification::{BoundaryKind, KappaRange, WeightSchedule};
pub use error::SrjError;
