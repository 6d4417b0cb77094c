//! Ensemble systems over parameter grids: realification, pullbacks,
//! controllable-subspace residual probes and time-domain simulation.

pub mod demos;
pub mod residual;
pub mod simulate;
pub mod space;
pub mod system;

pub use residual::{gram_residual, profile_from_fn, profile_from_series};
pub use simulate::{simulate, Input, Trajectory};
pub use space::{ParamSpace, SpaceJson, SpaceKind};
pub use system::{EnsembleSystem, Entry, FieldTag, MatrixField};
