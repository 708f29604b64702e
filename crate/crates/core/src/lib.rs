//! Iterated-logarithm weights, series-improved Hardy functionals, ground-state
//! and Emden-Fowler transforms, and numerical sharpness probes.

pub mod config;
pub mod error;
pub mod functionals;
pub mod probes;
pub mod profile;
pub mod quad;
pub mod transforms;
pub mod weights;

pub use config::{HardyConfig, Regime};
pub use error::{HardyError, Result};
pub use functionals::{Estimate, FunctionalReport, Margin};
pub use probes::{Family, QuotientReport, SweepReport, Target};
pub use profile::{PolyBump, PolyMix, RadialProfile, Sampled, SeparableProfile, SharedProfile};
pub use quad::{GradedMesh, QuadResult, QuadSettings};
pub use weights::{Weights, MAX_DEPTH};
pub use transforms::{EmdenFowlerMap, GroundState};
