//! Run time assurance for autonomous spacecraft inspection.
//!
//! The crate provides Clohessy-Wiltshire relative dynamics, the six
//! inspection-task control barrier functions, three active set invariance
//! filters (explicit, implicit and discrete), the small dense optimizers they
//! rely on, and inference for the multilayer-perceptron inspection policy.

pub mod dynamics;
pub mod error;
pub mod filters;
pub mod inspection;
pub mod policy;
pub mod safety;
pub mod solvers;

pub use dynamics::{Control3, CwParams, State6, SunState};
pub use error::{ConfigError, PolicyError};
pub use safety::{AlphaSpec, SafetyParams};
