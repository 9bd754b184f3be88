//! Semiclassical partition functions of one-dimensional quantum systems
//! from turning-point integrals over the potential.

pub mod catastrophe;
pub mod checks;
pub mod elliptic;
pub mod error;
pub mod format;
pub mod oracle;
pub mod partition;
pub mod paths;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
pub use potential::{Family, PotentialConfig, PotentialSpec, UnitSystem, WellDescriptor};
