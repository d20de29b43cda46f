//! Wall-reflected interlacing particle system: exact simulation, the
//! determinantal correlation kernel, and height-fluctuation asymptotics.

pub mod acceptance;
pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod montecarlo;
pub mod specialfn;

pub use error::{Error, Result};
