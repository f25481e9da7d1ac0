//! Quantum-jump simulation of a slowly driven, dissipative two-level system
//! with dissipators built in the diabatic, adiabatic or superadiabatic frame.

pub mod cli;
pub mod dissipation;
pub mod ensemble;
pub mod error;
pub mod jump_engine;
pub mod mat2;
pub mod master_eq;
pub mod model;
pub mod output;
pub mod renorm;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Order, SystemConfig};
