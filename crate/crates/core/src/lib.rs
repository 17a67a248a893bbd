//! Simulation, training and sampling of deep QAOA circuits for Ising spin
//! glasses on heavy-hex and square lattices.

mod devices;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lattice;
pub mod linalg;
pub mod optimizer;
pub mod sampler;
pub mod schedule;
pub mod statevector;
pub mod tn;

pub use error::{Error, Result};
