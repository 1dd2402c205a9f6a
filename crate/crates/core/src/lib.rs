//! Integrated information, Hamiltonian separability and autonomy measures for
//! finite-dimensional classical and quantum systems.

pub mod classical;
pub mod dynamics;
pub mod emergent;
pub mod error;
pub mod hilbert;
pub mod info;
pub mod quantum;
pub mod random;
pub mod search;
pub mod separability;

pub use error::{Error, Result};
