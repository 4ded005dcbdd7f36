pub mod error;
pub mod guard;
pub mod lattice;
pub mod matchings;
pub mod moves;
pub mod potts;
pub mod quantum;
pub mod selftest;

pub use error::{LoopError, Result};
