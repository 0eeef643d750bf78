pub mod cli;
pub mod coherent;
pub mod dd;
pub mod error;
pub mod fock;
pub mod harmonics;
pub mod identities;
pub mod operators;

pub use error::{Error, Result};
