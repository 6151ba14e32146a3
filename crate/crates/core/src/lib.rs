//! Poisson functional representation over finite alphabets.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod instance;
pub mod model;
pub mod pml;
pub mod prob;
pub mod race;
pub mod rng;
pub mod schemes;
pub mod second_order;

pub use error::{Error, Result};
