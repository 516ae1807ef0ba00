pub mod error;
pub mod kernels;
pub mod lattice;

pub use error::{Error, Result};
pub mod cli;
pub mod coupling;
pub mod dynamics;
pub mod measure;
pub mod pde;
