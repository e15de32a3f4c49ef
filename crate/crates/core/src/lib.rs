pub mod calculus;
pub mod cli;
pub mod error;
pub mod fields;
pub mod flatness;
pub mod kropina;
pub mod mth_root;
pub mod report;
pub mod sampling;
pub mod spray;
pub mod symmetric_tensor;
pub mod verify;

pub use error::{Error, Result};
