pub mod algorithms;
pub mod channel;
pub mod data;
pub mod error;
pub mod harness;
mod linalg;
pub mod momentum;
pub mod problems;
pub mod theory;
pub mod vector;

pub use error::{Error, Result};
pub use vector::ModelVector;
