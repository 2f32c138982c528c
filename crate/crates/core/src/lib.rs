pub mod action;
pub mod algebra;
pub mod error;
pub mod examples;
pub mod extension;
pub mod fuzz;
pub mod groupoid;
pub mod instance;
pub mod linmap;
pub mod matrix;
pub mod pipeline;
pub mod rational;
pub mod report;
pub mod skew;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
