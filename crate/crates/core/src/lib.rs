pub mod error;
pub mod flow;
pub mod function;
pub mod hermite;
pub mod hypercube;
pub mod ou;

pub use error::{Error, Result};
