pub mod corpus;
pub mod error;

pub use error::{Error, Result};
pub mod screen;
pub mod profile;
pub mod hmm;
pub mod maxent;
pub mod eval;
pub mod synthetic;
pub mod experiment;
