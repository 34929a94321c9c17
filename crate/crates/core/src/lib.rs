pub mod bridge;
pub mod classifier;
pub mod config;
pub mod datasets;
pub mod embedding;
mod error;
pub mod graphspace;
pub mod pipeline;
pub mod recourse;
pub mod report;
pub mod walk;

pub use error::{Error, Result};
