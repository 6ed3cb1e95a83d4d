//! Harness around `rmrk-core`: run configurations, Matrix Market instance
//! export, CSV traces and summaries, and the acceptance suite.

pub mod acceptance;
pub mod clock;
pub mod config;
pub mod csvio;
pub mod error;
pub mod mtx;
pub mod runner;

pub use error::BenchError;
