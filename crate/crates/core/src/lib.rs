//! Toolkit for benchmarking non-intrusive speech quality models.

pub mod config;
pub mod degradation;
pub mod error;
pub mod harness;
pub mod io;
pub mod mapping;
pub mod metrics;
pub mod model;
pub mod ratings;
pub mod seed;

pub use error::{Error, Result};
