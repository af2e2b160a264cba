//! File formats, catalog builds, the benchmark harness and the command
//! line front end around `starid-core`.

pub mod bench;
pub mod build;
pub mod cli;
pub mod config;
mod error;
pub mod image_io;
pub mod plot;
pub mod records;
pub mod report;
pub mod source;
pub mod store_io;

pub use error::Error;
