//! Command-line front end, file formats and HTTP transport for the IPS
//! decoding engine.

pub mod backend_spec;
pub mod commands;
pub mod error;
pub mod heatmap;
pub mod output;
pub mod records;
pub mod remote;
pub mod server;

pub use backend_spec::BackendSpec;
pub use error::CliError;
