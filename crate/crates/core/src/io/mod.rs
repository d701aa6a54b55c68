//! Configuration loading and bit-stable export of tables.

pub mod config;
pub mod manifest;
pub mod table;

pub use config::{Experiment, RunConfig, Topology, WorldSelection};
pub use manifest::{config_hash, write_outputs, Manifest};
pub use table::{export_csv, Cell, Table};
