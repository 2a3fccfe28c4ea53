//! Run configuration files, CSV tables and SVG plots.

pub mod config;
pub mod csv;
pub mod svg;
pub mod tables;

pub use config::{parse_config, parse_config_str, ConfigError, ConfigErrors, RunConfig};
pub use csv::{format_float, read_csv, write_csv, Cell, CsvError, CsvTable};
pub use svg::{render_svg, Plot, Series};
