//! Command-line pipelines and data formats on top of `lowlying-core`: Maass
//! form data files, layered run configuration, parallel scan drivers and
//! CSV/JSON output.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod scan;

pub use error::{AppError, AppResult};
pub use lowlying_core;
