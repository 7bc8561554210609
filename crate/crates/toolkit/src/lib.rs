//! Companion crate to `stealth-core`: JSON file formats, canonical
//! serialization and hashing, run manifests, a synthetic fixture generator and
//! the `stealth` command-line tool.

pub mod canonical;
pub mod cli;
pub mod error;
pub mod formats;
pub mod hash;
pub mod manifest;
pub mod mc;
pub mod synth;

pub use error::{exit, Result, ToolError};
