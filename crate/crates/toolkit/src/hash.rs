//! SHA-256 digests of canonical models and of raw files.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use stealth_core::Network;

use crate::canonical::to_canonical;
use crate::error::{Result, ToolError};
use crate::formats::{read_json, ModelFile};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical serialization of a model file. Key order,
/// whitespace and number spelling in the source do not matter.
pub fn model_file_digest(model: &ModelFile) -> Result<String> {
    Ok(sha256_hex(to_canonical(model)?.as_bytes()))
}

pub fn network_digest(net: &Network) -> Result<String> {
    model_file_digest(&ModelFile::from_network(net))
}

/// Parses and validates the model at `path`, then hashes its canonical form.
pub fn hash_model_path(path: &Path) -> Result<String> {
    let file: ModelFile = read_json(path)?;
    file.to_network().map_err(|e| ToolError::parse(path, e))?;
    model_file_digest(&file)
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| ToolError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
