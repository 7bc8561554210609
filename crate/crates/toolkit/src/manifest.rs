//! Run manifests: everything needed to re-run a command and check that it
//! reproduces its outputs byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use stealth_core::rng::RNG_ALGORITHM;

use crate::error::Result;
use crate::formats::write_json;
use crate::hash::file_digest;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, exactly as given.
    pub argv: Vec<String>,
    /// Parsed parameter values (rationals already resolved to doubles).
    pub params: Value,
    pub rng: String,
    pub seeds: BTreeMap<String, u64>,
    /// Input path (as given) to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name, relative to the output directory, to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Collects a manifest while a command runs.
#[derive(Debug)]
pub struct Recorder {
    manifest: RunManifest,
}

impl Recorder {
    pub fn new(command: &str, argv: &[String], params: Value) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                argv: argv.to_vec(),
                params,
                rng: RNG_ALGORITHM.to_string(),
                seeds: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: unix_now(),
                finished_unix: 0,
            },
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.manifest.seeds.insert(name.to_string(), value);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = file_digest(path)?;
        self.manifest.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Records `name` inside `dir`; call after the file is written.
    pub fn output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let digest = file_digest(&dir.join(name))?;
        self.manifest.outputs.insert(name.to_string(), digest);
        Ok(())
    }

    /// Writes `manifest.json` into `dir` and returns its path.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.manifest.finished_unix = unix_now();
        let path = dir.join(MANIFEST_FILE);
        write_json(&path, &self.manifest)?;
        Ok(path)
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }
}

/// Output files whose digests differ between two manifests, including files
/// present in only one of them.
pub fn output_mismatches(a: &RunManifest, b: &RunManifest) -> Vec<String> {
    let mut names: Vec<&String> = a.outputs.keys().chain(b.outputs.keys()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .filter(|k| a.outputs.get(*k) != b.outputs.get(*k))
        .cloned()
        .collect()
}

/// Copy of `argv` with the value of `--out-dir` replaced by `dir`.
pub fn with_out_dir(argv: &[String], dir: &Path) -> Option<Vec<String>> {
    let mut out = argv.to_vec();
    let dir = dir.display().to_string();
    for i in 0..out.len() {
        if out[i] == "--out-dir" && i + 1 < out.len() {
            out[i + 1] = dir;
            return Some(out);
        }
        if out[i].starts_with("--out-dir=") {
            out[i] = format!("--out-dir={dir}");
            return Some(out);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(outputs: &[(&str, &str)]) -> RunManifest {
        let mut r = Recorder::new("x", &[], Value::Null);
        for (k, v) in outputs {
            r.manifest.outputs.insert(k.to_string(), v.to_string());
        }
        r.manifest
    }

    #[test]
    fn mismatches_cover_changed_and_missing_files() {
        let a = manifest(&[("a", "1"), ("b", "2")]);
        let b = manifest(&[("a", "1"), ("b", "3"), ("c", "4")]);
        assert_eq!(output_mismatches(&a, &b), vec!["b".to_string(), "c".to_string()]);
        assert!(output_mismatches(&a, &a).is_empty());
    }

    #[test]
    fn out_dir_is_swapped_in_both_spellings() {
        let argv: Vec<String> = ["gen", "--out-dir", "old", "--seed", "3"].iter().map(|s| s.to_string()).collect();
        let swapped = with_out_dir(&argv, Path::new("new")).unwrap();
        assert_eq!(swapped[2], "new");
        let argv = vec!["gen".to_string(), "--out-dir=old".to_string()];
        assert_eq!(with_out_dir(&argv, Path::new("n")).unwrap()[1], "--out-dir=n");
        assert!(with_out_dir(&["gen".to_string()], Path::new("n")).is_none());
    }

    #[test]
    fn recorder_hashes_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("out.txt"), b"abc").unwrap();
        let mut r = Recorder::new("t", &["t".into()], serde_json::json!({"k": 1}));
        r.seed("seed", 7);
        r.output(dir.path(), "out.txt").unwrap();
        let path = r.finish(dir.path()).unwrap();
        let back: RunManifest = crate::formats::read_json(&path).unwrap();
        assert_eq!(back.seeds["seed"], 7);
        assert_eq!(
            back.outputs["out.txt"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
