//! Run manifests: what was run, on which inputs, producing which files.
//!
//! Manifests carry no timestamps or host details, so re-running the same
//! command on the same inputs rewrites a byte-identical manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use antsyn::tsv::write_atomic;
use antsyn::{EmbeddingSource, Error};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub seeds: Vec<u64>,
    pub model_source: Option<EmbeddingSource>,
    /// Input path as given on the command line -> SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub parameters: serde_json::Value,
    /// Output file name, relative to the output directory -> SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seeds: Vec<u64>, model_source: Option<EmbeddingSource>, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command,
            seeds,
            model_source,
            inputs: BTreeMap::new(),
            parameters,
            outputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.insert(path.display().to_string(), file_digest(path)?);
        Ok(())
    }

    /// Records a file already written under `dir`.
    pub fn add_output(&mut self, dir: &Path, name: &str) -> CliResult<()> {
        self.outputs.insert(name.to_owned(), file_digest(&dir.join(name))?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serialises");
        json.push('\n');
        Ok(write_atomic(path, json.as_bytes())?)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()).into())
    }
}

/// Streaming SHA-256 of a file, hex encoded.
pub fn file_digest(path: &Path) -> CliResult<String> {
    let io_err = |e: io::Error| Error::io(PathBuf::from(path), e);
    let mut f = File::open(path).map_err(io_err)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(io_err)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
