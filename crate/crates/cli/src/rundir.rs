//! The directory written by `embed` and read by every later stage.
//!
//! ```text
//! pairs.tsv           covered antonym/synonym pairs, then shuffled controls
//! vectors.txt         vectors for every word in pairs.tsv
//! coverage.tsv        per-label pair coverage and the word count
//! cosines.tsv/.svg    within-pair cosine histograms per label
//! manifest-embed.json
//! ```

use std::path::{Path, PathBuf};

use antsyn::embedstore::load_vectors_text;
use antsyn::tsv::read_pairs;
use antsyn::{EmbeddingSource, EmbeddingStore, PairDataset};

use crate::exit::{CliResult, Failure};
use crate::manifest::RunManifest;

pub const PAIRS: &str = "pairs.tsv";
pub const VECTORS: &str = "vectors.txt";
pub const COVERAGE: &str = "coverage.tsv";
pub const EMBED_MANIFEST: &str = "manifest-embed.json";

pub struct RunDir {
    pub path: PathBuf,
    pub source: EmbeddingSource,
    pub store: EmbeddingStore,
    /// Real pairs; split tags index the dataset's own split.
    pub pairs: PairDataset,
    /// The controls written by `embed` with its seed.
    pub controls: PairDataset,
}

impl RunDir {
    pub fn open(path: &Path) -> CliResult<RunDir> {
        let manifest_path = path.join(EMBED_MANIFEST);
        if !manifest_path.is_file() {
            return Err(Failure::usage(format!(
                "{} is not an embed output directory (no {EMBED_MANIFEST})",
                path.display()
            )));
        }
        let manifest = RunManifest::read(&manifest_path)?;
        let source = manifest
            .model_source
            .ok_or_else(|| Failure::data(format!("{} names no model", manifest_path.display())))?;
        let all = read_pairs(&path.join(PAIRS), "pairs")?;
        let pairs = all.filter("pairs", |p| !p.label.is_shuffled());
        let controls = all.filter("controls", |p| p.label.is_shuffled());
        let store = load_vectors_text(&path.join(VECTORS), source)?;
        Ok(RunDir { path: path.to_owned(), source, store, pairs, controls })
    }

    /// Files whose digests identify this run's data.
    pub fn data_files(&self) -> [PathBuf; 2] {
        [self.path.join(PAIRS), self.path.join(VECTORS)]
    }
}
