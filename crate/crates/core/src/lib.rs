//! Geometry of antonym and synonym word pairs in embedding space.
//!
//! The crate covers the whole pipeline: loading labeled word pairs and
//! generating shuffled control pairs, loading word embeddings, building
//! difference (or concatenation) vector clouds, projecting them to the plane
//! with UMAP, t-SNE or PCA, and classifying pairs with a transductive
//! cluster-vote scheme. Results are scored, tabulated and plotted as SVG.

pub mod api_embed;
pub mod classify;
pub mod embedstore;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod pairdata;
pub mod plot;
pub mod reduce;
pub mod seed;
pub mod synth;
pub mod tsv;
pub mod vectorize;

pub use embedstore::{EmbeddingSource, EmbeddingStore};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use pairdata::{Label, PairDataset, Pos, SplitMode, SplitSpec, SplitTag, WordPair};
pub use reduce::{Metric, Projection, ProjectionMethod, UmapParams};
pub use vectorize::{Construction, LabeledCloud};
