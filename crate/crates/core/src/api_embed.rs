//! Remote text-embedding client with a persistent per-model cache.
//!
//! Cache layout: one file per model, `<cache_dir>/<model_name>.txt`, in the
//! text vector format of [`crate::embedstore`]. Cached words never hit the
//! network. Each completed batch is merged into the cache file through a
//! temp file and an atomic rename.

use std::collections::HashMap;
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use crate::embedstore::{load_vectors_text, EmbeddingSource, EmbeddingStore};
use crate::error::{Error, Result};

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/embeddings";
pub const MAX_BATCH: usize = 2048;

/// Declared output width of the supported models.
pub fn model_dimension(model_name: &str) -> Option<usize> {
    match model_name {
        "text-embedding-3-small" => Some(1536),
        "text-embedding-3-large" => Some(3072),
        _ => None,
    }
}

pub fn model_source(model_name: &str) -> Option<EmbeddingSource> {
    match model_name {
        "text-embedding-3-small" => Some(EmbeddingSource::ApiSmall),
        "text-embedding-3-large" => Some(EmbeddingSource::ApiLarge),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedRequest {
    pub words: Vec<String>,
    pub model_name: String,
    pub batch_size: usize,
}

impl EmbedRequest {
    pub fn new(words: Vec<String>, model_name: impl Into<String>, batch_size: usize) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Param("embedding request has no words".into()));
        }
        if batch_size == 0 || batch_size > MAX_BATCH {
            return Err(Error::Param(format!(
                "batch size must be in 1..={MAX_BATCH}, got {batch_size}"
            )));
        }
        let model_name = model_name.into();
        if model_dimension(&model_name).is_none() {
            return Err(Error::Param(format!("unsupported embedding model {model_name:?}")));
        }
        Ok(EmbedRequest {
            words,
            model_name,
            batch_size,
        })
    }
}

/// On-disk vector cache rooted at a directory.
#[derive(Debug, Clone)]
pub struct EmbedCache {
    dir: PathBuf,
}

impl EmbedCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        EmbedCache { dir: dir.into() }
    }

    pub fn path_for(&self, model_name: &str) -> PathBuf {
        self.dir.join(format!("{model_name}.txt"))
    }

    /// Cached vectors for a model; an absent cache file is an empty cache.
    pub fn load(&self, model_name: &str) -> Result<Option<EmbeddingStore>> {
        let path = self.path_for(model_name);
        if !path.exists() {
            return Ok(None);
        }
        let source = model_source(model_name).unwrap_or(EmbeddingSource::ApiSmall);
        let store = load_vectors_text(&path, source)?;
        if let Some(dim) = model_dimension(model_name) {
            if store.dim() != dim {
                return Err(Error::Data(format!(
                    "cache {} holds {}-dimensional vectors, {model_name} produces {dim}",
                    path.display(),
                    store.dim()
                )));
            }
        }
        Ok(Some(store))
    }

    fn save(&self, store: &EmbeddingStore, model_name: &str) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        store.write_text(&self.path_for(model_name))
    }
}

/// One failed call to the remote endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportFailure {
    pub retryable: bool,
    pub message: String,
}

/// Sends one batch and returns one vector per input, in input order.
pub trait EmbeddingTransport {
    fn embed_batch(
        &mut self,
        model_name: &str,
        inputs: &[String],
        api_key: &str,
    ) -> std::result::Result<Vec<Vec<f32>>, TransportFailure>;
}

/// Delays between attempts. A batch is tried once, then once after each
/// delay.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub delays: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            delays: vec![
                Duration::from_secs(1),
                Duration::from_secs(4),
                Duration::from_secs(16),
            ],
        }
    }
}

/// Embeds `req.words`, serving cached words locally and fetching misses in
/// batches of `req.batch_size`.
pub fn embed_words(
    req: &EmbedRequest,
    cache: &EmbedCache,
    credentials: Option<&str>,
    transport: &mut dyn EmbeddingTransport,
    policy: &RetryPolicy,
) -> Result<EmbeddingStore> {
    embed_words_with_sleep(req, cache, credentials, transport, policy, &mut thread::sleep)
}

pub fn embed_words_with_sleep(
    req: &EmbedRequest,
    cache: &EmbedCache,
    credentials: Option<&str>,
    transport: &mut dyn EmbeddingTransport,
    policy: &RetryPolicy,
    sleep: &mut dyn FnMut(Duration),
) -> Result<EmbeddingStore> {
    let dim = model_dimension(&req.model_name)
        .ok_or_else(|| Error::Param(format!("unsupported embedding model {:?}", req.model_name)))?;
    let source = model_source(&req.model_name).expect("model has a dimension");
    let mut cached = match cache.load(&req.model_name)? {
        Some(s) => s,
        None => EmbeddingStore::new(dim, source)?,
    };

    let mut misses: Vec<String> = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for w in &req.words {
        if !cached.contains(w) && seen.insert(w.as_str(), ()).is_none() {
            misses.push(w.clone());
        }
    }
    if !misses.is_empty() {
        let key = credentials.filter(|k| !k.is_empty()).ok_or_else(|| {
            Error::Config(format!(
                "{} words are not cached for {} and no API key is set ({API_KEY_ENV})",
                misses.len(),
                req.model_name
            ))
        })?;
        for batch in misses.chunks(req.batch_size) {
            let vectors = send_with_retry(transport, &req.model_name, batch, key, policy, sleep)?;
            if vectors.len() != batch.len() {
                return Err(Error::Data(format!(
                    "endpoint returned {} vectors for {} inputs",
                    vectors.len(),
                    batch.len()
                )));
            }
            for (w, v) in batch.iter().zip(&vectors) {
                if v.len() != dim {
                    return Err(Error::Data(format!(
                        "{} returned a {}-dimensional vector for {w:?}, expected {dim}",
                        req.model_name,
                        v.len()
                    )));
                }
                cached.insert(w.clone(), v)?;
            }
            cache.save(&cached, &req.model_name)?;
        }
    }
    Ok(cached.subset(req.words.iter().map(String::as_str)))
}

fn send_with_retry(
    transport: &mut dyn EmbeddingTransport,
    model: &str,
    batch: &[String],
    key: &str,
    policy: &RetryPolicy,
    sleep: &mut dyn FnMut(Duration),
) -> Result<Vec<Vec<f32>>> {
    let mut last = String::new();
    for attempt in 0..=policy.delays.len() {
        if attempt > 0 {
            sleep(policy.delays[attempt - 1]);
        }
        match transport.embed_batch(model, batch, key) {
            Ok(v) => return Ok(v),
            Err(f) if f.retryable => last = f.message,
            Err(f) => return Err(Error::Transport(f.message)),
        }
    }
    Err(Error::Transport(format!(
        "giving up after {} attempts: {last}",
        policy.delays.len() + 1
    )))
}

/// JSON-over-HTTP transport for the provider's embeddings endpoint.
#[cfg(feature = "api")]
pub struct HttpTransport {
    endpoint: String,
    agent: ureq::Agent,
}

#[cfg(feature = "api")]
impl HttpTransport {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build();
        HttpTransport {
            endpoint: endpoint.into(),
            agent: config.into(),
        }
    }
}

#[cfg(feature = "api")]
#[derive(serde::Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[cfg(feature = "api")]
#[derive(serde::Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f32>,
}

#[cfg(feature = "api")]
impl EmbeddingTransport for HttpTransport {
    fn embed_batch(
        &mut self,
        model_name: &str,
        inputs: &[String],
        api_key: &str,
    ) -> std::result::Result<Vec<Vec<f32>>, TransportFailure> {
        let body = serde_json::json!({
            "model": model_name,
            "input": inputs,
            "encoding_format": "float",
        });
        let resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", format!("Bearer {api_key}"))
            .send_json(&body);
        let mut resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(code)) => {
                return Err(TransportFailure {
                    retryable: code == 429 || code >= 500,
                    message: format!("HTTP status {code}"),
                })
            }
            Err(e) => {
                return Err(TransportFailure {
                    retryable: true,
                    message: e.to_string(),
                })
            }
        };
        let parsed: EmbeddingResponse = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_json()
            .map_err(|e| TransportFailure {
                retryable: false,
                message: format!("malformed response: {e}"),
            })?;
        let mut out = vec![Vec::new(); inputs.len()];
        for d in parsed.data {
            if d.index >= out.len() {
                return Err(TransportFailure {
                    retryable: false,
                    message: format!("response index {} out of range", d.index),
                });
            }
            out[d.index] = d.embedding;
        }
        Ok(out)
    }
}

/// Reads the API key from the environment.
pub fn credentials_from_env() -> Option<String> {
    std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty())
}
