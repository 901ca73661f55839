//! Embedding providers, caching and vector geometry.

mod geometry;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotate::tokenize;
use crate::hashing::sha256_hex;

pub use geometry::{
    centroid, cosine_distance, cosine_similarity, manhattan_distance, percentile_rank, EmbeddingVector,
};

/// Output width of the default sentence-embedding model.
pub const DEFAULT_DIMENSION: usize = 768;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("empty input")]
    Empty,
    #[error("vector contains a non-finite component")]
    NonFinite,
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("text to embed must be non-empty")]
    EmptyText,
    #[error("embedding provider failed: {0}")]
    Provider(String),
}

/// A text-to-vector model.
pub trait EmbeddingProvider: Send + Sync {
    /// Model name and revision; recorded in every report.
    fn provider_id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

/// Deterministic offline embedder.
///
/// Each token maps to a seeded Gaussian direction; a text's vector is the
/// normalized sum of its token directions plus a smaller whole-text
/// component, so texts sharing words are similar and any edit changes the
/// vector.
pub struct StubEmbedder {
    id: String,
    dimension: usize,
    token_vectors: Mutex<HashMap<String, Vec<f64>>>,
}

impl StubEmbedder {
    pub fn new(dimension: usize) -> Self {
        Self {
            id: format!("stub-hash-v1-d{dimension}"),
            dimension,
            token_vectors: Mutex::new(HashMap::new()),
        }
    }

    fn gaussian(&self, seed_material: &[u8]) -> Vec<f64> {
        let seed: [u8; 32] = Sha256::digest(seed_material).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        (0..self.dimension)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut cache = self.token_vectors.lock().expect("token cache lock");
        cache
            .entry(token.to_string())
            .or_insert_with(|| self.gaussian(format!("tok\0{token}").as_bytes()))
            .clone()
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut acc = self.gaussian(format!("txt\0{text}").as_bytes());
        for a in acc.iter_mut() {
            *a *= 0.5;
        }
        for tok in tokenize(text) {
            for (a, t) in acc.iter_mut().zip(self.token_vector(&tok)) {
                *a += t;
            }
        }
        let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
        acc.into_iter().map(|a| a / norm).collect()
    }
}

impl Default for StubEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

impl EmbeddingProvider for StubEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpEmbedderConfig {
    /// Recorded as the provider id, e.g. `sentence-transformers/all-mpnet-base-v2@<rev>`.
    pub provider_id: String,
    pub endpoint: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub auth_env_var: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}
fn default_timeout_ms() -> u64 {
    60_000
}
fn default_attempts() -> u32 {
    3
}
fn default_batch() -> usize {
    64
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedReply {
    vectors: Vec<Vec<f64>>,
}

/// Embedding service speaking `POST {texts: [..]} -> {vectors: [[..]]}`.
pub struct HttpEmbedder {
    cfg: HttpEmbedderConfig,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(cfg: HttpEmbedderConfig) -> Result<Self, EmbedError> {
        let token =
            if cfg.auth_env_var.is_empty() {
                None
            } else {
                Some(std::env::var(&cfg.auth_env_var).map_err(|_| {
                    EmbedError::Provider(format!("environment variable {} is not set", cfg.auth_env_var))
                })?)
            };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { cfg, token, agent })
    }

    fn call(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, (bool, String)> {
        let mut req = self.agent.post(&self.cfg.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req
            .send_json(&EmbedRequest { texts })
            .map_err(|e| (true, e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((status == 429 || status >= 500, format!("HTTP {status}: {body}")));
        }
        let reply: EmbedReply = resp
            .body_mut()
            .read_json()
            .map_err(|e| (false, format!("malformed response: {e}")))?;
        if reply.vectors.len() != texts.len() {
            return Err((
                false,
                format!("expected {} vectors, got {}", texts.len(), reply.vectors.len()),
            ));
        }
        Ok(reply.vectors)
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn provider_id(&self) -> &str {
        &self.cfg.provider_id
    }

    fn dimension(&self) -> usize {
        self.cfg.dimension
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.cfg.batch_size.max(1)) {
            let mut attempt = 0;
            loop {
                attempt += 1;
                match self.call(chunk) {
                    Ok(v) => {
                        out.extend(v);
                        break;
                    }
                    Err((retryable, msg)) if retryable && attempt < self.cfg.max_attempts => {
                        log::warn!("embedding attempt {attempt} failed: {msg}");
                        std::thread::sleep(Duration::from_millis(250 << attempt.min(6)));
                    }
                    Err((_, msg)) => return Err(EmbedError::Provider(msg)),
                }
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct DiskEntry {
    provider_id: String,
    text_hash: String,
    vector: Vec<f64>,
}

/// Memoizing front end for a provider, optionally persisted under
/// `root/<provider_id>/<text hash>.json`.
pub struct CachedEmbedder {
    provider: Box<dyn EmbeddingProvider>,
    memory: Mutex<HashMap<String, EmbeddingVector>>,
    disk_root: Option<PathBuf>,
}

impl CachedEmbedder {
    pub fn new(provider: Box<dyn EmbeddingProvider>) -> Self {
        Self {
            provider,
            memory: Mutex::new(HashMap::new()),
            disk_root: None,
        }
    }

    pub fn with_disk_cache(mut self, root: impl Into<PathBuf>) -> Self {
        self.disk_root = Some(root.into());
        self
    }

    pub fn provider_id(&self) -> &str {
        self.provider.provider_id()
    }

    pub fn dimension(&self) -> usize {
        self.provider.dimension()
    }

    fn disk_path(&self, text_hash: &str) -> Option<PathBuf> {
        self.disk_root.as_ref().map(|r| {
            r.join(crate::hashing::path_segment(self.provider_id()))
                .join(format!("{text_hash}.json"))
        })
    }

    fn read_disk(&self, text_hash: &str) -> Option<EmbeddingVector> {
        let bytes = fs::read(self.disk_path(text_hash)?).ok()?;
        let entry: DiskEntry = serde_json::from_slice(&bytes).ok()?;
        if entry.provider_id != self.provider_id() || entry.vector.len() != self.dimension() {
            return None;
        }
        EmbeddingVector::new(entry.vector).ok()
    }

    fn write_disk(&self, text_hash: &str, v: &EmbeddingVector) {
        let Some(path) = self.disk_path(text_hash) else { return };
        let result = (|| -> std::io::Result<()> {
            let dir = path.parent().expect("cache path has a parent");
            fs::create_dir_all(dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            let entry = DiskEntry {
                provider_id: self.provider_id().to_string(),
                text_hash: text_hash.to_string(),
                vector: v.as_slice().to_vec(),
            };
            serde_json::to_writer(&mut tmp, &entry)?;
            tmp.write_all(b"\n")?;
            tmp.persist(&path).map_err(|e| e.error)?;
            Ok(())
        })();
        if let Err(e) = result {
            log::warn!("failed to write embedding cache {}: {e}", path.display());
        }
    }

    pub fn embed_text(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        Ok(self.embed_many(&[text])?.remove(0))
    }

    /// Embed several texts, calling the provider once for all cache misses.
    pub fn embed_many(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(EmbedError::EmptyText);
        }
        let hashes: Vec<String> = texts.iter().map(|t| sha256_hex(t.as_bytes())).collect();
        let mut missing: Vec<usize> = Vec::new();
        {
            let mut mem = self.memory.lock().expect("embedding cache lock");
            for (i, h) in hashes.iter().enumerate() {
                if mem.contains_key(h) {
                    continue;
                }
                if let Some(v) = self.read_disk(h) {
                    mem.insert(h.clone(), v);
                } else if !missing.iter().any(|&j| hashes[j] == *h) {
                    missing.push(i);
                }
            }
        }
        if !missing.is_empty() {
            let batch: Vec<&str> = missing.iter().map(|&i| texts[i]).collect();
            let vectors = self.provider.embed_batch(&batch)?;
            let mut mem = self.memory.lock().expect("embedding cache lock");
            for (&i, raw) in missing.iter().zip(vectors) {
                if raw.len() != self.dimension() {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dimension(),
                        actual: raw.len(),
                    });
                }
                let v = EmbeddingVector::new(raw)?;
                self.write_disk(&hashes[i], &v);
                mem.insert(hashes[i].clone(), v);
            }
        }
        let mem = self.memory.lock().expect("embedding cache lock");
        Ok(hashes.iter().map(|h| mem[h].clone()).collect())
    }
}
