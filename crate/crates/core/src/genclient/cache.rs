use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::PromptVariant;
use crate::hashing::{hash_fields, path_segment};

/// One cached provider response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model_id: String,
    pub article_id: String,
    pub variant: PromptVariant,
    pub sample_index: u32,
    pub raw_response: String,
    pub created_at: DateTime<Utc>,
}

/// Identifies a single generation cell.
#[derive(Debug, Clone, Copy)]
pub struct CellKey<'a> {
    pub model_id: &'a str,
    pub article_id: &'a str,
    pub variant: PromptVariant,
    pub sample_index: u32,
    pub prompt: &'a str,
}

impl CellKey<'_> {
    pub fn digest(&self) -> String {
        let variant = self.variant.key();
        let sample = self.sample_index.to_le_bytes();
        hex::encode(hash_fields([
            self.model_id.as_bytes(),
            self.article_id.as_bytes(),
            variant.as_bytes(),
            sample.as_slice(),
            self.prompt.as_bytes(),
        ]))
    }
}

/// File-per-cell response cache laid out as `root/<model_id>/<article_id>/<key>.json`.
#[derive(Debug, Clone)]
pub struct GenerationCache {
    root: PathBuf,
}

impl GenerationCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, cell: &CellKey<'_>) -> PathBuf {
        self.root
            .join(path_segment(cell.model_id))
            .join(path_segment(cell.article_id))
            .join(format!("{}.json", cell.digest()))
    }

    /// Returns the cached entry, or `None` on a miss or an unreadable entry.
    pub fn get(&self, cell: &CellKey<'_>) -> Option<CacheEntry> {
        let path = self.path_for(cell);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<CacheEntry>(&bytes) {
            Ok(entry) if entry.key == cell.digest() => Some(entry),
            Ok(_) => {
                log::warn!("cache entry {} has mismatched key; ignoring", path.display());
                None
            }
            Err(e) => {
                log::warn!("corrupt cache entry {}: {e}", path.display());
                None
            }
        }
    }

    /// Atomically store an entry (write to a temp file, then rename).
    pub fn put(&self, entry: &CacheEntry) -> std::io::Result<()> {
        let dir = self
            .root
            .join(path_segment(&entry.model_id))
            .join(path_segment(&entry.article_id));
        fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer_pretty(&mut tmp, entry)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(dir.join(format!("{}.json", entry.key)))
            .map_err(|e| e.error)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::all_prompt_variants;

    fn cell<'a>(prompt: &'a str, sample_index: u32) -> CellKey<'a> {
        CellKey {
            model_id: "vendor/model-1",
            article_id: "bbc",
            variant: all_prompt_variants()[3],
            sample_index,
            prompt,
        }
    }

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cache = GenerationCache::new(dir.path());
        let c = cell("prompt", 0);
        assert!(cache.get(&c).is_none());
        let entry = CacheEntry {
            key: c.digest(),
            model_id: c.model_id.into(),
            article_id: c.article_id.into(),
            variant: c.variant,
            sample_index: 0,
            raw_response: "\"Headline\"".into(),
            created_at: Utc::now(),
        };
        cache.put(&entry).unwrap();
        assert_eq!(cache.get(&c), Some(entry));
        let path = cache.path_for(&c);
        assert!(path.starts_with(dir.path().join("vendor_model-1").join("bbc")));
        assert!(cache.get(&cell("prompt", 1)).is_none());
    }

    #[test]
    fn keys_distinguish_every_field() {
        let base = cell("p", 0);
        let keys = [
            base.digest(),
            CellKey {
                sample_index: 1,
                ..base
            }
            .digest(),
            CellKey { prompt: "q", ..base }.digest(),
            CellKey {
                article_id: "fox",
                ..base
            }
            .digest(),
            CellKey {
                model_id: "other",
                ..base
            }
            .digest(),
            CellKey {
                variant: all_prompt_variants()[4],
                ..base
            }
            .digest(),
        ];
        let unique: std::collections::HashSet<_> = keys.iter().collect();
        assert_eq!(unique.len(), keys.len());
    }
}
