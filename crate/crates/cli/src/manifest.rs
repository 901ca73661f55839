//! Per-stage manifests recording input and output hashes.
//!
//! A stage directory is complete only once its `manifest.json` exists; the
//! manifest is written after every artifact.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use rightsaudit_core::hashing::sha256_hex;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Generate,
    AnnotateEval,
    TrainAxis,
    Score,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Generate,
        Stage::AnnotateEval,
        Stage::TrainAxis,
        Stage::Score,
        Stage::Report,
    ];

    /// Subcommand name, also used as the stage directory name.
    pub fn command(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Generate => "generate",
            Stage::AnnotateEval => "annotate-eval",
            Stage::TrainAxis => "train-axis",
            Stage::Score => "score",
            Stage::Report => "report",
        }
    }

    pub fn dir(self, out: &Path) -> PathBuf {
        out.join(self.command())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.command())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("stage `{0}` has not been run; run `rightsaudit {0}` first")]
    Missing(Stage),
    #[error("artifacts of stage `{0}` are stale ({1}); re-run `rightsaudit {0}`")]
    Stale(Stage, String),
}

/// Provenance embedded in every manifest and JSON artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub corpus_hash: String,
    pub lexicon_hash: String,
    pub embedding_provider_id: String,
    /// Absent before `train-axis` has run.
    pub axis_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    /// File name (relative to the stage directory) to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub provenance: Provenance,
    pub completed_at: String,
}

impl Manifest {
    /// Hash summarizing the outputs, used as a downstream input.
    pub fn outputs_hash(&self) -> String {
        rightsaudit_core::hashing::json_hash(&self.outputs)
    }
}

pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn read_manifest(out: &Path, stage: Stage) -> Result<Option<Manifest>> {
    let path = stage.dir(out).join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(m))
}

/// First output whose file is missing or differs from its recorded hash.
pub fn modified_output(out: &Path, stage: Stage, manifest: &Manifest) -> Option<String> {
    let dir = stage.dir(out);
    manifest
        .outputs
        .iter()
        .find(|(name, hash)| file_hash(&dir.join(name)).ok().as_deref() != Some(hash.as_str()))
        .map(|(name, _)| name.clone())
}

/// Write artifacts, then the manifest that marks the stage complete.
pub fn write_stage(
    out: &Path,
    stage: Stage,
    inputs: BTreeMap<String, String>,
    files: &[(&str, Vec<u8>)],
    provenance: Provenance,
) -> Result<Manifest> {
    let dir = stage.dir(out);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let stale = dir.join(MANIFEST_FILE);
    if stale.exists() {
        fs::remove_file(&stale)?;
    }
    let mut outputs = BTreeMap::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        outputs.insert(name.to_string(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        stage: stage.command().to_string(),
        inputs,
        outputs,
        provenance,
        completed_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}
