//! Run configuration, loaded from TOML.
//!
//! Relative paths resolve against the directory of the config file. The
//! config hash covers every setting except file locations, so moving a
//! fixture tree does not change it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rightsaudit_core::axis::{Activation, PoleStrategy, RegressorConfig, ShiftParams};
use rightsaudit_core::corpus::PromptVariant;
use rightsaudit_core::embed::{HttpEmbedderConfig, DEFAULT_DIMENSION};
use rightsaudit_core::genclient::{ProviderDescriptor, RetryPolicy};
use rightsaudit_core::hashing::json_hash;
use rightsaudit_core::rights::ThresholdConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub corpus: PathBuf,
    #[serde(default)]
    pub annotations: Vec<PathBuf>,
    /// `None` uses the bundled lexicon.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub generation: GenerationConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub axis: AxisConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub providers: Vec<ProviderDescriptor>,
    /// Variant keys such as `ap.summarize.clear_unbiased`; empty selects all twelve.
    #[serde(default)]
    pub variants: Vec<String>,
    #[serde(default)]
    pub retry: RetryPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingConfig {
    Stub {
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Http(HttpEmbedderConfig),
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::Stub {
            dimension: DEFAULT_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// `None` trains on the full batch.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Hidden layer widths; input and output widths are fixed by the data.
    pub hidden_widths: Vec<usize>,
    pub pole_strategy: PoleStrategy,
    pub z: f64,
    pub neutral_eps: f64,
}

impl Default for AxisConfig {
    fn default() -> Self {
        let shift = ShiftParams::default();
        Self {
            epochs: 500,
            learning_rate: 0.001,
            batch_size: None,
            hidden_widths: vec![64, 128],
            pole_strategy: PoleStrategy::default(),
            z: shift.z,
            neutral_eps: shift.neutral_eps,
        }
    }
}

impl AxisConfig {
    pub fn regressor(&self, input: usize, output: usize, seed: u64) -> RegressorConfig {
        let mut widths = vec![input];
        widths.extend(&self.hidden_widths);
        widths.push(output);
        let mut cfg = RegressorConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed,
            ..RegressorConfig::default()
        };
        cfg.activations = vec![Activation::Relu; self.hidden_widths.len()];
        cfg.activations.push(Activation::Linear);
        cfg.layer_widths = widths;
        cfg
    }
}

impl EmbeddingConfig {
    pub fn provider_id(&self) -> String {
        match self {
            EmbeddingConfig::Stub { dimension } => {
                use rightsaudit_core::embed::EmbeddingProvider;
                rightsaudit_core::embed::StubEmbedder::new(*dimension)
                    .provider_id()
                    .to_string()
            }
            EmbeddingConfig::Http(h) => h.provider_id.clone(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub models: Option<Vec<String>>,
    pub variants: Option<Vec<String>>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>, overrides: &Overrides) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        cfg.apply(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        self.annotations.iter_mut().for_each(fix);
        if let Some(l) = &mut self.lexicon {
            fix(l);
        }
        fix(&mut self.out);
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(models) = &o.models {
            for m in models {
                if !self.generation.providers.iter().any(|p| &p.model_id == m) {
                    bail!("--models: no provider with model_id `{m}` in the config");
                }
            }
            self.generation.providers.retain(|p| models.contains(&p.model_id));
        }
        if let Some(v) = &o.variants {
            self.generation.variants = v.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.corpus.is_file() {
            bail!("corpus file {} does not exist", self.corpus.display());
        }
        for a in &self.annotations {
            if !a.is_file() {
                bail!("annotation file {} does not exist", a.display());
            }
        }
        if let Some(l) = &self.lexicon {
            if !l.is_file() {
                bail!("lexicon file {} does not exist", l.display());
            }
        }
        if self.generation.providers.is_empty() {
            bail!("no generation providers configured");
        }
        for p in &self.generation.providers {
            p.validate()?;
        }
        self.variants()?;
        self.thresholds.validate()?;
        if self.axis.epochs == 0 {
            bail!("axis.epochs must be positive");
        }
        Ok(())
    }

    pub fn variants(&self) -> Result<Vec<PromptVariant>> {
        if self.generation.variants.is_empty() {
            return Ok(rightsaudit_core::corpus::all_prompt_variants());
        }
        let mut out: Vec<PromptVariant> = self
            .generation
            .variants
            .iter()
            .map(|k| PromptVariant::from_key(k).with_context(|| format!("unknown prompt variant `{k}`")))
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Hash of every setting except file locations.
    pub fn content_hash(&self) -> String {
        json_hash(&self.hashed_view())
    }

    /// Hash of one named section, for per-stage staleness checks.
    pub fn section_hash(&self, section: &str) -> String {
        let v = self.hashed_view();
        json_hash(&v[section])
    }

    fn hashed_view(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "generation": self.generation,
            "embedding": self.embedding,
            "axis": self.axis,
            "thresholds": self.thresholds,
        })
    }
}
