//! Per-model metric bundles: correction rates and identity scope for access
//! to information; shift rates, identity deltas and the behavior profile for
//! freedom of thought.
//!
//! Every aggregation groups through `BTreeMap`s, so results depend only on
//! the multiset of inputs within each group and its order.

mod ati;
mod fot;

use serde::{Deserialize, Serialize};

pub use ati::{correction_rates, identity_in_noncorrecting, AtiModel, AtiReport, ModelCorrection, RateTriple};
pub use fot::{
    diversity, fidelity, framing_shift, identity_delta, partisanship_correlation, shift_rates, tension, FotInputs,
    FotModel, FotReport, ShiftRates,
};

use crate::annotate::{CorrectionLabel, IdentityMentions, StatsError};
use crate::embed::{EmbedError, EmbeddingVector};

pub const METRICS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no data: {0}")]
    NoData(&'static str),
    #[error("headline from model {model_id} references article {article_id} with no counterpart")]
    UnmatchedArticle { model_id: String, article_id: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// A classified headline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineObservation {
    pub model_id: String,
    pub article_id: String,
    pub label: CorrectionLabel,
    pub identity: IdentityMentions,
}

/// An embedded generated headline.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedHeadline {
    pub model_id: String,
    pub article_id: String,
    pub embedding: EmbeddingVector,
}

/// Per-term values for the three identity classes: rates in `[0, 1]`, or
/// deltas in `[−1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityRates {
    pub ethnicity: f64,
    pub immigrant: f64,
    pub migrant: f64,
}

impl IdentityRates {
    pub fn values(&self) -> [f64; 3] {
        [self.ethnicity, self.immigrant, self.migrant]
    }

    pub fn mean(&self) -> f64 {
        self.values().iter().sum::<f64>() / 3.0
    }

    pub fn mean_abs(&self) -> f64 {
        self.values().iter().map(|v| v.abs()).sum::<f64>() / 3.0
    }

    fn indicator(m: &IdentityMentions) -> Self {
        let f = |b: bool| if b { 1.0 } else { 0.0 };
        Self {
            ethnicity: f(m.ethnicity),
            immigrant: f(m.immigrant),
            migrant: f(m.migrant),
        }
    }

    fn add(&mut self, o: &Self) {
        self.ethnicity += o.ethnicity;
        self.immigrant += o.immigrant;
        self.migrant += o.migrant;
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            ethnicity: self.ethnicity * k,
            immigrant: self.immigrant * k,
            migrant: self.migrant * k,
        }
    }
}

/// Everything the rights engine consumes, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub schema_version: u32,
    pub embedding_provider_id: String,
    pub lexicon_hash: String,
    pub axis_hash: String,
    pub ati: AtiReport,
    pub fot: FotReport,
}

impl MetricBundle {
    pub fn new(
        embedding_provider_id: impl Into<String>,
        lexicon_hash: impl Into<String>,
        axis_hash: impl Into<String>,
        ati: AtiReport,
        fot: FotReport,
    ) -> Self {
        Self {
            schema_version: METRICS_SCHEMA_VERSION,
            embedding_provider_id: embedding_provider_id.into(),
            lexicon_hash: lexicon_hash.into(),
            axis_hash: axis_hash.into(),
            ati,
            fot,
        }
    }
}

/// Arithmetic mean; `None` when empty.
fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}
