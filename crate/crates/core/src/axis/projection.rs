use serde::{Deserialize, Serialize};

use super::{AxisError, TrainedRegressor};
use crate::annotate::LabelVector;
use crate::embed::EmbeddingVector;
use crate::hashing::json_hash;

pub const AXIS_FORMAT_VERSION: u32 = 1;

/// Segment between projected poles; scores are normalized so the left pole
/// is −1 and the right pole +1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartisanshipAxis {
    pub format_version: u32,
    pub left_pole_label: LabelVector,
    pub right_pole_label: LabelVector,
    pub left_emb: EmbeddingVector,
    pub right_emb: EmbeddingVector,
    /// Unit vector from `left_emb` to `right_emb`.
    pub direction: EmbeddingVector,
    pub midpoint: EmbeddingVector,
    /// Half of `‖right_emb − left_emb‖`; always positive.
    pub half_length: f64,
    pub provider_id: String,
    pub regressor_hash: String,
}

/// Poles closer than this in embedding space cannot define an axis.
const MIN_POLE_SEPARATION: f64 = 1e-9;

impl PartisanshipAxis {
    /// Axis through two explicit pole embeddings.
    pub fn from_embeddings(
        left_pole_label: LabelVector,
        right_pole_label: LabelVector,
        left_emb: EmbeddingVector,
        right_emb: EmbeddingVector,
    ) -> Result<Self, AxisError> {
        let diff = right_emb.sub(&left_emb)?;
        let length = diff.norm();
        if length.is_nan() || length < MIN_POLE_SEPARATION {
            return Err(AxisError::DegenerateAxis(length));
        }
        let midpoint = left_emb.add(&right_emb)?.scale(0.5);
        Ok(Self {
            format_version: AXIS_FORMAT_VERSION,
            left_pole_label,
            right_pole_label,
            direction: diff.scale(1.0 / length),
            midpoint,
            half_length: length / 2.0,
            left_emb,
            right_emb,
            provider_id: String::new(),
            regressor_hash: String::new(),
        })
    }

    pub fn with_provenance(mut self, provider_id: impl Into<String>, regressor_hash: impl Into<String>) -> Self {
        self.provider_id = provider_id.into();
        self.regressor_hash = regressor_hash.into();
        self
    }

    /// The same axis with poles exchanged.
    pub fn swapped(&self) -> Result<Self, AxisError> {
        Ok(Self::from_embeddings(
            self.right_pole_label.clone(),
            self.left_pole_label.clone(),
            self.right_emb.clone(),
            self.left_emb.clone(),
        )?
        .with_provenance(self.provider_id.clone(), self.regressor_hash.clone()))
    }

    pub fn dimension(&self) -> usize {
        self.direction.dim()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("axis serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AxisError> {
        let a: Self = serde_json::from_str(text).map_err(|e| AxisError::Serialization(e.to_string()))?;
        if a.format_version != AXIS_FORMAT_VERSION {
            return Err(AxisError::Serialization(format!(
                "unsupported axis format version {}",
                a.format_version
            )));
        }
        Ok(a)
    }

    pub fn content_hash(&self) -> String {
        json_hash(self)
    }
}

/// Project both poles through the regressor and build the axis between them.
pub fn build_axis(
    regressor: &TrainedRegressor,
    left_pole: &LabelVector,
    right_pole: &LabelVector,
) -> Result<PartisanshipAxis, AxisError> {
    let left_emb = regressor.predict(left_pole)?;
    let right_emb = regressor.predict(right_pole)?;
    Ok(
        PartisanshipAxis::from_embeddings(left_pole.clone(), right_pole.clone(), left_emb, right_emb)?
            .with_provenance("", regressor.content_hash()),
    )
}

/// Signed, unclamped position along the axis: negative leans left.
pub fn score_headline(axis: &PartisanshipAxis, e: &EmbeddingVector) -> Result<f64, AxisError> {
    let offset = e.sub(&axis.midpoint)?;
    Ok(offset.dot(&axis.direction)? / axis.half_length)
}
