//! Label-to-embedding regressor, partisanship axis geometry, and shift
//! assessment.

mod poles;
mod projection;
mod regressor;
mod shift;

pub use poles::{select_poles, select_poles_with, PoleStrategy};
pub use projection::{build_axis, score_headline, PartisanshipAxis, AXIS_FORMAT_VERSION};
pub use regressor::{
    finite_difference_check, finite_difference_check_sampled, train_regressor, Activation, DenseLayer, GradientCheck,
    Gradients, Network, RegressorConfig, TrainedRegressor, GRADIENT_FLOOR, REGRESSOR_FORMAT_VERSION,
};
pub use shift::{assess_shift, estimate_sigma, ShiftAssessment, ShiftCategory, ShiftParams};

use crate::embed::EmbedError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AxisError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },
    #[error("invalid regressor config: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no records annotated left")]
    NoLeftAnnotations,
    #[error("all observed label vectors are identical")]
    IdenticalLabelVectors,
    #[error("degenerate axis: poles {0:e} apart in embedding space")]
    DegenerateAxis(f64),
    #[error("need at least one group with two or more scores")]
    InsufficientData,
    #[error("serialization: {0}")]
    Serialization(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}
