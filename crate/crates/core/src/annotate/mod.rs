//! Annotation schema, agreement statistics and keyword classifiers.

mod classify;
mod lexicon;
mod schema;
mod stats;

pub use classify::{
    classify_correction, detect_identity, keyword_answers, lexical_partisanship, CorrectionLabel, IdentityMentions,
};
pub use lexicon::{stem_matches, tokenize, Lexicon, LexiconConfig, Pattern};
pub use schema::{
    export_gold_labels, load_annotations, parse_annotations, to_label_vector, to_label_vector_with, AnnotationRecord,
    HeadlineRef, LabelSelection, LabelVector, Partisanship, Question, LABEL_DIM, ORIGINAL_MODEL_ID, QUESTION_COUNT,
};
pub use stats::{
    average_ranks, cohen_kappa, evaluate_classifier, spearman_rho, ClassifierMetrics, Spearman, StatsError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotateError {
    #[error("text must be non-empty")]
    EmptyText,
    #[error("label vector must have 14 components, got {0}")]
    LabelDimension(usize),
    #[error("label component {0} outside [0, 1]")]
    LabelRange(f64),
    #[error("invalid lexicon: {0}")]
    Lexicon(String),
    #[error("annotation line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
