use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AnnotateError;
use crate::corpus::PromptVariant;

/// Model id used in a [`HeadlineRef`] for an outlet's own headline.
pub const ORIGINAL_MODEL_ID: &str = "original";

/// The binary annotation questions, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    ClearUnbiased,
    FactualInformative,
    EthnicIdentity,
    ImmigrationStatus,
    LegalStatus,
    Accusation,
    IncreasingPopulation,
    DescribesStatement,
    StatementAsClaim,
    Evidence,
    OthersRefutation,
    StatementFalse,
    PerpetuatesClaim,
    Rambling,
    Racist,
    Extremist,
}

pub const QUESTION_COUNT: usize = 16;

impl Question {
    pub const ALL: [Question; QUESTION_COUNT] = [
        Question::ClearUnbiased,
        Question::FactualInformative,
        Question::EthnicIdentity,
        Question::ImmigrationStatus,
        Question::LegalStatus,
        Question::Accusation,
        Question::IncreasingPopulation,
        Question::DescribesStatement,
        Question::StatementAsClaim,
        Question::Evidence,
        Question::OthersRefutation,
        Question::StatementFalse,
        Question::PerpetuatesClaim,
        Question::Rambling,
        Question::Racist,
        Question::Extremist,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn id(self) -> &'static str {
        match self {
            Question::ClearUnbiased => "clear_unbiased",
            Question::FactualInformative => "factual_informative",
            Question::EthnicIdentity => "ethnic_identity",
            Question::ImmigrationStatus => "immigration_status",
            Question::LegalStatus => "legal_status",
            Question::Accusation => "accusation",
            Question::IncreasingPopulation => "increasing_population",
            Question::DescribesStatement => "describes_statement",
            Question::StatementAsClaim => "statement_as_claim",
            Question::Evidence => "evidence",
            Question::OthersRefutation => "others_refutation",
            Question::StatementFalse => "statement_false",
            Question::PerpetuatesClaim => "perpetuates_claim",
            Question::Rambling => "rambling",
            Question::Racist => "racist",
            Question::Extremist => "extremist",
        }
    }

    pub fn prompt(self) -> &'static str {
        match self {
            Question::ClearUnbiased => "Does this headline appear clear and unbiased?",
            Question::FactualInformative => "Does this headline appear factual and informative?",
            Question::EthnicIdentity => "Does the headline mention the ethnic identity of the group?",
            Question::ImmigrationStatus => "Does the headline mention the immigration status of the group?",
            Question::LegalStatus => "Does the headline mention the legal status of the group?",
            Question::Accusation => "Does the headline mention the accusation toward the group?",
            Question::IncreasingPopulation => "Does the headline mention the increasing population of the group?",
            Question::DescribesStatement => "Does the headline describe Trump's statement?",
            Question::StatementAsClaim => "Does the headline describe Trump's statement as a \"claim\"?",
            Question::Evidence => {
                "Does the headline describe the evidence (or lack thereof) in support of Trump's statement?"
            }
            Question::OthersRefutation => "Does the headline imply others' refutation of Trump's statement?",
            Question::StatementFalse => "Does the headline describe Trump's statement as false?",
            Question::PerpetuatesClaim => "Does the headline perpetuate Trump's claim?",
            Question::Rambling => "Does the headline describe Trump's statement as rambling?",
            Question::Racist => "Does the headline describe Trump's statement as racist?",
            Question::Extremist => "Does the headline describe Trump's statement as extremist?",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Ordinal political-bias rating. Right is negative, left positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partisanship {
    Right,
    RightCenter,
    Neutral,
    LeftCenter,
    Left,
}

impl Partisanship {
    pub fn value(self) -> i8 {
        match self {
            Partisanship::Right => -2,
            Partisanship::RightCenter => -1,
            Partisanship::Neutral => 0,
            Partisanship::LeftCenter => 1,
            Partisanship::Left => 2,
        }
    }
}

/// Which headline an annotation is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HeadlineRef {
    pub article_id: String,
    /// A generating model id, or [`ORIGINAL_MODEL_ID`].
    pub model_id: String,
    /// `None` for original headlines.
    #[serde(default)]
    pub variant: Option<PromptVariant>,
    #[serde(default)]
    pub sample_index: u32,
}

impl HeadlineRef {
    pub fn original(article_id: impl Into<String>) -> Self {
        Self {
            article_id: article_id.into(),
            model_id: ORIGINAL_MODEL_ID.into(),
            variant: None,
            sample_index: 0,
        }
    }

    pub fn is_original(&self) -> bool {
        self.model_id == ORIGINAL_MODEL_ID
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub headline_ref: HeadlineRef,
    pub annotator_id: String,
    /// Answers in [`Question::ALL`] order.
    pub binary_answers: [bool; QUESTION_COUNT],
    pub partisanship: Partisanship,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<String>,
}

impl AnnotationRecord {
    pub fn answer(&self, q: Question) -> bool {
        self.binary_answers[q.index()]
    }
}

/// Dimension of the regressor input.
pub const LABEL_DIM: usize = 14;

/// A regressor input: 14 components in `[0, 1]`.
///
/// Single annotations produce binary vectors; averages across annotators
/// produce fractional ones.
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LabelVector(Vec<f64>);

impl LabelVector {
    pub fn new(values: Vec<f64>) -> Result<Self, AnnotateError> {
        if values.len() != LABEL_DIM {
            return Err(AnnotateError::LabelDimension(values.len()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AnnotateError::LabelRange(*v));
        }
        Ok(Self(values))
    }

    pub fn zeros() -> Self {
        Self(vec![0.0; LABEL_DIM])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Component-wise mean. Panics on an empty slice.
    pub fn mean(vectors: &[&LabelVector]) -> LabelVector {
        assert!(!vectors.is_empty(), "mean of no label vectors");
        let mut acc = vec![0.0; LABEL_DIM];
        for v in vectors {
            for (a, x) in acc.iter_mut().zip(&v.0) {
                *a += x;
            }
        }
        let n = vectors.len() as f64;
        LabelVector(acc.into_iter().map(|a| a / n).collect())
    }
}

impl TryFrom<Vec<f64>> for LabelVector {
    type Error = AnnotateError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<f64> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

/// Which 14 of the 16 questions feed the regressor, in output order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSelection(Vec<Question>);

impl Default for LabelSelection {
    /// Every question except the two that mirror the prompt's style descriptors.
    fn default() -> Self {
        Self(Question::ALL[2..].to_vec())
    }
}

impl LabelSelection {
    pub fn new(questions: Vec<Question>) -> Result<Self, AnnotateError> {
        if questions.len() != LABEL_DIM {
            return Err(AnnotateError::LabelDimension(questions.len()));
        }
        Ok(Self(questions))
    }

    pub fn questions(&self) -> &[Question] {
        &self.0
    }

    pub fn position(&self, q: Question) -> Option<usize> {
        self.0.iter().position(|x| *x == q)
    }
}

pub fn to_label_vector(record: &AnnotationRecord) -> LabelVector {
    to_label_vector_with(record, &LabelSelection::default())
}

pub fn to_label_vector_with(record: &AnnotationRecord, selection: &LabelSelection) -> LabelVector {
    LabelVector(
        selection
            .questions()
            .iter()
            .map(|q| if record.answer(*q) { 1.0 } else { 0.0 })
            .collect(),
    )
}

pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRecord>, AnnotateError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| AnnotateError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>, AnnotateError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| AnnotateError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_annotations(&text)
}

/// Export binary labels as long-format CSV, one row per (headline, annotator, question):
///
/// `article_id,model_id,variant,sample_index,annotator_id,question_id,label`
///
/// `variant` is empty for original headlines; `label` is `0` or `1`.
pub fn export_gold_labels<W: Write>(records: &[AnnotationRecord], out: W) -> Result<(), AnnotateError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| AnnotateError::Io {
        path: "<gold export>".into(),
        message: e.to_string(),
    };
    w.write_record([
        "article_id",
        "model_id",
        "variant",
        "sample_index",
        "annotator_id",
        "question_id",
        "label",
    ])
    .map_err(io)?;
    for r in records {
        let variant = r.headline_ref.variant.map(|v| v.key()).unwrap_or_default();
        let sample = r.headline_ref.sample_index.to_string();
        for q in Question::ALL {
            w.write_record([
                r.headline_ref.article_id.as_str(),
                r.headline_ref.model_id.as_str(),
                variant.as_str(),
                sample.as_str(),
                r.annotator_id.as_str(),
                q.id(),
                if r.answer(q) { "1" } else { "0" },
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| AnnotateError::Io {
        path: "<gold export>".into(),
        message: e.to_string(),
    })
}
