use serde::{Deserialize, Serialize};

use super::lexicon::{any_match, count_matches, tokenize, Lexicon, Pattern};
use super::schema::Question;
use super::AnnotateError;

/// How a headline handles the false claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionLabel {
    Explicit,
    Implicit,
    NoCorrection,
    /// The headline never touches the claim.
    NonEngaging,
}

impl CorrectionLabel {
    pub fn is_engaging(self) -> bool {
        self != CorrectionLabel::NonEngaging
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdentityMentions {
    pub ethnicity: bool,
    pub immigrant: bool,
    pub migrant: bool,
}

fn tokens_of(text: &str) -> Result<Vec<String>, AnnotateError> {
    if text.trim().is_empty() {
        return Err(AnnotateError::EmptyText);
    }
    Ok(tokenize(text))
}

/// Priority: explicit cue, then implicit cue, then any claim cue.
pub fn classify_correction(text: &str, lexicon: &Lexicon) -> Result<CorrectionLabel, AnnotateError> {
    let tokens = tokens_of(text)?;
    Ok(if any_match(&lexicon.explicit, &tokens) {
        CorrectionLabel::Explicit
    } else if any_match(&lexicon.implicit, &tokens) {
        CorrectionLabel::Implicit
    } else if any_match(&lexicon.claim, &tokens) {
        CorrectionLabel::NoCorrection
    } else {
        CorrectionLabel::NonEngaging
    })
}

/// Word-level identity-term detection; "immigrants" never counts as "migrants".
pub fn detect_identity(text: &str, lexicon: &Lexicon) -> Result<IdentityMentions, AnnotateError> {
    let tokens = tokens_of(text)?;
    Ok(IdentityMentions {
        ethnicity: any_match(&lexicon.ethnicity, &tokens),
        immigrant: any_match(&lexicon.immigrant, &tokens),
        migrant: any_match(&lexicon.migrant, &tokens),
    })
}

/// `(right hits − left hits) / (1 + total hits)`, where a hit is a distinct
/// cue present in the text. Positive leans right.
pub fn lexical_partisanship(text: &str, lexicon: &Lexicon) -> Result<f64, AnnotateError> {
    let tokens = tokens_of(text)?;
    let left = count_matches(&lexicon.left, &tokens) as f64;
    let right = count_matches(&lexicon.right, &tokens) as f64;
    Ok((right - left) / (1.0 + left + right))
}

/// Keyword approximations of the binary annotation questions.
///
/// Only questions with a lexical signal are covered; the rest are left to
/// human annotators.
pub fn keyword_answers(text: &str, lexicon: &Lexicon) -> Result<Vec<(Question, bool)>, AnnotateError> {
    let tokens = tokens_of(text)?;
    let label = classify_correction(text, lexicon)?;
    let ids = detect_identity(text, lexicon)?;
    let probe = |words: &[&str]| words.iter().any(|w| Pattern::compile(w).matches(&tokens));
    Ok(vec![
        (Question::EthnicIdentity, ids.ethnicity),
        (Question::ImmigrationStatus, ids.immigrant || ids.migrant),
        (
            Question::LegalStatus,
            probe(&["illegal", "legal", "undocumented", "parole"]),
        ),
        (
            Question::IncreasingPopulation,
            probe(&["growing", "influx", "population"]),
        ),
        (Question::DescribesStatement, label.is_engaging()),
        (Question::StatementAsClaim, probe(&["claim"])),
        (
            Question::Evidence,
            probe(&[
                "evidence",
                "baseless",
                "unsubstantiated",
                "unfounded",
                "unproven",
                "unverified",
            ]),
        ),
        (
            Question::OthersRefutation,
            probe(&[
                "deny",
                "dismiss",
                "refute",
                "debunk",
                "fact-check",
                "push back",
                "not true",
            ]),
        ),
        (Question::StatementFalse, label == CorrectionLabel::Explicit),
        (Question::PerpetuatesClaim, label == CorrectionLabel::NoCorrection),
        (Question::Rambling, probe(&["ramble"])),
        (Question::Racist, probe(&["racist", "racism", "racial"])),
        (Question::Extremist, probe(&["extremist", "extreme"])),
    ])
}
