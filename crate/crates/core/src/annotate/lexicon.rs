use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AnnotateError;
use crate::hashing::json_hash;

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.toml");

/// The eight keyword lists, as written in a lexicon file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconConfig {
    pub explicit_cues: Vec<String>,
    pub implicit_cues: Vec<String>,
    pub claim_cues: Vec<String>,
    pub ethnicity_terms: Vec<String>,
    pub immigrant_terms: Vec<String>,
    pub migrant_terms: Vec<String>,
    pub left_cues: Vec<String>,
    pub right_cues: Vec<String>,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

impl LexiconConfig {
    pub fn from_toml(text: &str) -> Result<Self, AnnotateError> {
        toml::from_str(text).map_err(|e| AnnotateError::Lexicon(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnotateError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| AnnotateError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    fn lists(&self) -> [(&'static str, &[String]); 8] {
        [
            ("explicit_cues", &self.explicit_cues),
            ("implicit_cues", &self.implicit_cues),
            ("claim_cues", &self.claim_cues),
            ("ethnicity_terms", &self.ethnicity_terms),
            ("immigrant_terms", &self.immigrant_terms),
            ("migrant_terms", &self.migrant_terms),
            ("left_cues", &self.left_cues),
            ("right_cues", &self.right_cues),
        ]
    }

    pub fn validate(&self) -> Result<(), AnnotateError> {
        for (name, list) in self.lists() {
            if list.is_empty() {
                return Err(AnnotateError::Lexicon(format!("{name} is empty")));
            }
            for p in list {
                if p.trim().is_empty() {
                    return Err(AnnotateError::Lexicon(format!("{name} has an empty pattern")));
                }
                if p.chars().any(char::is_uppercase) {
                    return Err(AnnotateError::Lexicon(format!(
                        "{name}: pattern `{p}` is not lowercase"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Content hash recorded in run provenance.
    pub fn content_hash(&self) -> String {
        json_hash(self)
    }
}

/// Lowercase word tokens; every non-alphanumeric character is a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

const SUFFIXES: [&str; 8] = ["s", "es", "d", "ed", "ing", "ly", "hood", "hoods"];

/// Whether `token` is `word` or a simple inflection of it.
pub fn stem_matches(word: &str, token: &str) -> bool {
    if token == word {
        return true;
    }
    if let Some(rest) = token.strip_prefix(word) {
        if SUFFIXES.contains(&rest) {
            return true;
        }
    }
    if let Some(base) = word.strip_suffix('y') {
        if let Some(rest) = token.strip_prefix(base) {
            return matches!(rest, "ies" | "ied");
        }
    }
    if let Some(base) = word.strip_suffix('e') {
        if let Some(rest) = token.strip_prefix(base) {
            return matches!(rest, "ing");
        }
    }
    false
}

/// A pattern compiled to a conjunction of contiguous word sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub source: String,
    parts: Vec<Vec<String>>,
}

impl Pattern {
    pub fn compile(source: &str) -> Self {
        let parts = source.split(" + ").map(tokenize).filter(|p| !p.is_empty()).collect();
        Self {
            source: source.to_string(),
            parts,
        }
    }

    pub fn matches(&self, tokens: &[String]) -> bool {
        !self.parts.is_empty() && self.parts.iter().all(|phrase| contains_phrase(tokens, phrase))
    }
}

fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    tokens
        .windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(t, p)| stem_matches(p, t)))
}

/// A validated, compiled lexicon.
#[derive(Debug, Clone)]
pub struct Lexicon {
    config: LexiconConfig,
    pub(crate) explicit: Vec<Pattern>,
    pub(crate) implicit: Vec<Pattern>,
    pub(crate) claim: Vec<Pattern>,
    pub(crate) ethnicity: Vec<Pattern>,
    pub(crate) immigrant: Vec<Pattern>,
    pub(crate) migrant: Vec<Pattern>,
    pub(crate) left: Vec<Pattern>,
    pub(crate) right: Vec<Pattern>,
}

impl Lexicon {
    pub fn new(config: LexiconConfig) -> Result<Self, AnnotateError> {
        config.validate()?;
        let c = |l: &[String]| l.iter().map(|p| Pattern::compile(p)).collect::<Vec<_>>();
        Ok(Self {
            explicit: c(&config.explicit_cues),
            implicit: c(&config.implicit_cues),
            claim: c(&config.claim_cues),
            ethnicity: c(&config.ethnicity_terms),
            immigrant: c(&config.immigrant_terms),
            migrant: c(&config.migrant_terms),
            left: c(&config.left_cues),
            right: c(&config.right_cues),
            config,
        })
    }

    pub fn config(&self) -> &LexiconConfig {
        &self.config
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(LexiconConfig::default()).expect("bundled lexicon is valid")
    }
}

pub(crate) fn any_match(patterns: &[Pattern], tokens: &[String]) -> bool {
    patterns.iter().any(|p| p.matches(tokens))
}

pub(crate) fn count_matches(patterns: &[Pattern], tokens: &[String]) -> usize {
    patterns.iter().filter(|p| p.matches(tokens)).count()
}
