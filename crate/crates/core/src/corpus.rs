//! Articles, outlet metadata and the headline instruction matrix.
//!
//! The corpus is a line-delimited JSON file, one [`Article`] per line.
//! Enum values are serialized as lowercase snake-case tokens.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: invalid value for `{field}`: {message}")]
    Invalid {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: duplicate article id `{id}`")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    National,
    Local,
    International,
    Ethnic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutletBias {
    Right,
    RightCenter,
    Neutral,
    LeftCenter,
    Left,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factuality {
    VeryLow,
    Low,
    Mixed,
    MostlyFactual,
    High,
    VeryHigh,
    None,
}

/// A news organization and its media-rating characteristics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outlet {
    pub name: String,
    pub audience: Audience,
    pub bias: OutletBias,
    pub factuality: Factuality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet: Outlet,
    pub original_headline: String,
    pub body: String,
    pub published_date: NaiveDate,
    pub url: String,
}

/// Load and validate a corpus file. Articles are returned in file order.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Article>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text)
}

/// Parse corpus records from line-delimited JSON text. Blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Article>, CorpusError> {
    let mut seen = HashSet::new();
    let mut articles = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        check_required(&value, line)?;
        let article: Article = serde_json::from_value(value).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        validate_article(&article, line)?;
        if !seen.insert(article.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: article.id });
        }
        articles.push(article);
    }
    Ok(articles)
}

/// Serialize articles back to the line-delimited corpus format.
pub fn write_corpus(articles: &[Article]) -> String {
    let mut out = String::new();
    for a in articles {
        // Article contains only plain data; serialization cannot fail.
        out.push_str(&serde_json::to_string(a).expect("article serializes"));
        out.push('\n');
    }
    out
}

fn check_required(value: &serde_json::Value, line: usize) -> Result<(), CorpusError> {
    const TOP: [&str; 6] = ["id", "outlet", "original_headline", "body", "published_date", "url"];
    const OUTLET: [&str; 4] = ["name", "audience", "bias", "factuality"];
    let missing = |field: String| CorpusError::MissingField { line, field };
    let obj = value.as_object().ok_or_else(|| CorpusError::Parse {
        line,
        message: "record is not an object".into(),
    })?;
    for f in TOP {
        if !obj.contains_key(f) {
            return Err(missing(f.to_string()));
        }
    }
    if let Some(outlet) = obj["outlet"].as_object() {
        for f in OUTLET {
            if !outlet.contains_key(f) {
                return Err(missing(format!("outlet.{f}")));
            }
        }
    }
    Ok(())
}

fn validate_article(a: &Article, line: usize) -> Result<(), CorpusError> {
    let invalid = |field, message: &str| CorpusError::Invalid {
        line,
        field,
        message: message.to_string(),
    };
    if a.id.trim().is_empty() {
        return Err(invalid("id", "must be non-empty"));
    }
    if a.outlet.name.trim().is_empty() {
        return Err(invalid("outlet.name", "must be non-empty"));
    }
    if a.original_headline.trim().is_empty() {
        return Err(invalid("original_headline", "must be non-empty"));
    }
    if a.body.trim().is_empty() {
        return Err(invalid("body", "must be non-empty"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    None,
    Ap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    ForArticle,
    Summarize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    None,
    ClearUnbiased,
    FactualInformative,
}

/// One cell of the style × task × characteristic instruction matrix.
///
/// The derived ordering is style-major, then task, then characteristic,
/// which is also the order of [`all_prompt_variants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PromptVariant {
    pub style: Style,
    pub task: Task,
    pub characteristic: Characteristic,
}

impl PromptVariant {
    pub const fn new(style: Style, task: Task, characteristic: Characteristic) -> Self {
        Self {
            style,
            task,
            characteristic,
        }
    }

    /// Position of this variant in [`all_prompt_variants`].
    pub fn index(&self) -> usize {
        let style = match self.style {
            Style::None => 0,
            Style::Ap => 1,
        };
        let task = match self.task {
            Task::ForArticle => 0,
            Task::Summarize => 1,
        };
        let ch = match self.characteristic {
            Characteristic::None => 0,
            Characteristic::ClearUnbiased => 1,
            Characteristic::FactualInformative => 2,
        };
        style * 6 + task * 3 + ch
    }

    /// Compact token such as `ap.summarize.clear_unbiased`, used in file paths and CLI filters.
    pub fn key(&self) -> String {
        let style = match self.style {
            Style::None => "none",
            Style::Ap => "ap",
        };
        let task = match self.task {
            Task::ForArticle => "for_article",
            Task::Summarize => "summarize",
        };
        let ch = match self.characteristic {
            Characteristic::None => "none",
            Characteristic::ClearUnbiased => "clear_unbiased",
            Characteristic::FactualInformative => "factual_informative",
        };
        format!("{style}.{task}.{ch}")
    }

    pub fn from_key(key: &str) -> Option<Self> {
        all_prompt_variants().into_iter().find(|v| v.key() == key)
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

pub fn all_prompt_variants() -> Vec<PromptVariant> {
    let mut out = Vec::with_capacity(12);
    for style in [Style::None, Style::Ap] {
        for task in [Task::ForArticle, Task::Summarize] {
            for characteristic in [
                Characteristic::None,
                Characteristic::ClearUnbiased,
                Characteristic::FactualInformative,
            ] {
                out.push(PromptVariant::new(style, task, characteristic));
            }
        }
    }
    out
}

/// Render the headline instruction for a variant.
///
/// The indefinite article agrees with the first rendered word after it.
pub fn render_instruction(variant: PromptVariant) -> String {
    let mut words: Vec<&str> = Vec::new();
    match variant.characteristic {
        Characteristic::None => {}
        Characteristic::ClearUnbiased => words.extend(["clear,", "unbiased"]),
        Characteristic::FactualInformative => words.extend(["factual,", "informative"]),
    }
    if variant.style == Style::Ap {
        words.push("AP-style");
    }
    words.push("headline");
    match variant.task {
        Task::ForArticle => words.push("for"),
        Task::Summarize => words.push("that summarizes"),
    }
    let article = indefinite_article(words[0]);
    format!("Write {article} {} this news article:", words.join(" "))
}

fn indefinite_article(next_word: &str) -> &'static str {
    match next_word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}
