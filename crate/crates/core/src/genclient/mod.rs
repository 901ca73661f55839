//! Headline generation across the article × model × variant matrix.
//!
//! Each cell is looked up in the [`GenerationCache`] first; misses call the
//! provider with exponential-backoff retries. Raw responses are cached
//! before sanitization, so a warm cache replays rejected cells too.

mod cache;
mod provider;
mod sanitize;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{render_instruction, Article, PromptVariant};

pub use cache::{CacheEntry, CellKey, GenerationCache};
pub use provider::{
    build_provider, CompletionRequest, HeadlineProvider, HttpProvider, ProviderDescriptor, ProviderError, StubProvider,
};
pub use sanitize::{sanitize_response, Rejection, MAX_HEADLINE_CHARS};

/// Appended to every prompt after the article body.
pub const VERBATIM_TRAILER: &str = "Return only the headline text, verbatim, with no quotation marks or commentary.";

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("article `{0}` has an empty body")]
    EmptyBody(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedHeadline {
    pub article_id: String,
    pub model_id: String,
    pub variant: PromptVariant,
    pub sample_index: u32,
    pub text: String,
    pub raw_response: String,
    pub created_at: DateTime<Utc>,
}

impl GeneratedHeadline {
    fn sort_key(&self) -> (&str, &str, usize, u32) {
        (
            &self.article_id,
            &self.model_id,
            self.variant.index(),
            self.sample_index,
        )
    }
}

pub fn build_prompt(variant: PromptVariant, article: &Article) -> Result<String, GenError> {
    if article.body.trim().is_empty() {
        return Err(GenError::EmptyBody(article.id.clone()));
    }
    Ok(format!(
        "{}\n{}\n{}",
        render_instruction(variant),
        article.body,
        VERBATIM_TRAILER
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Total attempts per cell, including the first.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 4,
            base_delay_ms: 500,
            max_delay_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellId {
    pub article_id: String,
    pub model_id: String,
    pub variant: PromptVariant,
    pub sample_index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    #[serde(flatten)]
    pub cell: CellId,
    pub attempts: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRejection {
    #[serde(flatten)]
    pub cell: CellId,
    pub reason: Rejection,
    pub raw_response: String,
}

/// Cells that did not yield a headline, for the analyst to review.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    pub failures: Vec<CellFailure>,
    pub rejections: Vec<CellRejection>,
}

impl FailureReport {
    pub fn is_empty(&self) -> bool {
        self.failures.is_empty() && self.rejections.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationOutcome {
    pub headlines: Vec<GeneratedHeadline>,
    pub report: FailureReport,
    pub provider_calls: usize,
    pub cache_hits: usize,
}

struct Cell<'a> {
    article: &'a Article,
    variant: PromptVariant,
    sample_index: u32,
    prompt: String,
}

enum CellResult {
    Headline(GeneratedHeadline),
    Rejected(CellRejection),
    Failed(CellFailure),
}

/// Run every (article, provider, variant, sample) cell.
///
/// Providers run concurrently, each with up to `max_parallel` workers. The
/// returned headlines are sorted by article, model, variant and sample, so
/// output does not depend on completion order.
pub fn generate_matrix(
    corpus: &[Article],
    providers: &[Box<dyn HeadlineProvider>],
    variants: &[PromptVariant],
    cache: &GenerationCache,
    retry: &RetryPolicy,
) -> Result<GenerationOutcome, GenError> {
    let mut jobs: Vec<(&dyn HeadlineProvider, Vec<Cell<'_>>)> = Vec::new();
    for provider in providers {
        let mut cells = Vec::new();
        for article in corpus {
            for &variant in variants {
                let prompt = build_prompt(variant, article)?;
                for sample_index in 0..provider.descriptor().samples_per_cell {
                    cells.push(Cell {
                        article,
                        variant,
                        sample_index,
                        prompt: prompt.clone(),
                    });
                }
            }
        }
        jobs.push((provider.as_ref(), cells));
    }

    let results = Mutex::new(Vec::new());
    let calls = AtomicUsize::new(0);
    let hits = AtomicUsize::new(0);
    thread::scope(|scope| {
        for (provider, cells) in &jobs {
            let workers = provider.descriptor().max_parallel.max(1).min(cells.len().max(1));
            let (results, calls, hits) = (&results, &calls, &hits);
            scope.spawn(move || {
                let next = AtomicUsize::new(0);
                let next = &next;
                thread::scope(|inner| {
                    for _ in 0..workers {
                        inner.spawn(move || loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(cell) = cells.get(i) else { break };
                            let r = run_cell(*provider, cell, cache, retry, calls, hits);
                            results.lock().expect("results lock").push(r);
                        });
                    }
                });
            });
        }
    });

    let mut headlines = Vec::new();
    let mut report = FailureReport::default();
    for r in results.into_inner().expect("results lock") {
        match r {
            CellResult::Headline(h) => headlines.push(h),
            CellResult::Rejected(r) => report.rejections.push(r),
            CellResult::Failed(f) => report.failures.push(f),
        }
    }
    headlines.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let cell_order = |c: &CellId| {
        (
            c.article_id.clone(),
            c.model_id.clone(),
            c.variant.index(),
            c.sample_index,
        )
    };
    report.failures.sort_by_key(|f| cell_order(&f.cell));
    report.rejections.sort_by_key(|r| cell_order(&r.cell));
    for r in &report.rejections {
        log::warn!(
            "rejected {}/{}/{}/{}: {}",
            r.cell.article_id,
            r.cell.model_id,
            r.cell.variant,
            r.cell.sample_index,
            r.reason
        );
    }
    Ok(GenerationOutcome {
        headlines,
        report,
        provider_calls: calls.into_inner(),
        cache_hits: hits.into_inner(),
    })
}

fn run_cell(
    provider: &dyn HeadlineProvider,
    cell: &Cell<'_>,
    cache: &GenerationCache,
    retry: &RetryPolicy,
    calls: &AtomicUsize,
    hits: &AtomicUsize,
) -> CellResult {
    let model_id = provider.model_id();
    let key = CellKey {
        model_id,
        article_id: &cell.article.id,
        variant: cell.variant,
        sample_index: cell.sample_index,
        prompt: &cell.prompt,
    };
    let id = CellId {
        article_id: cell.article.id.clone(),
        model_id: model_id.to_string(),
        variant: cell.variant,
        sample_index: cell.sample_index,
    };

    let entry = match cache.get(&key) {
        Some(entry) => {
            hits.fetch_add(1, Ordering::Relaxed);
            entry
        }
        None => {
            let request = CompletionRequest {
                prompt: &cell.prompt,
                sample_index: cell.sample_index,
            };
            let mut attempts = 0;
            let raw = loop {
                attempts += 1;
                calls.fetch_add(1, Ordering::Relaxed);
                match provider.complete(&request) {
                    Ok(raw) => break raw,
                    Err(e) if e.is_retryable() && attempts < retry.max_attempts => {
                        thread::sleep(retry.delay(attempts));
                    }
                    Err(e) => {
                        return CellResult::Failed(CellFailure {
                            cell: id,
                            attempts,
                            error: e.to_string(),
                        })
                    }
                }
            };
            let entry = CacheEntry {
                key: key.digest(),
                model_id: id.model_id.clone(),
                article_id: id.article_id.clone(),
                variant: id.variant,
                sample_index: id.sample_index,
                raw_response: raw,
                created_at: Utc::now(),
            };
            if let Err(e) = cache.put(&entry) {
                log::warn!("failed to write cache entry: {e}");
            }
            entry
        }
    };

    match sanitize_response(&entry.raw_response) {
        Ok(text) => CellResult::Headline(GeneratedHeadline {
            article_id: id.article_id,
            model_id: id.model_id,
            variant: id.variant,
            sample_index: id.sample_index,
            text,
            raw_response: entry.raw_response,
            created_at: entry.created_at,
        }),
        Err(reason) => CellResult::Rejected(CellRejection {
            cell: id,
            reason,
            raw_response: entry.raw_response,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{all_prompt_variants, Audience, Factuality, Outlet, OutletBias};

    pub(crate) fn article(id: &str, body: &str) -> Article {
        Article {
            id: id.into(),
            outlet: Outlet {
                name: "Outlet".into(),
                audience: Audience::National,
                bias: OutletBias::Neutral,
                factuality: Factuality::High,
            },
            original_headline: "Original".into(),
            body: body.into(),
            published_date: "2024-09-11".parse().unwrap(),
            url: "https://example.org/a".into(),
        }
    }

    #[test]
    fn prompt_layout() {
        let v = all_prompt_variants()[0];
        let p = build_prompt(v, &article("a", "X")).unwrap();
        assert_eq!(
            p,
            "Write a headline for this news article:\nX\nReturn only the headline text, verbatim, with no quotation marks or commentary."
        );
        assert_eq!(p, build_prompt(v, &article("a", "X")).unwrap());
        assert!(matches!(
            build_prompt(v, &article("a", " ")),
            Err(GenError::EmptyBody(_))
        ));
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let r = RetryPolicy {
            max_attempts: 5,
            base_delay_ms: 100,
            max_delay_ms: 350,
        };
        assert_eq!(r.delay(1), Duration::from_millis(100));
        assert_eq!(r.delay(2), Duration::from_millis(200));
        assert_eq!(r.delay(3), Duration::from_millis(350));
        assert_eq!(r.delay(80), Duration::from_millis(350));
    }
}
