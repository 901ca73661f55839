use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{mean, EmbeddedHeadline, HeadlineObservation, IdentityRates, MetricsError};
use crate::annotate::{spearman_rho, IdentityMentions};
use crate::axis::{ShiftAssessment, ShiftCategory};
use crate::embed::{centroid, cosine_distance, cosine_similarity, percentile_rank, EmbeddingVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRates {
    pub assessments: usize,
    pub amplification_rate: f64,
    pub flip_rate: f64,
}

/// Share of assessments that are significant amplifications and flips.
pub fn shift_rates(assessments: &[(String, ShiftAssessment)]) -> BTreeMap<String, ShiftRates> {
    let mut acc: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for (model, a) in assessments {
        let c = acc.entry(model).or_default();
        c[0] += 1;
        c[1] += usize::from(a.is_significant(ShiftCategory::Amplification));
        c[2] += usize::from(a.is_significant(ShiftCategory::Flip));
    }
    acc.into_iter()
        .map(|(m, [n, amp, flip])| {
            let d = n as f64;
            (
                m.to_string(),
                ShiftRates {
                    assessments: n,
                    amplification_rate: amp as f64 / d,
                    flip_rate: flip as f64 / d,
                },
            )
        })
        .collect()
}

/// Mean over each model's generated headlines of (term present in the
/// headline − term present in its article's original).
pub fn identity_delta(
    generated: &[HeadlineObservation],
    originals: &BTreeMap<String, IdentityMentions>,
) -> Result<BTreeMap<String, IdentityRates>, MetricsError> {
    let mut acc: BTreeMap<&str, (IdentityRates, usize)> = BTreeMap::new();
    for g in generated {
        let orig = originals
            .get(&g.article_id)
            .ok_or_else(|| MetricsError::UnmatchedArticle {
                model_id: g.model_id.clone(),
                article_id: g.article_id.clone(),
            })?;
        let (sum, n) = acc.entry(&g.model_id).or_default();
        sum.add(&IdentityRates::indicator(&g.identity));
        sum.add(&IdentityRates::indicator(orig).scaled(-1.0));
        *n += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(m, (sum, n))| (m.to_string(), sum.scaled(1.0 / n as f64)))
        .collect())
}

fn group_by_model_article(headlines: &[EmbeddedHeadline]) -> BTreeMap<(&str, &str), Vec<&EmbeddingVector>> {
    let mut groups: BTreeMap<(&str, &str), Vec<&EmbeddingVector>> = BTreeMap::new();
    for h in headlines {
        groups
            .entry((&h.model_id, &h.article_id))
            .or_default()
            .push(&h.embedding);
    }
    groups
}

/// Average per-article values into a per-model mean.
fn average_per_model<'a>(values: impl IntoIterator<Item = (&'a str, f64)>) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (m, v) in values {
        acc.entry(m).or_default().push(v);
    }
    acc.into_iter()
        .map(|(m, vs)| (m.to_string(), mean(vs).expect("non-empty group")))
        .collect()
}

/// Mean pairwise cosine distance within each (model, article) group,
/// averaged over the model's articles. Singleton groups are skipped.
pub fn diversity(headlines: &[EmbeddedHeadline]) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut per_article = Vec::new();
    for ((model, article), group) in group_by_model_article(headlines) {
        if group.len() < 2 {
            log::warn!("diversity: {model}/{article} has a single headline; skipped");
            continue;
        }
        let mut dists = Vec::new();
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                dists.push(cosine_distance(group[i], group[j])?);
            }
        }
        per_article.push((model, mean(dists).expect("at least one pair")));
    }
    if per_article.is_empty() {
        return Err(MetricsError::NoData(
            "diversity needs a group with two or more headlines",
        ));
    }
    Ok(average_per_model(per_article))
}

/// Mean cosine similarity between each generated headline and its article.
pub fn fidelity(
    headlines: &[EmbeddedHeadline],
    articles: &BTreeMap<String, EmbeddingVector>,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut values = Vec::with_capacity(headlines.len());
    for h in headlines {
        let a = lookup(articles, h)?;
        values.push((h.model_id.as_str(), cosine_similarity(&h.embedding, a)?));
    }
    Ok(average_per_model(values))
}

/// Halved cosine distance between `gen − article` and `orig − article`,
/// averaged per model. Headlines whose difference vector is zero are skipped.
pub fn framing_shift(
    headlines: &[EmbeddedHeadline],
    originals: &BTreeMap<String, EmbeddingVector>,
    articles: &BTreeMap<String, EmbeddingVector>,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut values = Vec::with_capacity(headlines.len());
    for h in headlines {
        let a = lookup(articles, h)?;
        let o = lookup(originals, h)?;
        let dg = h.embedding.sub(a)?;
        let dor = o.sub(a)?;
        if dg.norm() == 0.0 || dor.norm() == 0.0 {
            log::warn!(
                "framing_shift: {}/{} coincides with its article; skipped",
                h.model_id,
                h.article_id
            );
            continue;
        }
        values.push((h.model_id.as_str(), cosine_distance(&dg, &dor)? / 2.0));
    }
    Ok(average_per_model(values))
}

/// Per (model, article): percentile rank of the original headline's
/// Euclidean distance to the centroid of the generated set, among the
/// generated headlines' own distances. Averaged over articles per model.
pub fn tension(
    headlines: &[EmbeddedHeadline],
    originals: &BTreeMap<String, EmbeddingVector>,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    if headlines.is_empty() {
        return Err(MetricsError::NoData("tension needs generated headlines"));
    }
    let mut per_article = Vec::new();
    for ((model, article), group) in group_by_model_article(headlines) {
        let orig = originals.get(article).ok_or_else(|| MetricsError::UnmatchedArticle {
            model_id: model.to_string(),
            article_id: article.to_string(),
        })?;
        if group.len() < 2 {
            log::warn!("tension: {model}/{article} has a single headline; skipped");
            continue;
        }
        let owned: Vec<EmbeddingVector> = group.iter().map(|e| (*e).clone()).collect();
        let c = centroid(&owned)?;
        let dists = owned
            .iter()
            .map(|g| g.euclidean_distance(&c))
            .collect::<Result<Vec<_>, _>>()?;
        per_article.push((model, percentile_rank(orig.euclidean_distance(&c)?, &dists)?));
    }
    Ok(average_per_model(per_article))
}

/// Spearman correlation of paired (original, generated) scores.
pub fn partisanship_correlation(pairs: &[(f64, f64)]) -> Result<f64, MetricsError> {
    let (o, g): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok(spearman_rho(&o, &g)?.rho)
}

fn lookup<'a>(
    map: &'a BTreeMap<String, EmbeddingVector>,
    h: &EmbeddedHeadline,
) -> Result<&'a EmbeddingVector, MetricsError> {
    map.get(&h.article_id).ok_or_else(|| MetricsError::UnmatchedArticle {
        model_id: h.model_id.clone(),
        article_id: h.article_id.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FotModel {
    #[serde(flatten)]
    pub shifts: ShiftRates,
    pub identity_delta: Option<IdentityRates>,
    pub fidelity: Option<f64>,
    pub framing_shift: Option<f64>,
    pub diversity: Option<f64>,
    pub tension: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FotReport {
    pub models: BTreeMap<String, FotModel>,
    /// Pooled over all assessments.
    pub pooled_amplification_rate: f64,
    pub pooled_flip_rate: f64,
    /// Spearman rho between original and generated scores; `None` when undefined.
    pub partisanship_correlation: Option<f64>,
}

/// Inputs to [`FotReport::compute`]; all maps are keyed by article id.
pub struct FotInputs<'a> {
    pub assessments: &'a [(String, ShiftAssessment)],
    pub generated_identity: &'a [HeadlineObservation],
    pub original_identity: &'a BTreeMap<String, IdentityMentions>,
    pub generated: &'a [EmbeddedHeadline],
    pub original_embeddings: &'a BTreeMap<String, EmbeddingVector>,
    pub article_embeddings: &'a BTreeMap<String, EmbeddingVector>,
    /// `(original score, generated score)`.
    pub score_pairs: &'a [(f64, f64)],
}

impl FotReport {
    pub fn from_models(
        models: BTreeMap<String, FotModel>,
        partisanship_correlation: Option<f64>,
    ) -> Result<Self, MetricsError> {
        let n: usize = models.values().map(|m| m.shifts.assessments).sum();
        if models.is_empty() || n == 0 {
            return Err(MetricsError::NoData("freedom-of-thought report has no assessments"));
        }
        let pooled = |f: fn(&ShiftRates) -> f64| {
            models
                .values()
                .map(|m| f(&m.shifts) * m.shifts.assessments as f64)
                .sum::<f64>()
                / n as f64
        };
        Ok(Self {
            pooled_amplification_rate: pooled(|s| s.amplification_rate),
            pooled_flip_rate: pooled(|s| s.flip_rate),
            partisanship_correlation,
            models,
        })
    }

    pub fn compute(inputs: &FotInputs<'_>) -> Result<Self, MetricsError> {
        let mut deltas = identity_delta(inputs.generated_identity, inputs.original_identity)?;
        let mut fid = fidelity(inputs.generated, inputs.article_embeddings)?;
        let mut fs = framing_shift(inputs.generated, inputs.original_embeddings, inputs.article_embeddings)?;
        let mut div = diversity(inputs.generated).unwrap_or_default();
        let mut ten = tension(inputs.generated, inputs.original_embeddings)?;
        let correlation = match partisanship_correlation(inputs.score_pairs) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("partisanship correlation undefined: {e}");
                None
            }
        };
        let models = shift_rates(inputs.assessments)
            .into_iter()
            .map(|(m, shifts)| {
                let model = FotModel {
                    shifts,
                    identity_delta: deltas.remove(&m),
                    fidelity: fid.remove(&m),
                    framing_shift: fs.remove(&m),
                    diversity: div.remove(&m),
                    tension: ten.remove(&m),
                };
                (m, model)
            })
            .collect();
        Self::from_models(models, correlation)
    }

    /// Mean over models of |ethnicity delta|.
    pub fn mean_abs_ethnicity_delta(&self) -> Option<f64> {
        mean(
            self.models
                .values()
                .filter_map(|m| m.identity_delta.map(|d| d.ethnicity.abs())),
        )
    }

    /// Mean over terms and models of |identity delta|.
    pub fn mean_abs_identity_delta(&self) -> Option<f64> {
        mean(
            self.models
                .values()
                .filter_map(|m| m.identity_delta.map(|d| d.mean_abs())),
        )
    }
}
