use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{mean, HeadlineObservation, IdentityRates, MetricsError};
use crate::annotate::CorrectionLabel;

/// Shares of engaging headlines; sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub no_correction: f64,
    pub implicit: f64,
    pub explicit: f64,
}

impl RateTriple {
    pub fn sum(&self) -> f64 {
        self.no_correction + self.implicit + self.explicit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCorrection {
    pub headline_count: usize,
    pub engaging_count: usize,
    pub rates: RateTriple,
    /// Share of all headlines that never touch the claim.
    pub non_engaging_rate: f64,
}

/// Correction-rate triples per model over engaging headlines.
///
/// Models with no engaging headline are omitted.
pub fn correction_rates(observations: &[HeadlineObservation]) -> BTreeMap<String, ModelCorrection> {
    let mut counts: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
    for o in observations {
        let c = counts.entry(&o.model_id).or_default();
        c[match o.label {
            CorrectionLabel::NoCorrection => 0,
            CorrectionLabel::Implicit => 1,
            CorrectionLabel::Explicit => 2,
            CorrectionLabel::NonEngaging => 3,
        }] += 1;
    }
    let mut out = BTreeMap::new();
    for (model, [none, implicit, explicit, non_engaging]) in counts {
        let engaging = none + implicit + explicit;
        if engaging == 0 {
            log::warn!("model {model} has no engaging headlines; omitted from correction rates");
            continue;
        }
        let e = engaging as f64;
        let total = engaging + non_engaging;
        out.insert(
            model.to_string(),
            ModelCorrection {
                headline_count: total,
                engaging_count: engaging,
                rates: RateTriple {
                    no_correction: none as f64 / e,
                    implicit: implicit as f64 / e,
                    explicit: explicit as f64 / e,
                },
                non_engaging_rate: non_engaging as f64 / total as f64,
            },
        );
    }
    out
}

/// Per model, the share of `no_correction` headlines mentioning each
/// identity class. Models without such headlines are absent.
pub fn identity_in_noncorrecting(observations: &[HeadlineObservation]) -> BTreeMap<String, IdentityRates> {
    let mut acc: BTreeMap<&str, (IdentityRates, usize)> = BTreeMap::new();
    for o in observations.iter().filter(|o| o.label == CorrectionLabel::NoCorrection) {
        let (sum, n) = acc.entry(&o.model_id).or_default();
        sum.add(&IdentityRates::indicator(&o.identity));
        *n += 1;
    }
    acc.into_iter()
        .map(|(m, (sum, n))| (m.to_string(), sum.scaled(1.0 / n as f64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtiModel {
    #[serde(flatten)]
    pub correction: ModelCorrection,
    pub identity_in_noncorrecting: Option<IdentityRates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtiReport {
    pub models: BTreeMap<String, AtiModel>,
    /// Pooled over all engaging headlines.
    pub overall_headline_weighted: RateTriple,
    /// Unweighted mean of the per-model triples.
    pub overall_model_averaged: RateTriple,
    pub overall_non_engaging_rate: f64,
}

impl AtiReport {
    pub fn from_models(models: BTreeMap<String, AtiModel>) -> Result<Self, MetricsError> {
        if models.is_empty() {
            return Err(MetricsError::NoData("access-to-information report has no models"));
        }
        let weight: f64 = models.values().map(|m| m.correction.engaging_count as f64).sum();
        let headlines: f64 = models.values().map(|m| m.correction.headline_count as f64).sum();
        if weight == 0.0 {
            return Err(MetricsError::NoData("no engaging headlines"));
        }
        let weighted = |f: fn(&RateTriple) -> f64| {
            models
                .values()
                .map(|m| f(&m.correction.rates) * m.correction.engaging_count as f64)
                .sum::<f64>()
                / weight
        };
        let averaged = |f: fn(&RateTriple) -> f64| mean(models.values().map(|m| f(&m.correction.rates))).unwrap_or(0.0);
        let non_engaging = models
            .values()
            .map(|m| m.correction.non_engaging_rate * m.correction.headline_count as f64)
            .sum::<f64>()
            / headlines.max(1.0);
        Ok(Self {
            overall_headline_weighted: RateTriple {
                no_correction: weighted(|r| r.no_correction),
                implicit: weighted(|r| r.implicit),
                explicit: weighted(|r| r.explicit),
            },
            overall_model_averaged: RateTriple {
                no_correction: averaged(|r| r.no_correction),
                implicit: averaged(|r| r.implicit),
                explicit: averaged(|r| r.explicit),
            },
            overall_non_engaging_rate: non_engaging,
            models,
        })
    }

    /// Build from classified headlines.
    pub fn from_observations(observations: &[HeadlineObservation]) -> Result<Self, MetricsError> {
        let mut identity = identity_in_noncorrecting(observations);
        let models = correction_rates(observations)
            .into_iter()
            .map(|(m, correction)| {
                let identity_in_noncorrecting = identity.remove(&m);
                (
                    m,
                    AtiModel {
                        correction,
                        identity_in_noncorrecting,
                    },
                )
            })
            .collect();
        Self::from_models(models)
    }

    /// Mean identity-in-noncorrecting rate over terms and reporting models.
    pub fn mean_identity_in_noncorrecting(&self) -> Option<f64> {
        mean(
            self.models
                .values()
                .filter_map(|m| m.identity_in_noncorrecting.map(|r| r.mean())),
        )
    }
}
