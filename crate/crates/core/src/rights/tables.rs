use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RightsError;
use crate::metrics::{
    AtiModel, AtiReport, FotModel, FotReport, IdentityRates, ModelCorrection, RateTriple, ShiftRates,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftRow {
    pub amplification: f64,
    pub flip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorRow {
    pub fidelity: f64,
    pub framing_shift: f64,
    pub diversity: f64,
    pub tension: f64,
}

/// Published per-model aggregate tables, keyed by model id.
///
/// Headline counts behind the published rates are unknown, so reports
/// built from these tables weight every model equally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedTables {
    pub correction_rates: BTreeMap<String, RateTriple>,
    pub identity_in_noncorrecting: BTreeMap<String, IdentityRates>,
    pub significant_shifts: BTreeMap<String, ShiftRow>,
    pub identity_deltas: BTreeMap<String, IdentityRates>,
    #[serde(default)]
    pub behavior_profile: BTreeMap<String, BehaviorRow>,
}

impl PublishedTables {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RightsError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| RightsError::Tables(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, RightsError> {
        let t: Self = serde_json::from_str(text).map_err(|e| RightsError::Tables(e.to_string()))?;
        let models: Vec<&String> = t.correction_rates.keys().collect();
        let same = |keys: Vec<&String>| keys == models;
        if models.is_empty()
            || !same(t.identity_in_noncorrecting.keys().collect())
            || !same(t.significant_shifts.keys().collect())
            || !same(t.identity_deltas.keys().collect())
            || !(t.behavior_profile.is_empty() || same(t.behavior_profile.keys().collect()))
        {
            return Err(RightsError::Tables("every table must list the same models".into()));
        }
        Ok(t)
    }

    /// Reports with `weight` headlines (and assessments) per model.
    pub fn to_reports(&self, weight: usize) -> Result<(AtiReport, FotReport), RightsError> {
        let ati_models = self
            .correction_rates
            .iter()
            .map(|(m, rates)| {
                let model = AtiModel {
                    correction: ModelCorrection {
                        headline_count: weight,
                        engaging_count: weight,
                        rates: *rates,
                        non_engaging_rate: 0.0,
                    },
                    identity_in_noncorrecting: self.identity_in_noncorrecting.get(m).copied(),
                };
                (m.clone(), model)
            })
            .collect();
        let fot_models = self
            .significant_shifts
            .iter()
            .map(|(m, s)| {
                let b = self.behavior_profile.get(m);
                let model = FotModel {
                    shifts: ShiftRates {
                        assessments: weight,
                        amplification_rate: s.amplification,
                        flip_rate: s.flip,
                    },
                    identity_delta: self.identity_deltas.get(m).copied(),
                    fidelity: b.map(|b| b.fidelity),
                    framing_shift: b.map(|b| b.framing_shift),
                    diversity: b.map(|b| b.diversity),
                    tension: b.map(|b| b.tension),
                };
                (m.clone(), model)
            })
            .collect();
        let err = |e: crate::metrics::MetricsError| RightsError::Tables(e.to_string());
        Ok((
            AtiReport::from_models(ati_models).map_err(err)?,
            FotReport::from_models(fot_models, None).map_err(err)?,
        ))
    }
}
