use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Rating, RightRiskProfile, RightsError, ThresholdConfig};
use crate::metrics::MetricBundle;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Floats in the report are rounded to this many decimal places so that
/// last-bit differences in summation order cannot change its bytes.
const DECIMALS: i32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub corpus_hash: String,
    pub lexicon_hash: String,
    pub embedding_provider_id: String,
    pub axis_hash: String,
    pub llm_models: Vec<String>,
    /// Outside the stable region; omitted when `None`.
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub json: String,
    pub text: String,
}

fn round(x: f64) -> f64 {
    let k = 10f64.powi(DECIMALS);
    let r = (x * k).round() / k;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{:.6}", round(x))).unwrap_or_else(|| "n/a".into())
}

/// Render profiles, evidence, per-model metrics, provenance and thresholds
/// as JSON and plain text. Identical inputs give identical bytes.
pub fn compose_report(
    profiles: &[RightRiskProfile],
    bundle: &MetricBundle,
    meta: &RunMetadata,
    thresholds: &ThresholdConfig,
) -> Result<AuditReport, RightsError> {
    if profiles.is_empty() {
        return Err(RightsError::NoProfiles);
    }
    let stable = json!({
        "provenance": {
            "config_hash": meta.config_hash,
            "seed": meta.seed,
            "corpus_hash": meta.corpus_hash,
            "lexicon_hash": meta.lexicon_hash,
            "embedding_provider_id": meta.embedding_provider_id,
            "axis_hash": meta.axis_hash,
            "llm_models": meta.llm_models,
        },
        "thresholds": thresholds,
        "profiles": profiles,
        "metrics": bundle,
    });
    let mut doc = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "stable": round_floats(stable),
    });
    if let Some(ts) = &meta.generated_at {
        doc["generated_at"] = Value::String(ts.clone());
    }
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    Ok(AuditReport {
        json,
        text: render_text(profiles, bundle, meta, thresholds),
    })
}

fn render_text(
    profiles: &[RightRiskProfile],
    bundle: &MetricBundle,
    meta: &RunMetadata,
    thresholds: &ThresholdConfig,
) -> String {
    let mut t = String::new();
    let w = &mut t;
    let _ = writeln!(w, "RIGHTS RISK AUDIT REPORT (schema {REPORT_SCHEMA_VERSION})");
    let _ = writeln!(w);
    let _ = writeln!(w, "Provenance");
    let _ = writeln!(w, "  config hash        {}", meta.config_hash);
    let _ = writeln!(w, "  seed               {}", meta.seed);
    let _ = writeln!(w, "  corpus hash        {}", meta.corpus_hash);
    let _ = writeln!(w, "  lexicon hash       {}", meta.lexicon_hash);
    let _ = writeln!(w, "  embedding provider {}", meta.embedding_provider_id);
    let _ = writeln!(w, "  axis hash          {}", meta.axis_hash);
    let _ = writeln!(w, "  models             {}", meta.llm_models.join(", "));
    let _ = writeln!(w);
    let _ = writeln!(w, "Thresholds");
    let lb = &thresholds.likelihood_bounds;
    let sb = &thresholds.scope_bounds;
    let _ = writeln!(
        w,
        "  likelihood         low <= {} < medium <= {} < high",
        lb.low_max, lb.med_max
    );
    let _ = writeln!(
        w,
        "  scope              low <= {} < medium <= {} < high",
        sb.low_max, sb.med_max
    );
    let _ = writeln!(w, "  identity delta     high if > {}", thresholds.identity_delta_high);

    for p in profiles {
        let _ = writeln!(w);
        let title = p.right.to_string().to_uppercase();
        let _ = writeln!(w, "== {title} ==");
        let _ = writeln!(w, "  scale       {}", p.scale);
        let _ = writeln!(w, "  scope       {}", p.scope);
        let _ = writeln!(w, "  likelihood  {}", p.likelihood);
        let _ = writeln!(w, "  remediability: {}", p.remediability);
        let _ = writeln!(w);
        let _ = writeln!(w, "  {}", p.narrative);
        let _ = writeln!(w);
        let _ = writeln!(w, "  Evidence");
        for e in &p.evidence {
            let _ = writeln!(
                w,
                "    [{}] {} = {} ({})",
                e.dimension,
                e.metric,
                e.value
                    .map(|v| format!("{:.6}", round(v)))
                    .unwrap_or_else(|| "-".into()),
                e.threshold
            );
        }
        let _ = writeln!(w);
        let _ = writeln!(w, "  Per-model ratings (scope / likelihood)");
        for (m, r) in &p.per_model {
            let _ = writeln!(w, "    {m:<28} {:<6} / {}", r.scope.to_string(), r.likelihood);
        }
    }

    let _ = writeln!(w);
    let _ = writeln!(w, "== CORRECTION RATES (engaging headlines) ==");
    let _ = writeln!(
        w,
        "  {:<28} {:>8} {:>8} {:>8} {:>8} {:>12}",
        "model", "n", "none", "implicit", "explicit", "non-engaging"
    );
    for (m, r) in &bundle.ati.models {
        let c = &r.correction;
        let _ = writeln!(
            w,
            "  {m:<28} {:>8} {:>8.6} {:>8.6} {:>8.6} {:>12.6}",
            c.engaging_count,
            round(c.rates.no_correction),
            round(c.rates.implicit),
            round(c.rates.explicit),
            round(c.non_engaging_rate)
        );
    }
    let o = &bundle.ati.overall_headline_weighted;
    let _ = writeln!(
        w,
        "  {:<28} {:>8} {:>8.6} {:>8.6} {:>8.6}",
        "overall (headline-weighted)",
        "",
        round(o.no_correction),
        round(o.implicit),
        round(o.explicit)
    );
    let o = &bundle.ati.overall_model_averaged;
    let _ = writeln!(
        w,
        "  {:<28} {:>8} {:>8.6} {:>8.6} {:>8.6}",
        "overall (model-averaged)",
        "",
        round(o.no_correction),
        round(o.implicit),
        round(o.explicit)
    );

    let _ = writeln!(w);
    let _ = writeln!(w, "== IDENTITY IN NON-CORRECTING HEADLINES ==");
    let _ = writeln!(
        w,
        "  {:<28} {:>9} {:>9} {:>9}",
        "model", "ethnicity", "immigrant", "migrant"
    );
    for (m, r) in &bundle.ati.models {
        let i = r.identity_in_noncorrecting;
        let _ = writeln!(
            w,
            "  {m:<28} {:>9} {:>9} {:>9}",
            fmt_opt(i.map(|i| i.ethnicity)),
            fmt_opt(i.map(|i| i.immigrant)),
            fmt_opt(i.map(|i| i.migrant))
        );
    }

    let _ = writeln!(w);
    let _ = writeln!(w, "== PARTISAN SHIFTS AND IDENTITY DELTAS ==");
    let _ = writeln!(
        w,
        "  {:<28} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "model", "n", "amplify", "flip", "d.ethn", "d.immig", "d.migr"
    );
    for (m, r) in &bundle.fot.models {
        let d = r.identity_delta;
        let _ = writeln!(
            w,
            "  {m:<28} {:>6} {:>9.6} {:>9.6} {:>9} {:>9} {:>9}",
            r.shifts.assessments,
            round(r.shifts.amplification_rate),
            round(r.shifts.flip_rate),
            fmt_opt(d.map(|d| d.ethnicity)),
            fmt_opt(d.map(|d| d.immigrant)),
            fmt_opt(d.map(|d| d.migrant))
        );
    }

    let _ = writeln!(w);
    let _ = writeln!(w, "== BEHAVIOR PROFILE ==");
    let _ = writeln!(
        w,
        "  {:<28} {:>9} {:>9} {:>9} {:>9}",
        "model", "fidelity", "framing", "diversity", "tension"
    );
    for (m, r) in &bundle.fot.models {
        let _ = writeln!(
            w,
            "  {m:<28} {:>9} {:>9} {:>9} {:>9}",
            fmt_opt(r.fidelity),
            fmt_opt(r.framing_shift),
            fmt_opt(r.diversity),
            fmt_opt(r.tension)
        );
    }
    let _ = writeln!(
        w,
        "  partisanship correlation (original vs generated): {}",
        fmt_opt(bundle.fot.partisanship_correlation)
    );
    if let Some(ts) = &meta.generated_at {
        let _ = writeln!(w);
        let _ = writeln!(w, "Generated at {ts}");
    }
    t
}

/// Highest rating across every dimension computed by the engine.
pub fn max_rating(profiles: &[RightRiskProfile]) -> Option<Rating> {
    profiles.iter().flat_map(|p| [p.scale, p.scope, p.likelihood]).max()
}
