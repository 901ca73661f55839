//! The six audit stages. Each reads upstream artifacts from the output
//! directory, verifies their manifests, and writes its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use rightsaudit_core::annotate::{
    classify_correction, cohen_kappa, detect_identity, evaluate_classifier, export_gold_labels, keyword_answers,
    lexical_partisanship, load_annotations, spearman_rho, to_label_vector, AnnotationRecord, ClassifierMetrics,
    CorrectionLabel, HeadlineRef, IdentityMentions, Lexicon, LexiconConfig, Question, Spearman, LABEL_DIM,
};
use rightsaudit_core::axis::{
    assess_shift, build_axis, estimate_sigma, score_headline, select_poles_with, train_regressor, PartisanshipAxis,
    ShiftAssessment, TrainedRegressor,
};
use rightsaudit_core::corpus::{load_corpus, parse_corpus, write_corpus, Article};
use rightsaudit_core::embed::{CachedEmbedder, EmbeddingProvider, EmbeddingVector, HttpEmbedder, StubEmbedder};
use rightsaudit_core::genclient::{
    build_provider, generate_matrix, FailureReport, GeneratedHeadline, GenerationCache, HeadlineProvider,
};
use rightsaudit_core::hashing::{json_hash, sha256_hex};
use rightsaudit_core::metrics::{AtiReport, EmbeddedHeadline, FotInputs, FotReport, HeadlineObservation, MetricBundle};
use rightsaudit_core::rights::{
    assess_access_to_information, assess_freedom_of_thought, compose_report, max_rating, Rating, RightRiskProfile,
    RunMetadata,
};

use crate::config::{EmbeddingConfig, RunConfig};
use crate::manifest::{
    file_hash, modified_output, read_manifest, write_stage, Manifest, Provenance, Stage, StageError,
};

/// A JSON artifact with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub provenance: Provenance,
    pub data: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Ran,
    /// Inputs and outputs matched the existing manifest; nothing was done.
    UpToDate,
}

pub struct Pipeline {
    cfg: RunConfig,
    config_hash: String,
    lexicon: Lexicon,
    lexicon_hash: String,
}

fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn to_jsonl_bytes<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for i in items {
        serde_json::to_writer(&mut out, i)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let lexicon_cfg = match &cfg.lexicon {
            Some(p) => LexiconConfig::load(p)?,
            None => LexiconConfig::default(),
        };
        let lexicon_hash = lexicon_cfg.content_hash();
        let lexicon = Lexicon::new(lexicon_cfg)?;
        Ok(Self {
            config_hash: cfg.content_hash(),
            cfg,
            lexicon,
            lexicon_hash,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out(&self) -> &Path {
        &self.cfg.out
    }

    fn corpus_hash(&self) -> Result<String> {
        let articles = load_corpus(&self.cfg.corpus)?;
        Ok(sha256_hex(write_corpus(&articles).as_bytes()))
    }

    fn provenance(&self, axis_hash: Option<String>) -> Result<Provenance> {
        Ok(Provenance {
            config_hash: self.config_hash.clone(),
            seed: self.cfg.seed,
            corpus_hash: self.corpus_hash()?,
            lexicon_hash: self.lexicon_hash.clone(),
            embedding_provider_id: self.cfg.embedding.provider_id(),
            axis_hash,
        })
    }

    fn annotations_hash(&self) -> Result<String> {
        let hashes = self
            .cfg
            .annotations
            .iter()
            .map(|p| file_hash(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(json_hash(&hashes))
    }

    /// Inputs a stage would record if it ran now. Verifies upstream stages.
    pub fn inputs_for(&self, stage: Stage) -> Result<BTreeMap<String, String>> {
        let mut m = BTreeMap::new();
        let upstream = |s: Stage, m: &mut BTreeMap<String, String>| -> Result<()> {
            let manifest = self.require(s)?;
            m.insert(s.command().to_string(), manifest.outputs_hash());
            Ok(())
        };
        match stage {
            Stage::Ingest => {
                m.insert("corpus".into(), file_hash(&self.cfg.corpus)?);
            }
            Stage::Generate => {
                upstream(Stage::Ingest, &mut m)?;
                m.insert("generation".into(), self.cfg.section_hash("generation"));
            }
            Stage::AnnotateEval => {
                upstream(Stage::Ingest, &mut m)?;
                m.insert("annotations".into(), self.annotations_hash()?);
                m.insert("lexicon".into(), self.lexicon_hash.clone());
            }
            Stage::TrainAxis => {
                upstream(Stage::Ingest, &mut m)?;
                if self.annotations()?.iter().any(|r| !r.headline_ref.is_original()) {
                    upstream(Stage::Generate, &mut m)?;
                }
                m.insert("annotations".into(), self.annotations_hash()?);
                m.insert("embedding".into(), self.cfg.section_hash("embedding"));
                m.insert("axis".into(), self.cfg.section_hash("axis"));
                m.insert("seed".into(), self.cfg.seed.to_string());
            }
            Stage::Score => {
                upstream(Stage::Generate, &mut m)?;
                upstream(Stage::TrainAxis, &mut m)?;
                m.insert("lexicon".into(), self.lexicon_hash.clone());
                m.insert("embedding".into(), self.cfg.section_hash("embedding"));
                m.insert("axis".into(), self.cfg.section_hash("axis"));
            }
            Stage::Report => {
                upstream(Stage::Score, &mut m)?;
                m.insert("thresholds".into(), self.cfg.section_hash("thresholds"));
                m.insert("config".into(), self.config_hash.clone());
            }
        }
        Ok(m)
    }

    /// The manifest of a completed, current upstream stage.
    pub fn require(&self, stage: Stage) -> Result<Manifest> {
        let manifest = read_manifest(self.out(), stage)?.ok_or(StageError::Missing(stage))?;
        if let Some(file) = modified_output(self.out(), stage, &manifest) {
            return Err(StageError::Stale(stage, format!("{file} was modified or removed")).into());
        }
        let current = self.inputs_for(stage)?;
        if current != manifest.inputs {
            let changed: Vec<&str> = current
                .iter()
                .filter(|(k, v)| manifest.inputs.get(*k) != Some(v))
                .map(|(k, _)| k.as_str())
                .chain(
                    manifest
                        .inputs
                        .keys()
                        .filter(|k| !current.contains_key(*k))
                        .map(String::as_str),
                )
                .collect();
            return Err(StageError::Stale(stage, format!("changed inputs: {}", changed.join(", "))).into());
        }
        Ok(manifest)
    }

    /// Run a stage unless its manifest already matches current inputs.
    pub fn run(&self, stage: Stage) -> Result<StageOutcome> {
        let inputs = self.inputs_for(stage)?;
        if let Some(m) = read_manifest(self.out(), stage)? {
            if m.inputs == inputs && modified_output(self.out(), stage, &m).is_none() {
                log::info!("{stage}: up to date");
                return Ok(StageOutcome::UpToDate);
            }
        }
        log::info!("{stage}: running");
        match stage {
            Stage::Ingest => self.ingest(inputs)?,
            Stage::Generate => self.generate(inputs)?,
            Stage::AnnotateEval => self.annotate_eval(inputs)?,
            Stage::TrainAxis => self.train_axis(inputs)?,
            Stage::Score => self.score(inputs)?,
            Stage::Report => self.report(inputs)?,
        }
        Ok(StageOutcome::Ran)
    }

    fn stage_file(&self, stage: Stage, name: &str) -> PathBuf {
        stage.dir(self.out()).join(name)
    }

    fn corpus(&self) -> Result<Vec<Article>> {
        let text = fs::read_to_string(self.stage_file(Stage::Ingest, "corpus.jsonl"))?;
        Ok(parse_corpus(&text)?)
    }

    fn annotations(&self) -> Result<Vec<AnnotationRecord>> {
        let mut all = Vec::new();
        for p in &self.cfg.annotations {
            all.extend(load_annotations(p)?);
        }
        Ok(all)
    }

    fn embedder(&self) -> Result<CachedEmbedder> {
        let provider: Box<dyn EmbeddingProvider> = match &self.cfg.embedding {
            EmbeddingConfig::Stub { dimension } => Box::new(StubEmbedder::new(*dimension)),
            EmbeddingConfig::Http(h) => Box::new(HttpEmbedder::new(h.clone())?),
        };
        Ok(CachedEmbedder::new(provider).with_disk_cache(self.out().join("cache").join("embeddings")))
    }

    // ---- ingest ----

    fn ingest(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let articles = load_corpus(&self.cfg.corpus)?;
        if articles.is_empty() {
            bail!("corpus {} has no articles", self.cfg.corpus.display());
        }
        let normalized = write_corpus(&articles);
        let summary = CorpusSummary::new(&articles, sha256_hex(normalized.as_bytes()));
        let prov = self.provenance(None)?;
        write_stage(
            self.out(),
            Stage::Ingest,
            inputs,
            &[
                ("corpus.jsonl", normalized.into_bytes()),
                (
                    "summary.json",
                    to_json_bytes(&Artifact {
                        provenance: prov.clone(),
                        data: summary,
                    })?,
                ),
            ],
            prov,
        )?;
        Ok(())
    }

    // ---- generate ----

    fn generate(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let corpus = self.corpus()?;
        let providers: Vec<Box<dyn HeadlineProvider>> = self
            .cfg
            .generation
            .providers
            .iter()
            .map(build_provider)
            .collect::<Result<_, _>>()?;
        let variants = self.cfg.variants()?;
        let cache = GenerationCache::new(self.out().join("cache").join("generation"));
        let outcome = generate_matrix(&corpus, &providers, &variants, &cache, &self.cfg.generation.retry)?;
        log::info!(
            "generate: {} headlines, {} provider calls, {} cache hits, {} failures, {} rejections",
            outcome.headlines.len(),
            outcome.provider_calls,
            outcome.cache_hits,
            outcome.report.failures.len(),
            outcome.report.rejections.len()
        );
        let prov = self.provenance(None)?;
        let failures = GenerationSummary {
            headlines: outcome.headlines.len(),
            report: outcome.report,
        };
        write_stage(
            self.out(),
            Stage::Generate,
            inputs,
            &[
                ("headlines.jsonl", to_jsonl_bytes(&outcome.headlines)?),
                (
                    "failures.json",
                    to_json_bytes(&Artifact {
                        provenance: prov.clone(),
                        data: failures,
                    })?,
                ),
            ],
            prov,
        )?;
        Ok(())
    }

    fn headlines(&self) -> Result<Vec<GeneratedHeadline>> {
        read_jsonl(&self.stage_file(Stage::Generate, "headlines.jsonl"))
    }

    // ---- annotate-eval ----

    fn annotate_eval(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let corpus = self.corpus()?;
        let records = self.annotations()?;
        if records.is_empty() {
            bail!("annotate-eval needs at least one annotation file");
        }
        let texts = self.headline_texts(&corpus, &records)?;
        let evaluation = evaluate_annotations(&records, &texts, &self.lexicon)?;
        let mut csv = Vec::new();
        export_gold_labels(&records, &mut csv)?;
        let prov = self.provenance(None)?;
        write_stage(
            self.out(),
            Stage::AnnotateEval,
            inputs,
            &[
                (
                    "evaluation.json",
                    to_json_bytes(&Artifact {
                        provenance: prov.clone(),
                        data: evaluation,
                    })?,
                ),
                ("gold_labels.csv", csv),
            ],
            prov,
        )?;
        Ok(())
    }

    /// Text of every annotated headline.
    fn headline_texts(
        &self,
        corpus: &[Article],
        records: &[AnnotationRecord],
    ) -> Result<BTreeMap<HeadlineRef, String>> {
        let originals: BTreeMap<&str, &str> = corpus
            .iter()
            .map(|a| (a.id.as_str(), a.original_headline.as_str()))
            .collect();
        let generated: BTreeMap<HeadlineRef, String> = if records.iter().any(|r| !r.headline_ref.is_original()) {
            self.headlines()?
                .into_iter()
                .map(|h| {
                    let key = HeadlineRef {
                        article_id: h.article_id,
                        model_id: h.model_id,
                        variant: Some(h.variant),
                        sample_index: h.sample_index,
                    };
                    (key, h.text)
                })
                .collect()
        } else {
            BTreeMap::new()
        };
        let mut out = BTreeMap::new();
        for r in records {
            let href = &r.headline_ref;
            let text = if href.is_original() {
                originals.get(href.article_id.as_str()).map(|s| s.to_string())
            } else {
                generated.get(href).cloned()
            };
            let text = text.ok_or_else(|| anyhow!("annotation references unknown headline {href:?}"))?;
            out.insert(href.clone(), text);
        }
        Ok(out)
    }

    // ---- train-axis ----

    fn train_axis(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let corpus = self.corpus()?;
        let records = self.annotations()?;
        if records.is_empty() {
            bail!("train-axis needs at least one annotation file");
        }
        let texts = self.headline_texts(&corpus, &records)?;
        let embedder = self.embedder()?;
        let pairs = records
            .iter()
            .map(|r| Ok((to_label_vector(r), embedder.embed_text(&texts[&r.headline_ref])?)))
            .collect::<Result<Vec<_>>>()?;
        let reg_cfg = self.cfg.axis.regressor(LABEL_DIM, embedder.dimension(), self.cfg.seed);
        let regressor = train_regressor(&pairs, &reg_cfg)?;
        let (left, right) = select_poles_with(&records, self.cfg.axis.pole_strategy, &Default::default())?;
        let axis =
            build_axis(&regressor, &left, &right)?.with_provenance(embedder.provider_id(), regressor.content_hash());
        let axis_json = axis.to_json();
        let axis_hash = sha256_hex(axis_json.as_bytes());
        let summary = TrainingSummary {
            pairs: pairs.len(),
            epochs: reg_cfg.epochs,
            initial_loss: regressor.loss_curve.first().map(|p| p.1),
            final_loss: regressor.loss_curve.last().map(|p| p.1),
            training_mse: regressor.mse(&pairs),
            regressor_hash: regressor.content_hash(),
            left_pole: left.values().to_vec(),
            right_pole: right.values().to_vec(),
        };
        let prov = self.provenance(Some(axis_hash))?;
        write_stage(
            self.out(),
            Stage::TrainAxis,
            inputs,
            &[
                ("regressor.json", regressor.to_json().into_bytes()),
                ("axis.json", axis_json.into_bytes()),
                (
                    "training.json",
                    to_json_bytes(&Artifact {
                        provenance: prov.clone(),
                        data: summary,
                    })?,
                ),
            ],
            prov,
        )?;
        Ok(())
    }

    fn axis(&self) -> Result<(PartisanshipAxis, String)> {
        let text = fs::read_to_string(self.stage_file(Stage::TrainAxis, "axis.json"))?;
        Ok((PartisanshipAxis::from_json(&text)?, sha256_hex(text.as_bytes())))
    }

    /// The trained regressor from the `train-axis` stage.
    pub fn regressor(&self) -> Result<TrainedRegressor> {
        let text = fs::read_to_string(self.stage_file(Stage::TrainAxis, "regressor.json"))?;
        Ok(TrainedRegressor::from_json(&text)?)
    }

    // ---- score ----

    fn score(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let corpus = self.corpus()?;
        let headlines = self.headlines()?;
        if headlines.is_empty() {
            bail!("score: the generate stage produced no headlines");
        }
        let (axis, axis_hash) = self.axis()?;
        let embedder = self.embedder()?;
        if embedder.provider_id() != axis.provider_id {
            return Err(StageError::Stale(
                Stage::TrainAxis,
                format!(
                    "axis built with {}, configured provider is {}",
                    axis.provider_id,
                    embedder.provider_id()
                ),
            )
            .into());
        }
        let lex = &self.lexicon;

        let mut original_identity = BTreeMap::new();
        let mut original_embeddings = BTreeMap::new();
        let mut article_embeddings = BTreeMap::new();
        let mut original_scores = BTreeMap::new();
        let mut originals = Vec::new();
        for a in &corpus {
            let e = embedder.embed_text(&a.original_headline)?;
            let s = score_headline(&axis, &e)?;
            let label = classify_correction(&a.original_headline, lex)?;
            let identity = detect_identity(&a.original_headline, lex)?;
            originals.push(ScoredOriginal {
                article_id: a.id.clone(),
                label,
                identity,
                score: s,
            });
            original_identity.insert(a.id.clone(), identity);
            original_scores.insert(a.id.clone(), s);
            original_embeddings.insert(a.id.clone(), e);
            article_embeddings.insert(a.id.clone(), embedder.embed_text(&a.body)?);
        }

        let texts: Vec<&str> = headlines.iter().map(|h| h.text.as_str()).collect();
        let gen_embeddings = embedder.embed_many(&texts)?;
        let mut observations = Vec::with_capacity(headlines.len());
        let mut embedded = Vec::with_capacity(headlines.len());
        let mut scores = Vec::with_capacity(headlines.len());
        let mut groups: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
        for (h, e) in headlines.iter().zip(gen_embeddings) {
            let s = score_headline(&axis, &e)?;
            groups.entry((&h.model_id, &h.article_id)).or_default().push(s);
            scores.push(s);
            observations.push(HeadlineObservation {
                model_id: h.model_id.clone(),
                article_id: h.article_id.clone(),
                label: classify_correction(&h.text, lex)?,
                identity: detect_identity(&h.text, lex)?,
            });
            embedded.push(EmbeddedHeadline {
                model_id: h.model_id.clone(),
                article_id: h.article_id.clone(),
                embedding: e,
            });
        }
        let group_scores: Vec<Vec<f64>> = groups.into_values().collect();
        let sigma = estimate_sigma(&group_scores).context("estimating score variation across prompt variants")?;

        let mut assessments = Vec::with_capacity(headlines.len());
        let mut score_pairs = Vec::with_capacity(headlines.len());
        let mut rows = Vec::with_capacity(headlines.len());
        for ((h, obs), s_gen) in headlines.iter().zip(&observations).zip(&scores) {
            let s_orig = *original_scores
                .get(&h.article_id)
                .ok_or_else(|| anyhow!("headline for unknown article {}", h.article_id))?;
            let a = assess_shift(s_orig, *s_gen, sigma, self.cfg.axis.z, self.cfg.axis.neutral_eps)?;
            assessments.push((h.model_id.clone(), a));
            score_pairs.push((s_orig, *s_gen));
            rows.push(ScoredHeadline {
                article_id: h.article_id.clone(),
                model_id: h.model_id.clone(),
                variant: h.variant.key(),
                sample_index: h.sample_index,
                label: obs.label,
                identity: obs.identity,
                score: *s_gen,
                original_score: s_orig,
                shift: a,
            });
        }

        let ati = AtiReport::from_observations(&observations)?;
        let fot = FotReport::compute(&FotInputs {
            assessments: &assessments,
            generated_identity: &observations,
            original_identity: &original_identity,
            generated: &embedded,
            original_embeddings: &original_embeddings,
            article_embeddings: &article_embeddings,
            score_pairs: &score_pairs,
        })?;
        let bundle = MetricBundle::new(
            embedder.provider_id(),
            self.lexicon_hash.clone(),
            axis_hash.clone(),
            ati,
            fot,
        );
        let prov = self.provenance(Some(axis_hash))?;
        let data = ScoreSummary {
            sigma,
            originals,
            bundle,
        };
        write_stage(
            self.out(),
            Stage::Score,
            inputs,
            &[
                (
                    "metrics.json",
                    to_json_bytes(&Artifact {
                        provenance: prov.clone(),
                        data,
                    })?,
                ),
                ("scores.jsonl", to_jsonl_bytes(&rows)?),
            ],
            prov,
        )?;
        Ok(())
    }

    // ---- report ----

    fn report(&self, inputs: BTreeMap<String, String>) -> Result<()> {
        let scored: Artifact<ScoreSummary> = read_json(&self.stage_file(Stage::Score, "metrics.json"))?;
        let bundle = &scored.data.bundle;
        let th = &self.cfg.thresholds;
        let profiles = vec![
            assess_access_to_information(&bundle.ati, th)?,
            assess_freedom_of_thought(&bundle.fot, th)?,
        ];
        let prov = self.provenance(scored.provenance.axis_hash.clone())?;
        let meta = RunMetadata {
            config_hash: prov.config_hash.clone(),
            seed: prov.seed,
            corpus_hash: prov.corpus_hash.clone(),
            lexicon_hash: prov.lexicon_hash.clone(),
            embedding_provider_id: prov.embedding_provider_id.clone(),
            axis_hash: prov.axis_hash.clone().unwrap_or_default(),
            llm_models: self
                .cfg
                .generation
                .providers
                .iter()
                .map(|p| p.model_id.clone())
                .collect(),
            generated_at: None,
        };
        let report = compose_report(&profiles, bundle, &meta, th)?;
        write_stage(
            self.out(),
            Stage::Report,
            inputs,
            &[
                ("report.json", report.json.into_bytes()),
                ("report.txt", report.text.into_bytes()),
            ],
            prov,
        )?;
        Ok(())
    }

    /// Highest rating in the current report.
    pub fn report_max_rating(&self) -> Result<Option<Rating>> {
        self.require(Stage::Report)?;
        let v: serde_json::Value = read_json(&self.stage_file(Stage::Report, "report.json"))?;
        let profiles: Vec<RightRiskProfile> = serde_json::from_value(v["stable"]["profiles"].clone())?;
        Ok(max_rating(&profiles))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub articles: usize,
    pub corpus_hash: String,
    pub by_audience: BTreeMap<String, usize>,
    pub by_bias: BTreeMap<String, usize>,
    pub ids: Vec<String>,
}

impl CorpusSummary {
    fn new(articles: &[Article], corpus_hash: String) -> Self {
        let tag = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
        let mut by_audience = BTreeMap::new();
        let mut by_bias = BTreeMap::new();
        for a in articles {
            *by_audience
                .entry(tag(serde_json::json!(a.outlet.audience)))
                .or_insert(0) += 1;
            *by_bias.entry(tag(serde_json::json!(a.outlet.bias))).or_insert(0) += 1;
        }
        Self {
            articles: articles.len(),
            corpus_hash,
            by_audience,
            by_bias,
            ids: articles.iter().map(|a| a.id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub headlines: usize,
    pub report: FailureReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub pairs: usize,
    pub epochs: usize,
    pub initial_loss: Option<f64>,
    pub final_loss: Option<f64>,
    pub training_mse: f64,
    pub regressor_hash: String,
    pub left_pole: Vec<f64>,
    pub right_pole: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredOriginal {
    pub article_id: String,
    pub label: CorrectionLabel,
    pub identity: IdentityMentions,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredHeadline {
    pub article_id: String,
    pub model_id: String,
    pub variant: String,
    pub sample_index: u32,
    pub label: CorrectionLabel,
    pub identity: IdentityMentions,
    pub score: f64,
    pub original_score: f64,
    pub shift: ShiftAssessment,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub sigma: f64,
    pub originals: Vec<ScoredOriginal>,
    pub bundle: MetricBundle,
}

// ---- annotation evaluation ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationEvaluation {
    pub annotators: Vec<String>,
    pub headlines: usize,
    /// Between the first two annotators (by id) on headlines both labeled.
    pub kappa_by_question: BTreeMap<String, Option<f64>>,
    pub kappa_pooled: Option<f64>,
    pub partisanship_agreement: Option<Spearman>,
    /// Keyword probes against majority-vote gold labels.
    pub keyword_classifier: BTreeMap<String, ClassifierMetrics>,
    /// Correction classifier against labels derived from gold answers.
    pub correction_accuracy: f64,
    pub correction_by_label: BTreeMap<String, ClassifierMetrics>,
    /// Lexical partisanship against the mean annotator rating (left negative).
    pub lexical_partisanship_agreement: Option<Spearman>,
}

/// Correction label implied by a headline's annotated answers.
pub fn gold_correction_label(answers: &BTreeMap<Question, bool>) -> CorrectionLabel {
    let a = |q| answers.get(&q).copied().unwrap_or(false);
    if a(Question::StatementFalse) {
        CorrectionLabel::Explicit
    } else if a(Question::OthersRefutation) || a(Question::Evidence) {
        CorrectionLabel::Implicit
    } else if a(Question::DescribesStatement) || a(Question::StatementAsClaim) || a(Question::PerpetuatesClaim) {
        CorrectionLabel::NoCorrection
    } else {
        CorrectionLabel::NonEngaging
    }
}

fn label_id(l: CorrectionLabel) -> String {
    serde_json::json!(l).as_str().unwrap_or_default().to_string()
}

pub fn evaluate_annotations(
    records: &[AnnotationRecord],
    texts: &BTreeMap<HeadlineRef, String>,
    lexicon: &Lexicon,
) -> Result<AnnotationEvaluation> {
    let annotators: Vec<String> = records
        .iter()
        .map(|r| r.annotator_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut by_headline: BTreeMap<&HeadlineRef, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        by_headline.entry(&r.headline_ref).or_default().push(r);
    }

    // Agreement between the first two annotators.
    let mut kappa_by_question = BTreeMap::new();
    let mut kappa_pooled = None;
    let mut partisanship_agreement = None;
    if let [a, b, ..] = annotators.as_slice() {
        let shared: Vec<(&AnnotationRecord, &AnnotationRecord)> = by_headline
            .values()
            .filter_map(|rs| {
                let x = rs.iter().find(|r| &r.annotator_id == a)?;
                let y = rs.iter().find(|r| &r.annotator_id == b)?;
                Some((*x, *y))
            })
            .collect();
        let mut pooled = Vec::new();
        for q in Question::ALL {
            let pairs: Vec<(bool, bool)> = shared.iter().map(|(x, y)| (x.answer(q), y.answer(q))).collect();
            pooled.extend(pairs.iter().map(|&(x, y)| ((q.index(), x), (q.index(), y))));
            kappa_by_question.insert(q.id().to_string(), cohen_kappa(&pairs).ok());
        }
        let pooled: Vec<(bool, bool)> = pooled.into_iter().map(|((_, x), (_, y))| (x, y)).collect();
        kappa_pooled = cohen_kappa(&pooled).ok();
        let (px, py): (Vec<f64>, Vec<f64>) = shared
            .iter()
            .map(|(x, y)| (f64::from(x.partisanship.value()), f64::from(y.partisanship.value())))
            .unzip();
        partisanship_agreement = spearman_rho(&px, &py).ok();
    }

    // Majority-vote gold answers per headline; ties count as positive.
    let mut keyword_pred: BTreeMap<Question, Vec<bool>> = BTreeMap::new();
    let mut keyword_gold: BTreeMap<Question, Vec<bool>> = BTreeMap::new();
    let mut corr_pred = Vec::new();
    let mut corr_gold = Vec::new();
    let mut lex_scores = Vec::new();
    let mut mean_ratings = Vec::new();
    for (href, rs) in &by_headline {
        let text = &texts[*href];
        let gold: BTreeMap<Question, bool> = Question::ALL
            .iter()
            .map(|&q| (q, 2 * rs.iter().filter(|r| r.answer(q)).count() >= rs.len()))
            .collect();
        for (q, p) in keyword_answers(text, lexicon)? {
            keyword_pred.entry(q).or_default().push(p);
            keyword_gold.entry(q).or_default().push(gold[&q]);
        }
        corr_pred.push(classify_correction(text, lexicon)?);
        corr_gold.push(gold_correction_label(&gold));
        lex_scores.push(lexical_partisanship(text, lexicon)?);
        // Ordinal ratings put left positive; lexical scores put right positive.
        mean_ratings.push(-rs.iter().map(|r| f64::from(r.partisanship.value())).sum::<f64>() / rs.len() as f64);
    }
    let mut keyword_classifier = BTreeMap::new();
    for (q, pred) in &keyword_pred {
        keyword_classifier.insert(q.id().to_string(), evaluate_classifier(pred, &keyword_gold[q], &true)?);
    }
    let mut correction_by_label = BTreeMap::new();
    for l in [
        CorrectionLabel::Explicit,
        CorrectionLabel::Implicit,
        CorrectionLabel::NoCorrection,
        CorrectionLabel::NonEngaging,
    ] {
        correction_by_label.insert(label_id(l), evaluate_classifier(&corr_pred, &corr_gold, &l)?);
    }
    let correct = corr_pred.iter().zip(&corr_gold).filter(|(p, g)| p == g).count();
    Ok(AnnotationEvaluation {
        annotators,
        headlines: by_headline.len(),
        kappa_by_question,
        kappa_pooled,
        partisanship_agreement,
        keyword_classifier,
        correction_accuracy: correct as f64 / corr_gold.len() as f64,
        correction_by_label,
        lexical_partisanship_agreement: spearman_rho(&lex_scores, &mean_ratings).ok(),
    })
}

/// Embeddings of each article body, keyed by article id.
pub fn article_embeddings(embedder: &CachedEmbedder, corpus: &[Article]) -> Result<BTreeMap<String, EmbeddingVector>> {
    corpus
        .iter()
        .map(|a| Ok((a.id.clone(), embedder.embed_text(&a.body)?)))
        .collect()
}
