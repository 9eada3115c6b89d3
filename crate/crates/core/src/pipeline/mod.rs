//! Case-run orchestration with resumable, digest-checked stages.
//!
//! `run_case` walks the stage graph in topological order. Each stage's
//! inputs digest covers its upstream payload digests plus the config slice
//! it reads (plus the bundle content, for ingest); a stage whose persisted
//! envelope already carries the recomputed digest is skipped as fresh, so
//! rerunning a completed case touches nothing and a run killed between
//! stages resumes where it stopped. Stage outputs are persisted atomically
//! before the next stage starts, and the run halts at the first failing
//! stage with prior outputs retained.

pub mod config;
pub mod report;
pub mod stages;
pub mod workspace;

pub use config::{BackendConfig, ConfigError, PipelineConfig};
pub use report::{RunReport, StageReport, StageStatus};
pub use stages::StageId;
pub use workspace::{CaseMeta, CaseWorkspace, LockGuard, WorkspaceError};

use crate::admissibility::{examine_all, AdmissibilityError, AdmissibilityReport};
use crate::clock::Clock;
use crate::digest::{combine, digest_json, sha256_hex};
use crate::extraction::{
    extract_allegations_requests, extract_basic_info, first_two_pages, AllegationList,
    ExtractionError, FilledForm, FormSchema, SchemaError,
};
use crate::gateway::{Gateway, GatewayError, LlmBackend, ScriptedBackend};
use crate::ingest::{
    classify_difficulty, extract_text_with_veto, extraction_quality, CaseBundle, DifficultyClass,
    DocKind, ExtractedDocument, ExtractorUsed, IngestError, OcrStub, PlainTextExtractor,
};
use crate::precautionary::{
    detect_active_contract, detect_delay_events, draft_periculum_text, flag_draft_contract_docs,
    fumus_report, FumusReport, PericulumFinding, PericulumOutput, PrecautionaryError,
    PresenceFinding,
};
use crate::recommendations::{
    assemble_instruction, generate_section, render_markdown, InstructionDraft,
    RecommendationError, SectionId, StageProducts,
};
use crate::retrieval::{
    load_corpus_jsonl, window_passages, CorpusId, CorpusStore, IdentityReranker, Index,
    IndexedPassage, RetrievalError,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
    #[error(transparent)]
    Precautionary(#[from] PrecautionaryError),
    #[error(transparent)]
    Recommendation(#[from] RecommendationError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("stage {stage} failed: {source}")]
    StageFailed {
        stage: &'static str,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("stale upstream stages {stages:?}; rerun them (or run the full case) first")]
    StaleUpstream { stages: Vec<String> },
    #[error("unknown stage name {0:?}")]
    UnknownStage(String),
    #[error("{0}")]
    Invalid(String),
}

/// Per-document ingest metadata persisted in the stage envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestDocMeta {
    pub doc_id: String,
    pub declared_kind: DocKind,
    pub page_count: usize,
    pub invalid_char_count: usize,
    pub total_char_count: usize,
    pub extractor_used: ExtractorUsed,
    pub difficulty: DifficultyClass,
    /// Invalid-character ratio in [0, 1].
    pub quality: f64,
    pub text_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub case_id: String,
    pub main_doc_id: String,
    pub docs: Vec<IngestDocMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexesSummary {
    /// Corpus slug -> digest of the serialized index file.
    pub corpora: BTreeMap<String, String>,
}

struct RunContext<'a> {
    config: &'a PipelineConfig,
    bundle: CaseBundle,
    workspace: CaseWorkspace,
    gateway: Gateway,
    clock: Clock,
    extracted: Vec<ExtractedDocument>,
    store: Option<CorpusStore>,
    products: StageProducts,
    payload_digests: BTreeMap<StageId, String>,
    bundle_digest: String,
}

fn build_backend(config: &PipelineConfig) -> Result<Box<dyn LlmBackend>, PipelineError> {
    match &config.backend {
        BackendConfig::Scripted { transcript } => Ok(Box::new(
            ScriptedBackend::from_file(transcript)
                .map_err(|e| PipelineError::Invalid(e.to_string()))?,
        )),
        #[cfg(feature = "http")]
        BackendConfig::Http {
            endpoint,
            model,
            api_key_env,
        } => Ok(Box::new(
            crate::gateway::http::HttpBackend::new(endpoint, model, api_key_env.as_deref())
                .map_err(|e| PipelineError::Invalid(e.to_string()))?,
        )),
        #[cfg(not(feature = "http"))]
        BackendConfig::Http { .. } => Err(PipelineError::Invalid(
            "this build lacks the `http` feature; only the scripted backend is available".into(),
        )),
    }
}

fn bundle_digest(bundle: &CaseBundle) -> Result<String, PipelineError> {
    let manifest_path = bundle.root.join("manifest.json");
    let manifest = fs::read(&manifest_path).map_err(|e| {
        PipelineError::Invalid(format!("read {}: {e}", manifest_path.display()))
    })?;
    let mut parts: Vec<(String, String)> = vec![("manifest".into(), sha256_hex(&manifest))];
    let mut docs = bundle.docs.clone();
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for doc in docs {
        let path = bundle.root.join(&doc.source_path);
        let bytes = fs::read(&path).unwrap_or_default();
        parts.push((format!("doc:{}", doc.doc_id), sha256_hex(&bytes)));
    }
    let refs: Vec<(&str, &str)> = parts
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    Ok(combine(&refs))
}

fn config_slice_digest(stage: StageId, config: &PipelineConfig) -> Result<String, PipelineError> {
    let value = match stage {
        StageId::Ingest => json!({
            "quality_veto_threshold": config.quality_veto_threshold,
            "ocr_stub_texts": config.ocr_stub_texts,
        }),
        StageId::Indexes => {
            let mut corpus_digests = BTreeMap::new();
            for (slug, path) in &config.corpora {
                let bytes = fs::read(path).map_err(|e| {
                    PipelineError::Invalid(format!("read corpus {}: {e}", path.display()))
                })?;
                corpus_digests.insert(slug.clone(), sha256_hex(&bytes));
            }
            json!({ "corpora": corpus_digests, "reranker": config.reranker })
        }
        StageId::BasicInfo => {
            let schema_digest = match &config.form_schema {
                Some(path) => {
                    let bytes = fs::read(path).map_err(|e| {
                        PipelineError::Invalid(format!("read schema {}: {e}", path.display()))
                    })?;
                    sha256_hex(&bytes)
                }
                None => "default".to_string(),
            };
            json!({ "schema": schema_digest, "crafted_queries": config.crafted_queries })
        }
        StageId::Allegations => json!({ "example": config.allegations_example }),
        StageId::Admissibility => json!({
            "step_budget": config.agent.step_budget,
            "fan_out": config.agent.fan_out,
        }),
        StageId::Periculum => json!({
            "keywords": config.active_contract_keywords,
            "delay_doc_budget": config.agent.delay_doc_budget,
            "fan_out": config.agent.fan_out,
        }),
        StageId::Fumus => json!({
            "step_budget": config.agent.step_budget,
            "fan_out": config.agent.fan_out,
        }),
        StageId::Recommendations => json!({ "exemplars": config.exemplars }),
    };
    Ok(digest_json(&value))
}

fn inputs_digest(stage: StageId, ctx: &RunContext) -> Result<String, PipelineError> {
    let mut parts: Vec<(String, String)> = Vec::new();
    for dep in stage.deps() {
        let digest = ctx
            .payload_digests
            .get(dep)
            .ok_or_else(|| PipelineError::Invalid(format!(
                "internal: digest for upstream stage {} not computed",
                dep.name()
            )))?;
        parts.push((format!("stage:{}", dep.name()), digest.clone()));
    }
    parts.push(("config".into(), config_slice_digest(stage, ctx.config)?));
    if stage == StageId::Ingest {
        parts.push(("bundle".into(), ctx.bundle_digest.clone()));
    }
    let refs: Vec<(&str, &str)> = parts
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    Ok(combine(&refs))
}

/// Run every stage of a case (digest-checked, so completed stages are
/// skipped).
pub fn run_case(
    bundle_dir: &Path,
    workspace_dir: &Path,
    config: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    run_case_until(bundle_dir, workspace_dir, config, None)
}

/// Run stages up to and including `until` (the full pipeline when `None`).
/// Useful for operating on partial pipelines and for exercising
/// crash-between-stages recovery.
pub fn run_case_until(
    bundle_dir: &Path,
    workspace_dir: &Path,
    config: &PipelineConfig,
    until: Option<StageId>,
) -> Result<RunReport, PipelineError> {
    execute(bundle_dir, workspace_dir, config, until, None)
}

/// Re-execute `stage` and whatever its rerun invalidates downstream.
/// Upstream stages must be fresh.
pub fn resume_stage(
    workspace_dir: &Path,
    stage: StageId,
    config: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    let workspace = CaseWorkspace::open(workspace_dir)?;
    let meta = workspace.read_case_meta()?;
    execute(&meta.bundle_dir.clone(), workspace_dir, config, None, Some(stage))
}

fn execute(
    bundle_dir: &Path,
    workspace_dir: &Path,
    config: &PipelineConfig,
    until: Option<StageId>,
    force: Option<StageId>,
) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let workspace = CaseWorkspace::open(workspace_dir)?;
    let bundle = CaseBundle::load(bundle_dir)?;
    let _lock = LockGuard::acquire(&workspace)?;

    workspace.write_case_meta(&CaseMeta {
        case_id: bundle.case_id.clone(),
        bundle_dir: bundle_dir.to_path_buf(),
        schema_version: workspace::STAGE_SCHEMA_VERSION,
    })?;

    let clock = config
        .fixed_timestamp
        .map(Clock::Fixed)
        .unwrap_or(Clock::System);
    let gateway = Gateway::builder(build_backend(config)?, config.context_budget_tokens)
        .clock(clock)
        .requests_per_minute(config.rate_limit_rpm)
        .build();
    workspace::touch(&workspace.audit_log_path())?;
    gateway
        .audit()
        .attach_file(&workspace.audit_log_path())
        .map_err(|e| PipelineError::Invalid(format!("audit log: {e}")))?;

    let bundle_digest = bundle_digest(&bundle)?;
    let mut ctx = RunContext {
        config,
        bundle,
        workspace,
        gateway,
        clock,
        extracted: Vec::new(),
        store: None,
        products: StageProducts::default(),
        payload_digests: BTreeMap::new(),
        bundle_digest,
    };

    // A resume requires fresh upstreams for the forced stage.
    if let Some(forced) = force {
        let mut stale = Vec::new();
        for upstream in forced.upstream() {
            let digest = inputs_digest(upstream, &ctx)?;
            match ctx.workspace.read_stage(upstream)? {
                Some(envelope) if envelope.inputs_digest == digest => {
                    ctx.payload_digests
                        .insert(upstream, envelope.payload_digest.clone());
                }
                _ => {
                    stale.push(upstream.name().to_string());
                    // Record a placeholder so later digest computations can
                    // proceed while we finish collecting the stale list.
                    ctx.payload_digests.insert(upstream, "stale".into());
                }
            }
        }
        if !stale.is_empty() {
            return Err(PipelineError::StaleUpstream { stages: stale });
        }
        ctx.payload_digests.clear();
    }

    let case_id = ctx.bundle.case_id.clone();
    let mut stage_reports = Vec::new();
    for stage in StageId::ALL {
        let digest = inputs_digest(stage, &ctx)?;
        let forced = force == Some(stage);
        let fresh = match ctx.workspace.read_stage(stage)? {
            Some(envelope) if envelope.inputs_digest == digest && !forced => {
                ctx.payload_digests
                    .insert(stage, envelope.payload_digest.clone());
                true
            }
            _ => false,
        };

        if fresh {
            load_stage(stage, &mut ctx)?;
            stage_reports.push(StageReport {
                stage: stage.name().to_string(),
                status: StageStatus::SkippedFresh,
                duration_ms: 0,
                tokens_in: 0,
                tokens_out: 0,
                estimated_cost: 0.0,
            });
        } else {
            let staged_gateway = ctx.gateway.for_stage(stage.name());
            let before = staged_gateway.audit().total_tokens(Some(stage.name()));
            let (outcome, duration_ms) = {
                let clock = ctx.clock;
                let mut run = || run_stage(stage, &mut ctx, &staged_gateway, &digest);
                clock.measure(&mut run)
            };
            outcome.map_err(|e| PipelineError::StageFailed {
                stage: stage.name(),
                source: Box::new(e),
            })?;
            let after = staged_gateway.audit().total_tokens(Some(stage.name()));
            let tokens_in = after.0 - before.0;
            let tokens_out = after.1 - before.1;
            let estimated_cost = tokens_in as f64 / 1000.0 * config.cost.input_per_1k
                + tokens_out as f64 / 1000.0 * config.cost.output_per_1k;
            stage_reports.push(StageReport {
                stage: stage.name().to_string(),
                status: StageStatus::Ran,
                duration_ms,
                tokens_in,
                tokens_out,
                estimated_cost,
            });
        }

        if until == Some(stage) {
            break;
        }
    }

    Ok(RunReport::new(&case_id, stage_reports))
}

fn run_stage(
    stage: StageId,
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    match stage {
        StageId::Ingest => exec_ingest(ctx, digest),
        StageId::Indexes => exec_indexes(ctx, digest),
        StageId::BasicInfo => exec_basic_info(ctx, gateway, digest),
        StageId::Allegations => exec_allegations(ctx, gateway, digest),
        StageId::Admissibility => exec_admissibility(ctx, gateway, digest),
        StageId::Periculum => exec_periculum(ctx, gateway, digest),
        StageId::Fumus => exec_fumus(ctx, gateway, digest),
        StageId::Recommendations => exec_recommendations(ctx, gateway, digest),
    }
}

fn main_text(ctx: &RunContext) -> Result<(String, String), PipelineError> {
    let main_id = ctx.bundle.main_doc().doc_id.clone();
    let doc = ctx
        .extracted
        .iter()
        .find(|d| d.doc_id == main_id)
        .ok_or_else(|| PipelineError::Invalid("main document not extracted".into()))?;
    Ok((main_id, doc.text.clone()))
}

fn store_ref<'a>(ctx: &'a RunContext) -> Result<&'a CorpusStore, PipelineError> {
    ctx.store
        .as_ref()
        .ok_or_else(|| PipelineError::Invalid("indexes not loaded".into()))
}

fn exec_ingest(ctx: &mut RunContext, digest: &str) -> Result<(), PipelineError> {
    let primary = PlainTextExtractor::new(ctx.bundle.root.clone());
    let mut ocr = OcrStub::new();
    for (doc_id, text) in &ctx.config.ocr_stub_texts {
        ocr = ocr.with_text(doc_id, text);
    }

    let mut extracted = Vec::new();
    let mut metas = Vec::new();
    for doc in &ctx.bundle.docs {
        let out = extract_text_with_veto(doc, &primary, &ocr, ctx.config.quality_veto_threshold)?;
        let difficulty = classify_difficulty(
            out.page_count,
            doc.has_structured_data,
            doc.has_images_or_handwriting,
        );
        let quality = extraction_quality(&out)?;
        ctx.workspace
            .write_json_atomic(&ctx.workspace.extracted_path(&doc.doc_id), &out)?;
        metas.push(IngestDocMeta {
            doc_id: doc.doc_id.clone(),
            declared_kind: doc.declared_kind,
            page_count: out.page_count,
            invalid_char_count: out.invalid_char_count,
            total_char_count: out.total_char_count,
            extractor_used: out.extractor_used,
            difficulty,
            quality,
            text_digest: sha256_hex(out.text.as_bytes()),
        });
        extracted.push(out);
    }

    let summary = IngestSummary {
        case_id: ctx.bundle.case_id.clone(),
        main_doc_id: ctx.bundle.main_doc().doc_id.clone(),
        docs: metas,
    };
    let envelope = ctx.workspace.write_stage(StageId::Ingest, digest, &summary)?;
    ctx.payload_digests
        .insert(StageId::Ingest, envelope.payload_digest);
    ctx.extracted = extracted;
    Ok(())
}

fn exec_indexes(ctx: &mut RunContext, digest: &str) -> Result<(), PipelineError> {
    let mut passages: BTreeMap<CorpusId, Vec<IndexedPassage>> = BTreeMap::new();
    for path in ctx.config.corpora.values() {
        for (corpus, mut rows) in load_corpus_jsonl(path)? {
            passages.entry(corpus).or_default().append(&mut rows);
        }
    }
    let case_passages: Vec<IndexedPassage> = ctx
        .extracted
        .iter()
        .flat_map(|doc| window_passages(CorpusId::CaseDocuments, &doc.doc_id, &doc.text))
        .collect();
    passages.insert(CorpusId::CaseDocuments, case_passages);

    let mut store = CorpusStore::new();
    if ctx.config.reranker.as_deref() != Some("none") {
        store = store.with_reranker(Box::new(IdentityReranker));
    }
    let mut summary = IndexesSummary {
        corpora: BTreeMap::new(),
    };
    for (corpus, rows) in passages {
        let index = Index::build(corpus, rows)?;
        let body = serde_json::to_string_pretty(&index)
            .map_err(|e| PipelineError::Invalid(format!("serialize index: {e}")))?;
        let path = ctx.workspace.index_path(corpus.slug());
        ctx.workspace.write_bytes_atomic(&path, body.as_bytes())?;
        summary
            .corpora
            .insert(corpus.slug().to_string(), sha256_hex(body.as_bytes()));
        store.register(index);
    }

    let envelope = ctx
        .workspace
        .write_stage(StageId::Indexes, digest, &summary)?;
    ctx.payload_digests
        .insert(StageId::Indexes, envelope.payload_digest);
    ctx.store = Some(store);
    Ok(())
}

fn exec_basic_info(
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    let schema = match &ctx.config.form_schema {
        Some(path) => FormSchema::load(path)?,
        None => FormSchema::default(),
    };
    let (_, text) = main_text(ctx)?;
    let form = extract_basic_info(
        &ctx.bundle.case_id,
        &text,
        &schema,
        store_ref(ctx)?,
        &ctx.config.crafted_queries,
        gateway,
    )?;
    let envelope = ctx
        .workspace
        .write_stage(StageId::BasicInfo, digest, &form)?;
    ctx.payload_digests
        .insert(StageId::BasicInfo, envelope.payload_digest);
    ctx.products.basic_info = Some(form);
    Ok(())
}

fn exec_allegations(
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    let (_, text) = main_text(ctx)?;
    let list =
        extract_allegations_requests(&text, ctx.config.allegations_example.as_deref(), gateway)?;
    let envelope = ctx
        .workspace
        .write_stage(StageId::Allegations, digest, &list)?;
    ctx.payload_digests
        .insert(StageId::Allegations, envelope.payload_digest);
    ctx.products.allegations = Some(list);
    Ok(())
}

fn exec_admissibility(
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    let (_, text) = main_text(ctx)?;
    let case_context = format!(
        "case: {}\nmain document (first two pages):\n{}",
        ctx.bundle.case_id,
        first_two_pages(&text)
    );
    let report: AdmissibilityReport = examine_all(
        &case_context,
        store_ref(ctx)?,
        gateway,
        ctx.config.agent.step_budget,
        ctx.config.agent.fan_out,
    )?;
    let envelope = ctx
        .workspace
        .write_stage(StageId::Admissibility, digest, &report)?;
    ctx.payload_digests
        .insert(StageId::Admissibility, envelope.payload_digest);
    ctx.products.admissibility = Some(report);
    Ok(())
}

fn exec_periculum(
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    let flags = flag_draft_contract_docs(&ctx.extracted);
    let considered: Vec<&ExtractedDocument> = ctx
        .extracted
        .iter()
        .filter(|d| flags.considered.contains(&d.doc_id))
        .collect();

    let (active, delay) = if considered.is_empty() {
        gateway.flag("all documents flagged as draft-contract; detections skipped");
        (PresenceFinding::absent(), PresenceFinding::absent())
    } else {
        let active = detect_active_contract(
            &considered,
            store_ref(ctx)?,
            &ctx.config.active_contract_keywords,
            gateway,
            ctx.config.agent.fan_out,
        )?;
        let delay =
            detect_delay_events(&considered, gateway, ctx.config.agent.delay_doc_budget)?;
        (active, delay)
    };

    let finding = PericulumFinding::new(flags.flagged, active, delay);
    let paragraph = draft_periculum_text(&finding, gateway)?;
    let output = PericulumOutput { finding, paragraph };
    let envelope = ctx
        .workspace
        .write_stage(StageId::Periculum, digest, &output)?;
    ctx.payload_digests
        .insert(StageId::Periculum, envelope.payload_digest);
    ctx.products.periculum = Some(output);
    Ok(())
}

fn exec_fumus(ctx: &mut RunContext, gateway: &Gateway, digest: &str) -> Result<(), PipelineError> {
    let allegations = ctx
        .products
        .allegations
        .as_ref()
        .ok_or_else(|| PipelineError::Invalid("allegations output not loaded".into()))?
        .allegations
        .clone();
    let report: FumusReport = fumus_report(
        &allegations,
        store_ref(ctx)?,
        gateway,
        ctx.config.agent.step_budget,
        ctx.config.agent.fan_out,
    )?;
    let envelope = ctx.workspace.write_stage(StageId::Fumus, digest, &report)?;
    ctx.payload_digests
        .insert(StageId::Fumus, envelope.payload_digest);
    ctx.products.fumus = Some(report);
    Ok(())
}

fn exec_recommendations(
    ctx: &mut RunContext,
    gateway: &Gateway,
    digest: &str,
) -> Result<(), PipelineError> {
    let mut sections = Vec::with_capacity(SectionId::ALL.len());
    for id in SectionId::ALL {
        sections.push(generate_section(
            id,
            &ctx.products,
            &ctx.config.exemplars,
            gateway,
        )?);
    }
    let draft = assemble_instruction(&ctx.bundle.case_id, sections, ctx.clock.now_unix())?;
    write_instruction_files(&ctx.workspace, &draft)?;
    let envelope = ctx
        .workspace
        .write_stage(StageId::Recommendations, digest, &draft)?;
    ctx.payload_digests
        .insert(StageId::Recommendations, envelope.payload_digest);
    Ok(())
}

fn write_instruction_files(
    workspace: &CaseWorkspace,
    draft: &InstructionDraft,
) -> Result<(), PipelineError> {
    workspace.write_json_atomic(&workspace.instruction_json_path(), draft)?;
    workspace.write_bytes_atomic(
        &workspace.instruction_md_path(),
        render_markdown(draft).as_bytes(),
    )?;
    Ok(())
}

/// Load a fresh stage's payload into the run context.
fn load_stage(stage: StageId, ctx: &mut RunContext) -> Result<(), PipelineError> {
    match stage {
        StageId::Ingest => {
            let summary: IngestSummary = ctx
                .workspace
                .read_stage_payload(stage)?
                .ok_or_else(|| PipelineError::Invalid("ingest envelope vanished".into()))?;
            let mut extracted = Vec::with_capacity(summary.docs.len());
            for meta in &summary.docs {
                let doc: ExtractedDocument = ctx
                    .workspace
                    .read_json(&ctx.workspace.extracted_path(&meta.doc_id))?;
                extracted.push(doc);
            }
            ctx.extracted = extracted;
        }
        StageId::Indexes => {
            let summary: IndexesSummary = ctx
                .workspace
                .read_stage_payload(stage)?
                .ok_or_else(|| PipelineError::Invalid("indexes envelope vanished".into()))?;
            let mut store = CorpusStore::new();
            if ctx.config.reranker.as_deref() != Some("none") {
                store = store.with_reranker(Box::new(IdentityReranker));
            }
            for slug in summary.corpora.keys() {
                let index: Index = ctx.workspace.read_json(&ctx.workspace.index_path(slug))?;
                store.register(index);
            }
            ctx.store = Some(store);
        }
        StageId::BasicInfo => {
            ctx.products.basic_info = ctx.workspace.read_stage_payload::<FilledForm>(stage)?;
        }
        StageId::Allegations => {
            ctx.products.allegations = ctx.workspace.read_stage_payload::<AllegationList>(stage)?;
        }
        StageId::Admissibility => {
            ctx.products.admissibility = ctx
                .workspace
                .read_stage_payload::<AdmissibilityReport>(stage)?;
        }
        StageId::Periculum => {
            ctx.products.periculum = ctx.workspace.read_stage_payload::<PericulumOutput>(stage)?;
        }
        StageId::Fumus => {
            ctx.products.fumus = ctx.workspace.read_stage_payload::<FumusReport>(stage)?;
        }
        StageId::Recommendations => {}
    }
    Ok(())
}

/// Regenerate one instruction section in place: stage outputs and the other
/// sections' bytes stay untouched.
pub fn regenerate_instruction_section(
    workspace_dir: &Path,
    section_id: SectionId,
    config: &PipelineConfig,
) -> Result<InstructionDraft, PipelineError> {
    let workspace = CaseWorkspace::open(workspace_dir)?;
    let _lock = LockGuard::acquire(&workspace)?;
    let draft: InstructionDraft = workspace
        .read_stage_payload(StageId::Recommendations)?
        .ok_or_else(|| {
            PipelineError::Invalid("no instruction draft in workspace; run the case first".into())
        })?;
    let products = StageProducts {
        basic_info: workspace.read_stage_payload(StageId::BasicInfo)?,
        allegations: workspace.read_stage_payload(StageId::Allegations)?,
        admissibility: workspace.read_stage_payload(StageId::Admissibility)?,
        periculum: workspace.read_stage_payload(StageId::Periculum)?,
        fumus: workspace.read_stage_payload(StageId::Fumus)?,
    };

    let clock = config
        .fixed_timestamp
        .map(Clock::Fixed)
        .unwrap_or(Clock::System);
    let gateway = Gateway::builder(build_backend(config)?, config.context_budget_tokens)
        .clock(clock)
        .build();
    workspace::touch(&workspace.audit_log_path())?;
    gateway
        .audit()
        .attach_file(&workspace.audit_log_path())
        .map_err(|e| PipelineError::Invalid(format!("audit log: {e}")))?;
    let staged = gateway.for_stage(StageId::Recommendations.name());

    let updated = crate::recommendations::regenerate_section(
        &draft,
        section_id,
        &products,
        &config.exemplars,
        &staged,
        clock.now_unix(),
    )?;

    // Keep the envelope's inputs digest; regeneration does not change the
    // stage's inputs, only the drafted text.
    let envelope = workspace
        .read_stage(StageId::Recommendations)?
        .ok_or_else(|| PipelineError::Invalid("recommendations envelope vanished".into()))?;
    workspace.write_stage(StageId::Recommendations, &envelope.inputs_digest, &updated)?;
    write_instruction_files(&workspace, &updated)?;
    Ok(updated)
}
