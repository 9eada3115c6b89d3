//! Audit-case analysis engine.
//!
//! The crate is organized around the stages of a case run:
//!
//! - [`ingest`] — document classification, text extraction with OCR fallback,
//!   extraction quality and difficulty rubric
//! - [`retrieval`] — BM25 indexes over case documents and external corpora,
//!   with an optional reranking stage
//! - [`gateway`] — the single contract every stage uses to talk to a language
//!   model: templating, token budgeting, completions, agent loops, and a
//!   deterministic scripted backend for tests and replays
//! - [`extraction`] — basic-information form filling and allegation/request
//!   extraction from the main case document
//! - [`admissibility`] — the five-criterion admissibility examination
//! - [`precautionary`] — the hard-coded danger-in-delay rule flow and the
//!   per-allegation legal-grounding agent
//! - [`recommendations`] — section-wise assembly of the instruction draft
//! - [`checkeval`] — checklist-based text evaluation (precision/recall/F1),
//!   aggregation, and rank correlations
//! - [`validation`] — building validation tables from standardized
//!   instruction documents
//! - [`pipeline`] — orchestration, workspace persistence, resumable reruns
//!
//! Every stage is a deterministic function of (bundle, config, transcript)
//! when run against the scripted backend.

pub mod admissibility;
pub mod checkeval;
pub mod clock;
pub mod digest;
pub mod extraction;
pub mod gateway;
pub mod ingest;
pub mod pipeline;
pub mod precautionary;
pub mod recommendations;
pub mod retrieval;
pub mod validation;

pub use clock::Clock;
pub use pipeline::config::PipelineConfig;
