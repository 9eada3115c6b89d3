//! The single contract through which every stage talks to a language model.
//!
//! A [`Gateway`] wraps a backend with budget enforcement, retry on transport
//! errors, rate limiting, and audit logging. Completions are independent
//! per step (agent loops do not share backend conversations), temperature
//! defaults to zero, and with the scripted backend every caller is a
//! deterministic function of its inputs and the transcript.

pub mod audit;
pub mod budget;
pub mod cot;
#[cfg(feature = "http")]
pub mod http;
pub mod react;
pub mod scripted;
pub mod template;

pub use audit::{AuditEvent, AuditLine, AuditLog, AuditRecord};
pub use budget::{truncate_to_budget, ApproxTokenizer, Tokenizer};
pub use cot::{cot_reason, CotAnswer};
pub use react::{react_loop, AgentAction, AgentStep, AgentTrace, SearchTools, TraceStatus};
pub use scripted::{ScriptEntry, ScriptedBackend, ScriptedTranscript};
pub use template::PromptTemplate;

use crate::clock::Clock;
use crate::digest::sha256_hex;
use std::sync::{Arc, Mutex};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    /// Transient transport failure; the retry policy applies.
    #[error("transport: {0}")]
    Transport(String),
    /// The scripted transcript has no entry for this request.
    #[error("no transcript entry matches request: {preview:?}")]
    Unscripted { preview: String },
    /// Non-retryable backend rejection (bad status, malformed payload).
    #[error("backend rejected request: {0}")]
    Rejected(String),
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("missing template variable {0}")]
    MissingVariable(String),
    #[error("token budget must be >= 1")]
    ZeroBudget,
    #[error(
        "request exceeds context budget: {prompt_tokens} prompt + {max_output} output > {budget}"
    )]
    BudgetExceeded {
        prompt_tokens: usize,
        max_output: usize,
        budget: usize,
    },
    #[error("backend failure after {attempts} attempt(s): {source}")]
    Backend {
        attempts: u32,
        #[source]
        source: BackendError,
    },
    #[error("unscripted request: {preview:?}")]
    Unscripted { preview: String },
    #[error("malformed agent action after reprompt: {response:?}")]
    MalformedAction { response: String },
    #[error("unparseable model output: {0}")]
    Parse(String),
    #[error(transparent)]
    Retrieval(#[from] crate::retrieval::RetrievalError),
}

/// Stable key for a request: hash of the rendered prompt.
pub fn request_key(rendered_prompt: &str) -> String {
    sha256_hex(rendered_prompt.as_bytes())
}

#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub rendered_prompt: String,
    pub max_output_tokens: usize,
    pub temperature: f64,
    pub request_key: String,
}

impl ChatRequest {
    /// Construct a request, asserting the context budget up front: prompt
    /// tokens plus the output reservation must fit.
    pub fn within_budget(
        rendered_prompt: String,
        max_output_tokens: usize,
        temperature: f64,
        tokenizer: &dyn Tokenizer,
        context_budget: usize,
    ) -> Result<Self, GatewayError> {
        let prompt_tokens = tokenizer.count(&rendered_prompt);
        if prompt_tokens + max_output_tokens > context_budget {
            return Err(GatewayError::BudgetExceeded {
                prompt_tokens,
                max_output: max_output_tokens,
                budget: context_budget,
            });
        }
        let request_key = request_key(&rendered_prompt);
        Ok(Self {
            rendered_prompt,
            max_output_tokens,
            temperature,
            request_key,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub tokens_in: usize,
    pub tokens_out: usize,
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError>;
    fn name(&self) -> &str;
}

/// Retries apply to transport errors only; completions are idempotent.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay_ms: 250,
        }
    }
}

/// Serializes excess requests beyond the configured requests/minute.
/// Disabled at zero.
struct RateLimiter {
    per_minute: u32,
    recent: Mutex<Vec<std::time::Instant>>,
}

impl RateLimiter {
    fn acquire(&self) {
        if self.per_minute == 0 {
            return;
        }
        let window = Duration::from_secs(60);
        loop {
            let mut recent = self.recent.lock().expect("rate limiter lock");
            let now = std::time::Instant::now();
            recent.retain(|t| now.duration_since(*t) < window);
            if (recent.len() as u32) < self.per_minute {
                recent.push(now);
                return;
            }
            let oldest = recent[0];
            drop(recent);
            std::thread::sleep(window.saturating_sub(now.duration_since(oldest)));
        }
    }
}

struct GatewayInner {
    backend: Box<dyn LlmBackend>,
    tokenizer: Box<dyn Tokenizer>,
    context_budget: usize,
    retry: RetryPolicy,
    rate: Option<RateLimiter>,
    audit: AuditLog,
    clock: Clock,
}

/// Cloneable handle; clones share the backend and audit log but carry their
/// own stage label for audit records.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<GatewayInner>,
    stage: String,
}

impl Gateway {
    pub fn new(backend: Box<dyn LlmBackend>, context_budget: usize) -> Self {
        Self {
            inner: Arc::new(GatewayInner {
                backend,
                tokenizer: Box::new(ApproxTokenizer),
                context_budget,
                retry: RetryPolicy::default(),
                rate: None,
                audit: AuditLog::new(),
                clock: Clock::System,
            }),
            stage: "unstaged".to_string(),
        }
    }

    pub fn builder(backend: Box<dyn LlmBackend>, context_budget: usize) -> GatewayBuilder {
        GatewayBuilder {
            backend,
            context_budget,
            tokenizer: Box::new(ApproxTokenizer),
            retry: RetryPolicy::default(),
            requests_per_minute: 0,
            clock: Clock::System,
        }
    }

    /// A handle whose audit records carry `stage`.
    pub fn for_stage(&self, stage: &str) -> Gateway {
        Gateway {
            inner: Arc::clone(&self.inner),
            stage: stage.to_string(),
        }
    }

    pub fn stage(&self) -> &str {
        &self.stage
    }

    pub fn audit(&self) -> &AuditLog {
        &self.inner.audit
    }

    pub fn tokenizer(&self) -> &dyn Tokenizer {
        self.inner.tokenizer.as_ref()
    }

    pub fn context_budget(&self) -> usize {
        self.inner.context_budget
    }

    pub fn clock(&self) -> Clock {
        self.inner.clock
    }

    pub fn flag(&self, event: impl Into<String>) {
        self.inner.audit.record_event(&self.stage, event);
    }

    /// Complete a prompt at temperature zero, recording the request in the
    /// audit log. Transport errors are retried with exponential backoff;
    /// content errors never are.
    pub fn complete(&self, prompt: &str, max_output_tokens: usize) -> Result<ChatResponse, GatewayError> {
        let request = ChatRequest::within_budget(
            prompt.to_string(),
            max_output_tokens,
            0.0,
            self.inner.tokenizer.as_ref(),
            self.inner.context_budget,
        )?;
        self.dispatch(&request)
    }

    fn dispatch(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let inner = &self.inner;
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            if let Some(rate) = &inner.rate {
                rate.acquire();
            }
            let (outcome, latency_ms) = inner.clock.measure(|| inner.backend.complete(request));
            match outcome {
                Ok(text) => {
                    let tokens_in = inner.tokenizer.count(&request.rendered_prompt);
                    let tokens_out = inner.tokenizer.count(&text);
                    inner.audit.record_request(AuditRecord {
                        stage: self.stage.clone(),
                        request_key: request.request_key.clone(),
                        tokens_in,
                        tokens_out,
                        latency_ms,
                    });
                    return Ok(ChatResponse {
                        text,
                        tokens_in,
                        tokens_out,
                    });
                }
                Err(BackendError::Unscripted { preview }) => {
                    return Err(GatewayError::Unscripted { preview });
                }
                Err(err @ BackendError::Rejected(_)) => {
                    return Err(GatewayError::Backend {
                        attempts: attempt,
                        source: err,
                    });
                }
                Err(err @ BackendError::Transport(_)) => {
                    if attempt >= inner.retry.attempts {
                        return Err(GatewayError::Backend {
                            attempts: attempt,
                            source: err,
                        });
                    }
                    if matches!(inner.clock, Clock::System) {
                        let delay = inner.retry.base_delay_ms << (attempt - 1);
                        std::thread::sleep(Duration::from_millis(delay));
                    }
                }
            }
        }
    }
}

pub struct GatewayBuilder {
    backend: Box<dyn LlmBackend>,
    context_budget: usize,
    tokenizer: Box<dyn Tokenizer>,
    retry: RetryPolicy,
    requests_per_minute: u32,
    clock: Clock,
}

impl GatewayBuilder {
    pub fn tokenizer(mut self, tokenizer: Box<dyn Tokenizer>) -> Self {
        self.tokenizer = tokenizer;
        self
    }

    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn requests_per_minute(mut self, rpm: u32) -> Self {
        self.requests_per_minute = rpm;
        self
    }

    pub fn clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn build(self) -> Gateway {
        let rate = (self.requests_per_minute > 0).then(|| RateLimiter {
            per_minute: self.requests_per_minute,
            recent: Mutex::new(Vec::new()),
        });
        Gateway {
            inner: Arc::new(GatewayInner {
                backend: self.backend,
                tokenizer: self.tokenizer,
                context_budget: self.context_budget,
                retry: self.retry,
                rate,
                audit: AuditLog::new(),
                clock: self.clock,
            }),
            stage: "unstaged".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct FlakyBackend {
        fail_times: u32,
        calls: AtomicU32,
    }

    impl LlmBackend for FlakyBackend {
        fn complete(&self, _request: &ChatRequest) -> Result<String, BackendError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_times {
                Err(BackendError::Transport("connection reset".into()))
            } else {
                Ok("recovered".into())
            }
        }
        fn name(&self) -> &str {
            "flaky"
        }
    }

    fn fast_gateway(backend: Box<dyn LlmBackend>) -> Gateway {
        Gateway::builder(backend, 32000)
            .clock(Clock::Fixed(0))
            .build()
    }

    #[test]
    fn scripted_completion_roundtrip() {
        let backend = ScriptedBackend::from_patterns(vec![(vec!["ping"], "OK")]);
        let gw = fast_gateway(Box::new(backend)).for_stage("test");
        let resp = gw.complete("ping", 8).unwrap();
        assert_eq!(resp.text, "OK");
        let records = gw.audit().requests();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].stage, "test");
        assert_eq!(records[0].latency_ms, 0);
    }

    #[test]
    fn identical_requests_get_identical_responses() {
        let backend = ScriptedBackend::from_patterns(vec![(vec!["ping"], "OK")]);
        let gw = fast_gateway(Box::new(backend));
        let a = gw.complete("ping", 8).unwrap();
        let b = gw.complete("ping", 8).unwrap();
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn unscripted_request_is_not_retried() {
        let backend = ScriptedBackend::from_patterns(vec![]);
        let gw = fast_gateway(Box::new(backend));
        assert!(matches!(
            gw.complete("anything", 8),
            Err(GatewayError::Unscripted { .. })
        ));
        assert!(gw.audit().requests().is_empty());
    }

    #[test]
    fn transport_errors_are_retried_to_success() {
        let backend = FlakyBackend {
            fail_times: 2,
            calls: AtomicU32::new(0),
        };
        let gw = fast_gateway(Box::new(backend));
        let resp = gw.complete("x", 8).unwrap();
        assert_eq!(resp.text, "recovered");
    }

    #[test]
    fn transport_errors_exhaust_attempts() {
        let backend = FlakyBackend {
            fail_times: 10,
            calls: AtomicU32::new(0),
        };
        let gw = fast_gateway(Box::new(backend));
        match gw.complete("x", 8) {
            Err(GatewayError::Backend { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn budget_asserted_at_construction() {
        let backend = ScriptedBackend::from_patterns(vec![(vec!["x"], "OK")]);
        let gw = Gateway::builder(Box::new(backend), 10)
            .clock(Clock::Fixed(0))
            .build();
        // 20 chars = 5 tokens prompt; 5 + 6 > 10.
        let err = gw.complete("xxxxxxxxxxxxxxxxxxxx", 6).unwrap_err();
        assert!(matches!(err, GatewayError::BudgetExceeded { .. }));
        // 5 + 5 <= 10 passes.
        assert!(gw.complete("xxxxxxxxxxxxxxxxxxxx", 5).is_ok());
    }

    #[test]
    fn token_accounting_sums_per_request() {
        let backend =
            ScriptedBackend::from_patterns(vec![(vec!["a"], "eightch!"), (vec!["b"], "four")]);
        let gw = fast_gateway(Box::new(backend)).for_stage("s");
        gw.complete("aaaa", 8).unwrap(); // 1 token in, 2 out
        gw.complete("bbbb", 8).unwrap(); // 1 token in, 1 out
        assert_eq!(gw.audit().total_tokens(Some("s")), (2, 3));
    }
}
