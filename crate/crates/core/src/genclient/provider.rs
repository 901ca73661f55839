use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Configuration for one headline-generating model endpoint.
///
/// An endpoint of the form `stub:` selects the in-tree deterministic
/// [`StubProvider`]; `http://` and `https://` endpoints speak the JSON wire
/// contract implemented by [`HttpProvider`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub model_id: String,
    pub endpoint: String,
    #[serde(default)]
    pub auth_env_var: String,
    #[serde(default = "default_parallel")]
    pub max_parallel: usize,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_samples")]
    pub samples_per_cell: u32,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Vendor parameters forwarded untouched in the request body.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<serde_json::Value>,
}

fn default_parallel() -> usize {
    4
}
fn default_timeout_ms() -> u64 {
    60_000
}
fn default_samples() -> u32 {
    10
}
fn default_max_tokens() -> u32 {
    64
}

impl ProviderDescriptor {
    pub fn stub(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            endpoint: "stub:".into(),
            auth_env_var: String::new(),
            max_parallel: default_parallel(),
            timeout_ms: default_timeout_ms(),
            samples_per_cell: default_samples(),
            max_tokens: default_max_tokens(),
            options: None,
        }
    }

    pub fn is_stub(&self) -> bool {
        self.endpoint.starts_with("stub:")
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        let bad = |m: &str| Err(ProviderError::Config(format!("{}: {m}", self.model_id)));
        if self.model_id.trim().is_empty() {
            return Err(ProviderError::Config("model_id must be non-empty".into()));
        }
        if self.samples_per_cell == 0 {
            return bad("samples_per_cell must be at least 1");
        }
        if self.max_parallel == 0 {
            return bad("max_parallel must be at least 1");
        }
        if !self.is_stub() && !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be stub: or an http(s) URL");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Decode(String),
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    /// Whether a retry could plausibly succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            ProviderError::Transport(_) => true,
            ProviderError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub sample_index: u32,
}

/// A model that turns a prompt into a raw text response.
pub trait HeadlineProvider: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;

    fn model_id(&self) -> &str {
        &self.descriptor().model_id
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError>;
}

/// Instantiate the provider named by a descriptor's endpoint scheme.
pub fn build_provider(desc: &ProviderDescriptor) -> Result<Box<dyn HeadlineProvider>, ProviderError> {
    desc.validate()?;
    if desc.is_stub() {
        Ok(Box::new(StubProvider::new(desc.clone())))
    } else {
        Ok(Box::new(HttpProvider::new(desc.clone())?))
    }
}

/// Deterministic offline generator: hashes the model id, prompt and sample
/// index, then fills a headline template from the digest bytes.
#[derive(Debug, Clone)]
pub struct StubProvider {
    desc: ProviderDescriptor,
}

impl StubProvider {
    pub fn new(desc: ProviderDescriptor) -> Self {
        Self { desc }
    }
}

const SUBJECTS: [&str; 4] = [
    "Trump",
    "Former President Trump",
    "Trump at Debate",
    "Republican Nominee Trump",
];
const FRAMES: [&str; 9] = [
    "Falsely Claims",
    "Spreads False Claim That",
    "Repeats False Rumor That",
    "Repeats Debunked Claim That",
    "Makes Baseless Claim That",
    "Pushes Unsubstantiated Claim That",
    "Claims",
    "Renews Claim That",
    "Says",
];
const GROUPS: [&str; 6] = [
    "Haitian Immigrants",
    "Haitian Migrants",
    "Immigrants",
    "Migrants",
    "Haitians",
    "Newcomers",
];
const PREDICATES: [&str; 4] = [
    "Are Eating Pets",
    "Eat Cats and Dogs",
    "Are Eating Pets in Springfield",
    "Are Eating the Dogs in Ohio",
];
const TAILS: [&str; 5] = [
    "",
    " During Debate With Harris",
    "; Local Officials Push Back",
    " as Moderators Fact-Check Him",
    " in Clash With Harris",
];

impl HeadlineProvider for StubProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.desc
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let mut h = Sha256::new();
        h.update(self.desc.model_id.as_bytes());
        h.update([0]);
        h.update(request.prompt.as_bytes());
        h.update(request.sample_index.to_le_bytes());
        let d = h.finalize();
        let pick = |i: usize, n: usize| d[i] as usize % n;
        let headline = format!(
            "{} {} {} {}{}",
            SUBJECTS[pick(0, SUBJECTS.len())],
            FRAMES[pick(1, FRAMES.len())],
            GROUPS[pick(2, GROUPS.len())],
            PREDICATES[pick(3, PREDICATES.len())],
            TAILS[pick(4, TAILS.len())],
        );
        // Some responses arrive quoted, exercising sanitization.
        Ok(if d[5] % 4 == 0 {
            format!("\"{headline}\"\n")
        } else {
            headline
        })
    }
}

#[derive(Serialize)]
struct CompletionBody<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    options: Option<&'a serde_json::Value>,
}

#[derive(Deserialize)]
struct CompletionReply {
    text: String,
}

/// Provider speaking `POST {model, prompt, max_tokens} -> {text}` with a
/// bearer token read from `auth_env_var`.
pub struct HttpProvider {
    desc: ProviderDescriptor,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(desc: ProviderDescriptor) -> Result<Self, ProviderError> {
        let token = if desc.auth_env_var.is_empty() {
            None
        } else {
            Some(
                std::env::var(&desc.auth_env_var)
                    .map_err(|_| ProviderError::MissingCredential(desc.auth_env_var.clone()))?,
            )
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(desc.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { desc, token, agent })
    }
}

impl HeadlineProvider for HttpProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.desc
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let body = CompletionBody {
            model: &self.desc.model_id,
            prompt: request.prompt,
            max_tokens: self.desc.max_tokens,
            options: self.desc.options.as_ref(),
        };
        let mut req = self.agent.post(&self.desc.endpoint);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(ProviderError::Status { status, body });
        }
        let reply: CompletionReply = resp
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Decode(e.to_string()))?;
        Ok(reply.text)
    }
}
