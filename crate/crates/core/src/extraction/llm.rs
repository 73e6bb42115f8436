use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::{Layer, PromptSet};
use super::{ExtractionError, ExtractionResult, RawMetadata, RawSubject, RawVote};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmClientConfig {
    pub endpoint_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env_var_name: String,
    pub model_id: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl LlmClientConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.timeout_secs == 0 {
            return Err("timeout must be positive".into());
        }
        if self.endpoint_url.is_empty() {
            return Err("endpoint_url is empty".into());
        }
        Ok(())
    }
}

/// Wire body sent to the completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlmRequest {
    pub model: String,
    pub prompt: String,
    pub response_format: &'static str,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("http: {0}")]
    Http(String),
    #[error("endpoint answered with status {0}")]
    Status(u16),
    #[error("api key variable {0} is not set")]
    MissingKey(String),
}

pub trait LlmTransport: Send + Sync {
    /// Returns the model's text for one request.
    fn complete(&self, request: &LlmRequest) -> Result<String, TransportError>;
}

/// JSON over HTTP POST; the response body is `{"text": "..."}`.
pub struct HttpTransport {
    endpoint_url: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    /// Reads the API key from the environment variable named in the config.
    pub fn from_config(config: &LlmClientConfig) -> Result<Self, TransportError> {
        let api_key = std::env::var(&config.api_key_env_var_name)
            .map_err(|_| TransportError::MissingKey(config.api_key_env_var_name.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| TransportError::Http(e.to_string()))?;
        Ok(HttpTransport {
            endpoint_url: config.endpoint_url.clone(),
            api_key,
            client,
        })
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    text: String,
}

impl LlmTransport for HttpTransport {
    fn complete(&self, request: &LlmRequest) -> Result<String, TransportError> {
        let resp = self
            .client
            .post(&self.endpoint_url)
            .bearer_auth(&self.api_key)
            .json(request)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    TransportError::Timeout
                } else {
                    TransportError::Http(e.to_string())
                }
            })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(TransportError::Status(status.as_u16()));
        }
        let body: CompletionBody = resp.json().map_err(|e| TransportError::Http(e.to_string()))?;
        Ok(body.text)
    }
}

pub struct LlmClient {
    pub config: LlmClientConfig,
    pub prompts: PromptSet,
    transport: Box<dyn LlmTransport>,
}

impl LlmClient {
    pub fn new(config: LlmClientConfig, transport: Box<dyn LlmTransport>) -> Self {
        LlmClient {
            config,
            prompts: PromptSet::default(),
            transport,
        }
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    fn send(&self, prompt: String) -> Result<String, ExtractionError> {
        let request = LlmRequest {
            model: self.config.model_id.clone(),
            prompt,
            response_format: "json",
        };
        let attempts = self.config.max_retries + 1;
        let mut last = None;
        for attempt in 1..=attempts {
            match self.transport.complete(&request) {
                Ok(text) => return Ok(text),
                Err(TransportError::MissingKey(k)) => {
                    return Err(ExtractionError::Transport {
                        attempts: attempt,
                        source: TransportError::MissingKey(k),
                    })
                }
                Err(e) => {
                    warn!("llm attempt {attempt}/{attempts} failed: {e}");
                    last = Some(e);
                }
            }
        }
        Err(ExtractionError::Transport {
            attempts,
            source: last.expect("at least one attempt"),
        })
    }

    /// Sends the layer prompt; a schema-invalid answer gets exactly one
    /// corrective retry.
    fn run_layer<T>(
        &self,
        layer: Layer,
        minute_text: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ExtractionError> {
        let prompt = self.prompts.build(layer, minute_text)?;
        let first = self.send(prompt.clone())?;
        let reason = match parse(&first) {
            Ok(v) => return Ok(v),
            Err(reason) => reason,
        };
        debug!("layer {layer} invalid ({reason}); retrying with correction");
        let corrective = format!(
            "{prompt}\nYour previous answer could not be used: {reason}. \
             Reply again with only a JSON object that matches the schema exactly."
        );
        let second = self.send(corrective)?;
        parse(&second).map_err(|reason| ExtractionError::Invalid {
            layer,
            reason,
            raw_response: second,
        })
    }
}

/// Drops a surrounding markdown code fence, which models often add.
fn strip_fence(text: &str) -> &str {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("```") {
        let rest = rest.strip_prefix("json").unwrap_or(rest);
        if let Some(inner) = rest.trim_end().strip_suffix("```") {
            return inner.trim();
        }
    }
    t
}

fn parse_metadata(text: &str) -> Result<RawMetadata, String> {
    let meta: RawMetadata = serde_json::from_str(strip_fence(text)).map_err(|e| e.to_string())?;
    if meta.participants.iter().any(|p| p.name.trim().is_empty()) {
        return Err("participant with empty name".into());
    }
    Ok(meta)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubjectsBody {
    subjects: Vec<SubjectItem>,
}

#[derive(Deserialize)]
struct SubjectItem {
    title: String,
    #[serde(default)]
    summary: String,
    #[serde(default)]
    topic_labels: Vec<String>,
}

fn parse_subjects(text: &str) -> Result<Vec<RawSubject>, String> {
    let body: SubjectsBody = serde_json::from_str(strip_fence(text)).map_err(|e| e.to_string())?;
    body.subjects
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.title.trim().is_empty() {
                return Err(format!("subject {} has an empty title", i + 1));
            }
            Ok(RawSubject {
                title: s.title,
                summary: s.summary,
                topic_labels: s.topic_labels,
                votes: None,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct VotesBody {
    votes: Vec<SubjectVotes>,
}

#[derive(Deserialize)]
struct SubjectVotes {
    subject_index: usize,
    votes: Vec<RawVote>,
}

fn parse_votes(text: &str, subject_count: usize) -> Result<Vec<Option<Vec<RawVote>>>, String> {
    let body: VotesBody = serde_json::from_str(strip_fence(text)).map_err(|e| e.to_string())?;
    let mut out = vec![None; subject_count];
    for entry in body.votes {
        if entry.subject_index == 0 || entry.subject_index > subject_count {
            return Err(format!(
                "subject_index {} outside 1..={subject_count}",
                entry.subject_index
            ));
        }
        let slot = &mut out[entry.subject_index - 1];
        if slot.is_some() {
            return Err(format!("subject_index {} listed twice", entry.subject_index));
        }
        *slot = Some(entry.votes);
    }
    Ok(out)
}

/// One request per layer, merged into a single result.
pub fn extract_llm(client: &LlmClient, minute_text: &str) -> Result<ExtractionResult, ExtractionError> {
    let metadata_raw = client.run_layer(Layer::Metadata, minute_text, parse_metadata)?;
    let mut subjects_raw = client.run_layer(Layer::Subjects, minute_text, parse_subjects)?;
    let n = subjects_raw.len();
    let votes = client.run_layer(Layer::Votes, minute_text, |t| parse_votes(t, n))?;
    for (subject, votes) in subjects_raw.iter_mut().zip(votes) {
        subject.votes = votes;
    }
    Ok(ExtractionResult {
        metadata_raw,
        subjects_raw,
        extractor_id: "llm".into(),
        model_id: Some(client.config.model_id.clone()),
    })
}
