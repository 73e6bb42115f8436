//! Three-layer extraction (metadata, subjects, votes) from minute text.
//!
//! Two extractors produce the same [`ExtractionResult`] shape: a remote LLM
//! driven by per-layer prompts, and a deterministic parser for the
//! normalized minute format used by fixtures and offline runs.

mod llm;
mod prompt;
mod render;
mod resolve;
mod rule;

pub use llm::{extract_llm, HttpTransport, LlmClient, LlmClientConfig, LlmRequest, LlmTransport, TransportError};
pub use prompt::{build_prompt, Layer, PromptSet, PromptTemplate, DOCUMENT_PLACEHOLDER};
pub use render::render_normalized;
pub use resolve::{validate_and_resolve, Registries, ResolvedMinute, ValidationIssue};
pub use rule::{extract_rule_based, header_municipality, ParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::votes::Position;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawParticipant {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMetadata {
    pub meeting_date: String,
    pub location: String,
    pub meeting_type: String,
    #[serde(default)]
    pub participants: Vec<RawParticipant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawVote {
    pub participant_name: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSubject {
    pub title: String,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub topic_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<RawVote>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub metadata_raw: RawMetadata,
    #[serde(default)]
    pub subjects_raw: Vec<RawSubject>,
    pub extractor_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

impl ExtractionResult {
    pub fn vote_mentions(&self) -> usize {
        self.subjects_raw
            .iter()
            .map(|s| s.votes.as_ref().map_or(0, Vec::len))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Rule,
    Llm,
}

impl std::str::FromStr for ExtractorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule" => Ok(ExtractorKind::Rule),
            "llm" => Ok(ExtractorKind::Llm),
            other => Err(format!("unknown extractor {other:?} (expected rule or llm)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("prompt configuration: {0}")]
    Config(String),
    #[error("transport failure after {attempts} attempt(s): {source}")]
    Transport {
        attempts: u32,
        #[source]
        source: TransportError,
    },
    #[error("layer {layer} returned an invalid response: {reason}")]
    Invalid {
        layer: Layer,
        reason: String,
        raw_response: String,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Anything that turns minute text into an [`ExtractionResult`].
pub trait Extractor: Send + Sync {
    fn kind(&self) -> ExtractorKind;
    fn extract(&self, minute_text: &str) -> Result<ExtractionResult, ExtractionError>;
}

/// The deterministic normalized-format parser.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleExtractor;

impl Extractor for RuleExtractor {
    fn kind(&self) -> ExtractorKind {
        ExtractorKind::Rule
    }

    fn extract(&self, minute_text: &str) -> Result<ExtractionResult, ExtractionError> {
        Ok(extract_rule_based(minute_text)?)
    }
}

impl Extractor for LlmClient {
    fn kind(&self) -> ExtractorKind {
        ExtractorKind::Llm
    }

    fn extract(&self, minute_text: &str) -> Result<ExtractionResult, ExtractionError> {
        extract_llm(self, minute_text)
    }
}
