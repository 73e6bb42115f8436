use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ExtractionError;

pub const DOCUMENT_PLACEHOLDER: &str = "{{document}}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Metadata,
    Subjects,
    Votes,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Metadata, Layer::Subjects, Layer::Votes];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Metadata => "metadata",
            Layer::Subjects => "subjects",
            Layer::Votes => "votes",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = ExtractionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "metadata" => Ok(Layer::Metadata),
            "subjects" => Ok(Layer::Subjects),
            "votes" => Ok(Layer::Votes),
            other => Err(ExtractionError::Config(format!("unknown layer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub layer: Layer,
    pub template_text: String,
    pub response_schema: Value,
}

impl PromptTemplate {
    pub fn new(layer: Layer, template_text: &str, response_schema: Value) -> Result<Self, ExtractionError> {
        let count = template_text.matches(DOCUMENT_PLACEHOLDER).count();
        if count != 1 {
            return Err(ExtractionError::Config(format!(
                "template for layer {layer} must contain {DOCUMENT_PLACEHOLDER} exactly once (found {count})"
            )));
        }
        Ok(PromptTemplate {
            layer,
            template_text: template_text.to_string(),
            response_schema,
        })
    }

    pub fn render(&self, minute_text: &str) -> String {
        let schema = serde_json::to_string_pretty(&self.response_schema).unwrap_or_default();
        let body = self.template_text.replacen(DOCUMENT_PLACEHOLDER, minute_text, 1);
        format!("{body}\n\nAnswer with a single JSON object matching this schema and nothing else:\n{schema}\n")
    }
}

const METADATA_TEMPLATE: &str = "You read official minutes of a municipal council meeting.\n\
Extract the meeting metadata: the meeting date (YYYY-MM-DD), the location, the type of \
meeting (ordinary or extraordinary) and every participant present, with party and role \
when stated.\n\nMinute:\n\"\"\"\n{{document}}\n\"\"\"";

const SUBJECTS_TEMPLATE: &str = "You read official minutes of a municipal council meeting.\n\
List every subject of discussion in the order it appears. For each subject give a short \
title, a summary of what was discussed or decided, and one or more topic labels \
(for example Urbanism, Finance, Health, Education).\n\nMinute:\n\"\"\"\n{{document}}\n\"\"\"";

const VOTES_TEMPLATE: &str = "You read official minutes of a municipal council meeting.\n\
For every subject of discussion that was put to a vote, list how each councillor voted. \
Number subjects from 1 in document order. Use exactly one of the position labels \
favor, against or abstention.\n\nMinute:\n\"\"\"\n{{document}}\n\"\"\"";

fn schema_for(layer: Layer) -> Value {
    match layer {
        Layer::Metadata => json!({
            "type": "object",
            "required": ["meeting_date", "location", "meeting_type", "participants"],
            "properties": {
                "meeting_date": {"type": "string", "format": "YYYY-MM-DD"},
                "location": {"type": "string"},
                "meeting_type": {"type": "string", "enum": ["ordinary", "extraordinary"]},
                "participants": {"type": "array", "items": {
                    "type": "object",
                    "required": ["name"],
                    "properties": {
                        "name": {"type": "string"},
                        "party": {"type": "string"},
                        "role": {"type": "string"}
                    }
                }}
            }
        }),
        Layer::Subjects => json!({
            "type": "object",
            "required": ["subjects"],
            "properties": {
                "subjects": {"type": "array", "items": {
                    "type": "object",
                    "required": ["title", "summary", "topic_labels"],
                    "properties": {
                        "title": {"type": "string"},
                        "summary": {"type": "string"},
                        "topic_labels": {"type": "array", "items": {"type": "string"}}
                    }
                }}
            }
        }),
        Layer::Votes => json!({
            "type": "object",
            "required": ["votes"],
            "properties": {
                "votes": {"type": "array", "items": {
                    "type": "object",
                    "required": ["subject_index", "votes"],
                    "properties": {
                        "subject_index": {"type": "integer", "minimum": 1},
                        "votes": {"type": "array", "items": {
                            "type": "object",
                            "required": ["participant_name", "position"],
                            "properties": {
                                "participant_name": {"type": "string"},
                                "position": {"type": "string", "enum": ["favor", "against", "abstention"]}
                            }
                        }}
                    }
                }}
            }
        }),
    }
}

/// One template per layer.
#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: BTreeMap<Layer, PromptTemplate>,
}

impl PromptSet {
    pub fn from_templates(templates: Vec<PromptTemplate>) -> Result<Self, ExtractionError> {
        let mut map = BTreeMap::new();
        for t in templates {
            PromptTemplate::new(t.layer, &t.template_text, t.response_schema.clone())?;
            if map.insert(t.layer, t).is_some() {
                return Err(ExtractionError::Config("duplicate template for a layer".into()));
            }
        }
        for layer in Layer::ALL {
            if !map.contains_key(&layer) {
                return Err(ExtractionError::Config(format!("no template for layer {layer}")));
            }
        }
        Ok(PromptSet { templates: map })
    }

    pub fn template(&self, layer: Layer) -> &PromptTemplate {
        &self.templates[&layer]
    }

    pub fn build(&self, layer: Layer, minute_text: &str) -> Result<String, ExtractionError> {
        if minute_text.trim().is_empty() {
            return Err(ExtractionError::Config("minute text is empty".into()));
        }
        Ok(self.template(layer).render(minute_text))
    }
}

impl Default for PromptSet {
    fn default() -> Self {
        let t = |layer, text| PromptTemplate::new(layer, text, schema_for(layer)).expect("builtin template");
        PromptSet::from_templates(vec![
            t(Layer::Metadata, METADATA_TEMPLATE),
            t(Layer::Subjects, SUBJECTS_TEMPLATE),
            t(Layer::Votes, VOTES_TEMPLATE),
        ])
        .expect("builtin prompt set")
    }
}

/// Builds the prompt for `layer` from the built-in templates.
pub fn build_prompt(layer: &str, minute_text: &str) -> Result<String, ExtractionError> {
    let layer: Layer = layer.parse()?;
    PromptSet::default().build(layer, minute_text)
}
