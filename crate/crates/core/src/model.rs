//! Domain records shared by the pipeline, the store, the index and the API.
//!
//! Every type serializes to canonical JSON: snake_case field names, dates as
//! `YYYY-MM-DD`, enums as lowercase strings.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::text::normalize_name;
use crate::votes::{Outcome, Position};

/// A council (municipality) publishing minutes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MunicipalityRecord {
    pub id: String,
    pub name: String,
    pub slug: String,
}

impl MunicipalityRecord {
    pub fn check(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("municipality id is empty".into());
        }
        if self.name.trim().is_empty() {
            return Err(format!("municipality {}: name is empty", self.id));
        }
        if !is_slug(&self.slug) {
            return Err(format!("municipality {}: invalid slug {:?}", self.id, self.slug));
        }
        Ok(())
    }
}

/// Lowercase ASCII alphanumerics separated by single hyphens.
pub fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s.split('-')
            .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()))
}

/// Turns an arbitrary name into a slug ("Fundão" -> "fundao").
pub fn slugify(s: &str) -> String {
    let norm = normalize_name(s);
    let mut out = String::with_capacity(norm.len());
    for c in norm.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub id: String,
    pub full_name: String,
    #[serde(default)]
    pub party: Option<String>,
    #[serde(default)]
    pub role: Option<String>,
    pub municipality_id: String,
    /// Provisional entry created when an extracted name matched nobody.
    #[serde(default)]
    pub unresolved: bool,
}

impl ParticipantRecord {
    pub fn check(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("participant id is empty".into());
        }
        if self.full_name.trim().is_empty() {
            return Err(format!("participant {}: full_name is empty", self.id));
        }
        Ok(())
    }

    /// Executive members are resolved participants holding a role.
    pub fn is_member(&self) -> bool {
        !self.unresolved && self.role.as_deref().is_some_and(|r| !r.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeetingType {
    Ordinary,
    Extraordinary,
    Other(String),
}

impl MeetingType {
    pub fn as_str(&self) -> &str {
        match self {
            MeetingType::Ordinary => "ordinary",
            MeetingType::Extraordinary => "extraordinary",
            MeetingType::Other(label) => label,
        }
    }
}

impl FromStr for MeetingType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        match normalize_name(trimmed).as_str() {
            "" => Err("meeting type is empty".into()),
            "ordinary" | "ordinaria" | "reuniao ordinaria" | "ordinary meeting" => Ok(MeetingType::Ordinary),
            "extraordinary" | "extraordinaria" | "reuniao extraordinaria" | "extraordinary meeting" => {
                Ok(MeetingType::Extraordinary)
            }
            _ => Ok(MeetingType::Other(trimmed.to_string())),
        }
    }
}

impl fmt::Display for MeetingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for MeetingType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for MeetingType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinuteMetadata {
    pub meeting_date: NaiveDate,
    pub location: String,
    pub meeting_type: MeetingType,
    pub participant_ids: Vec<String>,
}

impl MinuteMetadata {
    pub fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for id in &self.participant_ids {
            if !seen.insert(id) {
                return Err(format!("participant {id} listed twice"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotePosition {
    pub participant_id: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub favor: u32,
    pub against: u32,
    pub abstention: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<VotePosition>>,
    pub outcome: Outcome,
}

impl VoteTally {
    pub fn total(&self) -> u32 {
        self.favor + self.against + self.abstention
    }

    pub fn check(&self) -> Result<(), String> {
        if let Some(positions) = &self.positions {
            let count = |p: Position| positions.iter().filter(|v| v.position == p).count() as u32;
            if count(Position::Favor) != self.favor
                || count(Position::Against) != self.against
                || count(Position::Abstention) != self.abstention
            {
                return Err("tally counters disagree with listed positions".into());
            }
        }
        if self.outcome != crate::votes::derive_outcome(self) {
            return Err("tally outcome inconsistent with counters".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub minute_id: String,
    pub order: u32,
    pub title: String,
    pub summary: String,
    pub topic_ids: Vec<String>,
    #[serde(default)]
    pub tally: Option<VoteTally>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinuteStatus {
    Uploaded,
    Extracted,
    Validated,
    Published,
}

impl MinuteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MinuteStatus::Uploaded => "uploaded",
            MinuteStatus::Extracted => "extracted",
            MinuteStatus::Validated => "validated",
            MinuteStatus::Published => "published",
        }
    }
}

impl fmt::Display for MinuteStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinuteDocument {
    pub id: String,
    pub municipality_id: String,
    pub source_filename: String,
    pub raw_text: String,
    pub status: MinuteStatus,
    #[serde(default)]
    pub metadata: Option<MinuteMetadata>,
    #[serde(default)]
    pub subject_ids: Vec<String>,
    pub uploaded_at: DateTime<Utc>,
    #[serde(default)]
    pub published_at: Option<DateTime<Utc>>,
}

impl MinuteDocument {
    pub fn check(&self) -> Result<(), String> {
        if self.raw_text.trim().is_empty() {
            return Err(format!("minute {}: raw_text is empty", self.id));
        }
        if self.status >= MinuteStatus::Validated && self.metadata.is_none() {
            return Err(format!("minute {}: {} without metadata", self.id, self.status));
        }
        if self.status == MinuteStatus::Published && self.published_at.is_none() {
            return Err(format!("minute {}: published without published_at", self.id));
        }
        if let Some(meta) = &self.metadata {
            meta.check().map_err(|e| format!("minute {}: {e}", self.id))?;
        }
        Ok(())
    }
}

/// Syntactically checked email address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Email(String);

impl Email {
    pub fn parse(raw: &str) -> Result<Self, String> {
        let raw = raw.trim();
        let mut parts = raw.split('@');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(local), Some(domain), None)
                if !local.is_empty() && !domain.is_empty() && !raw.contains(char::is_whitespace) =>
            {
                Ok(Email(raw.to_string()))
            }
            _ => Err(format!("invalid email address {raw:?}")),
        }
    }

    /// Casefolded form used for uniqueness.
    pub fn normalized(&self) -> String {
        self.0.to_lowercase()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Email {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        Email::parse(&s)
    }
}

impl From<Email> for String {
    fn from(e: Email) -> String {
        e.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsletterSubscriber {
    pub email: Email,
    pub subscribed_at: DateTime<Utc>,
    /// Empty means every municipality.
    #[serde(default)]
    pub municipality_ids: Vec<String>,
}

/// Parses the two accepted date spellings, `YYYY-MM-DD` and `DD-MM-YYYY`.
pub fn parse_meeting_date(raw: &str) -> Result<NaiveDate, String> {
    let raw = raw.trim();
    let parts: Vec<&str> = raw.split('-').collect();
    let fmt = match parts.as_slice() {
        [y, m, d] if y.len() == 4 && m.len() == 2 && d.len() == 2 => "%Y-%m-%d",
        [d, m, y] if d.len() == 2 && m.len() == 2 && y.len() == 4 => "%d-%m-%Y",
        _ => "",
    };
    if !fmt.is_empty() && parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit())) {
        if let Ok(date) = NaiveDate::parse_from_str(raw, fmt) {
            return Ok(date);
        }
    }
    Err(format!(
        "unparseable date {raw:?}; accepted formats are YYYY-MM-DD and DD-MM-YYYY"
    ))
}
