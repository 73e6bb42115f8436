//! Durable collections behind a [`Store`] interface.
//!
//! The file-backed implementation keeps one JSON-lines file per collection
//! and commits by staging new files and atomically replacing
//! `manifest.json`. [`MemoryStore`] applies the same rules without disk IO.

mod file;
mod memory;

pub use file::{FailPoint, FileStore};
pub use memory::MemoryStore;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{ExtractionResult, ExtractorKind, ValidationIssue};
use crate::model::*;
use crate::search::IndexSnapshot;
use crate::text::normalize_name;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt collection file {file}, line {line}: {reason}")]
    Corrupt { file: String, line: usize, reason: String },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("another writer holds the store lock")]
    Locked,
    #[error("injected fault: {0}")]
    Injected(&'static str),
}

/// Latest extractor output for a minute awaiting review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionDraft {
    pub minute_id: String,
    pub extractor: ExtractorKind,
    #[serde(default)]
    pub result: Option<ExtractionResult>,
    /// Set when the last extraction attempt failed.
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub issues: Vec<ValidationIssue>,
    #[serde(default)]
    pub unresolved: Vec<String>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSet {
    pub municipalities: Vec<MunicipalityRecord>,
    pub participants: Vec<ParticipantRecord>,
    pub topics: Vec<TopicRecord>,
    pub minutes: Vec<MinuteDocument>,
    pub subjects: Vec<SubjectRecord>,
    pub subscribers: Vec<NewsletterSubscriber>,
    pub extraction_drafts: Vec<ExtractionDraft>,
}

pub const COLLECTIONS: [&str; 7] = [
    "municipalities",
    "participants",
    "topics",
    "minutes",
    "subjects",
    "subscribers",
    "extraction_drafts",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub schema_version: u32,
    pub generation: u64,
    /// Collection name to file path relative to the store root.
    pub collections: BTreeMap<String, String>,
    #[serde(default)]
    pub last_snapshot_path: Option<String>,
    pub updated_at: DateTime<Utc>,
}

impl StoreManifest {
    pub fn empty() -> Self {
        StoreManifest {
            schema_version: SCHEMA_VERSION,
            generation: 0,
            collections: BTreeMap::new(),
            last_snapshot_path: None,
            updated_at: DateTime::<Utc>::UNIX_EPOCH,
        }
    }
}

/// Upserts (by id) across any number of collections, applied atomically.
#[derive(Debug, Clone, Default)]
pub struct ChangeSet {
    pub municipalities: Vec<MunicipalityRecord>,
    pub participants: Vec<ParticipantRecord>,
    pub topics: Vec<TopicRecord>,
    pub minutes: Vec<MinuteDocument>,
    pub subjects: Vec<SubjectRecord>,
    pub remove_subjects: Vec<String>,
    pub subscribers: Vec<NewsletterSubscriber>,
    pub extraction_drafts: Vec<ExtractionDraft>,
    /// Rebuild and persist the search snapshot from the committed data.
    pub rebuild_index: bool,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.municipalities.is_empty()
            && self.participants.is_empty()
            && self.topics.is_empty()
            && self.minutes.is_empty()
            && self.subjects.is_empty()
            && self.remove_subjects.is_empty()
            && self.subscribers.is_empty()
            && self.extraction_drafts.is_empty()
            && !self.rebuild_index
    }

    /// Names of the collections this change writes.
    pub fn touched(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::new();
        let mut mark = |cond: bool, name| {
            if cond {
                out.insert(name);
            }
        };
        mark(!self.municipalities.is_empty(), "municipalities");
        mark(!self.participants.is_empty(), "participants");
        mark(!self.topics.is_empty(), "topics");
        mark(!self.minutes.is_empty(), "minutes");
        mark(
            !self.subjects.is_empty() || !self.remove_subjects.is_empty(),
            "subjects",
        );
        mark(!self.subscribers.is_empty(), "subscribers");
        mark(!self.extraction_drafts.is_empty(), "extraction_drafts");
        out
    }
}

fn upsert<T: Clone>(target: &mut Vec<T>, items: &[T], key: impl Fn(&T) -> String) {
    let mut index: HashMap<String, usize> = target.iter().enumerate().map(|(i, t)| (key(t), i)).collect();
    for item in items {
        match index.get(&key(item)) {
            Some(&i) => target[i] = item.clone(),
            None => {
                index.insert(key(item), target.len());
                target.push(item.clone());
            }
        }
    }
    target.sort_by_key(|t| key(t));
}

impl DataSet {
    /// Applies `change` on a copy, refusing status regressions.
    pub fn apply(&self, change: &ChangeSet) -> Result<DataSet, StoreError> {
        for m in &change.minutes {
            if let Some(old) = self.minute(&m.id) {
                if m.status < old.status {
                    return Err(StoreError::Integrity(format!(
                        "minute {} cannot move from {} back to {}",
                        m.id, old.status, m.status
                    )));
                }
            }
        }
        let mut next = self.clone();
        upsert(&mut next.municipalities, &change.municipalities, |m| m.id.clone());
        upsert(&mut next.participants, &change.participants, |p| p.id.clone());
        upsert(&mut next.topics, &change.topics, |t| t.id.clone());
        upsert(&mut next.minutes, &change.minutes, |m| m.id.clone());
        let removed: HashSet<&str> = change.remove_subjects.iter().map(String::as_str).collect();
        next.subjects.retain(|s| !removed.contains(s.id.as_str()));
        upsert(&mut next.subjects, &change.subjects, |s| s.id.clone());
        upsert(&mut next.subscribers, &change.subscribers, |s| s.email.normalized());
        upsert(&mut next.extraction_drafts, &change.extraction_drafts, |d| {
            d.minute_id.clone()
        });
        Ok(next)
    }

    pub fn minute(&self, id: &str) -> Option<&MinuteDocument> {
        self.minutes.iter().find(|m| m.id == id)
    }

    pub fn municipality(&self, id: &str) -> Option<&MunicipalityRecord> {
        self.municipalities.iter().find(|m| m.id == id)
    }

    pub fn draft(&self, minute_id: &str) -> Option<&ExtractionDraft> {
        self.extraction_drafts.iter().find(|d| d.minute_id == minute_id)
    }

    pub fn subjects_of<'a>(&'a self, minute_id: &'a str) -> impl Iterator<Item = &'a SubjectRecord> + 'a {
        self.subjects.iter().filter(move |s| s.minute_id == minute_id)
    }

    /// Record invariants plus every foreign key between collections.
    pub fn check(&self) -> Result<(), StoreError> {
        let bad = |msg: String| Err(StoreError::Integrity(msg));

        let mut muni_ids = HashSet::new();
        let mut slugs = HashSet::new();
        for m in &self.municipalities {
            m.check().map_err(StoreError::Integrity)?;
            if !muni_ids.insert(m.id.as_str()) {
                return bad(format!("duplicate municipality id {}", m.id));
            }
            if !slugs.insert(m.slug.as_str()) {
                return bad(format!("duplicate municipality slug {}", m.slug));
            }
        }

        let mut people = HashSet::new();
        for p in &self.participants {
            p.check().map_err(StoreError::Integrity)?;
            if !people.insert(p.id.as_str()) {
                return bad(format!("duplicate participant id {}", p.id));
            }
            if !muni_ids.contains(p.municipality_id.as_str()) {
                return bad(format!(
                    "participant {} references missing municipality {}",
                    p.id, p.municipality_id
                ));
            }
        }

        let mut topic_ids = HashSet::new();
        let mut labels = HashSet::new();
        for t in &self.topics {
            if t.label.trim().is_empty() {
                return bad(format!("topic {} has an empty label", t.id));
            }
            if !topic_ids.insert(t.id.as_str()) {
                return bad(format!("duplicate topic id {}", t.id));
            }
            if !labels.insert(normalize_name(&t.label)) {
                return bad(format!("duplicate topic label {:?}", t.label));
            }
        }

        let mut minute_ids = HashSet::new();
        for m in &self.minutes {
            m.check().map_err(StoreError::Integrity)?;
            if !minute_ids.insert(m.id.as_str()) {
                return bad(format!("duplicate minute id {}", m.id));
            }
            if !muni_ids.contains(m.municipality_id.as_str()) {
                return bad(format!(
                    "minute {} references missing municipality {}",
                    m.id, m.municipality_id
                ));
            }
            if let Some(meta) = &m.metadata {
                if let Some(p) = meta.participant_ids.iter().find(|p| !people.contains(p.as_str())) {
                    return bad(format!("minute {} references missing participant {p}", m.id));
                }
            }
        }

        let mut subject_ids = HashSet::new();
        let mut orders: HashMap<&str, Vec<u32>> = HashMap::new();
        for s in &self.subjects {
            if !subject_ids.insert(s.id.as_str()) {
                return bad(format!("duplicate subject id {}", s.id));
            }
            if !minute_ids.contains(s.minute_id.as_str()) {
                return bad(format!("subject {} references missing minute {}", s.id, s.minute_id));
            }
            if s.title.trim().is_empty() {
                return bad(format!("subject {} has an empty title", s.id));
            }
            if let Some(t) = s.topic_ids.iter().find(|t| !topic_ids.contains(t.as_str())) {
                return bad(format!("subject {} references missing topic {t}", s.id));
            }
            if let Some(tally) = &s.tally {
                tally
                    .check()
                    .map_err(|e| StoreError::Integrity(format!("subject {}: {e}", s.id)))?;
                for v in tally.positions.iter().flatten() {
                    if !people.contains(v.participant_id.as_str()) {
                        return bad(format!(
                            "subject {} references missing participant {}",
                            s.id, v.participant_id
                        ));
                    }
                }
            }
            orders.entry(s.minute_id.as_str()).or_default().push(s.order);
        }
        for (minute, mut o) in orders {
            o.sort_unstable();
            if o.iter().enumerate().any(|(i, &n)| n != i as u32 + 1) {
                return bad(format!("subjects of minute {minute} are not numbered 1..n"));
            }
        }
        for m in &self.minutes {
            for sid in &m.subject_ids {
                if !self.subjects.iter().any(|s| &s.id == sid && s.minute_id == m.id) {
                    return bad(format!("minute {} lists missing subject {sid}", m.id));
                }
            }
        }

        let mut emails = HashSet::new();
        for s in &self.subscribers {
            if !emails.insert(s.email.normalized()) {
                return bad(format!("duplicate subscriber {}", s.email.as_str()));
            }
            if let Some(m) = s.municipality_ids.iter().find(|m| !muni_ids.contains(m.as_str())) {
                return bad(format!(
                    "subscriber {} references missing municipality {m}",
                    s.email.as_str()
                ));
            }
        }

        let mut drafted = HashSet::new();
        for d in &self.extraction_drafts {
            if !minute_ids.contains(d.minute_id.as_str()) {
                return bad(format!("extraction draft references missing minute {}", d.minute_id));
            }
            if !drafted.insert(d.minute_id.as_str()) {
                return bad(format!("two extraction drafts for minute {}", d.minute_id));
            }
        }
        Ok(())
    }
}

/// Result of a successful commit.
#[derive(Debug, Clone)]
pub struct Committed {
    pub manifest: StoreManifest,
    pub data: DataSet,
    pub snapshot: Option<IndexSnapshot>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: StoreManifest,
    pub data: DataSet,
    pub snapshot: Option<IndexSnapshot>,
}

pub trait Store: Send + Sync {
    fn load(&self) -> Result<Loaded, StoreError>;
    /// All-or-nothing; on error the previously committed state is intact.
    fn commit(&self, change: ChangeSet) -> Result<Committed, StoreError>;
    fn append_audit(&self, entry: &serde_json::Value) -> Result<(), StoreError>;
}

/// JSON-lines encoding of one collection.
pub(crate) fn encode_lines<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub(crate) fn decode_lines<T: for<'de> Deserialize<'de>>(bytes: &[u8], file: &str) -> Result<Vec<T>, StoreError> {
    let text = std::str::from_utf8(bytes).map_err(|e| StoreError::Corrupt {
        file: file.to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| StoreError::Corrupt {
                file: file.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

impl DataSet {
    pub(crate) fn encode(&self, name: &str) -> Vec<u8> {
        match name {
            "municipalities" => encode_lines(&self.municipalities),
            "participants" => encode_lines(&self.participants),
            "topics" => encode_lines(&self.topics),
            "minutes" => encode_lines(&self.minutes),
            "subjects" => encode_lines(&self.subjects),
            "subscribers" => encode_lines(&self.subscribers),
            "extraction_drafts" => encode_lines(&self.extraction_drafts),
            other => unreachable!("unknown collection {other}"),
        }
    }

    pub(crate) fn decode_into(&mut self, name: &str, bytes: &[u8], file: &str) -> Result<(), StoreError> {
        match name {
            "municipalities" => self.municipalities = decode_lines(bytes, file)?,
            "participants" => self.participants = decode_lines(bytes, file)?,
            "topics" => self.topics = decode_lines(bytes, file)?,
            "minutes" => self.minutes = decode_lines(bytes, file)?,
            "subjects" => self.subjects = decode_lines(bytes, file)?,
            "subscribers" => self.subscribers = decode_lines(bytes, file)?,
            "extraction_drafts" => self.extraction_drafts = decode_lines(bytes, file)?,
            other => {
                return Err(StoreError::Corrupt {
                    file: file.into(),
                    line: 0,
                    reason: format!("unknown collection {other}"),
                })
            }
        }
        Ok(())
    }

    /// Per-record checks, reporting the first offending record of a file.
    pub(crate) fn check_records(&self, name: &str, file: &str) -> Result<(), StoreError> {
        let fail = |i: usize, reason: String| {
            Err(StoreError::Corrupt {
                file: file.to_string(),
                line: i + 1,
                reason,
            })
        };
        match name {
            "municipalities" => {
                for (i, m) in self.municipalities.iter().enumerate() {
                    if let Err(e) = m.check() {
                        return fail(i, e);
                    }
                }
            }
            "participants" => {
                for (i, p) in self.participants.iter().enumerate() {
                    if let Err(e) = p.check() {
                        return fail(i, e);
                    }
                }
            }
            "minutes" => {
                for (i, m) in self.minutes.iter().enumerate() {
                    if let Err(e) = m.check() {
                        return fail(i, e);
                    }
                }
            }
            "subjects" => {
                for (i, s) in self.subjects.iter().enumerate() {
                    if let Some(Err(e)) = s.tally.as_ref().map(VoteTally::check) {
                        return fail(i, e);
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}
