//! The minute lifecycle (upload, extract, review, validate, publish) and the
//! public read model. The CLI and the HTTP API both drive this type, so the
//! two front ends produce identical state transitions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{
    header_municipality, validate_and_resolve, ExtractionError, ExtractionResult, Extractor, Registries,
    ResolvedMinute, ValidationIssue,
};
use crate::model::*;
use crate::newsletter::{digest, Digest};
use crate::search::{self, IndexSnapshot, Query, SearchError, SearchResult, TimelineGroup};
use crate::store::{ChangeSet, Committed, DataSet, ExtractionDraft, Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("minute {minute_id} is {status}: {message}")]
    Conflict {
        minute_id: String,
        status: MinuteStatus,
        message: String,
    },
    #[error("validation failed: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
    #[error("invalid query: {}", .0.iter().map(|(f, m)| format!("{f}: {m}")).collect::<Vec<_>>().join("; "))]
    BadQuery(Vec<(String, String)>),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<SearchError> for ServiceError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidQuery(f) => ServiceError::BadQuery(f),
            SearchError::UnknownMunicipality(id) => ServiceError::NotFound(format!("municipality {id}")),
            SearchError::Corrupt(m) => ServiceError::Store(StoreError::Corrupt {
                file: "index".into(),
                line: 0,
                reason: m,
            }),
        }
    }
}

fn issue(field: &str, message: impl Into<String>) -> ServiceError {
    ServiceError::Invalid(vec![ValidationIssue {
        field: field.into(),
        message: message.into(),
    }])
}

/// Registry seed file: predefined municipalities, participants and topics.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RegistryFile {
    #[serde(default)]
    pub municipalities: Vec<MunicipalityRecord>,
    #[serde(default)]
    pub participants: Vec<ParticipantRecord>,
    #[serde(default)]
    pub topics: Vec<TopicRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionView {
    pub minute_id: String,
    pub status: MinuteStatus,
    pub draft: Option<ExtractionDraft>,
    /// Resolution of the draft against the current registries.
    pub preview: Option<ResolvedMinute>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MunicipalitySummary {
    #[serde(flatten)]
    pub municipality: MunicipalityRecord,
    pub published_minutes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinuteCard {
    pub id: String,
    pub meeting_date: NaiveDate,
    pub meeting_type: MeetingType,
    pub subject_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicGroup {
    pub topic: TopicRecord,
    pub minute_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overview {
    pub municipality: MunicipalityRecord,
    pub recent_minutes: Vec<MinuteCard>,
    pub members: Vec<ParticipantRecord>,
    pub topics: Vec<TopicGroup>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VotingSummary {
    pub favor: u32,
    pub against: u32,
    pub abstention: u32,
    pub subjects_voted: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectView {
    #[serde(flatten)]
    pub subject: SubjectRecord,
    pub topics: Vec<TopicRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinuteView {
    pub id: String,
    pub municipality: MunicipalityRecord,
    pub source_filename: String,
    pub status: MinuteStatus,
    pub uploaded_at: DateTime<Utc>,
    pub published_at: Option<DateTime<Utc>>,
    pub metadata: Option<MinuteMetadata>,
    pub participants: Vec<ParticipantRecord>,
    pub subjects: Vec<SubjectView>,
    pub voting_summary: VotingSummary,
    pub raw_text_url: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubscribeOutcome {
    Created,
    AlreadySubscribed,
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Service {
    store: Arc<dyn Store>,
    data: RwLock<Arc<DataSet>>,
    snapshot: RwLock<Arc<IndexSnapshot>>,
    writer: Mutex<()>,
    clock: Clock,
}

fn recent_first(a: &MinuteDocument, b: &MinuteDocument) -> std::cmp::Ordering {
    let date = |m: &MinuteDocument| m.metadata.as_ref().map(|x| x.meeting_date);
    date(b).cmp(&date(a)).then_with(|| a.id.cmp(&b.id))
}

impl Service {
    pub fn open(store: Arc<dyn Store>) -> Result<Self, ServiceError> {
        let loaded = store.load()?;
        let snapshot = match loaded.snapshot {
            Some(s) => s,
            None => IndexSnapshot::build(&loaded.data, Default::default()).0,
        };
        Ok(Service {
            store,
            data: RwLock::new(Arc::new(loaded.data)),
            snapshot: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
            clock: Arc::new(Utc::now),
        })
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn data(&self) -> Arc<DataSet> {
        self.data.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn snapshot(&self) -> Arc<IndexSnapshot> {
        self.snapshot.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn store(&self) -> &Arc<dyn Store> {
        &self.store
    }

    /// Re-reads the store, picking up commits made by other processes.
    pub fn refresh(&self) -> Result<(), ServiceError> {
        let loaded = self.store.load()?;
        if let Some(s) = loaded.snapshot {
            *self.snapshot.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(s);
        }
        *self.data.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(loaded.data);
        Ok(())
    }

    /// Runs `f` against freshly loaded data under the writer mutex and
    /// commits the change it returns.
    fn write<T>(&self, f: impl FnOnce(&DataSet) -> Result<(ChangeSet, T), ServiceError>) -> Result<T, ServiceError> {
        let _w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let current = self.store.load()?.data;
        let (change, out) = f(&current)?;
        if change.is_empty() {
            return Ok(out);
        }
        let Committed { data, snapshot, .. } = self.store.commit(change)?;
        if let Some(s) = snapshot {
            // readers holding the old Arc finish on the old snapshot
            *self.snapshot.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(s);
        }
        *self.data.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(data);
        Ok(out)
    }

    fn minute<'a>(data: &'a DataSet, id: &str) -> Result<&'a MinuteDocument, ServiceError> {
        data.minute(id)
            .ok_or_else(|| ServiceError::NotFound(format!("minute {id}")))
    }

    fn require(minute: &MinuteDocument, allowed: &[MinuteStatus], action: &str) -> Result<(), ServiceError> {
        if allowed.contains(&minute.status) {
            Ok(())
        } else {
            Err(ServiceError::Conflict {
                minute_id: minute.id.clone(),
                status: minute.status,
                message: format!("cannot {action}"),
            })
        }
    }

    fn registries(data: &DataSet, municipality_id: &str) -> Registries {
        Registries {
            municipality_id: municipality_id.to_string(),
            participants: data
                .participants
                .iter()
                .filter(|p| p.municipality_id == municipality_id)
                .cloned()
                .collect(),
            topics: data.topics.clone(),
        }
    }

    /// Dry-run resolution of a draft result: (preview, issues, unresolved ids).
    fn review(
        data: &DataSet,
        minute: &MinuteDocument,
        result: &ExtractionResult,
    ) -> (Option<ResolvedMinute>, Vec<ValidationIssue>, Vec<String>) {
        let reg = Self::registries(data, &minute.municipality_id);
        match validate_and_resolve(result, &reg, &minute.id) {
            Ok(resolved) => {
                let unresolved = resolved.unresolved_ids(&reg.participants);
                (Some(resolved), Vec::new(), unresolved)
            }
            Err(issues) => (None, issues, Vec::new()),
        }
    }

    // ---- registries -------------------------------------------------------

    pub fn import_registry(&self, registry: RegistryFile) -> Result<(usize, usize, usize), ServiceError> {
        let counts = (
            registry.municipalities.len(),
            registry.participants.len(),
            registry.topics.len(),
        );
        self.write(|_| {
            let change = ChangeSet {
                municipalities: registry.municipalities,
                participants: registry.participants,
                topics: registry.topics,
                ..ChangeSet::default()
            };
            Ok((change, counts))
        })
    }

    /// Finds a municipality by slug, creating it when missing.
    pub fn ensure_municipality(&self, slug: &str, name: Option<&str>) -> Result<MunicipalityRecord, ServiceError> {
        if !is_slug(slug) {
            return Err(issue("municipality", format!("invalid slug {slug:?}")));
        }
        self.write(|data| {
            if let Some(m) = data.municipalities.iter().find(|m| m.slug == slug) {
                return Ok((ChangeSet::default(), m.clone()));
            }
            let record = MunicipalityRecord {
                id: slug.to_string(),
                name: name
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .unwrap_or(slug)
                    .to_string(),
                slug: slug.to_string(),
            };
            Ok((
                ChangeSet {
                    municipalities: vec![record.clone()],
                    ..ChangeSet::default()
                },
                record,
            ))
        })
    }

    // ---- lifecycle ----------------------------------------------------------

    /// Uploads a minute, creating its municipality from the `MUNICIPIO:`
    /// header when the slug is not registered yet.
    pub fn ingest(
        &self,
        municipality_slug: &str,
        source_filename: &str,
        raw_text: &str,
    ) -> Result<MinuteDocument, ServiceError> {
        let name = header_municipality(raw_text);
        let municipality = self.ensure_municipality(municipality_slug, name.as_deref())?;
        self.upload(&municipality.id, source_filename, raw_text)
    }

    pub fn upload(
        &self,
        municipality_id: &str,
        source_filename: &str,
        raw_text: &str,
    ) -> Result<MinuteDocument, ServiceError> {
        if raw_text.trim().is_empty() {
            return Err(issue("text", "minute text is empty"));
        }
        let now = (self.clock)();
        self.write(|data| {
            if data.municipality(municipality_id).is_none() {
                return Err(ServiceError::NotFound(format!("municipality {municipality_id}")));
            }
            let stem = std::path::Path::new(source_filename)
                .file_stem()
                .map(|s| slugify(&s.to_string_lossy()))
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("{municipality_id}-minute"));
            let mut id = stem.clone();
            let mut n = 2;
            while data.minute(&id).is_some() {
                id = format!("{stem}-{n}");
                n += 1;
            }
            let minute = MinuteDocument {
                id,
                municipality_id: municipality_id.to_string(),
                source_filename: source_filename.to_string(),
                raw_text: raw_text.to_string(),
                status: MinuteStatus::Uploaded,
                metadata: None,
                subject_ids: Vec::new(),
                uploaded_at: now,
                published_at: None,
            };
            Ok((
                ChangeSet {
                    minutes: vec![minute.clone()],
                    ..ChangeSet::default()
                },
                minute,
            ))
        })
    }

    /// Runs the extractor outside the writer lock, then records either the
    /// draft (status `extracted`) or the failure (status unchanged).
    pub fn run_extraction(&self, minute_id: &str, extractor: &dyn Extractor) -> Result<ExtractionView, ServiceError> {
        let allowed = [MinuteStatus::Uploaded, MinuteStatus::Extracted];
        let text = {
            let data = self.store.load()?.data;
            let m = Self::minute(&data, minute_id)?;
            Self::require(m, &allowed, "extract")?;
            m.raw_text.clone()
        };
        let outcome = extractor.extract(&text);
        let now = (self.clock)();
        let kind = extractor.kind();
        let (view, failure) = self.write(|data| {
            let m = Self::minute(data, minute_id)?;
            Self::require(m, &allowed, "extract")?;
            let mut minute = m.clone();
            let (draft, preview, failure) = match outcome {
                Ok(result) => {
                    let (preview, issues, unresolved) = Self::review(data, m, &result);
                    minute.status = MinuteStatus::Extracted;
                    let draft = ExtractionDraft {
                        minute_id: minute_id.to_string(),
                        extractor: kind,
                        result: Some(result),
                        error: None,
                        issues,
                        unresolved,
                        updated_at: now,
                    };
                    (draft, preview, None)
                }
                Err(e) => {
                    let draft = ExtractionDraft {
                        minute_id: minute_id.to_string(),
                        extractor: kind,
                        result: data.draft(minute_id).and_then(|d| d.result.clone()),
                        error: Some(e.to_string()),
                        issues: Vec::new(),
                        unresolved: Vec::new(),
                        updated_at: now,
                    };
                    (draft, None, Some(e))
                }
            };
            let view = ExtractionView {
                minute_id: minute.id.clone(),
                status: minute.status,
                draft: Some(draft.clone()),
                preview,
            };
            let change = ChangeSet {
                minutes: vec![minute],
                extraction_drafts: vec![draft],
                ..ChangeSet::default()
            };
            Ok((change, (view, failure)))
        })?;
        match failure {
            Some(e) => Err(ServiceError::Extraction(e)),
            None => Ok(view),
        }
    }

    pub fn extraction(&self, minute_id: &str) -> Result<ExtractionView, ServiceError> {
        let data = self.data();
        let m = Self::minute(&data, minute_id)?;
        let draft = data.draft(minute_id).cloned();
        let preview = draft
            .as_ref()
            .and_then(|d| d.result.as_ref())
            .and_then(|r| Self::review(&data, m, r).0);
        Ok(ExtractionView {
            minute_id: m.id.clone(),
            status: m.status,
            draft,
            preview,
        })
    }

    /// Replaces the draft with operator edits; the previous draft goes to the
    /// audit log.
    pub fn replace_extraction(
        &self,
        minute_id: &str,
        result: ExtractionResult,
    ) -> Result<ExtractionView, ServiceError> {
        let now = (self.clock)();
        let (view, prior) = self.write(|data| {
            let m = Self::minute(data, minute_id)?;
            Self::require(
                m,
                &[MinuteStatus::Uploaded, MinuteStatus::Extracted],
                "edit the extraction",
            )?;
            let prior = data.draft(minute_id).cloned();
            let (preview, issues, unresolved) = Self::review(data, m, &result);
            let mut minute = m.clone();
            minute.status = MinuteStatus::Extracted;
            let draft = ExtractionDraft {
                minute_id: minute_id.to_string(),
                extractor: prior
                    .as_ref()
                    .map_or(crate::extraction::ExtractorKind::Rule, |d| d.extractor),
                result: Some(result),
                error: None,
                issues,
                unresolved,
                updated_at: now,
            };
            let view = ExtractionView {
                minute_id: minute.id.clone(),
                status: minute.status,
                draft: Some(draft.clone()),
                preview,
            };
            Ok((
                ChangeSet {
                    minutes: vec![minute],
                    extraction_drafts: vec![draft],
                    ..ChangeSet::default()
                },
                (view, prior),
            ))
        })?;
        if let Some(prior) = prior {
            let entry = serde_json::json!({
                "at": now,
                "action": "replace_extraction",
                "minute_id": minute_id,
                "previous": prior,
            });
            self.store.append_audit(&entry)?;
        }
        Ok(view)
    }

    /// `extracted` to `validated`, committing the resolved records.
    pub fn validate(&self, minute_id: &str, ack_unresolved: bool) -> Result<MinuteDocument, ServiceError> {
        self.write(|data| {
            let m = Self::minute(data, minute_id)?;
            Self::require(m, &[MinuteStatus::Extracted], "validate")?;
            let draft = data.draft(minute_id);
            let Some(result) = draft.and_then(|d| d.result.as_ref()) else {
                return Err(issue("extraction", "no extraction draft to validate"));
            };
            let reg = Self::registries(data, &m.municipality_id);
            let resolved = validate_and_resolve(result, &reg, minute_id).map_err(ServiceError::Invalid)?;
            let unresolved = resolved.unresolved_ids(&reg.participants);
            if !unresolved.is_empty() && !ack_unresolved {
                return Err(issue(
                    "unresolved",
                    format!("unacknowledged unresolved participants: {}", unresolved.join(", ")),
                ));
            }
            let mut minute = m.clone();
            minute.status = MinuteStatus::Validated;
            minute.metadata = Some(resolved.metadata.clone());
            minute.subject_ids = resolved.subjects.iter().map(|s| s.id.clone()).collect();
            let keep: BTreeSet<&str> = minute.subject_ids.iter().map(String::as_str).collect();
            let remove_subjects = data
                .subjects_of(minute_id)
                .filter(|s| !keep.contains(s.id.as_str()))
                .map(|s| s.id.clone())
                .collect();
            let mut draft = draft.cloned().expect("draft checked above");
            draft.issues.clear();
            draft.unresolved = unresolved;
            let change = ChangeSet {
                minutes: vec![minute.clone()],
                subjects: resolved.subjects,
                remove_subjects,
                topics: resolved.new_topics,
                participants: resolved.provisional,
                extraction_drafts: vec![draft],
                ..ChangeSet::default()
            };
            Ok((change, minute))
        })
    }

    /// `validated` to `published`; rebuilds and swaps the search snapshot.
    pub fn publish(&self, minute_id: &str) -> Result<MinuteDocument, ServiceError> {
        let now = (self.clock)();
        let minute = self.write(|data| {
            let m = Self::minute(data, minute_id)?;
            Self::require(m, &[MinuteStatus::Validated], "publish")?;
            let mut minute = m.clone();
            minute.status = MinuteStatus::Published;
            minute.published_at = Some(now);
            Ok((
                ChangeSet {
                    minutes: vec![minute.clone()],
                    rebuild_index: true,
                    ..ChangeSet::default()
                },
                minute,
            ))
        })?;
        info!("published {minute_id}");
        Ok(minute)
    }

    pub fn rebuild_index(&self) -> Result<usize, ServiceError> {
        self.write(|_| {
            Ok((
                ChangeSet {
                    rebuild_index: true,
                    ..ChangeSet::default()
                },
                (),
            ))
        })?;
        Ok(self.snapshot().unit_count())
    }

    // ---- newsletter -----------------------------------------------------------

    pub fn subscribe(&self, email: &str, municipality_ids: Vec<String>) -> Result<SubscribeOutcome, ServiceError> {
        let email = Email::parse(email).map_err(|e| issue("email", e))?;
        let now = (self.clock)();
        self.write(|data| {
            if let Some(bad) = municipality_ids.iter().find(|m| data.municipality(m).is_none()) {
                return Err(issue("municipality_ids", format!("unknown municipality {bad}")));
            }
            if data
                .subscribers
                .iter()
                .any(|s| s.email.normalized() == email.normalized())
            {
                return Ok((ChangeSet::default(), SubscribeOutcome::AlreadySubscribed));
            }
            let mut ids = municipality_ids;
            ids.sort();
            ids.dedup();
            let sub = NewsletterSubscriber {
                email,
                subscribed_at: now,
                municipality_ids: ids,
            };
            Ok((
                ChangeSet {
                    subscribers: vec![sub],
                    ..ChangeSet::default()
                },
                SubscribeOutcome::Created,
            ))
        })
    }

    pub fn digest(&self, since: NaiveDate) -> Digest {
        digest(&self.data(), since)
    }

    // ---- read model -----------------------------------------------------------

    pub fn municipalities(&self) -> Vec<MunicipalitySummary> {
        let data = self.data();
        let mut out: Vec<_> = data
            .municipalities
            .iter()
            .map(|m| MunicipalitySummary {
                municipality: m.clone(),
                published_minutes: data
                    .minutes
                    .iter()
                    .filter(|d| d.municipality_id == m.id && d.status == MinuteStatus::Published)
                    .count(),
            })
            .collect();
        out.sort_by(|a, b| {
            a.municipality
                .name
                .cmp(&b.municipality.name)
                .then_with(|| a.municipality.id.cmp(&b.municipality.id))
        });
        out
    }

    pub fn overview(&self, municipality_id: &str) -> Result<Overview, ServiceError> {
        let data = self.data();
        let municipality = data
            .municipality(municipality_id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("municipality {municipality_id}")))?;
        let mut published: Vec<&MinuteDocument> = data
            .minutes
            .iter()
            .filter(|m| m.municipality_id == municipality_id && m.status == MinuteStatus::Published)
            .collect();
        published.sort_by(|a, b| recent_first(a, b));

        let recent_minutes = published
            .iter()
            .take(5)
            .map(|m| {
                let meta = m.metadata.as_ref().expect("published minutes carry metadata");
                MinuteCard {
                    id: m.id.clone(),
                    meeting_date: meta.meeting_date,
                    meeting_type: meta.meeting_type.clone(),
                    subject_count: data.subjects_of(&m.id).count(),
                }
            })
            .collect();

        let mut members: Vec<ParticipantRecord> = data
            .participants
            .iter()
            .filter(|p| p.municipality_id == municipality_id && p.is_member())
            .cloned()
            .collect();
        members.sort_by(|a, b| a.full_name.cmp(&b.full_name));

        let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for m in &published {
            for s in data.subjects_of(&m.id) {
                for t in &s.topic_ids {
                    let ids = groups.entry(t.as_str()).or_default();
                    if !ids.contains(&m.id) {
                        ids.push(m.id.clone());
                    }
                }
            }
        }
        let mut topics: Vec<TopicGroup> = groups
            .into_iter()
            .filter_map(|(tid, minute_ids)| {
                let topic = data.topics.iter().find(|t| t.id == tid)?.clone();
                Some(TopicGroup { topic, minute_ids })
            })
            .collect();
        topics.sort_by(|a, b| a.topic.label.cmp(&b.topic.label));
        Ok(Overview {
            municipality,
            recent_minutes,
            members,
            topics,
        })
    }

    /// Drafts are only visible to admins; anyone else gets not-found.
    pub fn minute_view(&self, minute_id: &str, admin: bool) -> Result<MinuteView, ServiceError> {
        let data = self.data();
        let m = data
            .minute(minute_id)
            .filter(|m| admin || m.status == MinuteStatus::Published)
            .ok_or_else(|| ServiceError::NotFound(format!("minute {minute_id}")))?;
        let municipality = data
            .municipality(&m.municipality_id)
            .cloned()
            .expect("integrity checked");
        let participants = m
            .metadata
            .iter()
            .flat_map(|meta| meta.participant_ids.iter())
            .filter_map(|id| data.participants.iter().find(|p| &p.id == id).cloned())
            .collect();
        let mut subjects: Vec<SubjectView> = data
            .subjects_of(&m.id)
            .map(|s| SubjectView {
                subject: s.clone(),
                topics: s
                    .topic_ids
                    .iter()
                    .filter_map(|t| data.topics.iter().find(|x| &x.id == t).cloned())
                    .collect(),
            })
            .collect();
        subjects.sort_by_key(|s| s.subject.order);
        let mut voting_summary = VotingSummary::default();
        for tally in subjects.iter().filter_map(|s| s.subject.tally.as_ref()) {
            voting_summary.favor += tally.favor;
            voting_summary.against += tally.against;
            voting_summary.abstention += tally.abstention;
            voting_summary.subjects_voted += 1;
        }
        Ok(MinuteView {
            id: m.id.clone(),
            municipality,
            source_filename: m.source_filename.clone(),
            status: m.status,
            uploaded_at: m.uploaded_at,
            published_at: m.published_at,
            metadata: m.metadata.clone(),
            participants,
            subjects,
            voting_summary,
            raw_text_url: format!("/api/minutes/{}/text", m.id),
        })
    }

    pub fn raw_text(&self, minute_id: &str, admin: bool) -> Result<String, ServiceError> {
        let data = self.data();
        data.minute(minute_id)
            .filter(|m| admin || m.status == MinuteStatus::Published)
            .map(|m| m.raw_text.clone())
            .ok_or_else(|| ServiceError::NotFound(format!("minute {minute_id}")))
    }

    /// Every minute regardless of status, newest upload first.
    pub fn admin_minutes(&self) -> Vec<MinuteDocument> {
        let mut all = self.data().minutes.clone();
        all.sort_by(|a, b| b.uploaded_at.cmp(&a.uploaded_at).then_with(|| a.id.cmp(&b.id)));
        all
    }

    pub fn search(&self, query: &Query) -> Result<SearchResult, ServiceError> {
        Ok(search::search(&self.snapshot(), query)?)
    }

    pub fn timeline(&self, municipality_id: &str) -> Result<Vec<TimelineGroup>, ServiceError> {
        if self.data().municipality(municipality_id).is_none() {
            return Err(ServiceError::NotFound(format!("municipality {municipality_id}")));
        }
        match search::timeline(&self.snapshot(), municipality_id) {
            // a municipality added after the last rebuild has nothing published
            Err(SearchError::UnknownMunicipality(_)) => Ok(Vec::new()),
            other => Ok(other?),
        }
    }
}
