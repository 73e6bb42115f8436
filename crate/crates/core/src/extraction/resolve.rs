use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExtractionResult;
use crate::model::{
    parse_meeting_date, slugify, MeetingType, MinuteMetadata, ParticipantRecord, SubjectRecord, TopicRecord,
    VotePosition,
};
use crate::resolve::{resolve_participant, NameHints, Resolution};
use crate::votes::tally_votes;

/// Registry collections used to cross-reference one minute.
#[derive(Debug, Clone, Default)]
pub struct Registries {
    pub municipality_id: String,
    /// Participants of this municipality only.
    pub participants: Vec<ParticipantRecord>,
    pub topics: Vec<TopicRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl ValidationIssue {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedMinute {
    pub metadata: MinuteMetadata,
    pub subjects: Vec<SubjectRecord>,
    /// Topics that did not exist in the registry, sorted by id.
    pub new_topics: Vec<TopicRecord>,
    /// Provisional participants created for unmatched names, sorted by id.
    pub provisional: Vec<ParticipantRecord>,
}

impl ResolvedMinute {
    /// Ids of every unresolved participant the minute refers to, including
    /// provisional entries that already exist in the registry.
    pub fn unresolved_ids(&self, registry: &[ParticipantRecord]) -> Vec<String> {
        let mut ids: Vec<String> = self.provisional.iter().map(|p| p.id.clone()).collect();
        let referenced = self.metadata.participant_ids.iter().chain(
            self.subjects
                .iter()
                .filter_map(|s| s.tally.as_ref()?.positions.as_ref())
                .flatten()
                .map(|v| &v.participant_id),
        );
        for id in referenced {
            if registry.iter().any(|p| &p.id == id && p.unresolved) && !ids.contains(id) {
                ids.push(id.clone());
            }
        }
        ids.sort();
        ids.dedup();
        ids
    }
}

pub fn subject_id(minute_id: &str, order: u32) -> String {
    format!("{minute_id}-s{order}")
}

pub fn topic_id(label: &str) -> String {
    format!("topic-{}", slugify(label))
}

struct Resolver<'a> {
    registries: &'a Registries,
    provisional: BTreeMap<String, ParticipantRecord>,
}

impl Resolver<'_> {
    /// Resolves against the registry as loaded, so the outcome for a name
    /// never depends on which other names were seen first.
    fn participant(&mut self, name: &str, hints: &NameHints) -> String {
        match resolve_participant(
            name,
            &self.registries.participants,
            &self.registries.municipality_id,
            hints,
        ) {
            Resolution::Matched(id) => id,
            Resolution::Provisional(record) => {
                let id = record.id.clone();
                let entry = self.provisional.entry(id.clone()).or_insert(record);
                if entry.party.is_none() {
                    entry.party = hints.party.clone();
                }
                if entry.role.is_none() {
                    entry.role = hints.role.clone();
                }
                id
            }
        }
    }
}

/// Turns raw extractor output into registry-backed records for `minute_id`.
pub fn validate_and_resolve(
    result: &ExtractionResult,
    registries: &Registries,
    minute_id: &str,
) -> Result<ResolvedMinute, Vec<ValidationIssue>> {
    let mut issues = Vec::new();
    let mut resolver = Resolver {
        registries,
        provisional: BTreeMap::new(),
    };
    let raw = &result.metadata_raw;

    let meeting_date = parse_meeting_date(&raw.meeting_date)
        .map_err(|e| issues.push(ValidationIssue::new("metadata_raw.meeting_date", e)))
        .ok();
    let meeting_type = raw
        .meeting_type
        .parse::<MeetingType>()
        .map_err(|e| issues.push(ValidationIssue::new("metadata_raw.meeting_type", e)))
        .ok();

    let mut participant_ids = Vec::new();
    for (i, p) in raw.participants.iter().enumerate() {
        if p.name.trim().is_empty() {
            issues.push(ValidationIssue::new(
                format!("metadata_raw.participants[{i}].name"),
                "empty name",
            ));
            continue;
        }
        let hints = NameHints {
            party: p.party.clone(),
            role: p.role.clone(),
        };
        let id = resolver.participant(&p.name, &hints);
        if !participant_ids.contains(&id) {
            participant_ids.push(id);
        }
    }

    let known_topics: BTreeMap<String, &TopicRecord> =
        registries.topics.iter().map(|t| (topic_id(&t.label), t)).collect();
    let mut new_topics: BTreeMap<String, TopicRecord> = BTreeMap::new();
    let mut subjects = Vec::with_capacity(result.subjects_raw.len());

    for (i, s) in result.subjects_raw.iter().enumerate() {
        let order = i as u32 + 1;
        let prefix = format!("subjects_raw[{i}]");
        if s.title.trim().is_empty() {
            issues.push(ValidationIssue::new(format!("{prefix}.title"), "empty title"));
        }
        let mut topic_ids: Vec<String> = Vec::new();
        for label in &s.topic_labels {
            let key = topic_id(label);
            if key == "topic-" {
                issues.push(ValidationIssue::new(
                    format!("{prefix}.topic_labels"),
                    format!("unusable label {label:?}"),
                ));
                continue;
            }
            let id = match known_topics.get(&key) {
                Some(t) => t.id.clone(),
                None => {
                    new_topics.entry(key.clone()).or_insert_with(|| TopicRecord {
                        id: key.clone(),
                        label: label.trim().to_string(),
                    });
                    key
                }
            };
            if !topic_ids.contains(&id) {
                topic_ids.push(id);
            }
        }

        let tally = match &s.votes {
            None => None,
            Some(votes) => {
                let mut positions: Vec<VotePosition> = votes
                    .iter()
                    .map(|v| VotePosition {
                        participant_id: resolver.participant(&v.participant_name, &NameHints::default()),
                        position: v.position,
                    })
                    .collect();
                // canonical order: by class, then by mention
                positions.sort_by_key(|v| v.position);
                match tally_votes(&positions) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        issues.push(ValidationIssue::new(format!("{prefix}.votes"), e.to_string()));
                        None
                    }
                }
            }
        };

        subjects.push(SubjectRecord {
            id: subject_id(minute_id, order),
            minute_id: minute_id.to_string(),
            order,
            title: s.title.trim().to_string(),
            summary: s.summary.trim().to_string(),
            topic_ids,
            tally,
        });
    }

    match (meeting_date, meeting_type) {
        (Some(meeting_date), Some(meeting_type)) if issues.is_empty() => Ok(ResolvedMinute {
            metadata: MinuteMetadata {
                meeting_date,
                location: raw.location.trim().to_string(),
                meeting_type,
                participant_ids,
            },
            subjects,
            new_topics: new_topics.into_values().collect(),
            provisional: resolver.provisional.into_values().collect(),
        }),
        _ => Err(issues),
    }
}
