use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::bm25::Bm25Params;
use super::SearchError;
use crate::exec;
use crate::model::MinuteStatus;
use crate::store::DataSet;
use crate::text::tokenize;

/// Leading line of a serialized snapshot.
pub const SNAPSHOT_HEADER: &str = "CIDX1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Minute,
    Subject,
}

/// Everything needed to index one searchable unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitInput {
    pub id: String,
    pub kind: UnitKind,
    pub minute_id: String,
    pub municipality_id: String,
    pub title: String,
    pub text: String,
    pub topic_ids: Vec<String>,
    pub parties: Vec<String>,
    pub participant_ids: Vec<String>,
    pub meeting_date: NaiveDate,
    pub meeting_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinuteEntry {
    pub id: String,
    pub municipality_id: String,
    pub meeting_date: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub unit: u32,
    pub tf: u32,
}

/// Immutable inverted index plus stored facet fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSnapshot {
    pub(crate) params: Bm25Params,
    /// Sorted by id; a unit's position is its posting number.
    pub(crate) units: Vec<UnitInput>,
    pub(crate) postings: BTreeMap<String, Vec<Posting>>,
    pub(crate) doc_lengths: Vec<u32>,
    pub(crate) avg_doc_length: f64,
    pub(crate) minutes: Vec<MinuteEntry>,
    pub(crate) municipality_ids: Vec<String>,
}

impl Default for IndexSnapshot {
    fn default() -> Self {
        IndexSnapshot::from_units(Vec::new(), Vec::new(), Vec::new(), Bm25Params::default()).0
    }
}

fn sorted_dedup(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v.dedup();
    v
}

impl IndexSnapshot {
    /// Indexes arbitrary units. Units without any token are left out and
    /// reported in the returned warning list.
    pub fn from_units(
        mut units: Vec<UnitInput>,
        minutes: Vec<MinuteEntry>,
        municipality_ids: Vec<String>,
        params: Bm25Params,
    ) -> (IndexSnapshot, Vec<String>) {
        for u in &mut units {
            u.topic_ids = sorted_dedup(std::mem::take(&mut u.topic_ids));
            u.parties = sorted_dedup(std::mem::take(&mut u.parties));
            u.participant_ids = sorted_dedup(std::mem::take(&mut u.participant_ids));
        }
        units.sort_by(|a, b| a.id.cmp(&b.id));
        units.dedup_by(|a, b| a.id == b.id);

        let tokenized: Vec<Vec<String>> = exec::map_collect(&units, |u| tokenize(&u.text));
        let mut warnings = Vec::new();
        let mut kept = Vec::with_capacity(units.len());
        let mut kept_tokens = Vec::with_capacity(units.len());
        for (u, toks) in units.into_iter().zip(tokenized) {
            if toks.is_empty() {
                warnings.push(format!("unit {} has no indexable text; skipped", u.id));
            } else {
                kept.push(u);
                kept_tokens.push(toks);
            }
        }

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(kept.len());
        for (i, toks) in kept_tokens.iter().enumerate() {
            doc_lengths.push(toks.len() as u32);
            let mut counts: HashMap<&str, u32> = HashMap::new();
            for t in toks {
                *counts.entry(t.as_str()).or_default() += 1;
            }
            for (term, tf) in counts {
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push(Posting { unit: i as u32, tf });
            }
        }
        // units are visited in order, so every posting list is already sorted
        let total: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avg_doc_length = if doc_lengths.is_empty() {
            0.0
        } else {
            total as f64 / doc_lengths.len() as f64
        };

        let mut minutes = minutes;
        minutes.sort_by(|a, b| a.id.cmp(&b.id));
        let snapshot = IndexSnapshot {
            params,
            units: kept,
            postings,
            doc_lengths,
            avg_doc_length,
            minutes,
            municipality_ids: sorted_dedup(municipality_ids),
        };
        (snapshot, warnings)
    }

    /// One minute-body unit per published minute plus one unit per subject.
    pub fn build(data: &DataSet, params: Bm25Params) -> (IndexSnapshot, Vec<String>) {
        let mut warnings = Vec::new();
        let mut units = Vec::new();
        let mut minutes = Vec::new();
        let party_of: HashMap<&str, Option<&str>> = data
            .participants
            .iter()
            .map(|p| (p.id.as_str(), p.party.as_deref()))
            .collect();
        let municipality_name: HashMap<&str, &str> = data
            .municipalities
            .iter()
            .map(|m| (m.id.as_str(), m.name.as_str()))
            .collect();

        for minute in data.minutes.iter().filter(|m| m.status == MinuteStatus::Published) {
            let Some(meta) = &minute.metadata else {
                warnings.push(format!("minute {} is published without metadata; skipped", minute.id));
                continue;
            };
            let subjects: Vec<_> = data.subjects.iter().filter(|s| s.minute_id == minute.id).collect();
            let parties: Vec<String> = meta
                .participant_ids
                .iter()
                .filter_map(|id| party_of.get(id.as_str()).copied().flatten())
                .map(str::to_string)
                .collect();
            let base = UnitInput {
                id: minute.id.clone(),
                kind: UnitKind::Minute,
                minute_id: minute.id.clone(),
                municipality_id: minute.municipality_id.clone(),
                title: format!(
                    "{} {}",
                    municipality_name
                        .get(minute.municipality_id.as_str())
                        .copied()
                        .unwrap_or(&minute.municipality_id),
                    meta.meeting_date
                ),
                text: minute.raw_text.clone(),
                topic_ids: subjects.iter().flat_map(|s| s.topic_ids.iter().cloned()).collect(),
                parties,
                participant_ids: meta.participant_ids.clone(),
                meeting_date: meta.meeting_date,
                meeting_type: meta.meeting_type.to_string(),
            };
            for s in &subjects {
                units.push(UnitInput {
                    id: s.id.clone(),
                    kind: UnitKind::Subject,
                    title: s.title.clone(),
                    text: format!("{}\n{}", s.title, s.summary),
                    topic_ids: s.topic_ids.clone(),
                    ..base.clone()
                });
            }
            units.push(base);
            minutes.push(MinuteEntry {
                id: minute.id.clone(),
                municipality_id: minute.municipality_id.clone(),
                meeting_date: meta.meeting_date,
            });
        }
        let municipality_ids = data.municipalities.iter().map(|m| m.id.clone()).collect();
        let (snapshot, mut more) = IndexSnapshot::from_units(units, minutes, municipality_ids, params);
        warnings.append(&mut more);
        (snapshot, warnings)
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[UnitInput] {
        &self.units
    }

    pub fn unit(&self, id: &str) -> Option<&UnitInput> {
        self.units
            .binary_search_by(|u| u.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.units[i])
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, unit: usize) -> u32 {
        self.doc_lengths[unit]
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_freq(&self, term: &str, unit: usize) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by_key(&(unit as u32), |p| p.unit)
                    .ok()
                    .map(|i| list[i].tf)
            })
            .unwrap_or(0)
    }

    pub(crate) fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn minutes(&self) -> &[MinuteEntry] {
        &self.minutes
    }

    pub fn has_municipality(&self, id: &str) -> bool {
        self.municipality_ids.binary_search_by(|m| m.as_str().cmp(id)).is_ok()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(SNAPSHOT_HEADER.as_bytes());
        out.push(b'\n');
        serde_json::to_writer(&mut out, self).expect("snapshot serializes");
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<IndexSnapshot, SearchError> {
        let header_len = SNAPSHOT_HEADER.len() + 1;
        if bytes.len() < header_len
            || &bytes[..header_len - 1] != SNAPSHOT_HEADER.as_bytes()
            || bytes[header_len - 1] != b'\n'
        {
            return Err(SearchError::Corrupt(format!("missing {SNAPSHOT_HEADER} header")));
        }
        let snap: IndexSnapshot =
            serde_json::from_slice(&bytes[header_len..]).map_err(|e| SearchError::Corrupt(e.to_string()))?;
        snap.check().map_err(SearchError::Corrupt)?;
        Ok(snap)
    }

    /// Structural invariants of a loaded snapshot.
    pub fn check(&self) -> Result<(), String> {
        if self.doc_lengths.len() != self.units.len() {
            return Err("doc_lengths and units differ in length".into());
        }
        if self.doc_lengths.contains(&0) {
            return Err("zero-length unit".into());
        }
        let n = self.units.len() as u32;
        for (term, list) in &self.postings {
            if list.iter().any(|p| p.unit >= n || p.tf == 0) {
                return Err(format!("posting for {term:?} references a missing unit"));
            }
            if list.windows(2).any(|w| w[0].unit >= w[1].unit) {
                return Err(format!("postings for {term:?} are not sorted"));
            }
        }
        let ids: BTreeSet<&str> = self.units.iter().map(|u| u.id.as_str()).collect();
        if ids.len() != self.units.len() {
            return Err("duplicate unit ids".into());
        }
        Ok(())
    }
}
