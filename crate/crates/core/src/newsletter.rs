//! Plain-text digest of newly published minutes for newsletter subscribers.
//! Delivery is someone else's job; this only renders the text.

use std::collections::BTreeMap;
use std::fmt::Write;

use chrono::NaiveDate;
use serde::Serialize;

use crate::model::MinuteStatus;
use crate::store::DataSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigestSection {
    pub municipality_id: String,
    pub municipality_name: String,
    pub subscribers: usize,
    pub minute_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Digest {
    pub since: NaiveDate,
    pub sections: Vec<DigestSection>,
    #[serde(skip)]
    pub text: String,
}

/// Minutes published on or after `since`, grouped per municipality that has
/// at least one subscriber. A subscriber without a municipality list follows
/// every municipality.
pub fn digest(data: &DataSet, since: NaiveDate) -> Digest {
    let mut followers: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &data.municipalities {
        let n = data
            .subscribers
            .iter()
            .filter(|s| s.municipality_ids.is_empty() || s.municipality_ids.contains(&m.id))
            .count();
        if n > 0 {
            followers.insert(m.id.as_str(), n);
        }
    }

    let mut sections = Vec::new();
    let mut text = String::new();
    let _ = writeln!(text, "Council minutes published since {since}");
    let mut municipalities: Vec<_> = data
        .municipalities
        .iter()
        .filter(|m| followers.contains_key(m.id.as_str()))
        .collect();
    municipalities.sort_by(|a, b| a.name.cmp(&b.name));
    for m in municipalities {
        let mut minutes: Vec<_> = data
            .minutes
            .iter()
            .filter(|d| d.municipality_id == m.id && d.status == MinuteStatus::Published)
            .filter(|d| d.published_at.is_some_and(|t| t.date_naive() >= since))
            .collect();
        minutes.sort_by_key(|d| (d.metadata.as_ref().map(|x| x.meeting_date), d.id.clone()));
        let _ = writeln!(text, "\n{} ({} new)", m.name, minutes.len());
        for d in &minutes {
            let meta = d.metadata.as_ref().expect("published minutes carry metadata");
            let titles: Vec<&str> = data.subjects_of(&d.id).map(|s| s.title.as_str()).collect();
            let _ = writeln!(text, "  {} {} meeting: {}", meta.meeting_date, meta.meeting_type, d.id);
            for t in titles {
                let _ = writeln!(text, "    - {t}");
            }
        }
        if minutes.is_empty() {
            let _ = writeln!(text, "  nothing new");
        }
        sections.push(DigestSection {
            municipality_id: m.id.clone(),
            municipality_name: m.name.clone(),
            subscribers: followers[m.id.as_str()],
            minute_ids: minutes.iter().map(|d| d.id.clone()).collect(),
        });
    }
    Digest { since, sections, text }
}
