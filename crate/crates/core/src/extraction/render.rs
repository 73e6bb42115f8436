use std::fmt::Write;

use super::ResolvedMinute;
use crate::model::{ParticipantRecord, TopicRecord};
use crate::votes::Position;

/// Writes a resolved minute back out in the normalized minute format.
///
/// Names and labels come from the given registries; ids missing from them
/// are written verbatim.
pub fn render_normalized(
    municipality_name: &str,
    minute: &ResolvedMinute,
    participants: &[ParticipantRecord],
    topics: &[TopicRecord],
) -> String {
    let person = |id: &str| participants.iter().find(|p| p.id == id);
    let name = |id: &str| person(id).map_or(id.to_string(), |p| p.full_name.clone());

    let meta = &minute.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "MUNICIPIO: {municipality_name}");
    let _ = writeln!(out, "DATA: {}", meta.meeting_date.format("%Y-%m-%d"));
    let _ = writeln!(out, "LOCAL: {}", meta.location);
    let _ = writeln!(out, "TIPO: {}", meta.meeting_type);
    let present: Vec<String> = meta
        .participant_ids
        .iter()
        .map(|id| match person(id) {
            Some(p) if p.party.is_some() || p.role.is_some() => format!(
                "{} ({}, {})",
                p.full_name,
                p.party.as_deref().unwrap_or(""),
                p.role.as_deref().unwrap_or("")
            ),
            _ => name(id),
        })
        .collect();
    let _ = writeln!(out, "PRESENCAS: {}", present.join("; "));

    for s in &minute.subjects {
        let _ = writeln!(out, "ASSUNTO: {}", s.title);
        if !s.topic_ids.is_empty() {
            let labels: Vec<&str> = s
                .topic_ids
                .iter()
                .map(|id| {
                    topics
                        .iter()
                        .find(|t| &t.id == id)
                        .map_or(id.as_str(), |t| t.label.as_str())
                })
                .collect();
            let _ = writeln!(out, "TEMAS: {}", labels.join("; "));
        }
        if !s.summary.is_empty() {
            let _ = writeln!(out, "{}", s.summary);
        }
        if let Some(positions) = s.tally.as_ref().and_then(|t| t.positions.as_ref()) {
            let clause = |p: Position, key: &str| {
                let names: Vec<String> = positions
                    .iter()
                    .filter(|v| v.position == p)
                    .map(|v| name(&v.participant_id))
                    .collect();
                format!("{key}: {}", names.join("; "))
            };
            let _ = writeln!(
                out,
                "VOTACAO: {} | {} | {}",
                clause(Position::Favor, "favor"),
                clause(Position::Against, "contra"),
                clause(Position::Abstention, "abstencao")
            );
        }
    }
    out
}
