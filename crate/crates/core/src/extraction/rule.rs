//! Parser for the normalized minute format.
//!
//! ```text
//! MUNICIPIO: Covilhã
//! DATA: 2025-03-14
//! LOCAL: Salão Nobre
//! TIPO: ordinária
//! PRESENCAS: Ana Sousa (PS, mayor); Bruno Almeida (PS, councillor)
//! ASSUNTO: Municipal budget revision
//! TEMAS: Finance
//! Free text summary lines...
//! VOTACAO: favor: Ana Sousa; Bruno Almeida | contra: | abstencao:
//! ```

use thiserror::Error;

use super::{ExtractionResult, RawMetadata, RawParticipant, RawSubject, RawVote};
use crate::votes::Position;

const HEADER: [&str; 5] = ["MUNICIPIO", "DATA", "LOCAL", "TIPO", "PRESENCAS"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: expected `{expected}:` header line")]
    MissingHeader { line: usize, expected: &'static str },
    #[error("line {line}: malformed participant entry {entry:?}")]
    MalformedParticipant { line: usize, entry: String },
    #[error("line {line}: malformed vote line in subject {subject:?}: {reason}")]
    MalformedVote {
        line: usize,
        subject: String,
        reason: String,
    },
    #[error("line {line}: subject title is empty")]
    EmptyTitle { line: usize },
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix(':')?;
    Some(rest.trim())
}

/// The value of the `MUNICIPIO:` line, when present.
pub fn header_municipality(text: &str) -> Option<String> {
    text.lines()
        .next()
        .and_then(|l| field(l.trim_end_matches('\r'), "MUNICIPIO"))
        .map(str::to_string)
}

fn parse_participant(entry: &str, line: usize) -> Result<RawParticipant, ParseError> {
    let malformed = || ParseError::MalformedParticipant {
        line,
        entry: entry.to_string(),
    };
    let (name, extra) = match entry.find('(') {
        None => (entry, None),
        Some(open) => {
            let inner = entry[open + 1..].strip_suffix(')').ok_or_else(malformed)?;
            if inner.contains(['(', ')']) {
                return Err(malformed());
            }
            (&entry[..open], Some(inner))
        }
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(malformed());
    }
    let nonempty = |s: &str| Some(s.trim()).filter(|s| !s.is_empty()).map(str::to_string);
    let (party, role) = match extra {
        None => (None, None),
        Some(inner) => {
            let mut parts = inner.splitn(2, ',');
            (parts.next().and_then(nonempty), parts.next().and_then(nonempty))
        }
    };
    Ok(RawParticipant {
        name: name.to_string(),
        party,
        role,
    })
}

fn parse_vote_line(body: &str, line: usize, subject: &str) -> Result<Vec<RawVote>, ParseError> {
    let err = |reason: String| ParseError::MalformedVote {
        line,
        subject: subject.to_string(),
        reason,
    };
    let mut votes = Vec::new();
    let mut seen = Vec::new();
    for clause in body.split('|') {
        let clause = clause.trim();
        if clause.is_empty() {
            continue;
        }
        let (key, names) = clause
            .split_once(':')
            .ok_or_else(|| err(format!("clause {clause:?} has no `:`")))?;
        let position = Position::from_label(key).ok_or_else(|| err(format!("unknown position {:?}", key.trim())))?;
        if seen.contains(&position) {
            return Err(err(format!("position {position} given twice")));
        }
        seen.push(position);
        for name in names.split(';').map(str::trim).filter(|n| !n.is_empty()) {
            votes.push(RawVote {
                participant_name: name.to_string(),
                position,
            });
        }
    }
    Ok(votes)
}

struct Block {
    title: String,
    summary: Vec<String>,
    topics: Vec<String>,
    votes: Option<Vec<RawVote>>,
}

impl Block {
    fn finish(self) -> RawSubject {
        RawSubject {
            title: self.title,
            summary: self.summary.join(" "),
            topic_labels: self.topics,
            votes: self.votes,
        }
    }
}

pub fn extract_rule_based(minute_text: &str) -> Result<ExtractionResult, ParseError> {
    let lines: Vec<&str> = minute_text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut header = Vec::with_capacity(HEADER.len());
    for (i, key) in HEADER.iter().enumerate() {
        let value = lines
            .get(i)
            .and_then(|l| field(l, key))
            .ok_or(ParseError::MissingHeader {
                line: i + 1,
                expected: key,
            })?;
        header.push(value);
    }

    let participants = header[4]
        .split(';')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| parse_participant(e, 5))
        .collect::<Result<Vec<_>, _>>()?;

    let mut subjects = Vec::new();
    let mut current: Option<Block> = None;
    for (idx, raw) in lines.iter().enumerate().skip(HEADER.len()) {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(title) = field(line, "ASSUNTO") {
            if title.is_empty() {
                return Err(ParseError::EmptyTitle { line: line_no });
            }
            if let Some(block) = current.take() {
                subjects.push(block.finish());
            }
            current = Some(Block {
                title: title.to_string(),
                summary: Vec::new(),
                topics: Vec::new(),
                votes: None,
            });
            continue;
        }
        // text before the first subject is preamble
        let Some(block) = current.as_mut() else { continue };
        if let Some(topics) = field(line, "TEMAS") {
            block.topics.extend(
                topics
                    .split(';')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_string),
            );
        } else if let Some(body) = field(line, "VOTACAO") {
            if block.votes.is_some() {
                return Err(ParseError::MalformedVote {
                    line: line_no,
                    subject: block.title.clone(),
                    reason: "second VOTACAO line".into(),
                });
            }
            block.votes = Some(parse_vote_line(body, line_no, &block.title)?);
        } else if !line.is_empty() {
            block.summary.push(line.to_string());
        }
    }
    if let Some(block) = current {
        subjects.push(block.finish());
    }

    Ok(ExtractionResult {
        metadata_raw: RawMetadata {
            meeting_date: header[1].to_string(),
            location: header[2].to_string(),
            meeting_type: header[3].to_string(),
            participants,
        },
        subjects_raw: subjects,
        extractor_id: "rule".into(),
        model_id: None,
    })
}
