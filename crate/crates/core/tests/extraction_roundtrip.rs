//! Rendering a resolved minute and parsing it back must reproduce it.

use citilink_core::extraction::{
    extract_rule_based, render_normalized, validate_and_resolve, ExtractionResult, RawMetadata, RawParticipant,
    RawSubject, RawVote, Registries,
};
use citilink_core::votes::Position;
use citilink_core::{ParticipantRecord, TopicRecord};
use proptest::prelude::*;

const PEOPLE: [(&str, Option<&str>, Option<&str>); 6] = [
    ("Ana Sousa", Some("PS"), Some("mayor")),
    ("Bruno Almeida", Some("PS"), Some("councillor")),
    ("Carla Mendes", Some("PSD"), Some("councillor")),
    ("Diogo Ferreira", Some("PSD"), None),
    ("Eva Martins", None, Some("councillor")),
    ("Filipe Rocha", None, None),
];

const TOPICS: [&str; 4] = ["Health", "Finance", "Urbanism", "Culture"];

const WORDS: [&str; 12] = [
    "budget", "road", "school", "parish", "water", "plan", "park", "grant", "centre", "market", "bridge", "fair",
];

fn registries() -> Registries {
    Registries {
        municipality_id: "covilha".into(),
        participants: PEOPLE
            .iter()
            .map(|(name, party, role)| ParticipantRecord {
                id: format!("covilha-{}", name.to_lowercase().replace(' ', "-")),
                full_name: name.to_string(),
                party: party.map(str::to_string),
                role: role.map(str::to_string),
                municipality_id: "covilha".into(),
                unresolved: false,
            })
            .collect(),
        topics: TOPICS
            .iter()
            .map(|l| TopicRecord {
                id: format!("topic-{}", l.to_lowercase()),
                label: l.to_string(),
            })
            .collect(),
    }
}

fn phrase(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&WORDS[..]), 1..=max).prop_map(|w| w.join(" "))
}

fn position() -> impl Strategy<Value = Position> {
    prop_oneof![
        Just(Position::Favor),
        Just(Position::Against),
        Just(Position::Abstention)
    ]
}

fn subject() -> impl Strategy<Value = RawSubject> {
    (
        phrase(5),
        prop_oneof![Just(String::new()), phrase(12)],
        prop::sample::subsequence(TOPICS.to_vec(), 0..=2),
        prop::option::of(prop::collection::vec((0..PEOPLE.len(), position()), 1..=6)),
    )
        .prop_map(|(title, summary, topics, votes)| {
            let votes = votes.map(|vs| {
                let mut seen = std::collections::HashSet::new();
                vs.into_iter()
                    .filter(|(i, _)| seen.insert(*i))
                    .map(|(i, position)| RawVote {
                        participant_name: PEOPLE[i].0.to_string(),
                        position,
                    })
                    .collect()
            });
            RawSubject {
                title: format!("Approval of {title}"),
                summary,
                topic_labels: topics.into_iter().map(str::to_string).collect(),
                votes,
            }
        })
}

fn extraction() -> impl Strategy<Value = ExtractionResult> {
    (
        (2020i32..2027, 1u32..13, 1u32..29),
        phrase(3),
        prop::bool::ANY,
        prop::sample::subsequence((0..PEOPLE.len()).collect::<Vec<_>>(), 1..=PEOPLE.len()),
        prop::collection::vec(subject(), 0..5),
    )
        .prop_map(|((y, m, d), location, ordinary, present, subjects)| ExtractionResult {
            metadata_raw: RawMetadata {
                meeting_date: format!("{y:04}-{m:02}-{d:02}"),
                location: format!("Room {location}"),
                meeting_type: if ordinary { "ordinária" } else { "extraordinária" }.into(),
                participants: present
                    .into_iter()
                    .map(|i| RawParticipant {
                        name: PEOPLE[i].0.into(),
                        party: PEOPLE[i].1.map(str::to_string),
                        role: PEOPLE[i].2.map(str::to_string),
                    })
                    .collect(),
            },
            subjects_raw: subjects,
            extractor_id: "generated".into(),
            model_id: None,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_then_parse_is_identity(raw in extraction()) {
        let reg = registries();
        let first = validate_and_resolve(&raw, &reg, "covilha-x").expect("generated minutes are valid");
        let text = render_normalized("Covilhã", &first, &reg.participants, &reg.topics);
        let parsed = extract_rule_based(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let second = validate_and_resolve(&parsed, &reg, "covilha-x").expect("rendered minutes are valid");
        prop_assert_eq!(&first.metadata, &second.metadata);
        prop_assert_eq!(&first.subjects, &second.subjects);
        prop_assert!(second.provisional.is_empty());
        prop_assert_eq!(render_normalized("Covilhã", &second, &reg.participants, &reg.topics), text);
    }
}
