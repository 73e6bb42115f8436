use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matching::SubjectPair;
use super::metrics::{macro_f1, Counts, Prf};
use crate::extraction::{RawSubject, RawVote};
use crate::text::normalize_name;
use crate::votes::Position;

pub const CLASSES: [Position; 3] = [Position::Favor, Position::Against, Position::Abstention];

fn class_index(p: Position) -> usize {
    match p {
        Position::Favor => 0,
        Position::Against => 1,
        Position::Abstention => 2,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteCounts(pub [Counts; 3]);

impl VoteCounts {
    fn gold_only(&mut self, p: Position) {
        self.0[class_index(p)].fn_ += 1;
    }

    fn pred_only(&mut self, p: Position) {
        self.0[class_index(p)].fp += 1;
    }

    fn aligned(&mut self, gold: Position, pred: Position) {
        if gold == pred {
            self.0[class_index(gold)].tp += 1;
        } else {
            self.gold_only(gold);
            self.pred_only(pred);
        }
    }

    pub fn add(&mut self, other: &VoteCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            a.add(b);
        }
    }

    /// Votes of a matched subject pair, aligned by normalized participant
    /// name. A repeated name aligns occurrence by occurrence.
    pub fn add_pair(&mut self, gold: &[RawVote], pred: &[RawVote]) {
        let mut pending: BTreeMap<String, Vec<Position>> = BTreeMap::new();
        for v in pred.iter().rev() {
            pending
                .entry(normalize_name(&v.participant_name))
                .or_default()
                .push(v.position);
        }
        for v in gold {
            match pending.get_mut(&normalize_name(&v.participant_name)).and_then(Vec::pop) {
                Some(p) => self.aligned(v.position, p),
                None => self.gold_only(v.position),
            }
        }
        for p in pending.into_values().flatten() {
            self.pred_only(p);
        }
    }

    /// Every vote of a document: matched subjects pair their votes, votes on
    /// unmatched subjects are misses or spurious.
    pub fn add_document(&mut self, gold: &[RawSubject], pred: &[RawSubject], pairs: &[SubjectPair]) {
        let votes = |s: &RawSubject| s.votes.clone().unwrap_or_default();
        let mut gold_seen = vec![false; gold.len()];
        let mut pred_seen = vec![false; pred.len()];
        for pair in pairs {
            gold_seen[pair.gold] = true;
            pred_seen[pair.pred] = true;
            self.add_pair(&votes(&gold[pair.gold]), &votes(&pred[pair.pred]));
        }
        for (s, _) in gold.iter().zip(&gold_seen).filter(|(_, seen)| !**seen) {
            votes(s).iter().for_each(|v| self.gold_only(v.position));
        }
        for (s, _) in pred.iter().zip(&pred_seen).filter(|(_, seen)| !**seen) {
            votes(s).iter().for_each(|v| self.pred_only(v.position));
        }
    }

    pub fn scores(&self) -> VotingScores {
        let per_class = CLASSES
            .iter()
            .zip(self.0)
            .map(|(c, counts)| {
                (
                    c.as_str().to_string(),
                    ClassScore {
                        prf: counts.prf(),
                        counts,
                    },
                )
            })
            .collect();
        VotingScores {
            per_class,
            macro_f1: macro_f1(&self.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    #[serde(flatten)]
    pub prf: Prf,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingScores {
    pub per_class: BTreeMap<String, ClassScore>,
    pub macro_f1: f64,
}

/// Voting macro F1 for one document's subjects and their matching.
pub fn voting_macro_f1(gold: &[RawSubject], pred: &[RawSubject], pairs: &[SubjectPair]) -> VotingScores {
    let mut counts = VoteCounts::default();
    counts.add_document(gold, pred, pairs);
    counts.scores()
}
