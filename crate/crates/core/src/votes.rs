//! Vote positions, tallies and outcomes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::model::{VotePosition, VoteTally};
use crate::text::normalize_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Favor,
    Against,
    Abstention,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Favor, Position::Against, Position::Abstention];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Favor => "favor",
            Position::Against => "against",
            Position::Abstention => "abstention",
        }
    }

    /// Maps the bilingual labels seen in minutes and model output onto the
    /// three classes.
    pub fn from_label(label: &str) -> Option<Position> {
        match normalize_name(label).as_str() {
            "favor" | "a favor" | "in favor" | "in favour" => Some(Position::Favor),
            "contra" | "against" => Some(Position::Against),
            "abstencao" | "abstention" | "abstained" => Some(Position::Abstention),
            _ => None,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Position::from_label(s).ok_or_else(|| format!("unknown vote position label {s:?}"))
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Approved,
    Rejected,
    Tied,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TallyError {
    #[error("participant {0} voted more than once")]
    DuplicateVoter(String),
}

/// Abstentions never move the outcome.
pub fn derive_outcome(tally: &VoteTally) -> Outcome {
    outcome_of(tally.favor, tally.against)
}

fn outcome_of(favor: u32, against: u32) -> Outcome {
    use std::cmp::Ordering::*;
    match favor.cmp(&against) {
        Greater => Outcome::Approved,
        Less => Outcome::Rejected,
        Equal => Outcome::Tied,
    }
}

pub fn tally_votes(positions: &[VotePosition]) -> Result<VoteTally, TallyError> {
    let mut seen = HashSet::with_capacity(positions.len());
    let (mut favor, mut against, mut abstention) = (0u32, 0u32, 0u32);
    for vote in positions {
        if !seen.insert(vote.participant_id.as_str()) {
            return Err(TallyError::DuplicateVoter(vote.participant_id.clone()));
        }
        match vote.position {
            Position::Favor => favor += 1,
            Position::Against => against += 1,
            Position::Abstention => abstention += 1,
        }
    }
    Ok(VoteTally {
        favor,
        against,
        abstention,
        positions: Some(positions.to_vec()),
        outcome: outcome_of(favor, against),
    })
}
