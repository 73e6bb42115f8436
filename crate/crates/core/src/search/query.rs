use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::SearchError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Minutes,
    Subjects,
    #[default]
    All,
}

impl std::str::FromStr for Scope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minutes" => Ok(Scope::Minutes),
            "subjects" => Ok(Scope::Subjects),
            "all" => Ok(Scope::All),
            other => Err(format!("unknown scope {other:?} (expected minutes, subjects or all)")),
        }
    }
}

/// Inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

/// Multi-select facet filters: OR within a dimension, AND across them.
/// An empty list means the dimension is not filtered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facets {
    #[serde(default)]
    pub municipality_ids: Vec<String>,
    #[serde(default)]
    pub topic_ids: Vec<String>,
    #[serde(default)]
    pub parties: Vec<String>,
    #[serde(default)]
    pub participant_ids: Vec<String>,
    #[serde(default)]
    pub meeting_types: Vec<String>,
    #[serde(default)]
    pub date_range: Option<DateRange>,
}

pub const MAX_PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub scope: Scope,
    #[serde(default)]
    pub facets: Facets,
    pub page: usize,
    pub page_size: usize,
}

impl Default for Query {
    fn default() -> Self {
        Query {
            text: String::new(),
            scope: Scope::All,
            facets: Facets::default(),
            page: 1,
            page_size: 10,
        }
    }
}

impl Query {
    pub fn text(text: impl Into<String>) -> Self {
        Query {
            text: text.into(),
            ..Query::default()
        }
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let mut fields = Vec::new();
        if self.page < 1 {
            fields.push(("page".to_string(), "must be at least 1".to_string()));
        }
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            fields.push((
                "page_size".to_string(),
                format!("must be between 1 and {MAX_PAGE_SIZE}"),
            ));
        }
        if let Some(r) = self.facets.date_range {
            if r.start > r.end {
                fields.push(("date_range".to_string(), "start is after end".to_string()));
            }
        }
        if fields.is_empty() {
            Ok(())
        } else {
            Err(SearchError::InvalidQuery(fields))
        }
    }
}
