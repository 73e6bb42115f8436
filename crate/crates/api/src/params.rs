//! Query-string parsing. Facet parameters may repeat; anything not listed
//! here is rejected so that typos do not silently widen a search.

use chrono::NaiveDate;
use citilink_core::search::{DateRange, Query, Scope};

use crate::error::ApiError;
use axum::http::StatusCode;

pub const SEARCH_PARAMS: [&str; 11] = [
    "q",
    "scope",
    "municipality_id",
    "topic_id",
    "party",
    "participant_id",
    "meeting_type",
    "date_from",
    "date_to",
    "page",
    "page_size",
];

pub fn pairs(raw: Option<&str>) -> Vec<(String, String)> {
    url::form_urlencoded::parse(raw.unwrap_or("").as_bytes())
        .into_owned()
        .collect()
}

fn invalid(fields: Vec<(String, String)>) -> ApiError {
    ApiError::with_fields(StatusCode::BAD_REQUEST, "invalid query parameters", fields)
}

/// `page` and `page_size` for list endpoints; other keys must be in `allowed`.
pub fn paging(pairs: &[(String, String)], allowed: &[&str], default_size: usize) -> Result<(usize, usize), ApiError> {
    let mut errors = Vec::new();
    let (mut page, mut size) = (1, default_size);
    for (k, v) in pairs {
        match k.as_str() {
            "page" => match v.parse::<usize>() {
                Ok(p) if p >= 1 => page = p,
                _ => errors.push((k.clone(), "must be a positive integer".to_string())),
            },
            "page_size" => match v.parse::<usize>() {
                Ok(s) if (1..=citilink_core::search::MAX_PAGE_SIZE).contains(&s) => size = s,
                _ => errors.push((
                    k.clone(),
                    format!("must be between 1 and {}", citilink_core::search::MAX_PAGE_SIZE),
                )),
            },
            other if allowed.contains(&other) => {}
            other => errors.push((other.to_string(), "unknown parameter".to_string())),
        }
    }
    if errors.is_empty() {
        Ok((page, size))
    } else {
        Err(invalid(errors))
    }
}

/// Builds a [`Query`] from search parameters. Validation of paging and the
/// date range itself happens again in the search module.
pub fn search_query(pairs: &[(String, String)], default_size: usize, default_scope: Scope) -> Result<Query, ApiError> {
    let mut q = Query {
        page_size: default_size,
        scope: default_scope,
        ..Query::default()
    };
    let mut errors = Vec::new();
    let (mut from, mut to) = (None, None);
    for (k, v) in pairs {
        let date = |errors: &mut Vec<(String, String)>| match NaiveDate::parse_from_str(v, "%Y-%m-%d") {
            Ok(d) => Some(d),
            Err(_) => {
                errors.push((k.clone(), format!("expected YYYY-MM-DD, got {v:?}")));
                None
            }
        };
        match k.as_str() {
            "q" => {
                if !q.text.is_empty() {
                    q.text.push(' ');
                }
                q.text.push_str(v);
            }
            "scope" => match v.parse::<Scope>() {
                Ok(s) => q.scope = s,
                Err(m) => errors.push((k.clone(), m)),
            },
            "municipality_id" => q.facets.municipality_ids.push(v.clone()),
            "topic_id" => q.facets.topic_ids.push(v.clone()),
            "party" => q.facets.parties.push(v.clone()),
            "participant_id" => q.facets.participant_ids.push(v.clone()),
            "meeting_type" => q.facets.meeting_types.push(v.clone()),
            "date_from" => from = date(&mut errors),
            "date_to" => to = date(&mut errors),
            "page" => match v.parse::<usize>() {
                Ok(p) => q.page = p,
                Err(_) => errors.push((k.clone(), "must be a positive integer".into())),
            },
            "page_size" => match v.parse::<usize>() {
                Ok(p) => q.page_size = p,
                Err(_) => errors.push((k.clone(), "must be a positive integer".into())),
            },
            other => errors.push((other.to_string(), "unknown parameter".into())),
        }
    }
    if from.is_some() || to.is_some() {
        q.facets.date_range = Some(DateRange {
            start: from.unwrap_or(NaiveDate::MIN),
            end: to.unwrap_or(NaiveDate::MAX),
        });
    }
    if let Err(citilink_core::search::SearchError::InvalidQuery(fields)) = q.validate() {
        errors.extend(fields.into_iter().map(|(f, m)| match f.as_str() {
            "date_range" => ("date_from".to_string(), m),
            _ => (f, m),
        }));
    }
    if errors.is_empty() {
        Ok(q)
    } else {
        Err(invalid(errors))
    }
}
