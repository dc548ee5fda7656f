//! Scorer wire format: one JSON object per line.
//!
//! ```text
//! request  {"request_id":"r1","items":[{"candidate_id":"c1","text_a":"...","text_b":"..."}]}
//! response {"request_id":"r1","scores":{"c1":0.87}}
//! ```
//!
//! Scores outside `[0, 1]` are protocol errors; they are never clamped.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ScorerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreItem {
    pub candidate_id: String,
    pub text_a: String,
    pub text_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub request_id: String,
    pub items: Vec<ScoreItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub request_id: String,
    pub scores: BTreeMap<String, f64>,
}

impl ScoreRequest {
    pub fn candidate_ids(&self) -> BTreeSet<&str> {
        self.items.iter().map(|i| i.candidate_id.as_str()).collect()
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        if self.candidate_ids().len() != self.items.len() {
            return Err(ScorerError::Transport {
                request_id: self.request_id.clone(),
                reason: "duplicate candidate_id in request".into(),
            });
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    pub fn from_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

impl ScoreResponse {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }

    pub fn from_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// Response giving every item of `request` the score `f(item)`.
    pub fn for_request(request: &ScoreRequest, mut f: impl FnMut(&ScoreItem) -> f64) -> Self {
        ScoreResponse {
            request_id: request.request_id.clone(),
            scores: request
                .items
                .iter()
                .map(|item| (item.candidate_id.clone(), f(item)))
                .collect(),
        }
    }
}

/// Checks that `response` answers `request`: same id, exactly the requested
/// candidate ids, every score in `[0, 1]`.
pub fn check_response(request: &ScoreRequest, response: &ScoreResponse) -> Result<(), ScorerError> {
    let fail = |reason: String| ScorerError::Transport {
        request_id: request.request_id.clone(),
        reason,
    };
    if response.request_id != request.request_id {
        return Err(fail(format!("response carries request_id {}", response.request_id)));
    }
    let expected = request.candidate_ids();
    let got: BTreeSet<&str> = response.scores.keys().map(String::as_str).collect();
    if expected != got {
        let missing: Vec<_> = expected.difference(&got).collect();
        let extra: Vec<_> = got.difference(&expected).collect();
        return Err(fail(format!("score keys differ: missing {missing:?}, unexpected {extra:?}")));
    }
    if let Some((id, s)) = response.scores.iter().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
        return Err(fail(format!("score {s} for {id} outside [0, 1]")));
    }
    Ok(())
}
