//! Structural validation. Violations are returned as data; nothing here fails.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::types::{AlignmentSet, Provenance, QARelation, SentencePairInstance, SentenceText, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    /// Path of the offending field, e.g. `qas_a[2].answers[0]`.
    pub field: String,
    pub message: String,
}

impl Violation {
    fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        }
    }

    fn warning(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}: {}: {}", self.field, self.message)
    }
}

/// Checks every type invariant of a pair. Empty iff the pair is well formed.
pub fn validate_pair(pair: &SentencePairInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    validate_sentence("a", &pair.a, &mut out);
    validate_sentence("b", &pair.b, &mut out);
    validate_qas("qas_a", &pair.qas_a, &pair.a, &mut out);
    validate_qas("qas_b", &pair.qas_b, &pair.b, &mut out);
    out
}

fn validate_sentence(field: &str, sent: &SentenceText, out: &mut Vec<Violation>) {
    if sent.tokens.is_empty() {
        out.push(Violation::error(format!("{field}.tokens"), "sentence has no tokens"));
    }
    for (i, tok) in sent.tokens.iter().enumerate() {
        if tok.is_empty() {
            out.push(Violation::error(format!("{field}.tokens[{i}]"), "empty token"));
        }
    }
}

/// Invariants of a single QA against its owning sentence.
pub(crate) fn validate_qa(field: &str, qa: &QARelation, sent: &SentenceText, out: &mut Vec<Violation>) {
    let n = sent.tokens.len();
    if qa.predicate_index >= n {
        out.push(Violation::error(
            format!("{field}.predicate_index"),
            format!("predicate index {} outside sentence of {n} tokens", qa.predicate_index),
        ));
    }
    if qa.question_predicate_index >= qa.question_tokens.len() {
        out.push(Violation::error(
            format!("{field}.question_predicate_index"),
            format!(
                "question predicate index {} outside question of {} tokens",
                qa.question_predicate_index,
                qa.question_tokens.len()
            ),
        ));
    }
    if qa.answers.is_empty() {
        out.push(Violation::error(format!("{field}.answers"), "no answer spans"));
    }
    for (j, span) in qa.answers.iter().enumerate() {
        if !span.is_valid_for(n) {
            out.push(Violation::error(
                format!("{field}.answers[{j}]"),
                format!("span [{}, {}) invalid for sentence of {n} tokens", span.start, span.end),
            ));
        }
    }
}

fn validate_qas(side: &str, qas: &[QARelation], sent: &SentenceText, out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for (i, qa) in qas.iter().enumerate() {
        let field = format!("{side}[{i}]");
        if !seen.insert(qa.qa_id.as_str()) {
            out.push(Violation::error(
                format!("{field}.qa_id"),
                format!("duplicate qa_id {}", qa.qa_id),
            ));
        }
        validate_qa(&field, qa, sent, out);
    }
}

/// Checks an alignment set against its pair.
///
/// Gold sets may reuse a qa id across alignments (reported as a warning).
/// Decoded model output must be 1:1 and node-disjoint; lemma and
/// coreference-induced output must be 1:1 but may share nodes.
pub fn validate_alignments(pair: &SentencePairInstance, set: &AlignmentSet) -> Vec<Violation> {
    let mut out = Vec::new();
    if set.pair_id != pair.pair_id {
        out.push(Violation::error(
            "pair_id",
            format!("alignment set for {} checked against pair {}", set.pair_id, pair.pair_id),
        ));
    }
    let mut distinct = BTreeSet::new();
    let mut used_left = BTreeSet::new();
    let mut used_right = BTreeSet::new();
    for (i, al) in set.alignments.iter().enumerate() {
        let field = format!("alignments[{i}]");
        if al.left.is_empty() {
            out.push(Violation::error(format!("{field}.left"), "empty left side"));
        }
        if al.right.is_empty() {
            out.push(Violation::error(format!("{field}.right"), "empty right side"));
        }
        for (ids, side, name) in [(&al.left, Side::A, "left"), (&al.right, Side::B, "right")] {
            for id in ids {
                if pair.find_qa(side, id).is_none() {
                    out.push(Violation::error(
                        format!("{field}.{name}"),
                        format!("qa_id {id} not found on side {side}"),
                    ));
                }
            }
        }
        if !distinct.insert(al) {
            out.push(Violation::error(field.clone(), "duplicate alignment"));
        }
        if set.provenance != Provenance::Gold && !al.is_one_to_one() {
            out.push(Violation::error(
                field.clone(),
                format!("{} alignments must be 1:1", set.provenance),
            ));
        }
        let reused: Vec<&String> = al
            .left
            .iter()
            .filter(|id| !used_left.insert(id.as_str()))
            .chain(al.right.iter().filter(|id| !used_right.insert(id.as_str())))
            .collect();
        for id in reused {
            let msg = format!("qa_id {id} appears in more than one alignment");
            match set.provenance {
                Provenance::Gold => out.push(Violation::warning(field.clone(), msg)),
                Provenance::Model => out.push(Violation::error(field.clone(), msg)),
                Provenance::Lemma | Provenance::EcbInduced => {}
            }
        }
    }
    out
}
