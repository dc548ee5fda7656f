//! Text encoding of one QA in its sentence context, the payload a scorer
//! receives for each side of a candidate alignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lemma::{answer_head, lemmatize, PairHeads};
use crate::types::{AlignmentSet, QARelation, SentencePairInstance, SentenceText};
use crate::validate::validate_qa;

pub const PRED_OPEN: &str = "[P]";
pub const PRED_CLOSE: &str = "[/P]";
pub const QUESTION_SEP: &str = "[Q]";
pub const ANSWER_OPEN: &str = "[A]";
pub const ANSWER_CLOSE: &str = "[/A]";

/// Markup vocabulary a scorer model should treat as special tokens.
pub const MARKUP_TOKENS: [&str; 5] = [PRED_OPEN, PRED_CLOSE, QUESTION_SEP, ANSWER_OPEN, ANSWER_CLOSE];

pub fn is_markup(token: &str) -> bool {
    MARKUP_TOKENS.contains(&token)
}

/// Encodes `qa` as
/// `question-with-[P]-predicate [Q] context sentence-with-[P]-predicate-and-[A]-answers`.
pub fn serialize_candidate(qa: &QARelation, sent: &SentenceText) -> Result<String> {
    let mut problems = Vec::new();
    validate_qa("qa", qa, sent, &mut problems);
    if let Some(first) = problems.first() {
        return Err(Error::Ownership {
            qa_id: qa.qa_id.clone(),
            doc_id: sent.doc_id.clone(),
            sent_id: sent.sent_id.clone(),
            reason: first.to_string(),
        });
    }

    let mut out: Vec<&str> = Vec::with_capacity(
        qa.question_tokens.len() + sent.context_tokens.len() + sent.tokens.len() + 5 + 2 * qa.answers.len(),
    );
    for (i, tok) in qa.question_tokens.iter().enumerate() {
        if i == qa.question_predicate_index {
            out.extend([PRED_OPEN, tok.as_str(), PRED_CLOSE]);
        } else {
            out.push(tok);
        }
    }
    out.push(QUESTION_SEP);
    out.extend(sent.context_tokens.iter().map(String::as_str));
    for (i, tok) in sent.tokens.iter().enumerate() {
        let opens = qa.answers.iter().filter(|s| s.start == i).count();
        out.extend(std::iter::repeat_n(ANSWER_OPEN, opens));
        if i == qa.predicate_index {
            out.extend([PRED_OPEN, tok.as_str(), PRED_CLOSE]);
        } else {
            out.push(tok);
        }
        let closes = qa.answers.iter().filter(|s| s.end == i + 1).count();
        out.extend(std::iter::repeat_n(ANSWER_CLOSE, closes));
    }
    Ok(out.join(" "))
}

/// Removes markup tokens, returning the remaining whitespace-separated tokens.
pub fn strip_markup(serialized: &str) -> Vec<&str> {
    serialized.split(' ').filter(|t| !is_markup(t)).collect()
}

/// One cross-side candidate as handed to a scorer trainer: the two encoded
/// sides, the gold label when known, and the lemmas hard-negative sampling
/// keys on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub pair_id: String,
    pub left_qa: String,
    pub right_qa: String,
    pub text_a: String,
    pub text_b: String,
    /// 1 for a gold 1:1 edge, 0 otherwise; absent without gold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    pub left_predicate: String,
    pub right_predicate: String,
    /// Lemmas of the answer heads, one per answer.
    pub left_heads: Vec<String>,
    pub right_heads: Vec<String>,
}

fn head_lemmas(qa: &QARelation, sent: &SentenceText, heads: Option<&[Option<usize>]>) -> Vec<String> {
    qa.answers
        .iter()
        .map(|&span| lemmatize(&sent.tokens[answer_head(span, sent, heads)]))
        .collect()
}

/// Every `qas_a` × `qas_b` candidate of `pair`, in left-major order.
pub fn candidate_records(
    pair: &SentencePairInstance,
    gold: Option<&AlignmentSet>,
    heads: Option<&PairHeads>,
) -> Result<Vec<CandidateRecord>> {
    let positives: Option<Vec<(&str, &str)>> = gold.map(|g| g.one_to_one().collect());
    let mut out = Vec::with_capacity(pair.qas_a.len() * pair.qas_b.len());
    for l in &pair.qas_a {
        let text_a = serialize_candidate(l, &pair.a)?;
        let left_heads = head_lemmas(l, &pair.a, heads.map(|h| h.a.as_slice()));
        for r in &pair.qas_b {
            out.push(CandidateRecord {
                pair_id: pair.pair_id.clone(),
                left_qa: l.qa_id.clone(),
                right_qa: r.qa_id.clone(),
                text_a: text_a.clone(),
                text_b: serialize_candidate(r, &pair.b)?,
                label: positives
                    .as_ref()
                    .map(|p| u8::from(p.contains(&(l.qa_id.as_str(), r.qa_id.as_str())))),
                left_predicate: lemmatize(&pair.a.tokens[l.predicate_index]),
                right_predicate: lemmatize(&pair.b.tokens[r.predicate_index]),
                left_heads: left_heads.clone(),
                right_heads: head_lemmas(r, &pair.b, heads.map(|h| h.b.as_slice())),
            });
        }
    }
    Ok(out)
}
