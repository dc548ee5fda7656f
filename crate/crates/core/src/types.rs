//! Domain types shared by every pipeline stage.
//!
//! All spans are token-level and end-exclusive. Types serialize to the JSONL
//! schemas read and written by [`crate::jsonl`]; field order here is the key
//! order on disk.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Source corpus a sentence was drawn from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CorpusTag {
    Ecb,
    Duc,
    Mn,
    #[default]
    Other,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Split {
    #[default]
    Train,
    Dev,
    Test,
}

/// Where an alignment set came from. Everything except `Gold` is produced by
/// this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Gold,
    Lemma,
    Model,
    EcbInduced,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Gold => "GOLD",
            Provenance::Lemma => "LEMMA",
            Provenance::Model => "MODEL",
            Provenance::EcbInduced => "ECB_INDUCED",
        };
        f.write_str(s)
    }
}

/// A tokenized sentence together with its predecessor sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceText {
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<String>,
    /// Tokens of the preceding sentence in the same document; empty for the
    /// first sentence.
    #[serde(default)]
    pub context_tokens: Vec<String>,
    #[serde(default)]
    pub corpus_tag: CorpusTag,
}

impl SentenceText {
    pub fn new(doc_id: impl Into<String>, sent_id: impl Into<String>, tokens: &[&str]) -> Self {
        SentenceText {
            doc_id: doc_id.into(),
            sent_id: sent_id.into(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            context_tokens: Vec::new(),
            corpus_tag: CorpusTag::Other,
        }
    }

    pub fn with_context(mut self, context: &[&str]) -> Self {
        self.context_tokens = context.iter().map(|t| t.to_string()).collect();
        self
    }

    pub fn with_tag(mut self, tag: CorpusTag) -> Self {
        self.corpus_tag = tag;
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `(doc_id, sent_id)` key.
    pub fn key(&self) -> (&str, &str) {
        (&self.doc_id, &self.sent_id)
    }
}

/// Token span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub start: usize,
    pub end: usize,
}

impl AnswerSpan {
    pub fn new(start: usize, end: usize) -> Self {
        AnswerSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    pub fn is_valid_for(&self, sentence_len: usize) -> bool {
        self.start < self.end && self.end <= sentence_len
    }

    /// Number of token positions shared with `other`.
    pub fn overlap(&self, other: &AnswerSpan) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    pub fn contains_span(&self, other: &AnswerSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Partial overlap where neither span contains the other.
    pub fn crosses(&self, other: &AnswerSpan) -> bool {
        self.overlap(other) > 0 && !self.contains_span(other) && !other.contains_span(self)
    }
}

/// One QA-SRL question-answer pair: a single predicate-argument relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QARelation {
    pub qa_id: String,
    pub predicate_index: usize,
    pub question_tokens: Vec<String>,
    pub question_predicate_index: usize,
    pub answers: Vec<AnswerSpan>,
}

impl QARelation {
    pub fn new(
        qa_id: impl Into<String>,
        predicate_index: usize,
        question: &[&str],
        question_predicate_index: usize,
        answers: &[(usize, usize)],
    ) -> Self {
        QARelation {
            qa_id: qa_id.into(),
            predicate_index,
            question_tokens: question.iter().map(|t| t.to_string()).collect(),
            question_predicate_index,
            answers: answers.iter().map(|&(s, e)| AnswerSpan::new(s, e)).collect(),
        }
    }

    /// First question token, lowercased.
    pub fn wh_word(&self) -> String {
        self.question_tokens
            .first()
            .map(|t| t.to_lowercase())
            .unwrap_or_default()
    }
}

/// Two sentences from different documents with their QA sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePairInstance {
    pub pair_id: String,
    #[serde(default)]
    pub split: Split,
    pub a: SentenceText,
    pub b: SentenceText,
    #[serde(default)]
    pub qas_a: Vec<QARelation>,
    #[serde(default)]
    pub qas_b: Vec<QARelation>,
}

/// Side of a sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
        })
    }
}

impl SentencePairInstance {
    pub fn sentence(&self, side: Side) -> &SentenceText {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn qas(&self, side: Side) -> &[QARelation] {
        match side {
            Side::A => &self.qas_a,
            Side::B => &self.qas_b,
        }
    }

    pub fn find_qa(&self, side: Side, qa_id: &str) -> Option<&QARelation> {
        self.qas(side).iter().find(|qa| qa.qa_id == qa_id)
    }

    /// The same instance with sides A and B exchanged.
    pub fn swapped(&self) -> SentencePairInstance {
        SentencePairInstance {
            pair_id: self.pair_id.clone(),
            split: self.split,
            a: self.b.clone(),
            b: self.a.clone(),
            qas_a: self.qas_b.clone(),
            qas_b: self.qas_a.clone(),
        }
    }
}

/// A grouping of QA ids from side A with QA ids from side B.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alignment {
    pub left: BTreeSet<String>,
    pub right: BTreeSet<String>,
}

impl Alignment {
    pub fn one_to_one(left: impl Into<String>, right: impl Into<String>) -> Self {
        Alignment {
            left: BTreeSet::from([left.into()]),
            right: BTreeSet::from([right.into()]),
        }
    }

    pub fn many<L, R>(left: L, right: R) -> Self
    where
        L: IntoIterator,
        L::Item: Into<String>,
        R: IntoIterator,
        R::Item: Into<String>,
    {
        Alignment {
            left: left.into_iter().map(Into::into).collect(),
            right: right.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_one_to_one(&self) -> bool {
        self.left.len() == 1 && self.right.len() == 1
    }

    /// The `(left, right)` ids of a 1:1 alignment.
    pub fn as_edge(&self) -> Option<(&str, &str)> {
        if self.is_one_to_one() {
            let l = self.left.iter().next()?;
            let r = self.right.iter().next()?;
            Some((l.as_str(), r.as_str()))
        } else {
            None
        }
    }

    pub fn transposed(&self) -> Alignment {
        Alignment {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentSet {
    pub pair_id: String,
    pub provenance: Provenance,
    pub alignments: Vec<Alignment>,
}

impl AlignmentSet {
    pub fn new(pair_id: impl Into<String>, provenance: Provenance) -> Self {
        AlignmentSet {
            pair_id: pair_id.into(),
            provenance,
            alignments: Vec::new(),
        }
    }

    pub fn with_alignments(mut self, alignments: impl IntoIterator<Item = Alignment>) -> Self {
        self.alignments.extend(alignments);
        self
    }

    pub fn len(&self) -> usize {
        self.alignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alignments.is_empty()
    }

    /// Distinct alignments, ignoring order and duplicates.
    pub fn as_set(&self) -> BTreeSet<&Alignment> {
        self.alignments.iter().collect()
    }

    pub fn one_to_one(&self) -> impl Iterator<Item = (&str, &str)> {
        self.alignments.iter().filter_map(Alignment::as_edge)
    }

    /// Whether every qa id occurs in at most one alignment.
    pub fn is_node_disjoint(&self) -> bool {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        self.alignments.iter().all(|a| {
            a.left.iter().all(|id| left.insert(id)) && a.right.iter().all(|id| right.insert(id))
        })
    }
}

/// A candidate 1:1 link scored in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEdge {
    pub left_qa: String,
    pub right_qa: String,
    pub score: f64,
}

impl ScoredEdge {
    pub fn new(left: impl Into<String>, right: impl Into<String>, score: f64) -> Self {
        ScoredEdge {
            left_qa: left.into(),
            right_qa: right.into(),
            score,
        }
    }
}

pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Edges scoring strictly below `tau` are dropped before matching.
    pub tau: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { tau: DEFAULT_TAU }
    }
}

impl DecoderConfig {
    pub fn with_tau(tau: f64) -> Self {
        DecoderConfig { tau }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_geometry() {
        let a = AnswerSpan::new(0, 4);
        let b = AnswerSpan::new(2, 6);
        assert_eq!(a.overlap(&b), 2);
        assert!(a.crosses(&b));
        assert!(!a.crosses(&AnswerSpan::new(1, 3)));
        assert!(a.contains_span(&AnswerSpan::new(1, 3)));
        assert_eq!(a.overlap(&AnswerSpan::new(4, 5)), 0);
        assert!(!AnswerSpan::new(3, 3).is_valid_for(5));
    }

    #[test]
    fn node_disjointness() {
        let set = AlignmentSet::new("p", Provenance::Gold).with_alignments([
            Alignment::one_to_one("a1", "b1"),
            Alignment::one_to_one("a1", "b2"),
        ]);
        assert!(!set.is_node_disjoint());
        let set = AlignmentSet::new("p", Provenance::Gold).with_alignments([
            Alignment::one_to_one("a1", "b1"),
            Alignment::one_to_one("a2", "b2"),
        ]);
        assert!(set.is_node_disjoint());
    }

    #[test]
    fn enums_use_schema_spelling() {
        assert_eq!(serde_json::to_string(&Provenance::EcbInduced).unwrap(), "\"ECB_INDUCED\"");
        assert_eq!(serde_json::to_string(&CorpusTag::Mn).unwrap(), "\"MN\"");
        assert_eq!(serde_json::to_string(&Split::Dev).unwrap(), "\"DEV\"");
    }

    #[test]
    fn wh_word_is_lowercased() {
        let qa = QARelation::new("q", 0, &["Who", "came", "?"], 1, &[(0, 1)]);
        assert_eq!(qa.wh_word(), "who");
    }
}
