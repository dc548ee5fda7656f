//! Alignments induced from cross-document event/entity coreference.
//!
//! Two QAs are aligned when their predicates sit inside coreferring event
//! mentions and some answer of each overlaps a mention of a shared entity
//! cluster. Every qualifying pair is emitted, so two QAs of one sentence whose
//! answers corefer ("the man" / "he") both align to the same target QA.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::coverage;
use crate::types::{Alignment, AlignmentSet, AnswerSpan, Provenance, QARelation, SentencePairInstance, SentenceText};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MentionKind {
    Event,
    Entity,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub mention_id: String,
    pub doc_id: String,
    pub sent_id: String,
    pub span: AnswerSpan,
    pub kind: MentionKind,
    /// Event mentions realized by a verb. Only these anchor dataset pairs.
    #[serde(default = "default_true")]
    pub verbal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: String,
    pub kind: MentionKind,
    pub mention_ids: Vec<String>,
}

/// Coreference annotation of one topic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefAnnotation {
    #[serde(default)]
    pub topic_id: String,
    /// Documents annotated in this topic, including ones without mentions.
    #[serde(default)]
    pub documents: Vec<String>,
    pub mentions: Vec<Mention>,
    pub clusters: Vec<Cluster>,
}

impl CorefAnnotation {
    /// Documents the annotation speaks for.
    pub fn covered_documents(&self) -> BTreeSet<&str> {
        self.documents
            .iter()
            .map(String::as_str)
            .chain(self.mentions.iter().map(|m| m.doc_id.as_str()))
            .collect()
    }

    pub fn covers(&self, doc_id: &str) -> bool {
        self.covered_documents().contains(doc_id)
    }

    /// Checks that mention ids are unique and that every mention belongs to
    /// exactly one cluster of its own kind.
    pub fn validate(&self) -> Result<()> {
        let mut kinds = BTreeMap::new();
        for m in &self.mentions {
            if kinds.insert(m.mention_id.as_str(), m.kind).is_some() {
                return Err(Error::Invalid(format!("duplicate mention id {}", m.mention_id)));
            }
        }
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for c in &self.clusters {
            for id in &c.mention_ids {
                let Some(&kind) = kinds.get(id.as_str()) else {
                    return Err(Error::Invalid(format!("cluster {} lists unknown mention {id}", c.cluster_id)));
                };
                if kind != c.kind {
                    return Err(Error::Invalid(format!(
                        "mention {id} of kind {kind:?} in cluster {} of kind {:?}",
                        c.cluster_id, c.kind
                    )));
                }
                if let Some(prev) = owner.insert(id, &c.cluster_id) {
                    return Err(Error::Invalid(format!(
                        "mention {id} in clusters {prev} and {}",
                        c.cluster_id
                    )));
                }
            }
        }
        if let Some(m) = self.mentions.iter().find(|m| !owner.contains_key(m.mention_id.as_str())) {
            return Err(Error::Invalid(format!("mention {} belongs to no cluster", m.mention_id)));
        }
        Ok(())
    }

    /// Mention id → cluster id.
    pub fn cluster_of(&self) -> BTreeMap<&str, &str> {
        self.clusters
            .iter()
            .flat_map(|c| c.mention_ids.iter().map(move |m| (m.as_str(), c.cluster_id.as_str())))
            .collect()
    }

    /// Mentions of `kind` in one sentence.
    pub fn mentions_in<'a>(&'a self, sent: &'a SentenceText, kind: MentionKind) -> impl Iterator<Item = &'a Mention> + 'a {
        self.mentions
            .iter()
            .filter(move |m| m.kind == kind && m.doc_id == sent.doc_id && m.sent_id == sent.sent_id)
    }
}

/// Event clusters whose mentions contain the QA's predicate, and entity
/// clusters whose mentions overlap one of its answers.
fn qa_clusters<'a>(
    qa: &QARelation,
    sent: &'a SentenceText,
    coref: &'a CorefAnnotation,
    cluster_of: &BTreeMap<&'a str, &'a str>,
) -> (BTreeSet<&'a str>, BTreeSet<&'a str>) {
    let events = coref
        .mentions_in(sent, MentionKind::Event)
        .filter(|m| m.span.contains(qa.predicate_index))
        .filter_map(|m| cluster_of.get(m.mention_id.as_str()).copied())
        .collect();
    let entities = coref
        .mentions_in(sent, MentionKind::Entity)
        .filter(|m| qa.answers.iter().any(|a| a.overlap(&m.span) > 0))
        .filter_map(|m| cluster_of.get(m.mention_id.as_str()).copied())
        .collect();
    (events, entities)
}

/// Alignments induced from `coref` for every qualifying cross-side QA pair,
/// in `(left qa order, right qa order)`.
pub fn induce(pair: &SentencePairInstance, coref: &CorefAnnotation) -> Result<AlignmentSet> {
    for doc in [&pair.a.doc_id, &pair.b.doc_id] {
        if !coref.covers(doc) {
            return Err(Error::MissingCoverage { doc_id: doc.clone() });
        }
    }
    let cluster_of = coref.cluster_of();
    let left: Vec<_> = pair.qas_a.iter().map(|qa| qa_clusters(qa, &pair.a, coref, &cluster_of)).collect();
    let right: Vec<_> = pair.qas_b.iter().map(|qa| qa_clusters(qa, &pair.b, coref, &cluster_of)).collect();
    let mut set = AlignmentSet::new(pair.pair_id.clone(), Provenance::EcbInduced);
    for (l, (le, ln)) in pair.qas_a.iter().zip(&left) {
        for (r, (re, rn)) in pair.qas_b.iter().zip(&right) {
            if !le.is_disjoint(re) && !ln.is_disjoint(rn) {
                set.alignments.push(Alignment::one_to_one(l.qa_id.clone(), r.qa_id.clone()));
            }
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub induced_covered_by_gold: f64,
    pub gold_covered_by_induced: f64,
}

/// Coverage of induced alignments by gold and vice versa.
pub fn compare(induced: &AlignmentSet, gold: &AlignmentSet) -> Result<Comparison> {
    if induced.pair_id != gold.pair_id {
        return Err(Error::PairMismatch {
            left: induced.pair_id.clone(),
            right: gold.pair_id.clone(),
        });
    }
    Ok(Comparison {
        induced_covered_by_gold: coverage(induced, gold),
        gold_covered_by_induced: coverage(gold, induced),
    })
}

/// The first annotation covering both documents of `pair`.
pub fn annotation_for<'a>(pair: &SentencePairInstance, annotations: &'a [CorefAnnotation]) -> Option<&'a CorefAnnotation> {
    annotations
        .iter()
        .find(|c| c.covers(&pair.a.doc_id) && c.covers(&pair.b.doc_id))
}
