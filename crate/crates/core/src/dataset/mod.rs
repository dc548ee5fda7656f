//! Sentence-pair assembly for the three source families.
//!
//! * ECB: cross-document sentences of a topic that share a coreferring
//!   verbal event mention, ranked by how many they share.
//! * DUC: summary sentences contributing to the same SCU.
//! * MN: document sentences aligned to the same summary sentence with
//!   overlapping spans.
//!
//! Pairs carry the QAs attached to their sentence records (none when the
//! records have none). Each sentence's context is the record before it in
//! the same document, in input order.

pub mod rouge;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ecb::{CorefAnnotation, MentionKind};
use crate::error::{Error, Result};
use crate::types::{AnswerSpan, CorpusTag, QARelation, SentencePairInstance, SentenceText, Split};

pub use rouge::{rouge2, span_iou};

pub const ECB_TOP_PER_TOPIC: usize = 6;
pub const ECB_BOTTOM_PER_TOPIC: usize = 2;
pub const ECB_MAX_ROUGE2: f64 = 0.9;
pub const MN_MIN_IOU: f64 = 0.1;

/// One raw tokenized sentence. Records of a document appear in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_tag: Option<CorpusTag>,
    #[serde(default)]
    pub split: Split,
    /// QA-SRL parse of the sentence, if already available.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qas: Vec<QARelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceRef {
    pub doc_id: String,
    pub sent_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScuContributor {
    pub doc_id: String,
    pub sent_id: String,
    pub span: AnswerSpan,
}

/// A summary content unit and the summary sentences expressing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScuCluster {
    pub scu_id: String,
    #[serde(default)]
    pub label: String,
    pub contributors: Vec<ScuContributor>,
}

/// Spans of a summary sentence aligned to one document sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAlignmentRecord {
    pub summary_sent: SentenceRef,
    pub doc_sent: SentenceRef,
    pub spans: Vec<AnswerSpan>,
}

/// Sentences by key, with their predecessor context attached.
pub struct SentenceIndex {
    sentences: Vec<(SentenceText, Split, Vec<QARelation>)>,
    position: HashMap<(String, String), usize>,
}

impl SentenceIndex {
    pub fn new(records: &[SentenceRecord], default_tag: CorpusTag) -> Self {
        let mut previous: HashMap<&str, &[String]> = HashMap::new();
        let mut sentences = Vec::with_capacity(records.len());
        let mut position = HashMap::new();
        for r in records {
            let context = previous.insert(&r.doc_id, &r.tokens).unwrap_or(&[]);
            position.insert((r.doc_id.clone(), r.sent_id.clone()), sentences.len());
            sentences.push((
                SentenceText {
                    doc_id: r.doc_id.clone(),
                    sent_id: r.sent_id.clone(),
                    tokens: r.tokens.clone(),
                    context_tokens: context.to_vec(),
                    corpus_tag: r.corpus_tag.unwrap_or(default_tag),
                },
                r.split,
                r.qas.clone(),
            ));
        }
        SentenceIndex { sentences, position }
    }

    /// Input position of a sentence.
    pub fn position(&self, doc_id: &str, sent_id: &str) -> Result<usize> {
        self.position
            .get(&(doc_id.to_string(), sent_id.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownSentence {
                doc_id: doc_id.to_string(),
                sent_id: sent_id.to_string(),
            })
    }

    pub fn sentence(&self, position: usize) -> &SentenceText {
        &self.sentences[position].0
    }

    /// Pair of the sentences at two positions; the earlier one is side A.
    pub fn pair(&self, x: usize, y: usize) -> SentencePairInstance {
        let (i, j) = if x <= y { (x, y) } else { (y, x) };
        let (a, split, qas_a) = self.sentences[i].clone();
        let (b, _, qas_b) = self.sentences[j].clone();
        SentencePairInstance {
            pair_id: pair_id(&a, &b),
            split,
            a,
            b,
            qas_a,
            qas_b,
        }
    }
}

fn tag_name(tag: CorpusTag) -> &'static str {
    match tag {
        CorpusTag::Ecb => "ECB",
        CorpusTag::Duc => "DUC",
        CorpusTag::Mn => "MN",
        CorpusTag::Other => "OTHER",
    }
}

/// `TAG:docA:sentA|docB:sentB`.
pub fn pair_id(a: &SentenceText, b: &SentenceText) -> String {
    format!("{}:{}:{}|{}:{}", tag_name(a.corpus_tag), a.doc_id, a.sent_id, b.doc_id, b.sent_id)
}

/// A cross-document sentence pair sharing coreferring event mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcbCandidate {
    /// Sentence positions, `a < b`.
    pub a: usize,
    pub b: usize,
    /// Cross-sentence mention pairs in a shared event cluster.
    pub shared: usize,
}

/// Candidates of one topic, best-ranked first (ties by position).
pub fn ecb_candidates(index: &SentenceIndex, coref: &CorefAnnotation) -> Result<Vec<EcbCandidate>> {
    let cluster_of = coref.cluster_of();
    let mut members: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
    for m in &coref.mentions {
        if m.kind != MentionKind::Event || !m.verbal {
            continue;
        }
        let Some(&cluster) = cluster_of.get(m.mention_id.as_str()) else {
            continue;
        };
        let pos = index.position(&m.doc_id, &m.sent_id)?;
        members.entry(cluster).or_default().push((pos, m.doc_id.as_str()));
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for mentions in members.values() {
        for (i, &(p, doc_p)) in mentions.iter().enumerate() {
            for &(q, doc_q) in &mentions[i + 1..] {
                if doc_p != doc_q {
                    *shared.entry((p.min(q), p.max(q))).or_insert(0) += 1;
                }
            }
        }
    }
    let mut out: Vec<EcbCandidate> = shared
        .into_iter()
        .map(|((a, b), shared)| EcbCandidate { a, b, shared })
        .collect();
    out.sort_by_key(|c| (std::cmp::Reverse(c.shared), c.a, c.b));
    Ok(out)
}

/// The top-ranked and bottom-ranked candidates of a ranked list.
pub fn select_ranked<T: Copy>(ranked: &[T], top: usize, bottom: usize) -> Vec<T> {
    let head = ranked.len().min(top);
    let tail_start = ranked.len().saturating_sub(bottom).max(head);
    ranked[..head].iter().chain(&ranked[tail_start..]).copied().collect()
}

/// ECB pairs for `topics` (every annotated topic when empty): per topic the
/// six best- and two worst-ranked candidates, minus near-duplicates
/// (ROUGE-2 above 0.9).
pub fn build_ecb_pairs(
    sentences: &[SentenceRecord],
    coref: &[CorefAnnotation],
    topics: &[String],
) -> Result<Vec<SentencePairInstance>> {
    let index = SentenceIndex::new(sentences, CorpusTag::Ecb);
    let selected: Vec<&CorefAnnotation> = if topics.is_empty() {
        coref.iter().collect()
    } else {
        topics
            .iter()
            .map(|t| {
                coref
                    .iter()
                    .find(|c| &c.topic_id == t)
                    .ok_or_else(|| Error::UnknownTopic(t.clone()))
            })
            .collect::<Result<_>>()?
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for annotation in selected {
        let ranked = ecb_candidates(&index, annotation)?;
        for c in select_ranked(&ranked, ECB_TOP_PER_TOPIC, ECB_BOTTOM_PER_TOPIC) {
            let (a, b) = (index.sentence(c.a), index.sentence(c.b));
            if rouge2(&a.tokens, &b.tokens) > ECB_MAX_ROUGE2 {
                log::debug!("dropping near-duplicate pair {}", pair_id(a, b));
                continue;
            }
            if seen.insert((c.a, c.b)) {
                out.push(index.pair(c.a, c.b));
            }
        }
    }
    Ok(out)
}

/// Every pair of distinct summary sentences contributing to a common SCU,
/// once each.
pub fn build_duc_pairs(clusters: &[ScuCluster], sentences: &[SentenceRecord]) -> Result<Vec<SentencePairInstance>> {
    let index = SentenceIndex::new(sentences, CorpusTag::Duc);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for cluster in clusters {
        let mut members: Vec<usize> = Vec::new();
        for c in &cluster.contributors {
            let pos = index.position(&c.doc_id, &c.sent_id)?;
            if !members.contains(&pos) {
                members.push(pos);
            }
        }
        for (i, &p) in members.iter().enumerate() {
            for &q in &members[i + 1..] {
                if seen.insert((p.min(q), p.max(q))) {
                    out.push(index.pair(p, q));
                }
            }
        }
    }
    Ok(out)
}

/// Pairs of document sentences from different documents aligned to the same
/// summary sentence, kept when their spans over it have IOU of at least 0.1.
pub fn build_mn_pairs(records: &[SpanAlignmentRecord], sentences: &[SentenceRecord]) -> Result<Vec<SentencePairInstance>> {
    let index = SentenceIndex::new(sentences, CorpusTag::Mn);
    let mut groups: Vec<(&SentenceRef, Vec<&SpanAlignmentRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(anchor, _)| *anchor == &r.summary_sent) {
            Some((_, members)) => members.push(r),
            None => groups.push((&r.summary_sent, vec![r])),
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (_, members) in groups {
        for (i, x) in members.iter().enumerate() {
            for y in &members[i + 1..] {
                if x.doc_sent.doc_id == y.doc_sent.doc_id {
                    continue;
                }
                if span_iou(&x.spans, &y.spans) < MN_MIN_IOU {
                    continue;
                }
                let p = index.position(&x.doc_sent.doc_id, &x.doc_sent.sent_id)?;
                let q = index.position(&y.doc_sent.doc_id, &y.doc_sent.sent_id)?;
                if seen.insert((p.min(q), p.max(q))) {
                    out.push(index.pair(p, q));
                }
            }
        }
    }
    Ok(out)
}
