//! Sentence-fusion support: alignment-marked fusion inputs and analysis of
//! fused outputs.
//!
//! Aligned predicates and aligned arguments are grouped into connected
//! components across all sources. Each component gets an index, assigned in
//! order of first emission, and every occurrence is wrapped as
//! `[Pk] ... [\Pk]` or `[Ak] ... [\Ak]`. Sources are joined by `</s>`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lemma::lemmatize;
use crate::stopwords::is_content_word;
use crate::types::{AlignmentSet, AnswerSpan, QARelation, SentenceText};
use crate::validate::validate_qa;

pub const SENTENCE_SEPARATOR: &str = "</s>";
pub const MIN_SOURCES: usize = 2;
pub const MAX_SOURCES: usize = 4;

/// Alignments between sources `a` and `b`; left ids belong to `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAlignment {
    pub a: usize,
    pub b: usize,
    #[serde(flatten)]
    pub set: AlignmentSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionInstance {
    pub cluster_id: String,
    pub sources: Vec<SentenceText>,
    /// QAs of each source, parallel to `sources`.
    #[serde(default)]
    pub qas: Vec<Vec<QARelation>>,
    /// Reference fused sentence.
    #[serde(default)]
    pub target: Vec<String>,
    #[serde(default)]
    pub pair_alignments: Vec<PairAlignment>,
}

/// One fused sentence produced by some system for a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionOutput {
    pub cluster_id: String,
    #[serde(default)]
    pub system: String,
    pub tokens: Vec<String>,
}

impl FusionInstance {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invalid(format!("fusion instance {}: {msg}", self.cluster_id)));
        let n = self.sources.len();
        if !(MIN_SOURCES..=MAX_SOURCES).contains(&n) {
            return fail(format!("{n} sources, expected {MIN_SOURCES} to {MAX_SOURCES}"));
        }
        if !self.qas.is_empty() && self.qas.len() != n {
            return fail(format!("{} qa lists for {n} sources", self.qas.len()));
        }
        for (i, (qas, sent)) in self.qas.iter().zip(&self.sources).enumerate() {
            let mut problems = Vec::new();
            for qa in qas {
                validate_qa(&format!("qas[{i}].{}", qa.qa_id), qa, sent, &mut problems);
            }
            if let Some(p) = problems.first() {
                return fail(p.to_string());
            }
        }
        for pa in &self.pair_alignments {
            if pa.a >= n || pa.b >= n || pa.a == pa.b {
                return fail(format!("alignment between sources {} and {}", pa.a, pa.b));
            }
            for al in &pa.set.alignments {
                for (src, ids) in [(pa.a, &al.left), (pa.b, &al.right)] {
                    if ids.is_empty() {
                        return fail(format!("empty alignment side between {} and {}", pa.a, pa.b));
                    }
                    if let Some(id) = ids.iter().find(|id| self.qa(src, id).is_none()) {
                        return fail(format!("unknown qa {id} in source {src}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn qa(&self, source: usize, qa_id: &str) -> Option<&QARelation> {
        self.qas.get(source)?.iter().find(|q| q.qa_id == qa_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MarkKind {
    /// Argument; sorts first so that it encloses a predicate on the same token.
    A,
    P,
}

/// A span that takes part in some alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Node {
    pub source: usize,
    pub kind: MarkKind,
    pub span: AnswerSpan,
}

/// A node that survives nesting resolution, with its emitted index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MarkedSpan {
    pub node: Node,
    /// Component id (smallest node position in sorted node order).
    pub component: usize,
    pub index: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        // Keep the smaller root so component ids are canonical.
        if rx < ry {
            self.0[ry] = rx;
        } else {
            self.0[rx] = ry;
        }
    }
}

/// All aligned nodes, sorted, with their component ids.
pub fn components(inst: &FusionInstance) -> Result<Vec<(Node, usize)>> {
    inst.validate()?;
    let mut groups: Vec<Vec<Node>> = Vec::new();
    for pa in &inst.pair_alignments {
        for al in &pa.set.alignments {
            let qas: Vec<(usize, &QARelation)> = al
                .left
                .iter()
                .map(|id| (pa.a, id))
                .chain(al.right.iter().map(|id| (pa.b, id)))
                .map(|(src, id)| (src, inst.qa(src, id).expect("validated")))
                .collect();
            groups.push(
                qas.iter()
                    .map(|&(source, qa)| Node {
                        source,
                        kind: MarkKind::P,
                        span: AnswerSpan::new(qa.predicate_index, qa.predicate_index + 1),
                    })
                    .collect(),
            );
            groups.push(
                qas.iter()
                    .flat_map(|&(source, qa)| {
                        qa.answers.iter().map(move |&span| Node {
                            source,
                            kind: MarkKind::A,
                            span,
                        })
                    })
                    .collect(),
            );
        }
    }
    let nodes: Vec<Node> = groups
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let position: HashMap<Node, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut uf = UnionFind((0..nodes.len()).collect());
    for group in &groups {
        for pair in group.windows(2) {
            uf.union(position[&pair[0]], position[&pair[1]]);
        }
    }
    Ok(nodes.iter().enumerate().map(|(i, n)| (*n, uf.find(i))).collect())
}

fn span_text(sent: &SentenceText, span: AnswerSpan) -> String {
    sent.tokens[span.start..span.end].join(" ")
}

/// Drops spans nested inside a span of the same kind and source; crossing
/// spans of the same kind are an error.
fn resolve_nesting(inst: &FusionInstance, nodes: &[(Node, usize)]) -> Result<Vec<(Node, usize)>> {
    let mut sorted: Vec<(Node, usize)> = nodes.to_vec();
    sorted.sort_by_key(|(n, _)| (n.source, n.kind, n.span.start, std::cmp::Reverse(n.span.end)));
    let mut kept: Vec<(Node, usize)> = Vec::new();
    for (node, comp) in sorted {
        let same_kind = kept
            .iter()
            .filter(|(k, _)| k.source == node.source && k.kind == node.kind);
        let mut dropped = false;
        for (k, _) in same_kind {
            if k.span.contains_span(&node.span) {
                dropped = true;
                break;
            }
            if k.span.crosses(&node.span) {
                let sent = &inst.sources[node.source];
                return Err(Error::CrossingSpans {
                    source_index: node.source,
                    first: span_text(sent, k.span),
                    second: span_text(sent, node.span),
                });
            }
        }
        if !dropped {
            kept.push((node, comp));
        }
    }
    Ok(kept)
}

/// The spans that get markup, with their indices, in emission order.
pub fn marked_spans(inst: &FusionInstance) -> Result<Vec<MarkedSpan>> {
    let kept = resolve_nesting(inst, &components(inst)?)?;
    let mut ordered = kept;
    // Emission order: source, start, outer before inner, A before P.
    ordered.sort_by_key(|(n, _)| (n.source, n.span.start, std::cmp::Reverse(n.span.end), n.kind));
    let mut index: HashMap<(MarkKind, usize), usize> = HashMap::new();
    let mut next: HashMap<MarkKind, usize> = HashMap::new();
    Ok(ordered
        .into_iter()
        .map(|(node, component)| {
            let idx = *index.entry((node.kind, component)).or_insert_with(|| {
                let counter = next.entry(node.kind).or_insert(0);
                *counter += 1;
                *counter
            });
            MarkedSpan {
                node,
                component,
                index: idx,
            }
        })
        .collect())
}

fn open_tag(kind: MarkKind, index: usize) -> String {
    match kind {
        MarkKind::P => format!("[P{index}]"),
        MarkKind::A => format!("[A{index}]"),
    }
}

fn close_tag(kind: MarkKind, index: usize) -> String {
    match kind {
        MarkKind::P => format!("[\\P{index}]"),
        MarkKind::A => format!("[\\A{index}]"),
    }
}

/// Augmented sources as tokens.
pub fn augment_tokens(inst: &FusionInstance) -> Result<Vec<String>> {
    let marks = marked_spans(inst)?;
    let mut out = Vec::new();
    for (s, sent) in inst.sources.iter().enumerate() {
        if s > 0 {
            out.push(SENTENCE_SEPARATOR.to_string());
        }
        let mine: Vec<&MarkedSpan> = marks.iter().filter(|m| m.node.source == s).collect();
        let mut open: Vec<&MarkedSpan> = Vec::new();
        for (i, tok) in sent.tokens.iter().enumerate() {
            for m in mine.iter().filter(|m| m.node.span.start == i) {
                out.push(open_tag(m.node.kind, m.index));
                open.push(m);
            }
            out.push(tok.clone());
            while let Some(m) = open.last().filter(|m| m.node.span.end == i + 1) {
                out.push(close_tag(m.node.kind, m.index));
                open.pop();
            }
        }
        debug_assert!(open.is_empty(), "markup is well nested");
    }
    Ok(out)
}

/// Fusion input with alignment markup, space-joined.
pub fn augment(inst: &FusionInstance) -> Result<String> {
    Ok(augment_tokens(inst)?.join(" "))
}

/// Whether `token` is a separator or an indexed markup token.
pub fn is_fusion_markup(token: &str) -> bool {
    if token == SENTENCE_SEPARATOR {
        return true;
    }
    let Some(inner) = token.strip_prefix('[').and_then(|t| t.strip_suffix(']')) else {
        return false;
    };
    let inner = inner.strip_prefix('\\').unwrap_or(inner);
    let Some(digits) = inner.strip_prefix('P').or_else(|| inner.strip_prefix('A')) else {
        return false;
    };
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Removes separators and markup, leaving the concatenated source tokens.
pub fn strip_fusion_markup<S: AsRef<str>>(tokens: &[S]) -> Vec<&str> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_fusion_markup(t))
        .collect()
}

fn lemmas<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| lemmatize(t.as_ref())).collect()
}

/// For each output word, the sources containing a token with the same
/// lemma. Novel words get an empty set.
pub fn link_output_words<S: AsRef<str>>(output: &[S], sources: &[SentenceText]) -> Vec<BTreeSet<usize>> {
    let out = lemmas(output);
    let src: Vec<BTreeSet<String>> = sources.iter().map(|s| lemmas(&s.tokens).into_iter().collect()).collect();
    out.iter()
        .map(|w| (0..src.len()).filter(|&s| src[s].contains(w)).collect())
        .collect()
}

/// Length of the longest lemma-matching run of `out` against `src` that
/// covers each output position (0 where the word does not occur).
fn longest_covering_run(out: &[String], src: &[String]) -> Vec<usize> {
    let (n, m) = (out.len(), src.len());
    // back[i][p]: run ending at (i, p); fwd[i][p]: run starting at (i, p).
    let mut back = vec![vec![0usize; m + 1]; n + 1];
    for i in 0..n {
        for p in 0..m {
            if out[i] == src[p] {
                back[i + 1][p + 1] = back[i][p] + 1;
            }
        }
    }
    let mut fwd = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for p in (0..m).rev() {
            if out[i] == src[p] {
                fwd[i][p] = fwd[i + 1][p + 1] + 1;
            }
        }
    }
    (0..n)
        .map(|i| {
            (0..m)
                .filter(|&p| out[i] == src[p])
                .map(|p| back[i + 1][p + 1] + fwd[i][p] - 1)
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// Narrows each word's lexical contributors to the sources whose longest
/// matching run through that word is longest. A word that all sources
/// share is thereby credited to the source it was copied from along with
/// its neighbours.
pub fn attribute_output_words<S: AsRef<str>>(output: &[S], sources: &[SentenceText]) -> Vec<BTreeSet<usize>> {
    let out = lemmas(output);
    let runs: Vec<Vec<usize>> = sources
        .iter()
        .map(|s| longest_covering_run(&out, &lemmas(&s.tokens)))
        .collect();
    (0..out.len())
        .map(|i| {
            let best = runs.iter().map(|r| r[i]).max().unwrap_or(0);
            if best == 0 {
                return BTreeSet::new();
            }
            (0..sources.len()).filter(|&s| runs[s][i] == best).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsolidationReport {
    /// Attributed contributors of each output word.
    pub per_word_contributors: Vec<BTreeSet<usize>>,
    /// Every source sharing the word's lemma.
    pub lexical_contributors: Vec<BTreeSet<usize>>,
    pub is_consolidating: bool,
    /// Sources that are the sole contributor of some content word.
    pub contributing_sources: BTreeSet<usize>,
}

/// An output consolidates when at least two sources each solely contribute
/// some content word.
pub fn classify_consolidating<S: AsRef<str>>(output: &[S], sources: &[SentenceText]) -> ConsolidationReport {
    let per_word = attribute_output_words(output, sources);
    let contributing_sources: BTreeSet<usize> = output
        .iter()
        .zip(&per_word)
        .filter(|(w, c)| is_content_word(w.as_ref()) && c.len() == 1)
        .filter_map(|(_, c)| c.first().copied())
        .collect();
    ConsolidationReport {
        per_word_contributors: per_word,
        lexical_contributors: link_output_words(output, sources),
        is_consolidating: contributing_sources.len() >= 2,
        contributing_sources,
    }
}

/// Fraction of consolidating reports; 0.0 for none.
pub fn consolidation_rate(reports: &[ConsolidationReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| r.is_consolidating).count() as f64 / reports.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConsolidation {
    pub outputs: usize,
    pub consolidating: usize,
    pub rate: f64,
}

/// Consolidation rate of each system's outputs, keyed by system name.
pub fn consolidation_by_system(
    outputs: &[FusionOutput],
    instances: &[FusionInstance],
) -> Result<BTreeMap<String, SystemConsolidation>> {
    let by_cluster: HashMap<&str, &FusionInstance> = instances.iter().map(|i| (i.cluster_id.as_str(), i)).collect();
    let mut reports: BTreeMap<String, Vec<ConsolidationReport>> = BTreeMap::new();
    for out in outputs {
        let inst = by_cluster
            .get(out.cluster_id.as_str())
            .ok_or_else(|| Error::Invalid(format!("output for unknown cluster {}", out.cluster_id)))?;
        reports
            .entry(out.system.clone())
            .or_default()
            .push(classify_consolidating(&out.tokens, &inst.sources));
    }
    Ok(reports
        .into_iter()
        .map(|(system, rs)| {
            let summary = SystemConsolidation {
                outputs: rs.len(),
                consolidating: rs.iter().filter(|r| r.is_consolidating).count(),
                rate: consolidation_rate(&rs),
            };
            (system, summary)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::types::{Alignment, Provenance};

    fn sent(text: &str) -> SentenceText {
        SentenceText::new("d", "0", &text.split_whitespace().collect::<Vec<_>>())
    }

    #[test]
    fn police_dogs_markup() {
        let inst = fixtures::police_dogs_instance();
        let text = augment(&inst).unwrap();
        assert_eq!(text, fixtures::POLICE_DOGS_AUGMENTED);
        assert_eq!(text.matches("[P1] use [\\P1] [A1] dogs [\\A1]").count(), 2);
    }

    #[test]
    fn no_alignments_is_plain_join() {
        let mut inst = fixtures::police_dogs_instance();
        inst.pair_alignments.clear();
        let expected: Vec<String> = inst
            .sources
            .iter()
            .map(|s| s.tokens.join(" "))
            .collect();
        assert_eq!(augment(&inst).unwrap(), expected.join(" </s> "));
    }

    #[test]
    fn chained_alignments_share_one_index() {
        let sources = vec![sent("Ann met Bo"), sent("Bo met Ann"), sent("they met")];
        let q = |pred, ans| QARelation::new("q", pred, &["Who", "met", "?"], 1, &[ans]);
        let link = |a, b| PairAlignment {
            a,
            b,
            set: AlignmentSet::new(format!("{a}-{b}"), Provenance::Model)
                .with_alignments([Alignment::one_to_one("q", "q")]),
        };
        let inst = FusionInstance {
            cluster_id: "c".into(),
            sources,
            qas: vec![vec![q(1, (0, 1))], vec![q(1, (2, 3))], vec![q(1, (0, 1))]],
            target: vec![],
            pair_alignments: vec![link(0, 1), link(1, 2)],
        };
        assert_eq!(
            augment(&inst).unwrap(),
            "[A1] Ann [\\A1] [P1] met [\\P1] Bo </s> Bo [P1] met [\\P1] [A1] Ann [\\A1] </s> \
             [A1] they [\\A1] [P1] met [\\P1]"
        );
    }

    #[test]
    fn nested_same_kind_outermost_wins_and_crossing_fails() {
        let sources = vec![sent("a b c d"), sent("a b c d")];
        let q = |id: &str, ans| QARelation::new(id, 0, &["x", "?"], 0, &[ans]);
        let inst = |spans: [(usize, usize); 2]| FusionInstance {
            cluster_id: "c".into(),
            sources: sources.clone(),
            qas: vec![vec![q("q0", spans[0]), q("q1", spans[1])], vec![q("q0", (1, 2))]],
            target: vec![],
            pair_alignments: vec![PairAlignment {
                a: 0,
                b: 1,
                set: AlignmentSet::new("p", Provenance::Model).with_alignments([
                    Alignment::one_to_one("q0", "q0"),
                    Alignment::one_to_one("q1", "q0"),
                ]),
            }],
        };
        let nested = augment(&inst([(1, 4), (2, 3)])).unwrap();
        assert_eq!(nested, "[P1] a [\\P1] [A1] b c d [\\A1] </s> [P1] a [\\P1] [A1] b [\\A1] c d");
        let err = augment(&inst([(1, 3), (2, 4)])).unwrap_err();
        assert!(matches!(err, Error::CrossingSpans { source_index: 0, .. }), "{err}");
    }

    #[test]
    fn markup_recognition() {
        for t in ["[P1]", "[\\P12]", "[A3]", "[\\A3]", "</s>"] {
            assert!(is_fusion_markup(t), "{t}");
        }
        for t in ["[P]", "[/P]", "[Q]", "P1", "[P1", "[X1]", "[\\P]"] {
            assert!(!is_fusion_markup(t), "{t}");
        }
    }

    #[test]
    fn source_count_is_checked() {
        let mut inst = fixtures::police_dogs_instance();
        inst.sources.truncate(1);
        inst.qas.truncate(1);
        inst.pair_alignments.clear();
        assert!(augment(&inst).is_err());
    }

    #[test]
    fn linking_by_lemma() {
        let sources = [sent("they use dogs"), sent("a cat sleeps"), sent("dogs everywhere")];
        let links = link_output_words(&["uses", "cat", "dogs", "novel"], &sources);
        assert_eq!(links[0], BTreeSet::from([0]));
        assert_eq!(links[1], BTreeSet::from([1]));
        assert_eq!(links[2], BTreeSet::from([0, 2]));
        assert!(links[3].is_empty());
    }

    #[test]
    fn police_dogs_classification() {
        let inst = fixtures::police_dogs_instance();
        let outputs = fixtures::police_dogs_outputs();
        let fused = classify_consolidating(&outputs[0].tokens, &inst.sources);
        assert!(fused.is_consolidating);
        assert_eq!(fused.contributing_sources, BTreeSet::from([0, 2]));
        let copied = classify_consolidating(&outputs[1].tokens, &inst.sources);
        assert!(!copied.is_consolidating);
        assert_eq!(copied.contributing_sources, BTreeSet::from([1]));
    }

    #[test]
    fn identical_sources_are_never_consolidating() {
        let sources = [sent("the dog barked loudly"), sent("the dog barked loudly")];
        let r = classify_consolidating(&["dog", "barked", "loudly"], &sources);
        assert!(!r.is_consolidating);
        assert!(r.per_word_contributors.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn rates() {
        let yes = ConsolidationReport {
            per_word_contributors: vec![],
            lexical_contributors: vec![],
            is_consolidating: true,
            contributing_sources: BTreeSet::new(),
        };
        let no = ConsolidationReport {
            is_consolidating: false,
            ..yes.clone()
        };
        assert_eq!(consolidation_rate(&vec![yes.clone(); 4]), 1.0);
        assert_eq!(consolidation_rate(&vec![no.clone(); 4]), 0.0);
        let mut mixed = vec![no; 7];
        mixed.extend(vec![yes; 3]);
        assert_eq!(consolidation_rate(&mixed), 0.3);
    }

    #[test]
    fn rates_by_system() {
        let rates = consolidation_by_system(&fixtures::police_dogs_outputs(), &[fixtures::police_dogs_instance()]).unwrap();
        assert_eq!(rates["fuse-align"].rate, 1.0);
        assert_eq!(rates["baseline"].rate, 0.0);
    }
}
