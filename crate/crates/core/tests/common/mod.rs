//! Seeded random instances shared by the property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use qalign_core::fusion::{FusionInstance, PairAlignment};
use qalign_core::{
    Alignment, AlignmentSet, AnswerSpan, Provenance, QARelation, ScoredEdge, SentencePairInstance, SentenceText,
    Split,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Small vocabulary with inflectional variants, so lemma matches happen.
pub const VOCAB: &[&str] = &[
    "the", "a", "man", "men", "dog", "dogs", "fire", "fired", "fires", "buy", "bought", "sell", "sold", "Cheeks",
    "cheek", "coach", "city", "cities", "arrive", "arrived", "he", "late", ".", ",", "to", "use", "uses", "help",
    "law", "agency", "agencies", "Police", "charged", "driver",
];

pub fn word(rng: &mut ChaCha8Rng) -> String {
    VOCAB.choose(rng).unwrap().to_string()
}

pub fn tokens(rng: &mut ChaCha8Rng, min: usize, max: usize) -> Vec<String> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| word(rng)).collect()
}

pub fn span(rng: &mut ChaCha8Rng, len: usize) -> AnswerSpan {
    let start = rng.gen_range(0..len);
    let end = rng.gen_range(start + 1..=len.min(start + 4));
    AnswerSpan::new(start, end)
}

pub fn qa(rng: &mut ChaCha8Rng, id: String, sentence_len: usize) -> QARelation {
    let question = tokens(rng, 1, 6);
    let n_answers = rng.gen_range(1..=2);
    QARelation {
        qa_id: id,
        predicate_index: rng.gen_range(0..sentence_len),
        question_predicate_index: rng.gen_range(0..question.len()),
        question_tokens: question,
        answers: (0..n_answers).map(|_| span(rng, sentence_len)).collect(),
    }
}

pub fn sentence(rng: &mut ChaCha8Rng, doc: &str, max_len: usize) -> SentenceText {
    SentenceText {
        doc_id: doc.to_string(),
        sent_id: rng.gen_range(0..5).to_string(),
        tokens: tokens(rng, 1, max_len),
        context_tokens: tokens(rng, 0, 4),
        corpus_tag: Default::default(),
    }
}

pub fn pair(rng: &mut ChaCha8Rng, max_qas: usize) -> SentencePairInstance {
    let a = sentence(rng, "doc-a", 10);
    let b = sentence(rng, "doc-b", 10);
    let qas_a = (0..rng.gen_range(0..=max_qas)).map(|i| qa(rng, format!("a{i}"), a.len())).collect();
    let qas_b = (0..rng.gen_range(0..=max_qas)).map(|i| qa(rng, format!("b{i}"), b.len())).collect();
    SentencePairInstance {
        pair_id: format!("p{}", rng.gen::<u32>()),
        split: *[Split::Train, Split::Dev, Split::Test].choose(rng).unwrap(),
        a,
        b,
        qas_a,
        qas_b,
    }
}

/// Bipartite graph with up to `max_side` nodes per side; scores are
/// multiples of 1/1024 so that float sums are exact.
pub fn dyadic_graph(rng: &mut ChaCha8Rng, max_side: usize) -> Vec<ScoredEdge> {
    let (nl, nr) = (rng.gen_range(0..=max_side), rng.gen_range(0..=max_side));
    let density = rng.gen_range(0.2..=1.0);
    let mut edges = Vec::new();
    for l in 0..nl {
        for r in 0..nr {
            if rng.gen_bool(density) {
                let score = rng.gen_range(0..=1024) as f64 / 1024.0;
                edges.push(ScoredEdge::new(format!("a{l}"), format!("b{r}"), score));
            }
        }
    }
    edges.shuffle(rng);
    edges
}

fn id_set(rng: &mut ChaCha8Rng, prefix: &str, pool: usize) -> BTreeSet<String> {
    let n = if rng.gen_bool(0.8) { 1 } else { rng.gen_range(1..=3) };
    (0..n).map(|_| format!("{prefix}{}", rng.gen_range(0..pool))).collect()
}

/// Alignment set over ids `a0..a4` / `b0..b4`, mostly 1:1.
pub fn alignment_set(rng: &mut ChaCha8Rng, pair_id: &str) -> AlignmentSet {
    let n = rng.gen_range(0..=6);
    AlignmentSet::new(pair_id, Provenance::Gold)
        .with_alignments((0..n).map(|_| Alignment::many(id_set(rng, "a", 5), id_set(rng, "b", 5))))
}

/// Sentence with answer spans drawn from one segmentation, so same-kind
/// spans never cross.
fn fusion_source(rng: &mut ChaCha8Rng, index: usize) -> (SentenceText, Vec<QARelation>) {
    let sent = SentenceText::new(format!("s{index}"), "0", &[]);
    let tokens = tokens(rng, 2, 12);
    let sent = SentenceText { tokens, ..sent };
    let n = sent.len();
    let mut cuts: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.4)).collect();
    cuts.insert(0, 0);
    cuts.push(n);
    let segments: Vec<AnswerSpan> = cuts.windows(2).map(|w| AnswerSpan::new(w[0], w[1])).collect();
    let qas = (0..rng.gen_range(1..=3))
        .map(|i| QARelation {
            qa_id: format!("q{i}"),
            predicate_index: rng.gen_range(0..n),
            question_tokens: vec!["What".into(), "happened".into(), "?".into()],
            question_predicate_index: 1,
            answers: vec![*segments.choose(rng).unwrap()],
        })
        .collect();
    (sent, qas)
}

pub fn fusion_instance(rng: &mut ChaCha8Rng) -> FusionInstance {
    let n = rng.gen_range(2..=4);
    let (sources, qas): (Vec<_>, Vec<_>) = (0..n).map(|i| fusion_source(rng, i)).unzip();
    let mut pair_alignments = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut set = AlignmentSet::new(format!("{a}-{b}"), Provenance::Model);
            for l in &qas[a] {
                for r in &qas[b] {
                    if rng.gen_bool(0.3) {
                        set.alignments.push(Alignment::one_to_one(l.qa_id.clone(), r.qa_id.clone()));
                    }
                }
            }
            pair_alignments.push(PairAlignment { a, b, set });
        }
    }
    FusionInstance {
        cluster_id: format!("c{}", rng.gen::<u32>()),
        sources,
        qas,
        target: tokens(rng, 1, 8),
        pair_alignments,
    }
}
