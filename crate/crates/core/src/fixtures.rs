//! Small hand-built instances with hand-derived expected outputs.
//!
//! The same data ships as JSONL under `fixtures/`; a test keeps the two in
//! sync.

use crate::ecb::{Cluster, CorefAnnotation, Mention, MentionKind};
use crate::fusion::{FusionInstance, FusionOutput, PairAlignment};
use crate::types::{
    Alignment, AlignmentSet, AnswerSpan, CorpusTag, Provenance, QARelation, SentencePairInstance, SentenceText,
    Split,
};

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn sentence(doc: &str, sent: &str, text: &str) -> SentenceText {
    SentenceText::new(doc, sent, &words(text))
}

fn qa(id: &str, pred: usize, question: &str, qpred: usize, answers: &[(usize, usize)]) -> QARelation {
    QARelation::new(id, pred, &words(question), qpred, answers)
}

fn gold(pair_id: &str, edges: &[(&str, &str)]) -> AlignmentSet {
    AlignmentSet::new(pair_id, Provenance::Gold)
        .with_alignments(edges.iter().map(|&(l, r)| Alignment::one_to_one(l, r)))
}

/// "purchased" vs "sold": two gold alignments, no shared predicate lemma.
pub fn purchase_sell_pair() -> SentencePairInstance {
    SentencePairInstance {
        pair_id: "purchase-sell".into(),
        split: Split::Dev,
        a: sentence("purchase-sell-a", "0", "Wade purchased the Picasso painting for $ 7 million ."),
        b: sentence("purchase-sell-b", "0", "The owner sold the Picasso painting to Wade for $ 7 million ."),
        qas_a: vec![
            qa("a0", 1, "Who purchased something ?", 1, &[(0, 1)]),
            qa("a1", 1, "What did someone purchase ?", 3, &[(2, 5)]),
        ],
        qas_b: vec![
            qa("b0", 2, "Who sold something ?", 1, &[(0, 2)]),
            qa("b1", 2, "What did someone sell ?", 3, &[(3, 6)]),
            qa("b2", 2, "Who did someone sell something to ?", 3, &[(7, 8)]),
        ],
    }
}

pub fn purchase_sell_gold() -> AlignmentSet {
    gold("purchase-sell", &[("a0", "b2"), ("a1", "b1")])
}

/// The "fire"/"fired" pair; the lemma criterion holds for exactly one QA pair.
pub fn fire_cheeks_pair() -> SentencePairInstance {
    SentencePairInstance {
        pair_id: "fire-cheeks".into(),
        split: Split::Dev,
        a: sentence(
            "fire-cheeks-a",
            "0",
            "The Philadelphia 76ers fired coach Maurice Cheeks on Saturday , one day after the team \
             continued its slide with a season-worst offensive effort , dpa reported .",
        ),
        b: sentence(
            "fire-cheeks-b",
            "1",
            "Today , Maurice Cheeks became the fifth coach fired within the first quarter of the season .",
        )
        .with_context(&words(
            "If you don't know by now : you disappoint in the NBA , you get canned .",
        )),
        qas_a: vec![
            qa("a0", 3, "Who did someone fire ?", 3, &[(4, 7)]),
            qa("a1", 3, "Who fired someone ?", 1, &[(0, 3)]),
            qa("a2", 3, "When did someone fire someone ?", 3, &[(7, 9)]),
        ],
        qas_b: vec![
            qa("b0", 8, "Who was fired ?", 2, &[(2, 4)]),
            qa("b1", 4, "Who became something ?", 1, &[(2, 4)]),
            qa("b2", 4, "What did someone become ?", 3, &[(5, 8)]),
        ],
    }
}

pub fn fire_cheeks_gold() -> AlignmentSet {
    gold("fire-cheeks", &[("a0", "b0")])
}

/// "The man said that he came late" / "A man arrived late": "the man" and
/// "he" corefer, so both "Who came?" QAs induce an alignment to "Who arrived?".
pub fn ecb_redundancy_pair() -> SentencePairInstance {
    let tag = |s: SentenceText| s.with_tag(CorpusTag::Ecb);
    SentencePairInstance {
        pair_id: "ecb-redundancy".into(),
        split: Split::Dev,
        a: tag(sentence("ecb-d1", "0", "The man said that he came late .")),
        b: tag(sentence("ecb-d2", "0", "A man arrived late to the meeting .")),
        qas_a: vec![
            qa("a0", 2, "Who said something ?", 1, &[(0, 2)]),
            qa("a1", 5, "Who came ?", 1, &[(0, 2)]),
            qa("a2", 5, "Who came ?", 1, &[(4, 5)]),
        ],
        qas_b: vec![
            qa("b0", 2, "Who arrived ?", 1, &[(0, 2)]),
            qa("b1", 2, "Where did someone arrive ?", 3, &[(4, 7)]),
        ],
    }
}

fn mention(id: &str, doc: &str, span: (usize, usize), kind: MentionKind) -> Mention {
    Mention {
        mention_id: id.into(),
        doc_id: doc.into(),
        sent_id: "0".into(),
        span: AnswerSpan::new(span.0, span.1),
        kind,
        verbal: true,
    }
}

fn cluster(id: &str, kind: MentionKind, members: &[&str]) -> Cluster {
    Cluster {
        cluster_id: id.into(),
        kind,
        mention_ids: members.iter().map(|m| m.to_string()).collect(),
    }
}

pub fn ecb_redundancy_coref() -> CorefAnnotation {
    use MentionKind::{Entity, Event};
    CorefAnnotation {
        topic_id: "t-redundancy".into(),
        documents: vec!["ecb-d1".into(), "ecb-d2".into()],
        mentions: vec![
            mention("said", "ecb-d1", (2, 3), Event),
            mention("came", "ecb-d1", (5, 6), Event),
            mention("arrived", "ecb-d2", (2, 3), Event),
            mention("the-man", "ecb-d1", (0, 2), Entity),
            mention("he", "ecb-d1", (4, 5), Entity),
            mention("a-man", "ecb-d2", (0, 2), Entity),
            mention("meeting", "ecb-d2", (5, 7), Entity),
        ],
        clusters: vec![
            cluster("ev-arrive", Event, &["came", "arrived"]),
            cluster("ev-say", Event, &["said"]),
            cluster("en-man", Entity, &["the-man", "he", "a-man"]),
            cluster("en-meeting", Entity, &["meeting"]),
        ],
    }
}

pub fn ecb_redundancy_gold() -> AlignmentSet {
    gold("ecb-redundancy", &[("a1", "b0")])
}

pub fn ecb_redundancy_expected() -> AlignmentSet {
    AlignmentSet::new("ecb-redundancy", Provenance::EcbInduced)
        .with_alignments([Alignment::one_to_one("a1", "b0"), Alignment::one_to_one("a2", "b0")])
}

/// "charged"/"filed" corefer and so do the two drivers, but the Theme
/// ("manslaughter" / "manslaughter charges") carries no entity mention.
pub fn charged_filed_pair() -> SentencePairInstance {
    let tag = |s: SentenceText| s.with_tag(CorpusTag::Ecb);
    SentencePairInstance {
        pair_id: "charged-filed".into(),
        split: Split::Dev,
        a: tag(sentence("charged-filed-a", "0", "Police charged the driver with manslaughter .")),
        b: tag(sentence("charged-filed-b", "0", "Prosecutors filed manslaughter charges against the Driver .")),
        qas_a: vec![
            qa("a0", 1, "Who charged someone ?", 1, &[(0, 1)]),
            qa("a1", 1, "Who was charged ?", 2, &[(2, 4)]),
            qa("a2", 1, "What was someone charged with ?", 3, &[(5, 6)]),
        ],
        qas_b: vec![
            qa("b0", 1, "Who filed something ?", 1, &[(0, 1)]),
            qa("b1", 1, "What did someone file ?", 3, &[(2, 4)]),
            qa("b2", 1, "Who did someone file something against ?", 3, &[(5, 7)]),
        ],
    }
}

pub fn charged_filed_coref() -> CorefAnnotation {
    use MentionKind::{Entity, Event};
    CorefAnnotation {
        topic_id: "t-charged-filed".into(),
        documents: vec!["charged-filed-a".into(), "charged-filed-b".into()],
        mentions: vec![
            mention("charged", "charged-filed-a", (1, 2), Event),
            mention("filed", "charged-filed-b", (1, 2), Event),
            mention("police", "charged-filed-a", (0, 1), Entity),
            mention("driver-a", "charged-filed-a", (2, 4), Entity),
            mention("prosecutors", "charged-filed-b", (0, 1), Entity),
            mention("driver-b", "charged-filed-b", (5, 7), Entity),
        ],
        clusters: vec![
            cluster("ev-charge", Event, &["charged", "filed"]),
            cluster("en-driver", Entity, &["driver-a", "driver-b"]),
            cluster("en-police", Entity, &["police"]),
            cluster("en-prosecutors", Entity, &["prosecutors"]),
        ],
    }
}

pub fn charged_filed_gold() -> AlignmentSet {
    gold("charged-filed", &[("a1", "b2"), ("a2", "b1")])
}

/// Every bundled pair with its gold alignments.
pub fn gold_pairs() -> Vec<(SentencePairInstance, AlignmentSet)> {
    vec![
        (purchase_sell_pair(), purchase_sell_gold()),
        (fire_cheeks_pair(), fire_cheeks_gold()),
        (ecb_redundancy_pair(), ecb_redundancy_gold()),
        (charged_filed_pair(), charged_filed_gold()),
    ]
}

pub fn coref_annotations() -> Vec<CorefAnnotation> {
    vec![ecb_redundancy_coref(), charged_filed_coref()]
}

/// Three sources about police dogs; "use"/"dogs" is aligned between the
/// first and the last.
pub fn police_dogs_instance() -> FusionInstance {
    let s0 = sentence("pd-0", "0", "Law enforcement agencies use dogs worldwide .");
    let s1 = sentence("pd-1", "0", "Dogs perform many different law-enforcement tasks around the world .");
    let s2 = sentence(
        "pd-2",
        "0",
        "City and county police agencies , customs departments , fire departments , the Secret Service , \
         highway patrol , border patrol , military bases and some prisons in the US and many other \
         countries use dogs to help in law enforcement work .",
    );
    let set = |a: usize, b: usize, edges: &[(&str, &str)]| PairAlignment {
        a,
        b,
        set: AlignmentSet::new(format!("police-dogs:{a}-{b}"), Provenance::Model)
            .with_alignments(edges.iter().map(|&(l, r)| Alignment::one_to_one(l, r))),
    };
    FusionInstance {
        cluster_id: "police-dogs".into(),
        sources: vec![s0, s1, s2],
        qas: vec![
            vec![
                qa("q0", 3, "Who uses something ?", 1, &[(0, 3)]),
                qa("q1", 3, "What does someone use ?", 3, &[(4, 5)]),
                qa("q2", 3, "Where does someone use something ?", 3, &[(5, 6)]),
            ],
            vec![
                qa("q0", 1, "Who performs something ?", 1, &[(0, 1)]),
                qa("q1", 1, "What does someone perform ?", 3, &[(2, 6)]),
            ],
            vec![
                qa("q0", 34, "Who uses something ?", 1, &[(0, 34)]),
                qa("q1", 34, "What does someone use ?", 3, &[(35, 36)]),
                qa("q2", 34, "Why does someone use something ?", 3, &[(36, 42)]),
            ],
        ],
        target: words("Law enforcement agencies use dogs to help in law enforcement")
            .into_iter()
            .map(String::from)
            .collect(),
        pair_alignments: vec![set(0, 1, &[]), set(0, 2, &[("q1", "q1")]), set(1, 2, &[])],
    }
}

/// Augmented form of [`police_dogs_instance`].
pub const POLICE_DOGS_AUGMENTED: &str = "Law enforcement agencies [P1] use [\\P1] [A1] dogs [\\A1] worldwide . </s> \
     Dogs perform many different law-enforcement tasks around the world . </s> \
     City and county police agencies , customs departments , fire departments , the Secret Service , \
     highway patrol , border patrol , military bases and some prisons in the US and many other \
     countries [P1] use [\\P1] [A1] dogs [\\A1] to help in law enforcement work .";

/// Outputs of an alignment-aware and a plain fusion model for
/// [`police_dogs_instance`]: the first merges two sources, the second copies one.
pub fn police_dogs_outputs() -> Vec<FusionOutput> {
    let out = |system: &str, text: &str| FusionOutput {
        cluster_id: "police-dogs".into(),
        system: system.into(),
        tokens: words(text).into_iter().map(String::from).collect(),
    };
    vec![
        out("fuse-align", "Law enforcement agencies use dogs to help in law enforcement"),
        out("baseline", "Dogs perform many different law-enforcement tasks around the world"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::{validate_alignments, validate_pair};

    #[test]
    fn fixtures_are_valid() {
        for (pair, gold) in gold_pairs() {
            assert!(validate_pair(&pair).is_empty(), "{}: {:?}", pair.pair_id, validate_pair(&pair));
            assert!(validate_alignments(&pair, &gold).is_empty(), "{}", pair.pair_id);
        }
        for coref in coref_annotations() {
            coref.validate().unwrap();
        }
        police_dogs_instance().validate().unwrap();
    }

    #[test]
    fn token_positions_match_descriptions() {
        let fc = fire_cheeks_pair();
        assert_eq!(fc.a.tokens[3], "fired");
        assert_eq!(fc.a.tokens[4..7].join(" "), "coach Maurice Cheeks");
        assert_eq!(fc.b.tokens[8], "fired");
        assert_eq!(fc.b.tokens[2..4].join(" "), "Maurice Cheeks");
        let pd = police_dogs_instance();
        assert_eq!(pd.sources[2].tokens[34], "use");
        assert_eq!(pd.sources[2].tokens[35], "dogs");
        assert_eq!(pd.sources[2].len(), 43);
        let cf = charged_filed_pair();
        assert_eq!(cf.b.tokens[5..7].join(" "), "the Driver");
    }
}
