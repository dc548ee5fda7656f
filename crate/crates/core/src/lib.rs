//! Alignment of predicate-argument propositions across related sentences.
//!
//! Propositions are QA-SRL question-answer pairs. The crate provides the
//! shared data model and its JSONL schemas, a lemma baseline, a
//! threshold-and-matching decoder over pluggable scorers, exact-match
//! evaluation, coreference-based alignment induction, dataset assembly, and
//! sentence-fusion input augmentation and output analysis.

pub mod candidate;
pub mod decode;
pub mod dataset;
pub mod ecb;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod fusion;
pub mod jsonl;
pub mod lemma;
pub mod scorer;
pub mod stopwords;
pub mod types;
pub mod validate;

pub use candidate::{candidate_records, serialize_candidate, CandidateRecord};
pub use decode::{decode, max_weight_matching, score_all, Matching};
pub use error::{Error, Result};
pub use eval::{corpus_f1, coverage, exact_match_f1, Prf};
pub use lemma::{lemma_align, lemmatize};
pub use scorer::Scorer;
pub use types::*;
pub use validate::{validate_alignments, validate_pair, Severity, Violation};

/// Schema versions of the on-disk formats and the scorer wire protocol.
pub const SCHEMA_VERSIONS: &[(&str, u32)] = &[
    ("pairs", 1),
    ("alignments", 1),
    ("candidates", 1),
    ("coref", 1),
    ("fusion", 1),
    ("scorer-protocol", 1),
];
