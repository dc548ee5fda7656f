use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Jsonl { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("qa {qa_id} does not belong to sentence {doc_id}/{sent_id}: {reason}")]
    Ownership {
        qa_id: String,
        doc_id: String,
        sent_id: String,
        reason: String,
    },

    #[error("pair id mismatch: {left} vs {right}")]
    PairMismatch { left: String, right: String },

    #[error(transparent)]
    Scorer(#[from] crate::scorer::ScorerError),

    #[error("coreference annotation does not cover document {doc_id}")]
    MissingCoverage { doc_id: String },

    #[error("unknown topic {0}")]
    UnknownTopic(String),

    #[error("unknown sentence {doc_id}/{sent_id}")]
    UnknownSentence { doc_id: String, sent_id: String },

    #[error("crossing markup spans in source {source_index}: {first} / {second}")]
    CrossingSpans {
        source_index: usize,
        first: String,
        second: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}
