//! Candidate scorers and the wire protocol spoken to external ones.
//!
//! A [`Scorer`] assigns each cross-side QA pair a probability in `[0, 1]`.
//! The built-in scorers (constant, lemma criterion, gold oracle) run
//! in-process; [`ExternalScorer`] ships serialized candidates to another
//! process over the line-delimited JSON protocol in [`protocol`].

pub mod protocol;
pub mod transport;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::candidate::serialize_candidate;
use crate::lemma::{lemma_criterion, PairHeads};
use crate::types::{AlignmentSet, QARelation, SentencePairInstance};

pub use protocol::{ScoreItem, ScoreRequest, ScoreResponse};
pub use transport::{score_batch, score_batches, Transport};

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("request {request_id}: {reason}")]
    Transport { request_id: String, reason: String },

    #[error("pair {pair_id}, candidate ({left}, {right}): {reason}")]
    Candidate {
        pair_id: String,
        left: String,
        right: String,
        reason: String,
    },

    #[error("pair {pair_id}: scorer returned {got} scores for {expected} candidates")]
    Count {
        pair_id: String,
        expected: usize,
        got: usize,
    },

    #[error("scorer configuration: {0}")]
    Config(String),
}

/// One QA from each side of a pair.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub left: &'a QARelation,
    pub right: &'a QARelation,
}

pub trait Scorer: Send + Sync {
    /// One score per candidate, in order.
    fn score(&self, pair: &SentencePairInstance, candidates: &[Candidate<'_>]) -> Result<Vec<f64>, ScorerError>;
}

/// Scores every candidate with the same value.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn score(&self, _pair: &SentencePairInstance, candidates: &[Candidate<'_>]) -> Result<Vec<f64>, ScorerError> {
        Ok(vec![self.0; candidates.len()])
    }
}

/// 1.0 where the lemma-baseline criterion holds, else 0.0.
#[derive(Debug, Clone, Default)]
pub struct LemmaScorer {
    heads: HashMap<String, PairHeads>,
}

impl LemmaScorer {
    pub fn new() -> Self {
        LemmaScorer::default()
    }

    pub fn with_heads(heads: impl IntoIterator<Item = PairHeads>) -> Self {
        LemmaScorer {
            heads: heads.into_iter().map(|h| (h.pair_id.clone(), h)).collect(),
        }
    }
}

impl Scorer for LemmaScorer {
    fn score(&self, pair: &SentencePairInstance, candidates: &[Candidate<'_>]) -> Result<Vec<f64>, ScorerError> {
        let heads = self.heads.get(&pair.pair_id);
        Ok(candidates
            .iter()
            .map(|c| if lemma_criterion(pair, c.left, c.right, heads) { 1.0 } else { 0.0 })
            .collect())
    }
}

/// 1.0 on the 1:1 gold edges of each pair, 0.0 elsewhere.
#[derive(Debug, Clone, Default)]
pub struct GoldOracle {
    edges: HashMap<String, BTreeSet<(String, String)>>,
}

impl GoldOracle {
    pub fn new(gold: &[AlignmentSet]) -> Self {
        let mut edges: HashMap<String, BTreeSet<(String, String)>> = HashMap::new();
        for set in gold {
            let slot = edges.entry(set.pair_id.clone()).or_default();
            slot.extend(set.one_to_one().map(|(l, r)| (l.to_string(), r.to_string())));
        }
        GoldOracle { edges }
    }
}

impl Scorer for GoldOracle {
    fn score(&self, pair: &SentencePairInstance, candidates: &[Candidate<'_>]) -> Result<Vec<f64>, ScorerError> {
        let gold = self.edges.get(&pair.pair_id);
        Ok(candidates
            .iter()
            .map(|c| {
                let key = (c.left.qa_id.clone(), c.right.qa_id.clone());
                if gold.is_some_and(|g| g.contains(&key)) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Scores candidates through a [`Transport`], `batch_size` items per request.
pub struct ExternalScorer {
    transport: Mutex<Box<dyn Transport>>,
    batch_size: usize,
    next_request: AtomicU64,
}

impl ExternalScorer {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        ExternalScorer {
            transport: Mutex::new(transport),
            batch_size: DEFAULT_BATCH_SIZE,
            next_request: AtomicU64::new(0),
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Requests covering `candidates`, with candidate ids `c<k>` (global
    /// candidate position).
    pub fn build_requests(
        &self,
        pair: &SentencePairInstance,
        candidates: &[Candidate<'_>],
    ) -> Result<Vec<ScoreRequest>, ScorerError> {
        let mut items = Vec::with_capacity(candidates.len());
        for (k, c) in candidates.iter().enumerate() {
            let encode = |qa: &QARelation, sent| {
                serialize_candidate(qa, sent).map_err(|e| ScorerError::Candidate {
                    pair_id: pair.pair_id.clone(),
                    left: c.left.qa_id.clone(),
                    right: c.right.qa_id.clone(),
                    reason: e.to_string(),
                })
            };
            items.push(ScoreItem {
                candidate_id: format!("c{k}"),
                text_a: encode(c.left, &pair.a)?,
                text_b: encode(c.right, &pair.b)?,
            });
        }
        Ok(items
            .chunks(self.batch_size)
            .map(|chunk| ScoreRequest {
                request_id: format!("r{}", self.next_request.fetch_add(1, Ordering::Relaxed)),
                items: chunk.to_vec(),
            })
            .collect())
    }
}

impl Scorer for ExternalScorer {
    fn score(&self, pair: &SentencePairInstance, candidates: &[Candidate<'_>]) -> Result<Vec<f64>, ScorerError> {
        let requests = self.build_requests(pair, candidates)?;
        let responses = {
            let mut transport = self.transport.lock().map_err(|_| ScorerError::Transport {
                request_id: requests.first().map(|r| r.request_id.clone()).unwrap_or_default(),
                reason: "transport poisoned by an earlier failure".into(),
            })?;
            score_batches(&requests, transport.as_mut())?
        };
        let mut scores = Vec::with_capacity(candidates.len());
        for (req, resp) in requests.iter().zip(&responses) {
            for item in &req.items {
                scores.push(resp.scores[&item.candidate_id]);
            }
        }
        Ok(scores)
    }
}

/// Scorer selection as written on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ScorerSpec {
    Lemma,
    Constant(f64),
    /// `exec:<command>`, `tcp://host:port` or `http://host:port/path`.
    External(String),
    /// Path of a gold alignments file.
    Gold(String),
}

impl FromStr for ScorerSpec {
    type Err = ScorerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "lemma" {
            return Ok(ScorerSpec::Lemma);
        }
        if let Some(x) = s.strip_prefix("constant:") {
            let value: f64 = x
                .parse()
                .map_err(|_| ScorerError::Config(format!("bad constant score {x:?}")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(ScorerError::Config(format!("constant score {value} outside [0, 1]")));
            }
            return Ok(ScorerSpec::Constant(value));
        }
        if let Some(addr) = s.strip_prefix("external:") {
            return Ok(ScorerSpec::External(addr.to_string()));
        }
        if let Some(path) = s.strip_prefix("gold:") {
            return Ok(ScorerSpec::Gold(path.to_string()));
        }
        Err(ScorerError::Config(format!(
            "unknown scorer {s:?} (expected lemma, constant:x, external:ADDR or gold:PATH)"
        )))
    }
}

impl fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorerSpec::Lemma => f.write_str("lemma"),
            ScorerSpec::Constant(x) => write!(f, "constant:{x}"),
            ScorerSpec::External(addr) => write!(f, "external:{addr}"),
            ScorerSpec::Gold(path) => write!(f, "gold:{path}"),
        }
    }
}
