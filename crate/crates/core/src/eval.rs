//! Exact-match alignment evaluation, annotator agreement, and coverage.
//!
//! Zero-denominator convention: precision is 1.0 with no predictions, recall
//! is 1.0 with no gold, so identical empty sets score F1 = 1.0.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{Alignment, AlignmentSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// An alignment is a true positive iff an identical `(left, right)` pair is
/// in the gold set. Duplicates count once.
pub fn exact_match_f1(pred: &AlignmentSet, gold: &AlignmentSet) -> Result<Prf> {
    if pred.pair_id != gold.pair_id {
        return Err(Error::PairMismatch {
            left: pred.pair_id.clone(),
            right: gold.pair_id.clone(),
        });
    }
    Ok(match_counts(&pred.as_set(), &gold.as_set()))
}

fn match_counts(pred: &BTreeSet<&Alignment>, gold: &BTreeSet<&Alignment>) -> Prf {
    let tp = pred.intersection(gold).count();
    Prf::from_counts(tp, pred.len() - tp, gold.len() - tp)
}

/// Micro-averaged scores over aligned `(pred, gold)` lists.
///
/// An empty corpus scores 1.0 and logs a warning.
pub fn corpus_f1(preds: &[AlignmentSet], golds: &[AlignmentSet]) -> Result<Prf> {
    if preds.len() != golds.len() {
        return Err(Error::Invalid(format!(
            "{} predicted sets for {} gold sets",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        log::warn!("corpus_f1 over an empty corpus");
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in preds.iter().zip(golds) {
        let prf = exact_match_f1(p, g)?;
        tp += prf.tp;
        fp += prf.fp;
        fn_ += prf.fn_;
    }
    Ok(Prf::from_counts(tp, fp, fn_))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agreement {
    pub f1: f64,
    pub full_agreement: bool,
}

/// Agreement between two annotators' sets for the same pair.
pub fn agreement(first: &AlignmentSet, second: &AlignmentSet) -> Result<Agreement> {
    let prf = exact_match_f1(first, second)?;
    Ok(Agreement {
        f1: prf.f1,
        full_agreement: first.as_set() == second.as_set(),
    })
}

/// Whether `reference` contains an alignment whose sides include both sides
/// of `item`.
pub fn is_covered(item: &Alignment, reference: &AlignmentSet) -> bool {
    reference
        .alignments
        .iter()
        .any(|r| item.left.is_subset(&r.left) && item.right.is_subset(&r.right))
}

/// `(covered, total)` counts of `src` alignments covered by `reference`.
pub fn coverage_counts(src: &AlignmentSet, reference: &AlignmentSet) -> (usize, usize) {
    let distinct = src.as_set();
    let covered = distinct.iter().filter(|a| is_covered(a, reference)).count();
    (covered, distinct.len())
}

/// Fraction of `src` alignments covered by `reference`; 1.0 for empty `src`.
pub fn coverage(src: &AlignmentSet, reference: &AlignmentSet) -> f64 {
    let (covered, total) = coverage_counts(src, reference);
    if total == 0 {
        1.0
    } else {
        covered as f64 / total as f64
    }
}
