//! ROUGE-2 and span IOU.

use std::collections::{BTreeSet, HashMap};

use crate::types::AnswerSpan;

fn bigram_counts(tokens: &[String]) -> HashMap<(&str, &str), usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(2) {
        *counts.entry((w[0].as_str(), w[1].as_str())).or_insert(0) += 1;
    }
    counts
}

/// Clipped bigram-overlap F1 over lowercased tokens, without stemming.
///
/// Identical token lists score 1.0; otherwise a list with fewer than two
/// tokens scores 0.0.
pub fn rouge2<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> f64 {
    let lower_a: Vec<String> = a.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let lower_b: Vec<String> = b.iter().map(|t| t.as_ref().to_lowercase()).collect();
    if lower_a == lower_b {
        return 1.0;
    }
    if lower_a.len() < 2 || lower_b.len() < 2 {
        return 0.0;
    }
    let ca = bigram_counts(&lower_a);
    let cb = bigram_counts(&lower_b);
    let overlap: usize = ca
        .iter()
        .map(|(bigram, &n)| n.min(cb.get(bigram).copied().unwrap_or(0)))
        .sum();
    // 2PR / (P + R) with P = o/|a|, R = o/|b| simplifies to 2o / (|a| + |b|),
    // which is exactly symmetric.
    let total = (lower_a.len() - 1) + (lower_b.len() - 1);
    2.0 * overlap as f64 / total as f64
}

fn coverage(spans: &[AnswerSpan]) -> BTreeSet<usize> {
    spans.iter().flat_map(|s| s.start..s.end).collect()
}

/// Intersection over union of the token positions covered by two span sets;
/// 0.0 when neither covers anything.
pub fn span_iou(a: &[AnswerSpan], b: &[AnswerSpan]) -> f64 {
    let (ca, cb) = (coverage(a), coverage(b));
    let union = ca.union(&cb).count();
    if union == 0 {
        return 0.0;
    }
    ca.intersection(&cb).count() as f64 / union as f64
}
