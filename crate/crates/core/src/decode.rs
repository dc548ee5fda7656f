//! Scored candidate edges to a 1:1 alignment set.
//!
//! Edges scoring below `tau` are dropped; among the survivors the decoder
//! picks a node-disjoint set of maximum total weight. When several matchings
//! tie, the one whose `(left, right)`-sorted edge list is lexicographically
//! smallest wins.
//!
//! Weights are compared exactly: each score is converted to a fixed-point
//! integer (`score * 2^100`), which is lossless for every `f64` at or above
//! `2^-48`.

use std::collections::BTreeMap;

use crate::scorer::{Candidate, Scorer, ScorerError};
use crate::types::{Alignment, AlignmentSet, DecoderConfig, Provenance, ScoredEdge, SentencePairInstance};

/// A node-disjoint edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Sorted by `(left, right)`.
    pub edges: Vec<(String, String)>,
    /// Sum of the chosen scores, added in edge order.
    pub total_weight: f64,
}

impl Matching {
    pub fn is_node_disjoint(&self) -> bool {
        let mut left = std::collections::BTreeSet::new();
        let mut right = std::collections::BTreeSet::new();
        self.edges
            .iter()
            .all(|(l, r)| left.insert(l.as_str()) && right.insert(r.as_str()))
    }
}

const FIXED_POINT_SHIFT: i32 = 100;

fn fixed_point(score: f64) -> i128 {
    (score * 2f64.powi(FIXED_POINT_SHIFT)) as i128
}

/// Scores every cross-side QA pair with `scorer`, ordered by left id then
/// right id.
pub fn score_all(pair: &SentencePairInstance, scorer: &dyn Scorer) -> Result<Vec<ScoredEdge>, ScorerError> {
    let mut left: Vec<_> = pair.qas_a.iter().collect();
    let mut right: Vec<_> = pair.qas_b.iter().collect();
    left.sort_by(|x, y| x.qa_id.cmp(&y.qa_id));
    right.sort_by(|x, y| x.qa_id.cmp(&y.qa_id));
    let candidates: Vec<Candidate<'_>> = left
        .iter()
        .flat_map(|l| right.iter().map(move |r| Candidate { left: l, right: r }))
        .collect();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let scores = scorer.score(pair, &candidates)?;
    if scores.len() != candidates.len() {
        return Err(ScorerError::Count {
            pair_id: pair.pair_id.clone(),
            expected: candidates.len(),
            got: scores.len(),
        });
    }
    candidates
        .iter()
        .zip(scores)
        .map(|(c, score)| {
            if !(0.0..=1.0).contains(&score) {
                return Err(ScorerError::Candidate {
                    pair_id: pair.pair_id.clone(),
                    left: c.left.qa_id.clone(),
                    right: c.right.qa_id.clone(),
                    reason: format!("score {score} outside [0, 1]"),
                });
            }
            Ok(ScoredEdge::new(c.left.qa_id.clone(), c.right.qa_id.clone(), score))
        })
        .collect()
}

/// Thresholds `edges` at `cfg.tau` and returns the decoded alignments.
pub fn decode(pair_id: &str, edges: &[ScoredEdge], cfg: &DecoderConfig) -> AlignmentSet {
    let matching = max_weight_matching(edges, cfg.tau);
    AlignmentSet::new(pair_id, Provenance::Model)
        .with_alignments(matching.edges.into_iter().map(|(l, r)| Alignment::one_to_one(l, r)))
}

/// Edges with `score >= tau`, one per `(left, right)` (highest score kept),
/// sorted by ids.
pub fn surviving_edges(edges: &[ScoredEdge], tau: f64) -> Vec<ScoredEdge> {
    let mut best: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for e in edges.iter().filter(|e| e.score.is_finite() && e.score >= tau) {
        let slot = best.entry((e.left_qa.as_str(), e.right_qa.as_str())).or_insert(e.score);
        if e.score > *slot {
            *slot = e.score;
        }
    }
    best.into_iter()
        .map(|((l, r), s)| ScoredEdge::new(l, r, s))
        .collect()
}

/// Maximum-weight matching over the edges that survive `tau`.
pub fn max_weight_matching(edges: &[ScoredEdge], tau: f64) -> Matching {
    let surviving = surviving_edges(edges, tau);
    if surviving.is_empty() {
        return Matching {
            edges: Vec::new(),
            total_weight: 0.0,
        };
    }
    let graph = Graph::new(&surviving);
    let chosen = graph.lexicographic_optimum();
    let total_weight = chosen.iter().map(|&k| surviving[k].score).sum();
    Matching {
        edges: chosen
            .into_iter()
            .map(|k| (surviving[k].left_qa.clone(), surviving[k].right_qa.clone()))
            .collect(),
        total_weight,
    }
}

/// Bipartite graph over sorted node ids; edges are indexed in sorted order.
struct Graph {
    n_left: usize,
    n_right: usize,
    /// `(left node, right node, fixed-point weight)`, sorted.
    edges: Vec<(usize, usize, i128)>,
}

impl Graph {
    fn new(sorted: &[ScoredEdge]) -> Graph {
        let mut left_ids: Vec<&str> = sorted.iter().map(|e| e.left_qa.as_str()).collect();
        let mut right_ids: Vec<&str> = sorted.iter().map(|e| e.right_qa.as_str()).collect();
        left_ids.dedup();
        right_ids.sort_unstable();
        right_ids.dedup();
        let edges = sorted
            .iter()
            .map(|e| {
                let l = left_ids.binary_search(&e.left_qa.as_str()).expect("left id indexed");
                let r = right_ids.binary_search(&e.right_qa.as_str()).expect("right id indexed");
                (l, r, fixed_point(e.score))
            })
            .collect();
        Graph {
            n_left: left_ids.len(),
            n_right: right_ids.len(),
            edges,
        }
    }

    /// Optimal weight using only edges at positions in `allowed` whose nodes
    /// are free.
    fn best_weight(&self, allowed: impl Iterator<Item = usize>, used_left: &[bool], used_right: &[bool]) -> i128 {
        let n = self.n_left.max(self.n_right);
        let mut weight = vec![vec![0i128; n]; n];
        for k in allowed {
            let (l, r, w) = self.edges[k];
            if !used_left[l] && !used_right[r] {
                weight[l][r] = w;
            }
        }
        max_assignment(&weight)
    }

    /// Positions of the chosen edges, in sorted order.
    fn lexicographic_optimum(&self) -> Vec<usize> {
        let mut used_left = vec![false; self.n_left];
        let mut used_right = vec![false; self.n_right];
        let optimum = self.best_weight(0..self.edges.len(), &used_left, &used_right);
        let mut chosen = Vec::new();
        let mut weight = 0i128;
        let mut next = 0;
        // Grow the sorted edge list one smallest feasible edge at a time,
        // stopping as soon as the prefix itself is optimal.
        while weight < optimum {
            let pick = (next..self.edges.len()).find(|&k| {
                let (l, r, w) = self.edges[k];
                if used_left[l] || used_right[r] {
                    return false;
                }
                used_left[l] = true;
                used_right[r] = true;
                let rest = self.best_weight(k + 1..self.edges.len(), &used_left, &used_right);
                used_left[l] = false;
                used_right[r] = false;
                weight + w + rest == optimum
            });
            let Some(k) = pick else {
                unreachable!("an optimal extension always exists");
            };
            let (l, r, w) = self.edges[k];
            used_left[l] = true;
            used_right[r] = true;
            weight += w;
            chosen.push(k);
            next = k + 1;
        }
        chosen
    }
}

/// Maximum total weight of an assignment on a square non-negative matrix
/// (Hungarian algorithm with potentials, O(n^3)). Zero entries stand for
/// "leave unmatched".
fn max_assignment(weight: &[Vec<i128>]) -> i128 {
    let n = weight.len();
    if n == 0 {
        return 0;
    }
    // Minimize cost = -weight; 1-based arrays with column 0 as sentinel.
    let cost = |i: usize, j: usize| -weight[i - 1][j - 1];
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut assigned_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0;
        let mut min_slack = vec![i128::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = i128::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < min_slack[j] {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| weight[assigned_row[j] - 1][j - 1]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(l: &str, r: &str, s: f64) -> ScoredEdge {
        ScoredEdge::new(l, r, s)
    }

    fn pairs(m: &Matching) -> Vec<(&str, &str)> {
        m.edges.iter().map(|(l, r)| (l.as_str(), r.as_str())).collect()
    }

    #[test]
    fn prefers_heavier_matching() {
        // {(a1,b1),(a2,b2)} weighs 1.75; the alternative (a1,b2) alone 0.8.
        let edges = [e("a1", "b1", 0.9), e("a1", "b2", 0.8), e("a2", "b2", 0.85)];
        let m = max_weight_matching(&edges, 0.5);
        assert_eq!(pairs(&m), [("a1", "b1"), ("a2", "b2")]);
        assert_eq!(m.total_weight, 0.9 + 0.85);
    }

    #[test]
    fn threshold_is_inclusive() {
        assert!(decode("p", &[e("a", "b", 0.49)], &DecoderConfig::default()).is_empty());
        assert_eq!(decode("p", &[e("a", "b", 0.5)], &DecoderConfig::default()).len(), 1);
        assert!(decode("p", &[], &DecoderConfig::default()).is_empty());
    }

    #[test]
    fn ties_prefer_lexicographically_smallest() {
        // Two perfect matchings of equal weight.
        let edges = [
            e("a1", "b1", 0.75),
            e("a1", "b2", 0.75),
            e("a2", "b1", 0.75),
            e("a2", "b2", 0.75),
        ];
        let m = max_weight_matching(&edges, 0.5);
        assert_eq!(pairs(&m), [("a1", "b1"), ("a2", "b2")]);
        // A single edge tying with a two-edge matching: (a1,b1) sorts first.
        let edges = [e("a1", "b1", 1.0), e("a1", "b2", 0.5), e("a2", "b1", 0.5)];
        let m = max_weight_matching(&edges, 0.5);
        assert_eq!(pairs(&m), [("a1", "b1")]);
    }

    #[test]
    fn zero_weight_edges_only_break_ties() {
        // Both matchings weigh 0.6; the one listing (a1, b1) first sorts lower.
        let edges = [e("a1", "b1", 0.0), e("a2", "b2", 0.6)];
        let m = max_weight_matching(&edges, 0.0);
        assert_eq!(pairs(&m), [("a1", "b1"), ("a2", "b2")]);
        let edges = [e("a2", "b2", 0.0), e("a1", "b1", 0.6)];
        assert_eq!(pairs(&max_weight_matching(&edges, 0.0)), [("a1", "b1")]);
    }

    #[test]
    fn duplicate_edges_keep_best_score() {
        let edges = [e("a", "b", 0.6), e("a", "b", 0.9)];
        assert_eq!(max_weight_matching(&edges, 0.5).total_weight, 0.9);
    }

    #[test]
    fn assignment_on_rectangular_support() {
        let w = vec![vec![3, 0, 0], vec![2, 0, 0], vec![0, 5, 1]];
        assert_eq!(max_assignment(&w), 8);
        assert_eq!(max_assignment(&[]), 0);
    }
}
