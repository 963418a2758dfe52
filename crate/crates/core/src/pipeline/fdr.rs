//! Target-decoy false discovery rate filtering of best matches.
//!
//! For a score cut `s` the estimated FDR is
//! `#(decoys >= s) / max(1, #(targets >= s))`. The filter picks the smallest
//! cut whose FDR is within the threshold and accepts the targets above it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::search::ScoredMatch;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdrResult {
    /// Smallest accepted similarity; `None` when nothing passes.
    pub score_threshold: Option<i32>,
    /// Accepted target matches, in input order.
    pub accepted: Vec<ScoredMatch>,
    pub targets_above: usize,
    pub decoys_above: usize,
    /// FDR at `score_threshold`, 0 when nothing passes.
    pub achieved_fdr: f64,
    /// Lowest FDR over all cuts that keep at least one match.
    pub best_attainable_fdr: f64,
}

/// FDR at every distinct score, ascending by score, as `(score, targets, decoys, fdr)`.
pub fn fdr_curve(matches: &[ScoredMatch]) -> Vec<(i32, usize, usize, f64)> {
    let mut scores: Vec<(i32, bool)> = matches.iter().map(|m| (m.similarity, m.is_decoy)).collect();
    scores.sort_unstable_by_key(|s| std::cmp::Reverse(s.0));
    let mut curve = Vec::new();
    let (mut targets, mut decoys) = (0usize, 0usize);
    let mut i = 0;
    while i < scores.len() {
        let s = scores[i].0;
        while i < scores.len() && scores[i].0 == s {
            if scores[i].1 {
                decoys += 1;
            } else {
                targets += 1;
            }
            i += 1;
        }
        curve.push((s, targets, decoys, decoys as f64 / targets.max(1) as f64));
    }
    curve.reverse();
    curve
}

/// q-value of every match: the lowest FDR over all cuts at or below its score.
pub fn q_values(matches: &[ScoredMatch]) -> Vec<f64> {
    let curve = fdr_curve(matches);
    let mut q = Vec::with_capacity(curve.len());
    let mut lowest = f64::INFINITY;
    for &(_, _, _, fdr) in &curve {
        lowest = lowest.min(fdr);
        q.push(lowest);
    }
    matches
        .iter()
        .map(|m| {
            let at = curve.partition_point(|c| c.0 < m.similarity);
            q[at]
        })
        .collect()
}

/// Rank-1 FDR filter. `threshold` must lie in (0, 1).
pub fn fdr_filter(matches: &[ScoredMatch], threshold: f64) -> Result<FdrResult> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("FDR threshold must be in (0, 1), got {threshold}")));
    }
    let curve = fdr_curve(matches);
    let best_attainable_fdr = curve.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
    let Some(&(s, targets, decoys, fdr)) = curve.iter().find(|c| c.3 <= threshold && c.1 > 0) else {
        return Ok(FdrResult {
            score_threshold: None,
            accepted: Vec::new(),
            targets_above: 0,
            decoys_above: 0,
            achieved_fdr: 0.0,
            best_attainable_fdr: if curve.is_empty() { 0.0 } else { best_attainable_fdr },
        });
    };
    Ok(FdrResult {
        score_threshold: Some(s),
        accepted: matches.iter().filter(|m| !m.is_decoy && m.similarity >= s).copied().collect(),
        targets_above: targets,
        decoys_above: decoys,
        achieved_fdr: fdr,
        best_attainable_fdr,
    })
}
