//! Exact top-k Hamming similarity search inside a precursor mass window.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hd::{kernels, Hypervector};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Wide window, ±500 Da.
    Open,
    /// Narrow window, ±0.05 Da.
    Standard,
}

impl WindowMode {
    pub fn half_width(self) -> f64 {
        match self {
            WindowMode::Open => 500.0,
            WindowMode::Standard => 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Precursor mass half-width in Da; `inf` searches the whole library.
    pub window: f64,
    pub k: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            window: WindowMode::Open.half_width(),
            k: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window >= 0.0) {
            return Err(Error::Config(format!("window must be >= 0, got {}", self.window)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// One query/reference pairing. `reference` is the insertion index of the
/// reference in its [`ReferenceIndex`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ScoredMatch {
    pub query: u32,
    pub reference: u32,
    /// Bipolar dot product in `[-D, D]`.
    pub similarity: i32,
    pub is_decoy: bool,
}

#[derive(Clone, Debug)]
pub struct ReferenceEntry {
    pub id: String,
    pub precursor_mass: f64,
    pub is_decoy: bool,
    pub peptide: Option<String>,
    pub hv: Hypervector,
}

/// Reference hypervectors packed row-major in ascending precursor mass.
#[derive(Clone, Debug)]
pub struct ReferenceIndex {
    dim: usize,
    /// Packed rows, in mass order.
    rows: Vec<u64>,
    masses: Vec<f64>,
    /// Mass-order position to reference id.
    order: Vec<u32>,
    ids: Vec<String>,
    peptides: Vec<Option<String>>,
    decoy: Vec<bool>,
}

impl ReferenceIndex {
    pub fn build(dim: usize, entries: Vec<ReferenceEntry>) -> Result<Self> {
        if dim == 0 || dim % 64 != 0 {
            return Err(Error::Config(format!("invalid dimension {dim}")));
        }
        if entries.len() > u32::MAX as usize {
            return Err(Error::Config("too many references".into()));
        }
        for e in &entries {
            if e.hv.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.hv.dim(),
                });
            }
        }
        let mut order: Vec<u32> = (0..entries.len() as u32).collect();
        order.sort_by(|&a, &b| {
            entries[a as usize]
                .precursor_mass
                .total_cmp(&entries[b as usize].precursor_mass)
                .then(a.cmp(&b))
        });
        let words = dim / 64;
        let mut rows = Vec::with_capacity(entries.len() * words);
        let mut masses = Vec::with_capacity(entries.len());
        for &i in &order {
            let e = &entries[i as usize];
            rows.extend_from_slice(e.hv.words());
            masses.push(e.precursor_mass);
        }
        let mut ids = Vec::with_capacity(entries.len());
        let mut peptides = Vec::with_capacity(entries.len());
        let mut decoy = Vec::with_capacity(entries.len());
        for e in entries {
            ids.push(e.id);
            peptides.push(e.peptide);
            decoy.push(e.is_decoy);
        }
        Ok(ReferenceIndex {
            dim,
            rows,
            masses,
            order,
            ids,
            peptides,
            decoy,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn words_per_row(&self) -> usize {
        self.dim / 64
    }

    /// Precursor masses in ascending order.
    pub fn sorted_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn reference_at(&self, position: usize) -> u32 {
        self.order[position]
    }

    pub fn id(&self, reference: u32) -> &str {
        &self.ids[reference as usize]
    }

    pub fn peptide(&self, reference: u32) -> Option<&str> {
        self.peptides[reference as usize].as_deref()
    }

    pub fn is_decoy(&self, reference: u32) -> bool {
        self.decoy[reference as usize]
    }

    pub fn row(&self, position: usize) -> &[u64] {
        let w = self.words_per_row();
        &self.rows[position * w..(position + 1) * w]
    }

    /// Packed rows in mass order; used to inject storage errors.
    pub fn rows_mut(&mut self) -> &mut [u64] {
        &mut self.rows
    }

    /// Positions of references with `|mass - query_mass| <= window`.
    pub fn candidate_range(&self, query_mass: f64, window: f64) -> Range<usize> {
        if window.is_infinite() {
            return 0..self.len();
        }
        let lo = self.masses.partition_point(|&m| m < query_mass - window);
        let hi = self.masses.partition_point(|&m| m <= query_mass + window);
        lo..hi.max(lo)
    }

    /// The `k` best references among `positions`, by descending similarity
    /// and then ascending reference id.
    pub fn hamming_topk(&self, query_index: u32, query: &Hypervector, positions: Range<usize>, k: usize) -> Result<Vec<ScoredMatch>> {
        if query.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.dim(),
            });
        }
        if k == 0 || positions.is_empty() {
            return Ok(Vec::new());
        }
        let w = self.words_per_row();
        let mut dist = vec![0u32; positions.len()];
        kernels::hamming_rows(query.words(), &self.rows[positions.start * w..positions.end * w], &mut dist);

        // (similarity desc, id asc) is the same as (distance asc, id asc)
        let mut best: Vec<(u32, u32)> = Vec::with_capacity(k + 1);
        for (offset, &d) in dist.iter().enumerate() {
            let r = self.order[positions.start + offset];
            let key = (d, r);
            if best.len() == k && key >= best[k - 1] {
                continue;
            }
            let at = best.partition_point(|&b| b < key);
            best.insert(at, key);
            best.truncate(k);
        }
        Ok(best
            .into_iter()
            .map(|(d, r)| ScoredMatch {
                query: query_index,
                reference: r,
                similarity: self.dim as i32 - 2 * d as i32,
                is_decoy: self.decoy[r as usize],
            })
            .collect())
    }

    /// Top-`k` from externally computed similarities, one per position in
    /// `positions.start ..`, with the same ordering as [`hamming_topk`](Self::hamming_topk).
    pub fn rank_scores(&self, query_index: u32, first_position: usize, scores: &[i32], k: usize) -> Vec<ScoredMatch> {
        let mut best: Vec<(i32, u32)> = Vec::with_capacity(k + 1);
        if k == 0 {
            return Vec::new();
        }
        for (offset, &s) in scores.iter().enumerate() {
            let r = self.order[first_position + offset];
            let key = (-s, r);
            if best.len() == k && key >= best[k - 1] {
                continue;
            }
            let at = best.partition_point(|&b| b < key);
            best.insert(at, key);
            best.truncate(k);
        }
        best.into_iter()
            .map(|(s, r)| ScoredMatch {
                query: query_index,
                reference: r,
                similarity: -s,
                is_decoy: self.decoy[r as usize],
            })
            .collect()
    }

    /// Window plus top-k for a single query.
    pub fn search(&self, query_index: u32, query: &Hypervector, query_mass: f64, cfg: &SearchConfig) -> Result<Vec<ScoredMatch>> {
        let range = self.candidate_range(query_mass, cfg.window);
        self.hamming_topk(query_index, query, range, cfg.k)
    }
}

/// A query hypervector with its precursor mass.
pub struct Query<'a> {
    pub hv: &'a Hypervector,
    pub precursor_mass: f64,
}

/// Searches every query; result `i` belongs to query `i` whatever the
/// number of worker threads.
pub fn batch_search(queries: &[Query<'_>], index: &ReferenceIndex, cfg: &SearchConfig) -> Result<Vec<Vec<ScoredMatch>>> {
    cfg.validate()?;
    queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| index.search(i as u32, q.hv, q.precursor_mass, cfg))
        .collect()
}

pub const RESULTS_HEADER: [&str; 5] = ["query_id", "rank", "reference_id", "similarity", "is_decoy"];

/// Writes the results CSV, one row per match, ranks starting at 1.
pub fn write_results_csv<W: Write>(out: W, query_ids: &[String], index: &ReferenceIndex, results: &[Vec<ScoredMatch>]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Format(format!("writing results: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER).map_err(to_err)?;
    for matches in results {
        for (rank, m) in matches.iter().enumerate() {
            w.write_record([
                query_ids[m.query as usize].as_str(),
                &(rank + 1).to_string(),
                index.id(m.reference),
                &m.similarity.to_string(),
                if m.is_decoy { "true" } else { "false" },
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::Format(format!("writing results: {e}")))?;
    Ok(())
}
