//! In-memory ID-level encoding.
//!
//! ID hypervectors are stored horizontally: one logical (differential) row per
//! bin, one column per dimension. Level hypervectors are applied as row
//! inputs, so column `d` accumulates `sum_i ID_i[d] * LV_i[d]`.
//!
//! Because every row carries a single input per cycle, a generic level vector
//! needs one cycle per dimension. A chunk-constant level vector carries one
//! input per chunk, so every column of a chunk is read in the same cycle.

use rand::Rng;

use super::tile::{decode_voltage, digitize, line_voltage, map_differential, perturb};
use super::RramConfig;
use crate::error::{Error, Result};
use crate::hd::Hypervector;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EncodeMode {
    Naive,
    Chunked { chunk_count: usize },
}

/// Programmed differential cells of one ID row.
#[derive(Clone, Debug)]
pub struct IdRow {
    gp: Vec<f64>,
    gm: Vec<f64>,
}

impl IdRow {
    /// Maps an ID row with weights in `[-w_max, w_max]` and programs it with
    /// relaxation noise `sigma` (fraction of `g_max`).
    pub fn program(id: &[i8], w_max: f64, g_max: f64, sigma: f64, rng: &mut impl Rng) -> Result<Self> {
        let mut tp = Vec::with_capacity(id.len());
        let mut tm = Vec::with_capacity(id.len());
        for &w in id {
            let (p, m) = map_differential(w as f64, w_max, g_max)?;
            tp.push(p);
            tm.push(m);
        }
        let mut gp = tp.clone();
        let mut gm = tm.clone();
        if sigma > 0.0 {
            perturb(&mut gp, &tp, sigma, g_max, rng);
            perturb(&mut gm, &tm, sigma, g_max, rng);
        }
        Ok(IdRow { gp, gm })
    }

    pub fn dim(&self) -> usize {
        self.gp.len()
    }

    pub fn pair(&self, d: usize) -> (f64, f64) {
        (self.gp[d], self.gm[d])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementwiseOutput {
    /// Decoded accumulator per dimension.
    pub acc: Vec<f64>,
    pub cycles: usize,
}

impl ElementwiseOutput {
    /// Sign quantization of the accumulator rounded to the integer grid, zero
    /// mapping to +1.
    pub fn to_hypervector(&self) -> Result<Hypervector> {
        let mut h = Hypervector::negative(self.acc.len())?;
        for (d, &a) in self.acc.iter().enumerate() {
            if a.round() >= 0.0 {
                h.set(d, true);
            }
        }
        Ok(h)
    }
}

fn check_chunks(lv: &Hypervector, chunk_count: usize) -> Result<()> {
    let dim = lv.dim();
    if chunk_count == 0 || dim % chunk_count != 0 {
        return Err(Error::Config(format!("{chunk_count} chunks do not divide dimension {dim}")));
    }
    let size = dim / chunk_count;
    for chunk in 0..chunk_count {
        let first = lv.bit(chunk * size);
        if (chunk * size..(chunk + 1) * size).any(|d| lv.bit(d) != first) {
            return Err(Error::ChunkMismatch { chunk });
        }
    }
    Ok(())
}

/// Element-wise MACs of `rows[i]` with `lvs[i]`, batching at most
/// `cfg.max_active_rows` rows per cycle. Cycle count is `D` per batch in naive
/// mode and `chunk_count` per batch in chunked mode.
pub fn encode_elementwise(
    rows: &[IdRow],
    lvs: &[&Hypervector],
    w_max: f64,
    mode: EncodeMode,
    cfg: &RramConfig,
) -> Result<ElementwiseOutput> {
    if rows.len() != lvs.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            found: lvs.len(),
        });
    }
    let Some(dim) = rows.first().map(IdRow::dim) else {
        return Err(Error::Domain("element-wise encoding needs at least one row".into()));
    };
    for (row, lv) in rows.iter().zip(lvs) {
        if row.dim() != dim || lv.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if row.dim() != dim { row.dim() } else { lv.dim() },
            });
        }
    }
    let cycles_per_batch = match mode {
        EncodeMode::Naive => dim,
        EncodeMode::Chunked { chunk_count } => {
            for lv in lvs {
                check_chunks(lv, chunk_count)?;
            }
            chunk_count
        }
    };

    let mut acc = vec![0.0; dim];
    let mut diff = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    let mut cycles = 0;
    let batch = cfg.max_active_rows;
    for (rows, lvs) in rows.chunks(batch).zip(lvs.chunks(batch)) {
        diff.fill(0.0);
        total.fill(0.0);
        for (row, lv) in rows.iter().zip(lvs) {
            for d in 0..dim {
                let (p, m) = row.pair(d);
                let dg = p - m;
                diff[d] += if lv.bit(d) { dg } else { -dg };
                total[d] += p + m;
            }
        }
        let n = rows.len();
        for d in 0..dim {
            let v = digitize(line_voltage(diff[d], total[d], n, cfg.g_max, cfg), cfg);
            acc[d] += decode_voltage(v, n, w_max, cfg);
        }
        cycles += cycles_per_batch;
    }
    Ok(ElementwiseOutput { acc, cycles })
}
