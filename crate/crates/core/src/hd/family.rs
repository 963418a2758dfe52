//! ID and level hypervector families.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Hypervector;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub dim: usize,
    /// Number of intensity levels `Q`.
    pub levels: usize,
    /// Precision of ID hypervector components, 1 to 3 bits.
    pub id_bits: u8,
    /// Build level hypervectors that are constant within each chunk.
    pub chunked: bool,
    pub chunk_count: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: 8192,
            levels: 16,
            id_bits: 3,
            chunked: false,
            chunk_count: 64,
            seed: 0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 || self.dim % 64 != 0 {
            return fail(format!("dim must be a positive multiple of 64, got {}", self.dim));
        }
        if self.levels < 2 || self.dim % (2 * self.levels) != 0 {
            return fail(format!("dim {} must be divisible by 2*levels (levels = {})", self.dim, self.levels));
        }
        if !(1..=3).contains(&self.id_bits) {
            return fail(format!("id_bits must be 1, 2 or 3, got {}", self.id_bits));
        }
        if self.chunked {
            if self.chunk_count == 0 || self.dim % self.chunk_count != 0 {
                return fail(format!("chunk_count {} must divide dim {}", self.chunk_count, self.dim));
            }
            let chunk = self.dim / self.chunk_count;
            if self.flip_count() % chunk != 0 {
                return fail(format!(
                    "level step of {} bits is not a whole number of {}-bit chunks",
                    self.flip_count(),
                    chunk
                ));
            }
        }
        Ok(())
    }

    /// Bits flipped between neighbouring levels, `D / (2Q)`.
    pub fn flip_count(&self) -> usize {
        self.dim / (2 * self.levels)
    }

    /// Largest ID component magnitude, `2^(b-1)`.
    pub fn id_max(&self) -> i8 {
        1 << (self.id_bits - 1)
    }
}

/// Hypervector with signed integer components, zero excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiBitHypervector {
    pub bits: u8,
    pub values: Vec<i8>,
}

impl MultiBitHypervector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Dense family of ID hypervectors, one per m/z bin, stored row-major.
#[derive(Clone, Debug)]
pub struct IdFamily {
    dim: usize,
    bits: u8,
    rows: Vec<i8>,
}

impl IdFamily {
    pub fn len(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn row(&self, bin: usize) -> Option<&[i8]> {
        self.rows.get(bin * self.dim..(bin + 1) * self.dim)
    }

    pub fn get(&self, bin: usize) -> Option<MultiBitHypervector> {
        self.row(bin).map(|r| MultiBitHypervector {
            bits: self.bits,
            values: r.to_vec(),
        })
    }
}

/// Fills `row` with components uniform over `{-2^(b-1)..-1, 1..2^(b-1)}`.
///
/// Each component consumes `b` bits of the stream: the low bit is the sign
/// and the remaining `b - 1` bits give `magnitude - 1`.
pub(crate) fn fill_id_row(row: &mut [i8], bits: u8, rng: &mut impl RngCore) {
    let b = bits as u32;
    let per_word = (64 / b) as usize;
    let field = (1u64 << b) - 1;
    for chunk in row.chunks_mut(per_word) {
        let mut word = rng.next_u64();
        for v in chunk {
            let f = word & field;
            word >>= b;
            let magnitude = (f >> 1) as i8 + 1;
            *v = if f & 1 == 1 { magnitude } else { -magnitude };
        }
    }
}

/// Generates `num_bins` ID hypervectors; row `i` depends only on
/// `(cfg.seed, i)`.
pub fn gen_id_family(num_bins: usize, cfg: &EncoderConfig) -> Result<IdFamily> {
    cfg.validate()?;
    let dim = cfg.dim;
    let mut rows = vec![0i8; num_bins * dim];
    rows.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let mut rng = rng::stream(cfg.seed, rng::domain::ID_FAMILY, i as u64);
        fill_id_row(row, cfg.id_bits, &mut rng);
    });
    Ok(IdFamily {
        dim,
        bits: cfg.id_bits,
        rows,
    })
}

/// Level hypervectors `l_0 .. l_{Q-1}`.
#[derive(Clone, Debug)]
pub struct LevelFamily {
    levels: Vec<Hypervector>,
    /// Per level, 0 where the component is +1 and -1 where it is -1.
    masks: Vec<i8>,
    chunk_count: Option<usize>,
}

impl LevelFamily {
    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn chunk_count(&self) -> Option<usize> {
        self.chunk_count
    }

    pub fn is_chunked(&self) -> bool {
        self.chunk_count.is_some()
    }

    pub fn level(&self, j: usize) -> &Hypervector {
        &self.levels[j]
    }

    pub fn levels(&self) -> &[Hypervector] {
        &self.levels
    }

    pub(crate) fn mask(&self, j: usize) -> &[i8] {
        let d = self.dim();
        &self.masks[j * d..(j + 1) * d]
    }
}

/// Builds a level family whose neighbours differ in exactly `D/(2Q)` bits.
///
/// The flip positions of successive steps come from disjoint groups of a
/// random permutation, so `hamming(l_i, l_j) == |i - j| * D / (2Q)`. In
/// chunked mode the permutation runs over whole chunks and `l_0` is
/// constant per chunk.
pub fn gen_level_family(cfg: &EncoderConfig) -> Result<LevelFamily> {
    cfg.validate()?;
    let dim = cfg.dim;
    let unit = if cfg.chunked { dim / cfg.chunk_count } else { 1 };
    let units = dim / unit;
    let step_units = cfg.flip_count() / unit;

    let mut rng = rng::stream(cfg.seed, rng::domain::LEVEL_FAMILY, 0);
    let mut current: Vec<bool> = (0..units).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..units).collect();
    order.shuffle(&mut rng);

    let expand = |unit_bits: &[bool]| -> Hypervector {
        let mut hv = Hypervector::negative(dim).expect("validated dim");
        for (u, &b) in unit_bits.iter().enumerate() {
            if b {
                for d in u * unit..(u + 1) * unit {
                    hv.set(d, true);
                }
            }
        }
        hv
    };

    let mut levels = Vec::with_capacity(cfg.levels);
    levels.push(expand(&current));
    for step in 0..cfg.levels - 1 {
        for &u in &order[step * step_units..(step + 1) * step_units] {
            current[u] = !current[u];
        }
        levels.push(expand(&current));
    }

    let masks = levels
        .iter()
        .flat_map(|l| (0..dim).map(move |d| if l.bit(d) { 0i8 } else { -1 }))
        .collect();
    Ok(LevelFamily {
        levels,
        masks,
        chunk_count: cfg.chunked.then_some(cfg.chunk_count),
    })
}
