//! Non-differential n-bit storage of bipolar hypervectors.
//!
//! Consecutive groups of `n` components form one cell. Within a group the
//! first component is the most significant bit, `-1` stores 0 and `+1` stores
//! 1, and the cell conductance is `g = h' / (2^n - 1) * g_max`. When `n` does
//! not divide the dimension the last cell is padded with `-1` components.

use rand::Rng;

use super::tile::perturb;
use super::RramConfig;
use crate::error::{Error, Result};
use crate::hd::Hypervector;
use crate::rng::{domain, stream};

fn check_bits(n: u8) -> Result<()> {
    if !(1..=3).contains(&n) {
        return Err(Error::Config(format!("bits per cell must be 1..=3, got {n}")));
    }
    Ok(())
}

/// Number of cells holding a `dim`-component hypervector.
pub fn cells_for(dim: usize, n: u8) -> usize {
    dim.div_ceil(n as usize)
}

/// Integer level `h'` of every cell.
pub fn segment_levels(h: &Hypervector, n: u8) -> Result<Vec<u32>> {
    check_bits(n)?;
    let n = n as usize;
    let dim = h.dim();
    Ok((0..cells_for(dim, n as u8))
        .map(|cell| {
            (0..n).fold(0u32, |acc, k| {
                let d = cell * n + k;
                acc << 1 | (d < dim && h.bit(d)) as u32
            })
        })
        .collect())
}

/// Target conductance row for `h`.
pub fn store_hypervector(h: &Hypervector, n: u8, g_max: f64) -> Result<Vec<f64>> {
    let top = ((1u32 << n) - 1) as f64;
    Ok(segment_levels(h, n)?.into_iter().map(|l| l as f64 / top * g_max).collect())
}

/// Decodes a conductance row by nearest level.
pub fn read_hypervector(g: &[f64], n: u8, dim: usize, g_max: f64) -> Result<Hypervector> {
    check_bits(n)?;
    if g.len() != cells_for(dim, n) {
        return Err(Error::DimensionMismatch {
            expected: cells_for(dim, n),
            found: g.len(),
        });
    }
    let top = (1u32 << n) - 1;
    let mut h = Hypervector::negative(dim)?;
    for (cell, &gc) in g.iter().enumerate() {
        let level = (gc / g_max * top as f64).round().clamp(0.0, top as f64) as u32;
        for k in 0..n as usize {
            let d = cell * n as usize + k;
            if d < dim && level >> (n as usize - 1 - k) & 1 == 1 {
                h.set(d, true);
            }
        }
    }
    Ok(h)
}

/// Stores `h` in noisy cells and reads it back.
pub fn store_and_read(h: &Hypervector, cfg: &RramConfig, rng: &mut impl Rng) -> Result<Hypervector> {
    let n = cfg.bits_per_cell;
    let targets = store_hypervector(h, n, cfg.g_max)?;
    let mut g = targets.clone();
    perturb(&mut g, &targets, cfg.sigma()?, cfg.g_max, rng);
    read_hypervector(&g, n, h.dim(), cfg.g_max)
}

/// [`store_and_read`] with the noise stream of stored vector `index`.
pub fn store_and_read_indexed(h: &Hypervector, cfg: &RramConfig, index: u64) -> Result<Hypervector> {
    store_and_read(h, cfg, &mut stream(cfg.seed, domain::STORE_NOISE, index))
}
