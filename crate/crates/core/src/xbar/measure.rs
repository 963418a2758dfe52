//! Bit-error-rate and MVM-accuracy measurements.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::storage::store_and_read;
use super::tile::CrossbarTile;
use super::RramConfig;
use crate::error::{Error, Result};
use crate::hd::Hypervector;
use crate::rng::{domain, stream};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BerReport {
    pub bits: u64,
    pub errors: u64,
}

impl BerReport {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

fn random_hypervector(dim: usize, rng: &mut impl RngCore) -> Result<Hypervector> {
    let words = (0..dim / 64).map(|_| rng.next_u64()).collect();
    Hypervector::from_words(dim, words)
}

/// Stores `trials` random `dim`-component hypervectors at `cfg.bits_per_cell`
/// bits per cell under the configured relaxation noise and counts the
/// components that read back wrong.
pub fn measure_ber(cfg: &RramConfig, dim: usize, trials: usize) -> Result<BerReport> {
    cfg.validate()?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = random_hypervector(dim, &mut stream(cfg.seed, domain::MEASURE, t as u64))?;
            let back = store_and_read(&h, cfg, &mut stream(cfg.seed, domain::CELL_NOISE, t as u64))?;
            Ok(h.hamming_distance(&back)? as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(BerReport {
        bits: (dim * trials) as u64,
        errors: counts.iter().sum(),
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NmseReport {
    pub outputs: usize,
    pub nmse: f64,
}

/// Columns sensed per trial MVM.
pub const NMSE_COLUMNS: usize = 32;

/// Runs `trials` single-cycle MVMs over `active_rows` rows. Weights are drawn
/// uniformly from the `2^n` levels a differential pair of `n`-bit cells can
/// represent, inputs are random ±1. NMSE is `mean((decoded - exact)^2) / var(exact)`.
pub fn measure_mvm_nmse(cfg: &RramConfig, active_rows: usize, trials: usize) -> Result<NmseReport> {
    cfg.validate()?;
    if active_rows == 0 || active_rows > cfg.max_active_rows {
        return Err(Error::RowLimitExceeded {
            requested: active_rows,
            limit: cfg.max_active_rows,
        });
    }
    let sigma = cfg.sigma()?;
    let top = (cfg.levels_per_cell() - 1) as f64;
    let cols = NMSE_COLUMNS;
    let pairs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.seed, domain::MEASURE, t as u64);
            let w: Vec<f64> = (0..active_rows * cols)
                .map(|_| 2.0 * rng.random_range(0..=top as u32) as f64 / top - 1.0)
                .collect();
            let x: Vec<i8> = (0..active_rows).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let mut tile = CrossbarTile::differential(active_rows, cols, &w, 1.0, cfg.g_max)?;
            tile.program(sigma, &mut stream(cfg.seed, domain::CELL_NOISE, t as u64));
            let decoded = tile.mvm_sense(0, &x, cfg)?.decode_mac(cfg, 1.0);
            Ok((0..cols)
                .map(|c| {
                    let exact: f64 = (0..active_rows).map(|r| w[r * cols + c] * x[r] as f64).sum();
                    (exact, decoded[c])
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = pairs.into_iter().flatten().collect();
    let n = pairs.len() as f64;
    let mean = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let var = pairs.iter().map(|p| (p.0 - mean).powi(2)).sum::<f64>() / n;
    let mse = pairs.iter().map(|p| (p.1 - p.0).powi(2)).sum::<f64>() / n;
    Ok(NmseReport {
        outputs: pairs.len(),
        nmse: if var > 0.0 { mse / var } else { 0.0 },
    })
}
