//! Weight matrices larger than one tile.
//!
//! The logical matrix is cut into `tile_rows/2 x tile_cols` blocks, each held
//! by a differential tile. An MVM drives at most `max_active_rows` rows of a
//! tile per cycle; partial sums are decoded and accumulated digitally.

use super::tile::{CrossbarTile, SenseOutput};
use super::RramConfig;
use crate::error::{Error, Result};
use crate::rng::{domain, stream};

#[derive(Clone, Debug)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    w_max: f64,
    block_rows: usize,
    block_cols: usize,
    /// Row-major grid of tiles.
    tiles: Vec<CrossbarTile>,
    grid_cols: usize,
}

/// Result of one tiled MVM.
#[derive(Clone, Debug)]
pub struct MvmReadout {
    /// Digitally accumulated decoded MAC per column.
    pub mac: Vec<f64>,
    /// Sensing cycles, counted per tile row group (tiles in a row run in parallel).
    pub cycles: usize,
    /// Every sensing result, in (tile row, group, tile column) order.
    pub sensed: Vec<SenseOutput>,
}

impl MvmReadout {
    /// MAC rounded to the nearest integer.
    pub fn rounded(&self) -> Vec<i64> {
        self.mac.iter().map(|m| m.round() as i64).collect()
    }
}

impl CrossbarArray {
    /// Maps a row-major `rows x cols` matrix of weights in `[-w_max, w_max]`.
    pub fn new(rows: usize, cols: usize, weights: &[f64], w_max: f64, cfg: &RramConfig) -> Result<Self> {
        cfg.validate()?;
        if weights.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: weights.len(),
            });
        }
        let block_rows = cfg.tile_rows / 2;
        let block_cols = cfg.tile_cols;
        let grid_rows = rows.div_ceil(block_rows);
        let grid_cols = cols.div_ceil(block_cols);
        let mut tiles = Vec::with_capacity(grid_rows * grid_cols);
        for tr in 0..grid_rows {
            let r0 = tr * block_rows;
            let nr = block_rows.min(rows - r0);
            for tc in 0..grid_cols {
                let c0 = tc * block_cols;
                let nc = block_cols.min(cols - c0);
                let mut block = Vec::with_capacity(nr * nc);
                for r in r0..r0 + nr {
                    block.extend_from_slice(&weights[r * cols + c0..r * cols + c0 + nc]);
                }
                tiles.push(CrossbarTile::differential(nr, nc, &block, w_max, cfg.g_max)?);
            }
        }
        Ok(CrossbarArray {
            rows,
            cols,
            w_max,
            block_rows,
            block_cols,
            tiles,
            grid_cols,
        })
    }

    /// Maps a ±1 matrix given as one bipolar column per entry of `columns`.
    pub fn from_columns(columns: &[Vec<i8>], cfg: &RramConfig) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut weights = vec![0.0; rows * columns.len()];
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (r, &v) in col.iter().enumerate() {
                weights[r * columns.len() + c] = v as f64;
            }
        }
        CrossbarArray::new(rows, columns.len(), &weights, 1.0, cfg)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn tiles(&self) -> &[CrossbarTile] {
        &self.tiles
    }

    /// Programs every tile with the configured relaxation sigma. Tile `t`
    /// draws from its own stream, so results do not depend on tiling order.
    pub fn program(&mut self, cfg: &RramConfig) -> Result<()> {
        let sigma = cfg.sigma()?;
        for (t, tile) in self.tiles.iter_mut().enumerate() {
            let mut rng = stream(cfg.seed, domain::CELL_NOISE, t as u64);
            tile.program(sigma, &mut rng);
        }
        Ok(())
    }

    /// Tiled MVM with inputs in {-1, 0, +1}.
    pub fn mvm(&self, x: &[i8], cfg: &RramConfig) -> Result<MvmReadout> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: x.len(),
            });
        }
        let group = cfg.max_active_rows;
        let mut mac = vec![0.0; self.cols];
        let mut sensed = Vec::new();
        let mut cycles = 0;
        for (tr, xs) in x.chunks(self.block_rows).enumerate() {
            for (g, xg) in xs.chunks(group).enumerate() {
                cycles += 1;
                for tc in 0..self.grid_cols {
                    let tile = &self.tiles[tr * self.grid_cols + tc];
                    let out = tile.mvm_sense(g * group, xg, cfg)?;
                    let c0 = tc * self.block_cols;
                    for (m, d) in mac[c0..].iter_mut().zip(out.decode_mac(cfg, self.w_max)) {
                        *m += d;
                    }
                    sensed.push(out);
                }
            }
        }
        Ok(MvmReadout { mac, cycles, sensed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn noiseless_tiled_mvm_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cfg = RramConfig {
            tile_rows: 64,
            tile_cols: 16,
            max_active_rows: 16,
            ..RramConfig::ideal()
        };
        let (rows, cols) = (300, 40);
        let w: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-3i32..=3) as f64).collect();
        let x: Vec<i8> = (0..rows).map(|_| rng.random_range(-1i8..=1)).collect();
        let array = CrossbarArray::new(rows, cols, &w, 3.0, &cfg).unwrap();
        let out = array.mvm(&x, &cfg).unwrap();
        for c in 0..cols {
            let exact: f64 = (0..rows).map(|r| w[r * cols + c] * x[r] as f64).sum();
            assert!((out.mac[c] - exact).abs() < 1e-9, "col {c}: {} vs {exact}", out.mac[c]);
        }
        // 300 rows in 32-row tiles of 16-row groups: 9 full tiles x 2 + 1 group.
        assert_eq!(out.cycles, 19);
    }

    #[test]
    fn programming_is_deterministic() {
        let cfg = RramConfig::default();
        let w = vec![0.5; 128 * 8];
        let mut a = CrossbarArray::new(128, 8, &w, 1.0, &cfg).unwrap();
        let mut b = a.clone();
        a.program(&cfg).unwrap();
        b.program(&cfg).unwrap();
        assert_eq!(a.tiles()[0].conductances(), b.tiles()[0].conductances());
        assert_ne!(a.tiles()[0].conductances(), a.tiles()[0].targets());
    }

    #[test]
    fn wrong_input_length() {
        let cfg = RramConfig::ideal();
        let array = CrossbarArray::new(4, 4, &[1.0; 16], 1.0, &cfg).unwrap();
        assert!(matches!(array.mvm(&[1; 3], &cfg), Err(Error::DimensionMismatch { .. })));
    }
}
