//! Hypervector encoding, storage and similarity through the crossbar model.

use super::array::{CrossbarArray, MvmReadout};
use super::encode::{encode_elementwise, EncodeMode, IdRow};
use super::storage::store_and_read_indexed;
use super::RramConfig;
use crate::error::{Error, Result};
use crate::hd::{Encoder, Hypervector};
use crate::rng::{domain, stream};
use crate::search::ReferenceIndex;
use crate::spectra::BinnedVector;
use std::ops::Range;

/// Encodes spectra with the ID family held in programmed crossbar rows.
///
/// The cells of bin `b` draw their relaxation noise from stream `b`, so a bin
/// has the same programmed conductances in every spectrum that uses it.
pub struct CrossbarEncoder<'a> {
    encoder: &'a Encoder,
    cfg: RramConfig,
    sigma: f64,
}

impl<'a> CrossbarEncoder<'a> {
    pub fn new(encoder: &'a Encoder, cfg: RramConfig) -> Result<Self> {
        cfg.validate()?;
        let sigma = cfg.sigma()?;
        Ok(CrossbarEncoder { encoder, cfg, sigma })
    }

    pub fn mode(&self) -> EncodeMode {
        match self.encoder.levels().chunk_count() {
            Some(chunk_count) => EncodeMode::Chunked { chunk_count },
            None => EncodeMode::Naive,
        }
    }

    /// Hypervector and cycle count for one spectrum.
    pub fn encode(&self, v: &BinnedVector) -> Result<(Hypervector, usize)> {
        let terms = self.encoder.terms(v)?;
        let w_max = self.encoder.config().id_max() as f64;
        let mut rows = Vec::with_capacity(terms.len());
        let mut lvs = Vec::with_capacity(terms.len());
        for &(bin, level) in &terms {
            let id = self.encoder.ids().row(bin as usize).ok_or(Error::MissingId {
                bin,
                family: self.encoder.ids().len(),
            })?;
            let mut rng = stream(self.cfg.seed, domain::CELL_NOISE, bin as u64);
            rows.push(IdRow::program(id, w_max, self.cfg.g_max, self.sigma, &mut rng)?);
            lvs.push(self.encoder.levels().level(level));
        }
        if rows.is_empty() {
            return Ok((
                Hypervector::from_words(self.encoder.dim(), vec![u64::MAX; self.encoder.dim() / 64])?,
                0,
            ));
        }
        let out = encode_elementwise(&rows, &lvs, w_max, self.mode(), &self.cfg)?;
        Ok((out.to_hypervector()?, out.cycles))
    }
}

/// Stores `a` in `n`-bit cells, reads it back, maps it onto differential
/// columns and senses `b` as row inputs. `index` selects the noise streams.
pub fn crossbar_dot(a: &Hypervector, b: &Hypervector, cfg: &RramConfig, index: u64) -> Result<MvmReadout> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let stored = store_and_read_indexed(a, cfg, index)?;
    let mut array = CrossbarArray::from_columns(&[stored.to_bipolar()], cfg)?;
    let program_cfg = RramConfig {
        seed: cfg.seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..cfg.clone()
    };
    array.program(&program_cfg)?;
    array.mvm(&b.to_bipolar(), cfg)
}

/// Reference hypervectors held as differential columns, one per index
/// position, programmed once. Queries are applied as row inputs.
pub struct CrossbarSearch {
    array: CrossbarArray,
    cfg: RramConfig,
}

impl CrossbarSearch {
    pub fn new(index: &ReferenceIndex, cfg: RramConfig) -> Result<Self> {
        let dim = index.dim();
        let columns: Vec<Vec<i8>> = (0..index.len())
            .map(|p| Hypervector::from_words(dim, index.row(p).to_vec()).map(|h| h.to_bipolar()))
            .collect::<Result<_>>()?;
        let mut array = CrossbarArray::from_columns(&columns, &cfg)?;
        array.program(&cfg)?;
        Ok(CrossbarSearch { array, cfg })
    }

    /// Decoded similarity of `query` with the references at `positions`.
    pub fn scores(&self, query: &Hypervector, positions: Range<usize>) -> Result<Vec<i32>> {
        if positions.is_empty() {
            return Ok(Vec::new());
        }
        let out = self.array.mvm(&query.to_bipolar(), &self.cfg)?;
        Ok(out.mac[positions].iter().map(|m| m.round() as i32).collect())
    }
}
