//! ID-level encoding of binned spectra.

use rayon::prelude::*;

use super::family::{gen_id_family, gen_level_family, EncoderConfig, IdFamily, LevelFamily};
use super::{kernels, Hypervector};
use crate::error::{Error, Result};
use crate::spectra::BinnedVector;

/// Maps a normalized intensity to a level index, `floor(x * Q)` clamped to
/// `Q - 1`.
pub fn quantize_intensity(intensity: f64, q: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&intensity) {
        return Err(Error::Domain(format!("normalized intensity {intensity} not in [0, 1]")));
    }
    Ok(((intensity * q as f64).floor() as usize).min(q - 1))
}

/// Sign quantization; a zero sum maps to `+1`.
pub fn sign_quantize(acc: &[i32]) -> Hypervector {
    let mut words = vec![0u64; acc.len() / 64];
    for (w, chunk) in words.iter_mut().zip(acc.chunks_exact(64)) {
        for (bit, &v) in chunk.iter().enumerate() {
            *w |= ((v >= 0) as u64) << bit;
        }
    }
    Hypervector::from_words(acc.len(), words).expect("accumulator length is a multiple of 64")
}

/// Holds the ID and level families and encodes binned spectra with them.
#[derive(Clone, Debug)]
pub struct Encoder {
    cfg: EncoderConfig,
    ids: IdFamily,
    levels: LevelFamily,
}

impl Encoder {
    /// Generates both families for a bin space of `num_bins`.
    pub fn new(cfg: EncoderConfig, num_bins: usize) -> Result<Self> {
        let ids = gen_id_family(num_bins, &cfg)?;
        let levels = gen_level_family(&cfg)?;
        Ok(Encoder { cfg, ids, levels })
    }

    pub fn from_parts(cfg: EncoderConfig, ids: IdFamily, levels: LevelFamily) -> Result<Self> {
        cfg.validate()?;
        if ids.dim() != cfg.dim || levels.dim() != cfg.dim || levels.q() != cfg.levels {
            return Err(Error::Config("families do not match the encoder config".into()));
        }
        Ok(Encoder { cfg, ids, levels })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn ids(&self) -> &IdFamily {
        &self.ids
    }

    pub fn levels(&self) -> &LevelFamily {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    /// `(bin, level)` pairs of a vector, intensities scaled by the base peak.
    pub fn terms(&self, v: &BinnedVector) -> Result<Vec<(u32, usize)>> {
        let max = v.max_intensity();
        v.bins
            .iter()
            .map(|&(bin, x)| {
                if bin as usize >= self.ids.len() {
                    return Err(Error::MissingId {
                        bin,
                        family: self.ids.len(),
                    });
                }
                Ok((bin, quantize_intensity(x / max, self.cfg.levels)?))
            })
            .collect()
    }

    /// Per-dimension sums `sum_i ID_i[d] * LV_i[d]`.
    pub fn accumulate(&self, v: &BinnedVector) -> Result<Vec<i32>> {
        let terms = self.terms(v)?;
        let dim = self.cfg.dim;
        let mut acc = vec![0i32; dim];
        let mut part = vec![0i8; dim];
        // i8 partial sums cannot overflow within a batch
        let batch = (i8::MAX / self.cfg.id_max()) as usize;
        for group in terms.chunks(batch) {
            part.fill(0);
            for &(bin, level) in group {
                let id = self.ids.row(bin as usize).expect("checked in terms()");
                kernels::signed_add(&mut part, id, self.levels.mask(level));
            }
            kernels::widen_add(&mut acc, &part);
        }
        Ok(acc)
    }

    pub fn encode(&self, v: &BinnedVector) -> Result<Hypervector> {
        Ok(sign_quantize(&self.accumulate(v)?))
    }

    pub fn encode_all(&self, vectors: &[BinnedVector]) -> Result<Vec<Hypervector>> {
        vectors.par_iter().map(|v| self.encode(v)).collect()
    }
}
