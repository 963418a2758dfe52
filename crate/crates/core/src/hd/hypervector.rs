use crate::error::{Error, Result};

use super::kernels;

/// Bit-packed bipolar hypervector. A set bit is `+1`, a clear bit `-1`;
/// component `d` lives in bit `d % 64` of word `d / 64`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypervector {
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    /// All components `-1`.
    pub fn negative(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Hypervector {
            dim,
            words: vec![0; dim / 64],
        })
    }

    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        if words.len() != dim / 64 {
            return Err(Error::DimensionMismatch {
                expected: dim / 64,
                found: words.len(),
            });
        }
        Ok(Hypervector { dim, words })
    }

    /// Packs a slice of `+1`/`-1` values; any positive value maps to `+1`.
    pub fn from_bipolar(values: &[i8]) -> Result<Self> {
        let mut hv = Hypervector::negative(values.len())?;
        for (d, &v) in values.iter().enumerate() {
            if v > 0 {
                hv.words[d / 64] |= 1 << (d % 64);
            }
        }
        Ok(hv)
    }

    pub fn to_bipolar(&self) -> Vec<i8> {
        (0..self.dim).map(|d| self.get(d)).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    #[inline]
    pub fn bit(&self, d: usize) -> bool {
        self.words[d / 64] >> (d % 64) & 1 == 1
    }

    /// Component `d` as `+1` or `-1`.
    #[inline]
    pub fn get(&self, d: usize) -> i8 {
        if self.bit(d) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, d: usize, positive: bool) {
        let mask = 1u64 << (d % 64);
        if positive {
            self.words[d / 64] |= mask;
        } else {
            self.words[d / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, d: usize) {
        self.words[d / 64] ^= 1 << (d % 64);
    }

    pub fn complement(&self) -> Hypervector {
        Hypervector {
            dim: self.dim,
            words: self.words.iter().map(|w| !w).collect(),
        }
    }

    pub fn hamming_distance(&self, other: &Hypervector) -> Result<u32> {
        self.check_same_dim(other)?;
        Ok(kernels::hamming(&self.words, &other.words))
    }

    /// Bipolar dot product, `D - 2 * hamming`.
    pub fn dot(&self, other: &Hypervector) -> Result<i32> {
        Ok(self.dim as i32 - 2 * self.hamming_distance(other)? as i32)
    }

    fn check_same_dim(&self, other: &Hypervector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim % 64 != 0 {
        return Err(Error::Config(format!(
            "hypervector dimension must be a positive multiple of 64, got {dim}"
        )));
    }
    Ok(())
}
