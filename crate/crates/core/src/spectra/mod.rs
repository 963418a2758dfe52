//! Spectrum ingestion, noise filtering and m/z binning.

mod mgf;

pub use mgf::{open_mgf, read_mgf, write_mgf, IngestReport, MgfLoad, MgfReader};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass of a proton in Dalton, used to convert precursor m/z to neutral mass.
pub const PROTON_MASS: f64 = 1.007_276_466_8;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Self {
        Peak { mz, intensity }
    }

    fn is_valid(&self) -> bool {
        self.mz.is_finite() && self.mz > 0.0 && self.intensity.is_finite() && self.intensity >= 0.0
    }
}

/// Title prefix that marks a spectrum as a decoy.
pub const DECOY_PREFIX: &str = "DECOY_";

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub id: String,
    /// Neutral precursor mass in Dalton.
    pub precursor_mass: f64,
    pub precursor_charge: u8,
    pub peaks: Vec<Peak>,
    pub is_decoy: bool,
    /// Peptide annotation for library entries (`SEQ=` in MGF), if known.
    pub peptide: Option<String>,
    /// Set once the intensity transform has been applied, so that
    /// preprocessing never transforms twice.
    pub transformed: bool,
}

impl Spectrum {
    pub fn new(id: impl Into<String>, precursor_mass: f64, precursor_charge: u8, peaks: Vec<Peak>) -> Self {
        Spectrum {
            id: id.into(),
            precursor_mass,
            precursor_charge,
            peaks,
            is_decoy: false,
            peptide: None,
            transformed: false,
        }
    }

    pub fn max_intensity(&self) -> f64 {
        self.peaks.iter().map(|p| p.intensity).fold(0.0, f64::max)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityTransform {
    /// Square root, then scale to unit L2 norm.
    #[default]
    SqrtUnit,
    /// Scale to unit L2 norm only.
    Unit,
    /// Leave intensities untouched.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Peaks below this fraction of the base peak are discarded.
    pub threshold_fraction: f64,
    pub min_peaks: usize,
    pub max_peaks: usize,
    pub transform: IntensityTransform,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            threshold_fraction: 0.01,
            min_peaks: 5,
            max_peaks: 150,
            transform: IntensityTransform::SqrtUnit,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.threshold_fraction) {
            return Err(Error::Config(format!(
                "threshold_fraction must be in [0, 1), got {}",
                self.threshold_fraction
            )));
        }
        if self.max_peaks == 0 || self.min_peaks > self.max_peaks {
            return Err(Error::Config(format!(
                "need 0 < max_peaks and min_peaks <= max_peaks, got [{}, {}]",
                self.min_peaks, self.max_peaks
            )));
        }
        Ok(())
    }
}

/// Filters noise peaks, caps the peak count and normalizes intensities.
///
/// Peaks sharing an m/z value are merged first. Surviving peaks satisfy
/// `intensity >= threshold_fraction * max`; when more than `max_peaks`
/// survive the most intense are kept, ties going to the lower m/z. The
/// result is sorted by ascending m/z.
pub fn preprocess(spectrum: &Spectrum, cfg: &PreprocessConfig) -> Result<Spectrum> {
    let reject = |reason: String| Error::EmptySpectrum {
        id: spectrum.id.clone(),
        reason,
    };

    let mut peaks: Vec<Peak> = spectrum.peaks.iter().copied().filter(Peak::is_valid).collect();
    peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
    peaks.dedup_by(|next, kept| {
        if next.mz == kept.mz {
            kept.intensity += next.intensity;
            true
        } else {
            false
        }
    });

    let max = peaks.iter().map(|p| p.intensity).fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(reject("no peak with positive intensity".into()));
    }
    let threshold = cfg.threshold_fraction * max;
    peaks.retain(|p| p.intensity > 0.0 && p.intensity >= threshold);

    if peaks.len() > cfg.max_peaks {
        peaks.sort_by(|a, b| b.intensity.total_cmp(&a.intensity).then(a.mz.total_cmp(&b.mz)));
        peaks.truncate(cfg.max_peaks);
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
    }
    if peaks.len() < cfg.min_peaks {
        return Err(reject(format!(
            "{} peaks after filtering, minimum is {}",
            peaks.len(),
            cfg.min_peaks
        )));
    }

    let mut transformed = spectrum.transformed;
    if !transformed && cfg.transform != IntensityTransform::Raw {
        if cfg.transform == IntensityTransform::SqrtUnit {
            peaks.iter_mut().for_each(|p| p.intensity = p.intensity.sqrt());
        }
        let norm = peaks.iter().map(|p| p.intensity * p.intensity).sum::<f64>().sqrt();
        peaks.iter_mut().for_each(|p| p.intensity /= norm);
        transformed = true;
    }

    Ok(Spectrum {
        peaks,
        transformed,
        ..spectrum.clone()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinConfig {
    /// Bin width in Thomson.
    pub bin_width: f64,
    pub min_mz: f64,
    pub max_mz: f64,
}

impl Default for BinConfig {
    fn default() -> Self {
        BinConfig {
            bin_width: 0.05,
            min_mz: 50.5,
            max_mz: 2500.0,
        }
    }
}

impl BinConfig {
    pub fn num_bins(&self) -> usize {
        ((self.max_mz - self.min_mz) / self.bin_width).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0) || !(self.max_mz > self.min_mz) || self.min_mz < 0.0 {
            return Err(Error::Config(format!(
                "invalid binning: width {} over [{}, {})",
                self.bin_width, self.min_mz, self.max_mz
            )));
        }
        if self.num_bins() > u32::MAX as usize {
            return Err(Error::Config("too many bins".into()));
        }
        Ok(())
    }

    /// Bin index of `mz`, or `None` when it falls outside `[min_mz, max_mz)`.
    pub fn bin_of(&self, mz: f64) -> Option<u32> {
        if !(mz >= self.min_mz && mz < self.max_mz) {
            return None;
        }
        let idx = ((mz - self.min_mz) / self.bin_width).floor() as usize;
        (idx < self.num_bins()).then_some(idx as u32)
    }
}

/// Sparse intensity vector over m/z bins.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedVector {
    pub spectrum_id: String,
    /// `(bin index, summed intensity)`, ascending by bin, intensities > 0.
    pub bins: Vec<(u32, f64)>,
    pub bin_width: f64,
    pub mz_range: (f64, f64),
    /// Peaks that fell outside the m/z range.
    pub out_of_range: usize,
}

impl BinnedVector {
    pub fn max_intensity(&self) -> f64 {
        self.bins.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn total_intensity(&self) -> f64 {
        self.bins.iter().map(|&(_, v)| v).sum()
    }
}

pub fn bin(spectrum: &Spectrum, cfg: &BinConfig) -> BinnedVector {
    let mut bins: Vec<(u32, f64)> = Vec::with_capacity(spectrum.peaks.len());
    let mut out_of_range = 0;
    for peak in &spectrum.peaks {
        let Some(idx) = cfg.bin_of(peak.mz) else {
            out_of_range += 1;
            continue;
        };
        if peak.intensity <= 0.0 {
            continue;
        }
        bins.push((idx, peak.intensity));
    }
    bins.sort_by_key(|&(idx, _)| idx);
    bins.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 += next.1;
            true
        } else {
            false
        }
    });
    BinnedVector {
        spectrum_id: spectrum.id.clone(),
        bins,
        bin_width: cfg.bin_width,
        mz_range: (cfg.min_mz, cfg.max_mz),
        out_of_range,
    }
}
