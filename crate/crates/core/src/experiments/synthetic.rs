//! Synthetic benchmark with known ground truth. Each query is a perturbed
//! copy of one library spectrum.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hd::{Encoder, EncoderConfig, Hypervector};
use crate::pipeline::{fdr_filter, generate_decoys, preprocess_all, ShiftDecoys};
use crate::rng::{domain, stream};
use crate::search::{batch_search, Query, ReferenceEntry, ReferenceIndex, SearchConfig};
use crate::spectra::{bin, BinConfig, BinnedVector, Peak, PreprocessConfig, Spectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticBenchSpec {
    /// Number of target spectra. One decoy per target is added on top.
    pub library_size: usize,
    pub query_count: usize,
    pub min_peaks: usize,
    pub max_peaks: usize,
    /// Fragment m/z range of generated peaks.
    pub min_mz: f64,
    pub max_mz: f64,
    pub min_precursor: f64,
    pub max_precursor: f64,
    /// Probability that a library peak is missing from the query.
    pub peak_dropout: f64,
    /// Extra random peaks, as a fraction of the library peak count.
    pub noise_peaks: f64,
    /// Log-normal sigma of the multiplicative intensity jitter.
    pub intensity_jitter: f64,
    /// Gaussian sigma of the m/z jitter, in Th.
    pub mz_jitter: f64,
    /// Probability that a query carries a modification.
    pub mod_probability: f64,
    pub mod_shift_min: f64,
    pub mod_shift_max: f64,
    /// Fraction of peaks moved by the modification mass.
    pub mod_fraction: f64,
}

impl Default for SyntheticBenchSpec {
    fn default() -> Self {
        SyntheticBenchSpec {
            library_size: 100_000,
            query_count: 1_000,
            min_peaks: 50,
            max_peaks: 80,
            min_mz: 100.0,
            max_mz: 2000.0,
            min_precursor: 800.0,
            max_precursor: 3500.0,
            peak_dropout: 0.25,
            noise_peaks: 0.25,
            intensity_jitter: 0.2,
            mz_jitter: 0.005,
            mod_probability: 0.8,
            mod_shift_min: -150.0,
            mod_shift_max: 250.0,
            mod_fraction: 0.5,
        }
    }
}

impl SyntheticBenchSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.library_size == 0 || self.query_count == 0 {
            return fail("library_size and query_count must be positive".into());
        }
        if self.min_peaks == 0 || self.min_peaks > self.max_peaks {
            return fail(format!("bad peak count range {}..={}", self.min_peaks, self.max_peaks));
        }
        if !(self.min_mz >= 0.0 && self.max_mz > self.min_mz) {
            return fail(format!("bad m/z range [{}, {}]", self.min_mz, self.max_mz));
        }
        if !(self.min_precursor > 0.0 && self.max_precursor >= self.min_precursor) {
            return fail(format!("bad precursor range [{}, {}]", self.min_precursor, self.max_precursor));
        }
        for (name, v) in [
            ("peak_dropout", self.peak_dropout),
            ("noise_peaks", self.noise_peaks),
            ("mod_probability", self.mod_probability),
            ("mod_fraction", self.mod_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(self.intensity_jitter >= 0.0 && self.mz_jitter >= 0.0) {
            return fail("jitter must be non-negative".into());
        }
        if !(self.mod_shift_max >= self.mod_shift_min) {
            return fail("mod_shift_max must be >= mod_shift_min".into());
        }
        Ok(())
    }
}

/// Generated spectra. `truth[j]` is the library index that query `j` was derived from.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub library: Vec<Spectrum>,
    pub queries: Vec<Spectrum>,
    pub truth: Vec<Option<u32>>,
}

fn random_peak(rng: &mut impl Rng, spec: &SyntheticBenchSpec, intensity: &LogNormal<f64>) -> Peak {
    Peak::new(rng.random_range(spec.min_mz..spec.max_mz), intensity.sample(rng))
}

pub fn generate(spec: &SyntheticBenchSpec, seed: u64) -> Result<SyntheticData> {
    spec.validate()?;
    let intensity = LogNormal::new(0.0, 1.0).expect("valid parameters");
    let library: Vec<Spectrum> = (0..spec.library_size)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, domain::SYNTH_LIBRARY, i as u64);
            let mass = rng.random_range(spec.min_precursor..=spec.max_precursor);
            let n = rng.random_range(spec.min_peaks..=spec.max_peaks);
            let mut peaks: Vec<Peak> = (0..n).map(|_| random_peak(&mut rng, spec, &intensity)).collect();
            peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
            let mut s = Spectrum::new(format!("lib{i}"), mass, 2, peaks);
            s.peptide = Some(format!("P{i}"));
            s
        })
        .collect();

    let jitter_mz = Normal::new(0.0, spec.mz_jitter).expect("sigma is non-negative");
    let jitter_int = LogNormal::new(0.0, spec.intensity_jitter).expect("sigma is non-negative");
    let (queries, truth) = (0..spec.query_count)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, domain::SYNTH_QUERY, j as u64);
            let t = rng.random_range(0..spec.library_size);
            let target = &library[t];
            let shift = if rng.random_bool(spec.mod_probability) {
                rng.random_range(spec.mod_shift_min..=spec.mod_shift_max)
            } else {
                0.0
            };
            let mut peaks = Vec::with_capacity(target.peaks.len());
            for p in &target.peaks {
                if rng.random_bool(spec.peak_dropout) {
                    continue;
                }
                let mut mz = p.mz + jitter_mz.sample(&mut rng);
                if shift != 0.0 && rng.random_bool(spec.mod_fraction) {
                    mz += shift;
                }
                let int = p.intensity * jitter_int.sample(&mut rng);
                if mz > 0.0 {
                    peaks.push(Peak::new(mz, int));
                }
            }
            let extra = (spec.noise_peaks * target.peaks.len() as f64).round() as usize;
            peaks.extend((0..extra).map(|_| random_peak(&mut rng, spec, &intensity)));
            peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
            let q = Spectrum::new(format!("q{j}"), target.precursor_mass + shift, 2, peaks);
            (q, Some(t as u32))
        })
        .unzip();
    Ok(SyntheticData { library, queries, truth })
}

/// Preprocessed and binned benchmark data, shared by every encoder setting.
#[derive(Clone, Debug)]
pub struct PreparedBench {
    pub binning: BinConfig,
    /// Targets first, in library order, then their decoys.
    pub library: Vec<BinnedVector>,
    pub library_masses: Vec<f64>,
    pub library_decoy: Vec<bool>,
    pub library_ids: Vec<String>,
    pub queries: Vec<BinnedVector>,
    pub query_masses: Vec<f64>,
    /// Ground-truth library position per query, `None` when unknown or lost in preprocessing.
    pub truth: Vec<Option<u32>>,
}

/// Preprocesses, adds decoys and bins. Library spectra rejected by
/// preprocessing are dropped and ground truth is remapped; queries whose
/// target was dropped keep `None`.
pub fn prepare(data: &SyntheticData, preprocess: &PreprocessConfig, binning: &BinConfig, decoy_seed: u64) -> Result<PreparedBench> {
    binning.validate()?;
    let kept: Vec<Option<Spectrum>> = data
        .library
        .par_iter()
        .map(|s| crate::spectra::preprocess(s, preprocess).ok())
        .collect();
    let mut position = vec![None; kept.len()];
    let mut targets = Vec::with_capacity(kept.len());
    for (i, s) in kept.into_iter().enumerate() {
        if let Some(s) = s {
            position[i] = Some(targets.len() as u32);
            targets.push(s);
        }
    }
    let decoys = generate_decoys(&targets, &ShiftDecoys::new(decoy_seed, binning.min_mz, binning.max_mz))?;
    let library: Vec<Spectrum> = targets.into_iter().chain(decoys).collect();

    let mut queries = Vec::with_capacity(data.queries.len());
    let mut truth = Vec::with_capacity(data.queries.len());
    for (q, t) in data.queries.iter().zip(&data.truth) {
        if let Ok(p) = crate::spectra::preprocess(q, preprocess) {
            queries.push(p);
            truth.push(t.and_then(|t| position[t as usize]));
        }
    }
    if queries.is_empty() {
        return Err(Error::Domain("every query was rejected by preprocessing".into()));
    }
    Ok(PreparedBench {
        binning: binning.clone(),
        library: library.par_iter().map(|s| bin(s, binning)).collect(),
        library_masses: library.iter().map(|s| s.precursor_mass).collect(),
        library_decoy: library.iter().map(|s| s.is_decoy).collect(),
        library_ids: library.iter().map(|s| s.id.clone()).collect(),
        queries: queries.par_iter().map(|s| bin(s, binning)).collect(),
        query_masses: queries.iter().map(|s| s.precursor_mass).collect(),
        truth,
    })
}

/// Prepares query/reference files for a sweep. Ground truth pairs a query
/// with the first target reference carrying the same peptide annotation.
pub fn prepare_files(
    queries: Vec<Spectrum>,
    references: Vec<Spectrum>,
    preprocess: &PreprocessConfig,
    binning: &BinConfig,
    decoy_seed: u64,
) -> Result<PreparedBench> {
    let (targets, _) = preprocess_all(&references, preprocess)?;
    let by_peptide: std::collections::HashMap<&str, u32> = targets
        .iter()
        .enumerate()
        .rev()
        .filter_map(|(i, s)| s.peptide.as_deref().map(|p| (p, i as u32)))
        .collect();
    let truth = queries
        .iter()
        .map(|q| q.peptide.as_deref().and_then(|p| by_peptide.get(p).copied()))
        .collect();
    let data = SyntheticData {
        library: targets,
        queries,
        truth,
    };
    prepare(&data, preprocess, binning, decoy_seed)
}

/// Encoded library and queries for one encoder setting.
#[derive(Clone, Debug)]
pub struct EncodedBench {
    pub index: ReferenceIndex,
    pub queries: Vec<Hypervector>,
}

pub fn encode_bench(bench: &PreparedBench, cfg: &EncoderConfig) -> Result<EncodedBench> {
    let encoder = Encoder::new(cfg.clone(), bench.binning.num_bins())?;
    let hvs = encoder.encode_all(&bench.library)?;
    let entries = hvs
        .into_iter()
        .enumerate()
        .map(|(i, hv)| ReferenceEntry {
            id: bench.library_ids[i].clone(),
            precursor_mass: bench.library_masses[i],
            is_decoy: bench.library_decoy[i],
            peptide: None,
            hv,
        })
        .collect();
    Ok(EncodedBench {
        index: ReferenceIndex::build(cfg.dim, entries)?,
        queries: encoder.encode_all(&bench.queries)?,
    })
}

/// Flips every stored reference bit independently with probability `ber`.
/// Flips for reference `r` come from stream `(seed, BIT_FLIP, r)`, so a
/// reference sees the same flips wherever it sits in the index.
pub fn inject_bit_errors(index: &mut ReferenceIndex, ber: f64, seed: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(Error::Domain(format!("bit error rate {ber} not in [0, 1]")));
    }
    if ber == 0.0 {
        return Ok(());
    }
    let dim = index.dim();
    let w = index.words_per_row();
    let refs: Vec<u32> = (0..index.len()).map(|p| index.reference_at(p)).collect();
    let log_keep = (1.0 - ber).ln();
    index.rows_mut().par_chunks_mut(w).zip(refs).for_each(|(row, r)| {
        let mut rng = stream(seed, domain::BIT_FLIP, r as u64);
        if ber == 1.0 {
            row.iter_mut().for_each(|x| *x = !*x);
            return;
        }
        // Gaps between flipped bits are geometric.
        let mut d = 0usize;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_keep).floor();
            if gap >= (dim - d) as f64 {
                break;
            }
            d += gap as usize;
            row[d / 64] ^= 1 << (d % 64);
            d += 1;
            if d >= dim {
                break;
            }
        }
    });
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// Fraction of queries with known truth whose rank-1 match is that reference.
    pub retrieval_rate: f64,
    /// Target matches passing the FDR filter.
    pub accepted_count: usize,
}

/// Searches the queries against a copy of the index with injected bit errors.
pub fn evaluate(
    bench: &PreparedBench,
    encoded: &EncodedBench,
    ber: f64,
    seed: u64,
    search: &SearchConfig,
    fdr_threshold: f64,
) -> Result<TrialOutcome> {
    let mut noisy;
    let index = if ber > 0.0 {
        noisy = encoded.index.clone();
        inject_bit_errors(&mut noisy, ber, seed)?;
        &noisy
    } else {
        &encoded.index
    };
    let queries: Vec<Query> = encoded
        .queries
        .iter()
        .zip(&bench.query_masses)
        .map(|(hv, &precursor_mass)| Query { hv, precursor_mass })
        .collect();
    let top1 = SearchConfig { k: 1, ..search.clone() };
    let results = batch_search(&queries, index, &top1)?;
    let (mut known, mut hits) = (0usize, 0usize);
    for (r, t) in results.iter().zip(&bench.truth) {
        if let Some(t) = t {
            known += 1;
            hits += r.first().is_some_and(|m| m.reference == *t) as usize;
        }
    }
    let best: Vec<_> = results.iter().filter_map(|r| r.first().copied()).collect();
    let fdr = fdr_filter(&best, fdr_threshold)?;
    Ok(TrialOutcome {
        retrieval_rate: if known == 0 { 0.0 } else { hits as f64 / known as f64 },
        accepted_count: fdr.accepted.len(),
    })
}
