//! Input builders shared by the benchmarks.

use hdoms::search::{ReferenceEntry, ReferenceIndex};
use hdoms::spectra::{BinnedVector, Peak, Spectrum};
use hdoms::Hypervector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_hv(rng: &mut impl RngCore, dim: usize) -> Hypervector {
    Hypervector::from_words(dim, (0..dim / 64).map(|_| rng.next_u64()).collect()).expect("dim is a multiple of 64")
}

/// `n` references with masses spread over 800..3500 Da.
pub fn random_index(n: usize, dim: usize, seed: u64) -> ReferenceIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n)
        .map(|i| ReferenceEntry {
            id: format!("r{i}"),
            precursor_mass: rng.random_range(800.0..3500.0),
            is_decoy: i % 2 == 1,
            peptide: None,
            hv: random_hv(&mut rng, dim),
        })
        .collect();
    ReferenceIndex::build(dim, entries).expect("consistent dims")
}

pub fn random_spectrum(peaks: usize, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<Peak> = (0..peaks)
        .map(|_| Peak::new(rng.random_range(100.0..2000.0), rng.random_range(1.0..100.0)))
        .collect();
    p.sort_by(|a, b| a.mz.total_cmp(&b.mz));
    Spectrum::new("bench", 1500.0, 2, p)
}

pub fn random_binned(peaks: usize, num_bins: u32, seed: u64) -> BinnedVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins: Vec<(u32, f64)> = (0..peaks)
        .map(|_| (rng.random_range(0..num_bins), rng.random_range(0.01..1.0)))
        .collect();
    bins.sort_by_key(|b| b.0);
    bins.dedup_by_key(|b| b.0);
    BinnedVector {
        spectrum_id: "bench".into(),
        bins,
        bin_width: 0.05,
        mz_range: (50.5, 2500.0),
        out_of_range: 0,
    }
}
