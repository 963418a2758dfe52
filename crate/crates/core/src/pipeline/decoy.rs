//! Decoy spectra for target-decoy FDR estimation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{domain, stream};
pub use crate::spectra::DECOY_PREFIX;
use crate::spectra::{Peak, Spectrum};

/// Builds one decoy from the target at position `index` of the library.
pub trait DecoyGenerator: Sync {
    fn decoy(&self, target: &Spectrum, index: u64) -> Spectrum;
}

/// Shifts every peak by one pseudo-random offset in `[min_shift, max_shift]`
/// Da, wrapping around `[min_mz, max_mz)`. Intensities, precursor mass and
/// charge are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftDecoys {
    pub seed: u64,
    pub min_mz: f64,
    pub max_mz: f64,
    pub min_shift: f64,
    pub max_shift: f64,
}

impl ShiftDecoys {
    pub fn new(seed: u64, min_mz: f64, max_mz: f64) -> Self {
        ShiftDecoys {
            seed,
            min_mz,
            max_mz,
            min_shift: 10.0,
            max_shift: 50.0,
        }
    }

    pub fn offset(&self, index: u64) -> f64 {
        stream(self.seed, domain::DECOY, index).random_range(self.min_shift..=self.max_shift)
    }
}

impl DecoyGenerator for ShiftDecoys {
    fn decoy(&self, target: &Spectrum, index: u64) -> Spectrum {
        let span = self.max_mz - self.min_mz;
        let shift = self.offset(index);
        let mut peaks: Vec<Peak> = target
            .peaks
            .iter()
            .map(|p| Peak::new(self.min_mz + (p.mz - self.min_mz + shift).rem_euclid(span), p.intensity))
            .collect();
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        Spectrum {
            id: format!("{DECOY_PREFIX}{}", target.id),
            peaks,
            is_decoy: true,
            peptide: None,
            ..target.clone()
        }
    }
}

/// One decoy per target, in target order.
pub fn generate_decoys(targets: &[Spectrum], generator: &dyn DecoyGenerator) -> Result<Vec<Spectrum>> {
    if targets.is_empty() {
        return Err(Error::Domain("no reference spectra to build decoys from".into()));
    }
    Ok(targets.iter().enumerate().map(|(i, t)| generator.decoy(t, i as u64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target() -> Spectrum {
        let peaks = vec![Peak::new(100.0, 1.0), Peak::new(500.0, 3.0), Peak::new(2490.0, 2.0)];
        Spectrum::new("t1", 1500.0, 2, peaks)
    }

    #[test]
    fn one_decoy_per_target_with_same_intensities() {
        let gen = ShiftDecoys::new(3, 50.5, 2500.0);
        let targets = vec![target(), target()];
        let decoys = generate_decoys(&targets, &gen).unwrap();
        assert_eq!(decoys.len(), 2);
        for d in &decoys {
            assert!(d.is_decoy);
            assert_eq!(d.id, "DECOY_t1");
            assert_eq!(d.precursor_mass, 1500.0);
            let mut a: Vec<f64> = d.peaks.iter().map(|p| p.intensity).collect();
            a.sort_by(f64::total_cmp);
            assert_eq!(a, vec![1.0, 2.0, 3.0]);
            assert!(d.peaks.windows(2).all(|w| w[0].mz <= w[1].mz));
            assert!(d.peaks.iter().all(|p| (50.5..2500.0).contains(&p.mz)));
        }
    }

    #[test]
    fn shift_is_bounded_and_wraps() {
        let gen = ShiftDecoys::new(11, 50.5, 2500.0);
        for i in 0..200 {
            let off = gen.offset(i);
            assert!((10.0..=50.0).contains(&off));
        }
        let d = gen.decoy(&target(), 0);
        let off = gen.offset(0);
        // 2490 + off wraps to the low end of the range.
        let wrapped = 50.5 + (2490.0 - 50.5 + off - (2500.0 - 50.5));
        assert!(d.peaks.iter().any(|p| (p.mz - wrapped).abs() < 1e-9));
        assert!(d.peaks.iter().any(|p| (p.mz - (100.0 + off)).abs() < 1e-9));
    }

    #[test]
    fn empty_library_is_an_error() {
        assert!(generate_decoys(&[], &ShiftDecoys::new(0, 50.5, 2500.0)).is_err());
    }
}
