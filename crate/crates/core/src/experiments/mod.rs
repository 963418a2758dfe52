//! Parameter sweeps over the synthetic benchmark and the crossbar model.
//!
//! A sweep is described by a TOML [`SweepSpec`]. Each sweep writes one CSV:
//!
//! | kind         | columns                                                  |
//! |--------------|----------------------------------------------------------|
//! | `robustness` | `D,id_bits,ber,seed,retrieval_rate,accepted_count`       |
//! | `dimension`  | `D,seed,retrieval_rate`                                  |
//! | `rram`       | `n,time_bucket,rows,seed,ber,nmse`                       |
//!
//! Rows come out in grid order (axes in the column order above, seeds
//! innermost) whatever the number of threads.

pub mod synthetic;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use synthetic::{
    encode_bench, evaluate, generate, inject_bit_errors, prepare, prepare_files, EncodedBench, PreparedBench, SyntheticBenchSpec,
    SyntheticData, TrialOutcome,
};

use crate::error::{Error, Result};
use crate::hd::EncoderConfig;
use crate::search::SearchConfig;
use crate::spectra::{read_mgf, BinConfig, PreprocessConfig};
use crate::xbar::{measure_ber, measure_mvm_nmse, RramConfig, TimeBucket};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Robustness,
    Dimension,
    Rram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Dataset {
    Synthetic(SyntheticBenchSpec),
    /// MGF files; ground truth comes from matching peptide annotations.
    Files {
        queries: PathBuf,
        references: PathBuf,
    },
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::Synthetic(SyntheticBenchSpec::default())
    }
}

/// Axes a sweep kind does not use must be left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// One repetition per seed; at least three.
    pub seeds: Vec<u64>,
    pub dims: Option<Vec<usize>>,
    pub bers: Option<Vec<f64>>,
    pub id_bits: Option<Vec<u8>>,
    /// Bits stored per cell.
    pub cell_bits: Option<Vec<u8>>,
    pub rows: Option<Vec<usize>>,
    pub time_buckets: Option<Vec<TimeBucket>>,
    pub dataset: Dataset,
    pub preprocess: PreprocessConfig,
    pub binning: BinConfig,
    /// Base encoder settings; `dim`, `id_bits` and `seed` are set per grid point.
    pub encoder: EncoderConfig,
    pub search: SearchConfig,
    pub fdr_threshold: f64,
    /// Base crossbar settings for `rram` sweeps.
    pub rram: RramConfig,
    /// Hypervector length stored per BER trial.
    pub rram_dim: usize,
    pub rram_trials: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            kind: SweepKind::Robustness,
            seeds: vec![0, 1, 2, 3, 4],
            dims: None,
            bers: None,
            id_bits: None,
            cell_bits: None,
            rows: None,
            time_buckets: None,
            dataset: Dataset::default(),
            preprocess: PreprocessConfig::default(),
            binning: BinConfig::default(),
            encoder: EncoderConfig::default(),
            search: SearchConfig::default(),
            fdr_threshold: 0.01,
            rram: RramConfig::default(),
            rram_dim: 1024,
            rram_trials: 200,
        }
    }
}

fn axis<'a, T>(name: &str, v: &'a Option<Vec<T>>) -> Result<&'a [T]> {
    match v {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Error::Config(format!("axis `{name}` must be a non-empty list"))),
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Config(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() < 3 || seeds.len() != self.seeds.len() {
            return Err(Error::Config(format!("need at least 3 distinct seeds, got {:?}", self.seeds)));
        }
        let (used, unused): (&[&str], &[&str]) = match self.kind {
            SweepKind::Robustness => (&["dims", "bers", "id_bits"], &["cell_bits", "rows", "time_buckets"]),
            SweepKind::Dimension => (&["dims", "bers"], &["id_bits", "cell_bits", "rows", "time_buckets"]),
            SweepKind::Rram => (&["cell_bits", "rows", "time_buckets"], &["dims", "bers", "id_bits"]),
        };
        for &name in unused {
            if self.axis_given(name) {
                return Err(Error::Config(format!("axis `{name}` is not used by {:?} sweeps", self.kind)));
            }
        }
        for &name in used {
            if !self.axis_given(name) {
                return Err(Error::Config(format!("axis `{name}` must be a non-empty list")));
            }
        }
        match self.kind {
            SweepKind::Robustness | SweepKind::Dimension => {
                if let Dataset::Synthetic(b) = &self.dataset {
                    b.validate()?;
                }
                self.preprocess.validate()?;
                self.binning.validate()?;
                self.search.validate()?;
                if !(self.fdr_threshold > 0.0 && self.fdr_threshold < 1.0) {
                    return Err(Error::Config(format!(
                        "fdr_threshold must be in (0, 1), got {}",
                        self.fdr_threshold
                    )));
                }
                if let Some(b) = self.bers.as_ref().and_then(|b| b.iter().find(|b| !(0.0..=1.0).contains(*b))) {
                    return Err(Error::Config(format!("ber {b} not in [0, 1]")));
                }
                if self.kind == SweepKind::Dimension && self.bers.as_ref().map_or(0, Vec::len) != 1 {
                    return Err(Error::Config("dimension sweeps take exactly one ber".into()));
                }
                let bits = self.id_bits.clone().unwrap_or_else(|| vec![self.encoder.id_bits]);
                for &dim in axis("dims", &self.dims)? {
                    for &id_bits in &bits {
                        EncoderConfig {
                            dim,
                            id_bits,
                            ..self.encoder.clone()
                        }
                        .validate()?;
                    }
                }
            }
            SweepKind::Rram => {
                for &n in axis("cell_bits", &self.cell_bits)? {
                    RramConfig {
                        bits_per_cell: n,
                        ..self.rram.clone()
                    }
                    .validate()?;
                }
                if axis("rows", &self.rows)?.contains(&0) {
                    return Err(Error::Config("rows must be positive".into()));
                }
                if self.rram_dim == 0 || self.rram_trials == 0 {
                    return Err(Error::Config("rram_dim and rram_trials must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn axis_given(&self, name: &str) -> bool {
        match name {
            "dims" => self.dims.is_some(),
            "bers" => self.bers.is_some(),
            "id_bits" => self.id_bits.is_some(),
            "cell_bits" => self.cell_bits.is_some(),
            "rows" => self.rows.is_some(),
            "time_buckets" => self.time_buckets.is_some(),
            _ => unreachable!("unknown axis {name}"),
        }
    }

    /// Data for one repetition.
    pub fn prepare(&self, seed: u64) -> Result<PreparedBench> {
        match &self.dataset {
            Dataset::Synthetic(b) => prepare(&generate(b, seed)?, &self.preprocess, &self.binning, seed),
            Dataset::Files { queries, references } => {
                let q = read_mgf(queries)?;
                let r = read_mgf(references)?;
                prepare_files(q.spectra, r.spectra, &self.preprocess, &self.binning, seed)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessRow {
    #[serde(rename = "D")]
    pub dim: usize,
    pub id_bits: u8,
    pub ber: f64,
    pub seed: u64,
    pub retrieval_rate: f64,
    pub accepted_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRow {
    #[serde(rename = "D")]
    pub dim: usize,
    pub seed: u64,
    pub retrieval_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RramRow {
    pub n: u8,
    pub time_bucket: TimeBucket,
    pub rows: usize,
    pub seed: u64,
    pub ber: f64,
    pub nmse: f64,
}

/// Runs every `(D, id_bits, ber)` point for every seed. Data is prepared once
/// per seed and encoded once per `(seed, D, id_bits)`.
fn retrieval_grid(spec: &SweepSpec, dims: &[usize], bits: &[u8], bers: &[f64]) -> Result<HashMap<(usize, u8, u64, u64), TrialOutcome>> {
    let mut out = HashMap::new();
    for &seed in &spec.seeds {
        let bench = spec.prepare(seed)?;
        for &dim in dims {
            for &id_bits in bits {
                let cfg = EncoderConfig {
                    dim,
                    id_bits,
                    seed,
                    ..spec.encoder.clone()
                };
                let encoded = encode_bench(&bench, &cfg)?;
                for &ber in bers {
                    let r = evaluate(&bench, &encoded, ber, seed, &spec.search, spec.fdr_threshold)?;
                    log::info!(
                        "D={dim} id_bits={id_bits} ber={ber} seed={seed}: retrieval {:.4}, accepted {}",
                        r.retrieval_rate,
                        r.accepted_count
                    );
                    out.insert((dim, id_bits, ber.to_bits(), seed), r);
                }
            }
        }
    }
    Ok(out)
}

pub fn sweep_robustness(spec: &SweepSpec) -> Result<Vec<RobustnessRow>> {
    spec.validate()?;
    if spec.kind != SweepKind::Robustness {
        return Err(Error::Config("not a robustness sweep".into()));
    }
    let (dims, bits, bers) = (
        axis("dims", &spec.dims)?,
        axis("id_bits", &spec.id_bits)?,
        axis("bers", &spec.bers)?,
    );
    let grid = retrieval_grid(spec, dims, bits, bers)?;
    let mut rows = Vec::new();
    for &dim in dims {
        for &id_bits in bits {
            for &ber in bers {
                for &seed in &spec.seeds {
                    let r = grid[&(dim, id_bits, ber.to_bits(), seed)];
                    rows.push(RobustnessRow {
                        dim,
                        id_bits,
                        ber,
                        seed,
                        retrieval_rate: r.retrieval_rate,
                        accepted_count: r.accepted_count,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_dimension(spec: &SweepSpec) -> Result<Vec<DimensionRow>> {
    spec.validate()?;
    if spec.kind != SweepKind::Dimension {
        return Err(Error::Config("not a dimension sweep".into()));
    }
    let (dims, bers) = (axis("dims", &spec.dims)?, axis("bers", &spec.bers)?);
    let bits = [spec.encoder.id_bits];
    let grid = retrieval_grid(spec, dims, &bits, bers)?;
    let mut rows = Vec::new();
    for &dim in dims {
        for &seed in &spec.seeds {
            rows.push(DimensionRow {
                dim,
                seed,
                retrieval_rate: grid[&(dim, bits[0], bers[0].to_bits(), seed)].retrieval_rate,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_rram(spec: &SweepSpec) -> Result<Vec<RramRow>> {
    spec.validate()?;
    if spec.kind != SweepKind::Rram {
        return Err(Error::Config("not an rram sweep".into()));
    }
    let grid = RramGrid {
        cell_bits: axis("cell_bits", &spec.cell_bits)?,
        time_buckets: axis("time_buckets", &spec.time_buckets)?,
        rows: axis("rows", &spec.rows)?,
        seeds: &spec.seeds,
        dim: spec.rram_dim,
        trials: spec.rram_trials,
    };
    rram_grid(&spec.rram, &grid)
}

/// Axes of a crossbar measurement grid.
#[derive(Clone, Copy, Debug)]
pub struct RramGrid<'a> {
    pub cell_bits: &'a [u8],
    pub time_buckets: &'a [TimeBucket],
    pub rows: &'a [usize],
    pub seeds: &'a [u64],
    /// Hypervector length stored per BER trial.
    pub dim: usize,
    pub trials: usize,
}

/// BER and NMSE at every grid point, in grid order. `bits_per_cell`,
/// `time_bucket` and `seed` of `base` are replaced per point, and
/// `max_active_rows` is raised to the row count when needed.
pub fn rram_grid(base: &RramConfig, grid: &RramGrid<'_>) -> Result<Vec<RramRow>> {
    let mut points = Vec::new();
    for &n in grid.cell_bits {
        for &time_bucket in grid.time_buckets {
            for &r in grid.rows {
                for &seed in grid.seeds {
                    points.push((n, time_bucket, r, seed));
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|(n, time_bucket, r, seed)| {
            let cfg = RramConfig {
                bits_per_cell: n,
                time_bucket,
                seed,
                max_active_rows: base.max_active_rows.max(r),
                ..base.clone()
            };
            let ber = measure_ber(&cfg, grid.dim, grid.trials)?.ber();
            let nmse = measure_mvm_nmse(&cfg, r, grid.trials)?.nmse;
            Ok(RramRow {
                n,
                time_bucket,
                rows: r,
                seed,
                ber,
                nmse,
            })
        })
        .collect()
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Format(format!("writing sweep csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("writing sweep csv: {e}")))
}

/// Runs the sweep named by `spec.kind` and writes its CSV.
pub fn run_sweep<W: Write>(spec: &SweepSpec, out: W) -> Result<usize> {
    match spec.kind {
        SweepKind::Robustness => {
            let rows = sweep_robustness(spec)?;
            write_csv(out, &rows)?;
            Ok(rows.len())
        }
        SweepKind::Dimension => {
            let rows = sweep_dimension(spec)?;
            write_csv(out, &rows)?;
            Ok(rows.len())
        }
        SweepKind::Rram => {
            let rows = sweep_rram(spec)?;
            write_csv(out, &rows)?;
            Ok(rows.len())
        }
    }
}
