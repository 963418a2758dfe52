//! End-to-end open modification search.
//!
//! Stages run in a fixed order: `ingest`, `preprocess`, `decoys`, `encode`,
//! `emulate` (query storage, only with hardware simulation), `search` and
//! `fdr`. Decoys are generated unless the reference set already holds
//! some (titles starting with `DECOY_`). A failing stage aborts the run; its error carries the stage name
//! and the partial [`RunReport`] is returned alongside it.
//!
//! The run report serializes to JSON:
//!
//! ```text
//! {
//!   "success": bool,
//!   "failed_stage": string | null,
//!   "error": string | null,
//!   "hardware": "bypass" | "simulate",
//!   "inputs": [{"path", "parsed", "skipped", "rejected"}],
//!   "stages": [{"stage", "items_in", "items_out", "seconds"}],
//!   "encode_cycles": integer | null,      // crossbar cycles, simulation only
//!   "fdr": {"threshold", "score_threshold", "targets_above",
//!           "decoys_above", "achieved_fdr"} | null,
//!   "accepted": [{"query_id", "reference_id", "peptide", "similarity"}]
//! }
//! ```

mod decoy;
mod fdr;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use decoy::{generate_decoys, DecoyGenerator, ShiftDecoys, DECOY_PREFIX};
pub use fdr::{fdr_curve, fdr_filter, q_values, FdrResult};

use crate::error::{Error, Result};
use crate::hd::{Encoder, EncoderConfig, Hypervector};
use crate::search::{batch_search, Query, ReferenceEntry, ReferenceIndex, ScoredMatch, SearchConfig};
use crate::spectra::{bin, preprocess, read_mgf, BinConfig, IngestReport, PreprocessConfig, Spectrum};
use crate::xbar::storage::store_and_read_indexed;
use crate::xbar::{CrossbarEncoder, CrossbarSearch, RramConfig};

/// Whether encoding, query storage and search go through the crossbar model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hardware {
    #[default]
    Bypass,
    Simulate(RramConfig),
}

impl Hardware {
    fn name(&self) -> &'static str {
        match self {
            Hardware::Bypass => "bypass",
            Hardware::Simulate(_) => "simulate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub binning: BinConfig,
    pub encoder: EncoderConfig,
    pub search: SearchConfig,
    pub fdr_threshold: f64,
    pub hardware: Hardware,
    pub decoy_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            preprocess: PreprocessConfig::default(),
            binning: BinConfig::default(),
            encoder: EncoderConfig::default(),
            search: SearchConfig::default(),
            fdr_threshold: 0.01,
            hardware: Hardware::Bypass,
            decoy_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.binning.validate()?;
        self.encoder.validate()?;
        self.search.validate()?;
        if !(self.fdr_threshold > 0.0 && self.fdr_threshold < 1.0) {
            return Err(Error::Config(format!(
                "fdr_threshold must be in (0, 1), got {}",
                self.fdr_threshold
            )));
        }
        if let Hardware::Simulate(rram) = &self.hardware {
            rram.validate()?;
        }
        Ok(())
    }

    pub fn decoy_generator(&self) -> ShiftDecoys {
        ShiftDecoys::new(self.decoy_seed, self.binning.min_mz, self.binning.max_mz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub items_in: usize,
    pub items_out: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdrSummary {
    pub threshold: f64,
    pub score_threshold: Option<i32>,
    pub targets_above: usize,
    pub decoys_above: usize,
    pub achieved_fdr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Identification {
    pub query_id: String,
    pub reference_id: String,
    pub peptide: Option<String>,
    pub similarity: i32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub success: bool,
    pub failed_stage: Option<&'static str>,
    pub error: Option<String>,
    pub hardware: &'static str,
    pub inputs: Vec<IngestReport>,
    pub stages: Vec<StageReport>,
    pub encode_cycles: Option<u64>,
    pub fdr: Option<FdrSummary>,
    pub accepted: Vec<Identification>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A stage error together with everything reported before it.
#[derive(Debug)]
pub struct PipelineFailure {
    pub error: Error,
    pub report: Box<RunReport>,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for PipelineFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub query_ids: Vec<String>,
    pub index: ReferenceIndex,
    /// Top-k matches per query, in query order.
    pub results: Vec<Vec<ScoredMatch>>,
    pub fdr: FdrResult,
}

impl PipelineOutput {
    pub fn write_results<W: Write>(&self, out: W) -> Result<()> {
        crate::search::write_results_csv(out, &self.query_ids, &self.index, &self.results)
    }

    pub fn write_peptides<W: Write>(&self, out: W) -> Result<()> {
        write_identifications(out, &self.report.accepted)
    }
}

/// Accepted identifications as CSV: `query_id,reference_id,peptide,similarity`.
pub fn write_identifications<W: Write>(out: W, ids: &[Identification]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Format(format!("writing peptides: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["query_id", "reference_id", "peptide", "similarity"])
        .map_err(to_err)?;
    for id in ids {
        w.write_record([
            id.query_id.as_str(),
            id.reference_id.as_str(),
            id.peptide.as_deref().unwrap_or(""),
            &id.similarity.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("writing peptides: {e}")))
}

/// Preprocesses in parallel, keeping input order. Spectra that fail the
/// peak requirements are dropped and counted.
pub fn preprocess_all(spectra: &[Spectrum], cfg: &PreprocessConfig) -> Result<(Vec<Spectrum>, usize)> {
    cfg.validate()?;
    let done: Vec<Result<Spectrum>> = spectra.par_iter().map(|s| preprocess(s, cfg)).collect();
    let mut kept = Vec::with_capacity(done.len());
    let mut rejected = 0;
    for r in done {
        match r {
            Ok(s) => kept.push(s),
            Err(Error::EmptySpectrum { .. }) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((kept, rejected))
}

/// Bins and encodes, through the crossbar model when `rram` is given.
/// Returns the hypervectors and the total crossbar cycle count.
pub fn encode_spectra(
    spectra: &[Spectrum],
    encoder: &Encoder,
    binning: &BinConfig,
    rram: Option<&RramConfig>,
) -> Result<(Vec<Hypervector>, u64)> {
    match rram {
        None => {
            let hvs = spectra
                .par_iter()
                .map(|s| encoder.encode(&bin(s, binning)))
                .collect::<Result<_>>()?;
            Ok((hvs, 0))
        }
        Some(cfg) => {
            let xe = CrossbarEncoder::new(encoder, cfg.clone())?;
            let out: Vec<(Hypervector, usize)> = spectra.par_iter().map(|s| xe.encode(&bin(s, binning))).collect::<Result<_>>()?;
            let cycles = out.iter().map(|o| o.1 as u64).sum();
            Ok((out.into_iter().map(|o| o.0).collect(), cycles))
        }
    }
}

/// Top-k search of every query, scored by the crossbar model when `xbar` is given.
pub fn search_queries(
    hvs: &[Hypervector],
    masses: &[f64],
    index: &ReferenceIndex,
    cfg: &SearchConfig,
    xbar: Option<&CrossbarSearch>,
) -> Result<Vec<Vec<ScoredMatch>>> {
    match xbar {
        None => {
            let queries: Vec<Query> = hvs
                .iter()
                .zip(masses)
                .map(|(hv, &precursor_mass)| Query { hv, precursor_mass })
                .collect();
            batch_search(&queries, index, cfg)
        }
        Some(xs) => {
            cfg.validate()?;
            hvs.par_iter()
                .zip(masses)
                .enumerate()
                .map(|(i, (hv, &mass))| {
                    let range = index.candidate_range(mass, cfg.window);
                    let scores = xs.scores(hv, range.clone())?;
                    Ok(index.rank_scores(i as u32, range.start, &scores, cfg.k))
                })
                .collect()
        }
    }
}

/// Rank-1 match of every query that has one.
pub fn best_matches(results: &[Vec<ScoredMatch>]) -> Vec<ScoredMatch> {
    results.iter().filter_map(|r| r.first().copied()).collect()
}

struct Run {
    report: RunReport,
}

impl Run {
    fn stage<T>(&mut self, stage: &'static str, items_in: usize, f: impl FnOnce() -> Result<(T, usize)>) -> Result<T> {
        let start = Instant::now();
        match f() {
            Ok((value, items_out)) => {
                self.report.stages.push(StageReport {
                    stage,
                    items_in,
                    items_out,
                    seconds: start.elapsed().as_secs_f64(),
                });
                Ok(value)
            }
            Err(e) => {
                let e = e.in_stage(stage);
                self.report.failed_stage = Some(stage);
                self.report.error = Some(e.to_string());
                Err(e)
            }
        }
    }
}

/// Runs the pipeline on MGF files.
pub fn run_pipeline(
    query_path: impl AsRef<Path>,
    ref_path: impl AsRef<Path>,
    cfg: &PipelineConfig,
) -> std::result::Result<PipelineOutput, PipelineFailure> {
    let mut run = Run {
        report: RunReport {
            hardware: cfg.hardware.name(),
            ..Default::default()
        },
    };
    let loaded = run.stage("ingest", 2, || {
        cfg.validate()?;
        let q = read_mgf(query_path.as_ref())?;
        let r = read_mgf(ref_path.as_ref())?;
        let n = q.spectra.len() + r.spectra.len();
        Ok(((q, r), n))
    });
    let (q, r) = match loaded {
        Ok(v) => v,
        Err(error) => {
            return Err(PipelineFailure {
                error,
                report: Box::new(run.report),
            })
        }
    };
    run.report.inputs = vec![q.report, r.report];
    let result = run_loaded(&mut run, q.spectra, r.spectra, cfg);
    finish(run, result)
}

/// Runs the pipeline on spectra already in memory (the ingest stage is skipped).
pub fn run_spectra(
    queries: Vec<Spectrum>,
    references: Vec<Spectrum>,
    cfg: &PipelineConfig,
) -> std::result::Result<PipelineOutput, PipelineFailure> {
    let mut run = Run {
        report: RunReport {
            hardware: cfg.hardware.name(),
            ..Default::default()
        },
    };
    let result = run.stage("ingest", queries.len() + references.len(), || {
        cfg.validate()?;
        if queries.is_empty() || references.is_empty() {
            return Err(Error::Format("no query or reference spectra".into()));
        }
        Ok(((), queries.len() + references.len()))
    });
    let result = result.and_then(|_| run_loaded(&mut run, queries, references, cfg));
    finish(run, result)
}

fn finish(mut run: Run, result: Result<Loaded>) -> std::result::Result<PipelineOutput, PipelineFailure> {
    match result {
        Ok((query_ids, index, results, fdr)) => {
            run.report.success = true;
            Ok(PipelineOutput {
                report: run.report,
                query_ids,
                index,
                results,
                fdr,
            })
        }
        Err(error) => Err(PipelineFailure {
            error,
            report: Box::new(run.report),
        }),
    }
}

type Loaded = (Vec<String>, ReferenceIndex, Vec<Vec<ScoredMatch>>, FdrResult);

fn run_loaded(run: &mut Run, queries: Vec<Spectrum>, references: Vec<Spectrum>, cfg: &PipelineConfig) -> Result<Loaded> {
    let rram = match &cfg.hardware {
        Hardware::Bypass => None,
        Hardware::Simulate(r) => Some(r),
    };
    let n_in = queries.len() + references.len();
    let ((queries, targets), (q_rej, t_rej)) = run.stage("preprocess", n_in, || {
        let (q, q_rej) = preprocess_all(&queries, &cfg.preprocess)?;
        let (t, t_rej) = preprocess_all(&references, &cfg.preprocess)?;
        if q.is_empty() {
            return Err(Error::Format("every query spectrum was rejected".into()));
        }
        if t.is_empty() {
            return Err(Error::Format("every reference spectrum was rejected".into()));
        }
        let n = q.len() + t.len();
        Ok((((q, t), (q_rej, t_rej)), n))
    })?;
    if let [qi, ri] = &mut run.report.inputs[..] {
        qi.rejected = q_rej;
        ri.rejected = t_rej;
    }

    let library = run.stage("decoys", targets.len(), || {
        let mut library = targets;
        if library.iter().any(|s| s.is_decoy) {
            log::info!("reference set already contains decoys, none generated");
        } else {
            let decoys = generate_decoys(&library, &cfg.decoy_generator())?;
            library.extend(decoys);
        }
        let n = library.len();
        Ok((library, n))
    })?;

    let n_enc = queries.len() + library.len();
    let (query_hvs, index, cycles) = run.stage("encode", n_enc, || {
        let encoder = Encoder::new(cfg.encoder.clone(), cfg.binning.num_bins())?;
        let (q_hvs, q_cycles) = encode_spectra(&queries, &encoder, &cfg.binning, rram)?;
        let (r_hvs, r_cycles) = encode_spectra(&library, &encoder, &cfg.binning, rram)?;
        let entries = library
            .iter()
            .zip(r_hvs)
            .map(|(s, hv)| ReferenceEntry {
                id: s.id.clone(),
                precursor_mass: s.precursor_mass,
                is_decoy: s.is_decoy,
                peptide: s.peptide.clone(),
                hv,
            })
            .collect();
        let index = ReferenceIndex::build(cfg.encoder.dim, entries)?;
        Ok(((q_hvs, index, q_cycles + r_cycles), n_enc))
    })?;
    if rram.is_some() {
        run.report.encode_cycles = Some(cycles);
    }

    let query_hvs = match rram {
        None => query_hvs,
        Some(r) => run.stage("emulate", query_hvs.len(), || {
            let stored = query_hvs
                .par_iter()
                .enumerate()
                .map(|(i, h)| store_and_read_indexed(h, r, i as u64))
                .collect::<Result<Vec<_>>>()?;
            let n = stored.len();
            Ok((stored, n))
        })?,
    };

    let masses: Vec<f64> = queries.iter().map(|s| s.precursor_mass).collect();
    let results = run.stage("search", query_hvs.len(), || {
        let xs = rram.map(|r| CrossbarSearch::new(&index, r.clone())).transpose()?;
        let results = search_queries(&query_hvs, &masses, &index, &cfg.search, xs.as_ref())?;
        let n = results.iter().map(Vec::len).sum();
        Ok((results, n))
    })?;

    let query_ids: Vec<String> = queries.iter().map(|s| s.id.clone()).collect();
    let best = best_matches(&results);
    let fdr = run.stage("fdr", best.len(), || {
        let fdr = fdr_filter(&best, cfg.fdr_threshold)?;
        let n = fdr.accepted.len();
        Ok((fdr, n))
    })?;
    run.report.fdr = Some(FdrSummary {
        threshold: cfg.fdr_threshold,
        score_threshold: fdr.score_threshold,
        targets_above: fdr.targets_above,
        decoys_above: fdr.decoys_above,
        achieved_fdr: fdr.achieved_fdr,
    });
    run.report.accepted = fdr
        .accepted
        .iter()
        .map(|m| Identification {
            query_id: query_ids[m.query as usize].clone(),
            reference_id: index.id(m.reference).to_string(),
            peptide: index.peptide(m.reference).map(str::to_string),
            similarity: m.similarity,
        })
        .collect();
    Ok((query_ids, index, results, fdr))
}
