//! `hdoms`: hyperdimensional open modification search from the command line.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hdoms::experiments::{rram_grid, run_sweep, write_csv, RramGrid, SweepSpec};
use hdoms::hd::store::{is_store, read_store, StoreWriter, StoredHypervector};
use hdoms::pipeline::{
    best_matches, encode_spectra, fdr_filter, generate_decoys, preprocess_all, run_pipeline, search_queries, write_identifications,
    FdrSummary, Hardware, Identification, PipelineConfig, RunReport, StageReport,
};
use hdoms::search::{write_results_csv, ReferenceEntry, ReferenceIndex};
use hdoms::spectra::{read_mgf, write_mgf, Spectrum};
use hdoms::xbar::{NoiseModel, RramConfig, TimeBucket};
use hdoms::{Encoder, Error, Hypervector, Result};

use config::{parse_window, Overrides};

#[derive(Parser, Debug)]
#[command(
    name = "hdoms",
    version,
    about = "Hyperdimensional open modification search with an RRAM crossbar model"
)]
struct Cli {
    /// TOML settings file; flags given on the command line take precedence
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(short, long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Only print warnings and errors
    #[arg(short, long, global = true)]
    quiet: bool,

    /// Seed for ID/level families, decoys and cell noise
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Precursor window half-width in Da, or `inf`, `open`, `standard`
    #[arg(long, global = true, value_parser = parse_window)]
    window: Option<f64>,

    /// Matches reported per query
    #[arg(short, global = true)]
    k: Option<usize>,

    /// FDR threshold, in (0, 1)
    #[arg(long, global = true)]
    fdr: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode MGF spectra into an HDV1 hypervector store
    Encode(EncodeArgs),
    /// Search queries against references and apply the FDR filter
    Search(SearchArgs),
    /// Run a parameter sweep described by a TOML spec
    Sweep(SweepArgs),
    /// Measure crossbar bit error rate and MVM error over a grid
    Simulate(SimulateArgs),
    /// Write shifted-peak decoys for a spectral library
    Decoys(DecoyArgs),
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Input MGF files
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output store
    #[arg(short, long)]
    out: PathBuf,
    /// Append one decoy per target before encoding
    #[arg(long)]
    decoys: bool,
    /// Write the JSON run report here instead of stderr
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Query spectra: MGF file or HDV1 store
    #[arg(long)]
    queries: PathBuf,
    /// Reference library: MGF file or HDV1 store
    #[arg(long)]
    references: PathBuf,
    /// Results CSV
    #[arg(short, long)]
    out: PathBuf,
    /// Write the JSON run report here instead of stderr
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write accepted identifications (query, reference, peptide, similarity) as CSV
    #[arg(long, value_name = "FILE")]
    peptides: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep spec (TOML)
    spec: PathBuf,
    /// Output CSV
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Noise table file; defaults to the built-in table
    #[arg(long, value_name = "FILE")]
    noise: Option<PathBuf>,
    /// Bits per cell
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    cell_bits: Vec<u8>,
    /// Time buckets: t0, 30min, 60min, 1day
    #[arg(long, value_delimiter = ',', default_value = "t0,30min,60min,1day")]
    time_buckets: Vec<TimeBucket>,
    /// Simultaneously driven rows
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    rows: Vec<usize>,
    /// Seeds, one repetition each (default: --seed, or 0)
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Hypervector length per BER trial
    #[arg(long, default_value_t = 1024)]
    dim: usize,
    /// Trials per grid point
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// ADC resolution in bits, 0 for an ideal ADC
    #[arg(long)]
    adc_bits: Option<u8>,
    /// Output CSV
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecoyArgs {
    /// Library MGF
    input: PathBuf,
    /// Output MGF
    #[arg(short, long)]
    out: PathBuf,
    /// Also write the targets, ahead of the decoys
    #[arg(long)]
    with_targets: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Format(format!("cannot create {}: {e}", path.display())))
}

fn write_report(report: &RunReport, path: Option<&Path>, quiet: bool) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{}", report.to_json())
                .and_then(|_| w.flush())
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))
        }
        None if !quiet => {
            eprintln!("{}", report.to_json());
            Ok(())
        }
        None => Ok(()),
    }
}

fn ingest(paths: &[PathBuf]) -> Result<(Vec<Spectrum>, Vec<hdoms::spectra::IngestReport>)> {
    let mut spectra = Vec::new();
    let mut reports = Vec::new();
    for p in paths {
        let load = read_mgf(p)?;
        spectra.extend(load.spectra);
        reports.push(load.report);
    }
    Ok((spectra, reports))
}

fn cmd_encode(args: &EncodeArgs, cfg: &PipelineConfig, quiet: bool) -> Result<()> {
    let rram = match &cfg.hardware {
        Hardware::Bypass => None,
        Hardware::Simulate(r) => Some(r),
    };
    let (spectra, inputs) = ingest(&args.inputs).map_err(|e| e.in_stage("ingest"))?;
    let (mut spectra, rejected) = preprocess_all(&spectra, &cfg.preprocess).map_err(|e| e.in_stage("preprocess"))?;
    if spectra.is_empty() {
        return Err(Error::Format("every spectrum was rejected".into()).in_stage("preprocess"));
    }
    log::info!("{} spectra kept, {rejected} rejected", spectra.len());
    if args.decoys {
        let decoys = generate_decoys(&spectra, &cfg.decoy_generator()).map_err(|e| e.in_stage("decoys"))?;
        spectra.extend(decoys);
    }
    let start = Instant::now();
    let encoder = Encoder::new(cfg.encoder.clone(), cfg.binning.num_bins()).map_err(|e| e.in_stage("encode"))?;
    let (hvs, cycles) = encode_spectra(&spectra, &encoder, &cfg.binning, rram).map_err(|e| e.in_stage("encode"))?;
    let seconds = start.elapsed().as_secs_f64();
    let mut store = StoreWriter::create(&args.out, cfg.encoder.dim)?;
    for (s, hv) in spectra.iter().zip(hvs) {
        store.push(&StoredHypervector {
            id: s.id.clone(),
            precursor_mass: s.precursor_mass,
            charge: s.precursor_charge,
            is_decoy: s.is_decoy,
            peptide: s.peptide.clone(),
            hv,
        })?;
    }
    store.finish()?;
    let report = RunReport {
        success: true,
        hardware: if rram.is_some() { "simulate" } else { "bypass" },
        inputs,
        stages: vec![StageReport {
            stage: "encode",
            items_in: spectra.len(),
            items_out: spectra.len(),
            seconds,
        }],
        encode_cycles: rram.map(|_| cycles),
        ..RunReport::default()
    };
    write_report(&report, args.report.as_deref(), quiet)
}

/// Query hypervectors with ids and masses, from a store or by encoding MGF.
fn load_queries(path: &Path, cfg: &PipelineConfig) -> Result<(Vec<String>, Vec<f64>, Vec<Hypervector>)> {
    if is_store(path) {
        let (dim, recs) = read_store(path)?;
        if dim != cfg.encoder.dim {
            return Err(Error::DimensionMismatch {
                expected: cfg.encoder.dim,
                found: dim,
            });
        }
        let ids = recs.iter().map(|r| r.id.clone()).collect();
        let masses = recs.iter().map(|r| r.precursor_mass).collect();
        return Ok((ids, masses, recs.into_iter().map(|r| r.hv).collect()));
    }
    let load = read_mgf(path)?;
    let (spectra, _) = preprocess_all(&load.spectra, &cfg.preprocess)?;
    if spectra.is_empty() {
        return Err(Error::Format(format!("{}: every query was rejected", path.display())));
    }
    let encoder = Encoder::new(cfg.encoder.clone(), cfg.binning.num_bins())?;
    let (hvs, _) = encode_spectra(&spectra, &encoder, &cfg.binning, None)?;
    Ok((
        spectra.iter().map(|s| s.id.clone()).collect(),
        spectra.iter().map(|s| s.precursor_mass).collect(),
        hvs,
    ))
}

/// Search against a reference store. Decoys must already be in the store.
fn search_store(args: &SearchArgs, cfg: &PipelineConfig, quiet: bool) -> Result<()> {
    if cfg.hardware != Hardware::Bypass {
        return Err(Error::Config(
            "hardware simulation needs MGF inputs for queries and references".into(),
        ));
    }
    let (dim, recs) = read_store(&args.references).map_err(|e| e.in_stage("ingest"))?;
    if !recs.iter().any(|r| r.is_decoy) {
        log::warn!("reference store holds no decoys; the FDR filter will accept every match");
    }
    let entries = recs
        .into_iter()
        .map(|r| ReferenceEntry {
            id: r.id,
            precursor_mass: r.precursor_mass,
            is_decoy: r.is_decoy,
            peptide: r.peptide,
            hv: r.hv,
        })
        .collect();
    let index = ReferenceIndex::build(dim, entries).map_err(|e| e.in_stage("ingest"))?;
    let (ids, masses, hvs) = load_queries(
        &args.queries,
        &PipelineConfig {
            encoder: hdoms::EncoderConfig {
                dim,
                ..cfg.encoder.clone()
            },
            ..cfg.clone()
        },
    )
    .map_err(|e| e.in_stage("encode"))?;
    let results = search_queries(&hvs, &masses, &index, &cfg.search, None).map_err(|e| e.in_stage("search"))?;
    let fdr = fdr_filter(&best_matches(&results), cfg.fdr_threshold).map_err(|e| e.in_stage("fdr"))?;
    write_results_csv(create(&args.out)?, &ids, &index, &results)?;
    let accepted: Vec<Identification> = fdr
        .accepted
        .iter()
        .map(|m| Identification {
            query_id: ids[m.query as usize].clone(),
            reference_id: index.id(m.reference).to_string(),
            peptide: index.peptide(m.reference).map(str::to_string),
            similarity: m.similarity,
        })
        .collect();
    if let Some(p) = &args.peptides {
        write_identifications(create(p)?, &accepted)?;
    }
    let report = RunReport {
        success: true,
        hardware: "bypass",
        fdr: Some(FdrSummary {
            threshold: cfg.fdr_threshold,
            score_threshold: fdr.score_threshold,
            targets_above: fdr.targets_above,
            decoys_above: fdr.decoys_above,
            achieved_fdr: fdr.achieved_fdr,
        }),
        accepted,
        ..RunReport::default()
    };
    write_report(&report, args.report.as_deref(), quiet)
}

fn cmd_search(args: &SearchArgs, cfg: &PipelineConfig, quiet: bool) -> Result<()> {
    if is_store(&args.references) {
        return search_store(args, cfg, quiet);
    }
    if is_store(&args.queries) {
        return Err(Error::Config("a query store needs a reference store".into()));
    }
    match run_pipeline(&args.queries, &args.references, cfg) {
        Ok(out) => {
            out.write_results(create(&args.out)?)?;
            if let Some(p) = &args.peptides {
                out.write_peptides(create(p)?)?;
            }
            log::info!("{} identifications accepted", out.report.accepted.len());
            write_report(&out.report, args.report.as_deref(), quiet)
        }
        Err(failure) => {
            write_report(&failure.report, args.report.as_deref(), quiet)?;
            Err(failure.error)
        }
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let spec = SweepSpec::load(&args.spec)?;
    let mut out = create(&args.out)?;
    let n = run_sweep(&spec, &mut out)?;
    out.flush().map_err(|e| Error::Format(format!("{}: {e}", args.out.display())))?;
    log::info!("{n} rows written to {}", args.out.display());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, seed: Option<u64>) -> Result<()> {
    let mut base = RramConfig::default();
    if let Some(p) = &args.noise {
        base.noise = NoiseModel::load(p)?;
    }
    if let Some(b) = args.adc_bits {
        base.adc_bits = b;
    }
    let seeds = if args.seeds.is_empty() {
        vec![seed.unwrap_or(0)]
    } else {
        args.seeds.clone()
    };
    if args.cell_bits.is_empty() || args.time_buckets.is_empty() || args.rows.is_empty() {
        return Err(Error::Config("grid axes must not be empty".into()));
    }
    let grid = RramGrid {
        cell_bits: &args.cell_bits,
        time_buckets: &args.time_buckets,
        rows: &args.rows,
        seeds: &seeds,
        dim: args.dim,
        trials: args.trials,
    };
    let rows = rram_grid(&base, &grid)?;
    write_csv(create(&args.out)?, &rows)
}

fn cmd_decoys(args: &DecoyArgs, cfg: &PipelineConfig) -> Result<()> {
    let load = read_mgf(&args.input)?;
    let targets: Vec<Spectrum> = load.spectra.into_iter().filter(|s| !s.is_decoy).collect();
    let decoys = generate_decoys(&targets, &cfg.decoy_generator())?;
    let mut out = create(&args.out)?;
    let io = |e: std::io::Error| Error::Format(format!("{}: {e}", args.out.display()));
    if args.with_targets {
        write_mgf(&mut out, &targets).map_err(io)?;
    }
    write_mgf(&mut out, &decoys).map_err(io)?;
    out.flush().map_err(io)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let flags = Overrides {
        seed: cli.seed,
        window: cli.window,
        k: cli.k,
        fdr: cli.fdr,
    };
    if cli.config.is_some() && matches!(cli.command, Command::Sweep(_) | Command::Simulate(_)) {
        return Err(Error::Config("--config does not apply to sweep or simulate".into()));
    }
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args, cli.seed),
        Command::Encode(args) => cmd_encode(args, &config::load(cli.config.as_deref(), &flags)?, cli.quiet),
        Command::Search(args) => cmd_search(args, &config::load(cli.config.as_deref(), &flags)?, cli.quiet),
        Command::Decoys(args) => cmd_decoys(args, &config::load(cli.config.as_deref(), &flags)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.stage().is_some() { 2 } else { 1 })
        }
    }
}
