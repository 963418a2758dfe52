use hdoms::experiments::{generate, SyntheticBenchSpec, SyntheticData};
use hdoms::hd::EncoderConfig;
use hdoms::pipeline::{generate_decoys, run_pipeline, run_spectra, Hardware, PipelineConfig};
use hdoms::spectra::{bin, preprocess, write_mgf};
use hdoms::xbar::{RramConfig, TimeBucket};
use hdoms::{BinConfig, Encoder, PreprocessConfig, SearchConfig, Spectrum};

fn small_data(seed: u64) -> SyntheticData {
    let spec = SyntheticBenchSpec {
        library_size: 300,
        query_count: 60,
        ..SyntheticBenchSpec::default()
    };
    generate(&spec, seed).unwrap()
}

fn small_config() -> PipelineConfig {
    PipelineConfig {
        encoder: EncoderConfig {
            dim: 1024,
            ..EncoderConfig::default()
        },
        search: SearchConfig {
            window: f64::INFINITY,
            k: 3,
        },
        ..PipelineConfig::default()
    }
}

fn write_files(dir: &std::path::Path, data: &SyntheticData) -> (std::path::PathBuf, std::path::PathBuf) {
    let (q, r) = (dir.join("q.mgf"), dir.join("r.mgf"));
    let mut buf = Vec::new();
    write_mgf(&mut buf, &data.queries).unwrap();
    std::fs::write(&q, buf).unwrap();
    let mut buf = Vec::new();
    write_mgf(&mut buf, &data.library).unwrap();
    std::fs::write(&r, buf).unwrap();
    (q, r)
}

fn csv_of(out: &hdoms::pipeline::PipelineOutput) -> (String, String) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    out.write_results(&mut a).unwrap();
    out.write_peptides(&mut b).unwrap();
    (String::from_utf8(a).unwrap(), String::from_utf8(b).unwrap())
}

#[test]
fn identifies_most_queries_and_reports_every_stage() {
    let data = small_data(1);
    let out = run_spectra(data.queries.clone(), data.library.clone(), &small_config()).unwrap();
    let stages: Vec<&str> = out.report.stages.iter().map(|s| s.stage).collect();
    assert_eq!(stages, ["ingest", "preprocess", "decoys", "encode", "search", "fdr"]);
    assert!(out.report.success);
    let correct = out
        .report
        .accepted
        .iter()
        .filter(|id| {
            let j: usize = id.query_id[1..].parse().unwrap();
            id.reference_id == format!("lib{}", data.truth[j].unwrap())
        })
        .count();
    assert!(correct as f64 >= 0.8 * data.queries.len() as f64, "{correct} correct");
    assert!(out.report.accepted.iter().all(|id| !id.reference_id.starts_with("DECOY_")));
}

#[test]
fn ideal_simulation_matches_bypass() {
    let data = small_data(2);
    let bypass = run_spectra(data.queries.clone(), data.library.clone(), &small_config()).unwrap();
    let cfg = PipelineConfig {
        hardware: Hardware::Simulate(RramConfig::ideal()),
        ..small_config()
    };
    let sim = run_spectra(data.queries.clone(), data.library.clone(), &cfg).unwrap();
    assert!(sim.report.stages.iter().any(|s| s.stage == "emulate"));
    assert!(sim.report.encode_cycles.unwrap() > 0);
    assert_eq!(csv_of(&bypass), csv_of(&sim));
}

#[test]
fn noisy_storage_degrades_no_better_than_clean() {
    let data = small_data(3);
    let score = |hardware| {
        let cfg = PipelineConfig {
            hardware,
            ..small_config()
        };
        run_spectra(data.queries.clone(), data.library.clone(), &cfg)
            .unwrap()
            .report
            .accepted
            .len()
    };
    let clean = score(Hardware::Bypass);
    let worst = score(Hardware::Simulate(RramConfig {
        bits_per_cell: 3,
        time_bucket: TimeBucket::Day1,
        adc_bits: 0,
        ..RramConfig::default()
    }));
    assert!(worst <= clean, "noisy {worst} > clean {clean}");
}

#[test]
fn file_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (q, r) = write_files(dir.path(), &small_data(4));
    let a = run_pipeline(&q, &r, &small_config()).unwrap();
    let b = run_pipeline(&q, &r, &small_config()).unwrap();
    assert_eq!(csv_of(&a), csv_of(&b));
    assert_eq!(a.report.inputs.len(), 2);
    assert_eq!(a.report.inputs[0].parsed, 60);
    let other = PipelineConfig {
        encoder: EncoderConfig {
            seed: 99,
            ..small_config().encoder
        },
        ..small_config()
    };
    assert_ne!(csv_of(&a).0, csv_of(&run_pipeline(&q, &r, &other).unwrap()).0);
}

#[test]
fn empty_query_file_fails_at_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let (_, r) = write_files(dir.path(), &small_data(5));
    let empty = dir.path().join("empty.mgf");
    std::fs::write(&empty, "").unwrap();
    let err = run_pipeline(&empty, &r, &small_config()).unwrap_err();
    assert_eq!(err.report.failed_stage, Some("ingest"));
    assert!(!err.report.success);
    assert!(err.to_string().contains("ingest"), "{err}");

    let missing = run_pipeline(dir.path().join("nope.mgf"), &r, &small_config()).unwrap_err();
    assert_eq!(missing.report.failed_stage, Some("ingest"));
}

#[test]
fn standard_window_excludes_modified_matches() {
    let data = small_data(6);
    let open = run_spectra(data.queries.clone(), data.library.clone(), &small_config()).unwrap();
    let cfg = PipelineConfig {
        search: SearchConfig { window: 0.05, k: 3 },
        ..small_config()
    };
    let narrow = run_spectra(data.queries.clone(), data.library.clone(), &cfg).unwrap();
    let masses: std::collections::HashMap<&str, f64> = data.library.iter().map(|s| (s.id.as_str(), s.precursor_mass)).collect();
    for id in &narrow.report.accepted {
        let j: usize = id.query_id[1..].parse().unwrap();
        assert!((data.queries[j].precursor_mass - masses[id.reference_id.as_str()]).abs() <= 0.05);
    }
    assert!(narrow.report.accepted.len() < open.report.accepted.len());
}

#[test]
fn decoys_are_nearly_orthogonal_to_their_targets() {
    let data = small_data(7);
    let pre = PreprocessConfig::default();
    let binning = BinConfig::default();
    let targets: Vec<Spectrum> = data.library.iter().take(100).map(|s| preprocess(s, &pre).unwrap()).collect();
    let cfg = PipelineConfig::default();
    let decoys = generate_decoys(&targets, &cfg.decoy_generator()).unwrap();
    let encoder = Encoder::new(EncoderConfig::default(), binning.num_bins()).unwrap();
    let mut total = 0.0;
    for (t, d) in targets.iter().zip(&decoys) {
        let a = encoder.encode(&bin(t, &binning)).unwrap();
        let b = encoder.encode(&bin(d, &binning)).unwrap();
        total += (a.dot(&b).unwrap() as f64 / a.dim() as f64).abs();
    }
    let mean = total / targets.len() as f64;
    assert!(mean < 0.1, "mean |cosine| {mean}");
}
