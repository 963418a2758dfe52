//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. A substring argument runs the matching criteria only.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hdoms::experiments::{encode_bench, evaluate, generate, prepare, SyntheticBenchSpec};
use hdoms::hd::EncoderConfig;
use hdoms::pipeline::{fdr_filter, q_values};
use hdoms::search::{ReferenceEntry, ReferenceIndex, ScoredMatch, SearchConfig};
use hdoms::spectra::{bin, preprocess, write_mgf};
use hdoms::xbar::storage::{read_hypervector, store_hypervector};
use hdoms::xbar::{crossbar_dot, map_differential, measure_ber, CrossbarArray, CrossbarEncoder, CrossbarTile, RramConfig, TimeBucket};
use hdoms::{BinConfig, Encoder, Hypervector, PreprocessConfig};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_hv(rng: &mut impl RngCore, dim: usize) -> Hypervector {
    Hypervector::from_words(dim, (0..dim / 64).map(|_| rng.next_u64()).collect()).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

// ---------------------------------------------------------------- search

fn brute_force(refs: &[(Vec<i8>, f64, bool)], q: &[i8], qm: f64, window: f64, k: usize) -> Vec<(u32, i32, bool)> {
    let mut all: Vec<(u32, i32, bool)> = refs
        .iter()
        .enumerate()
        .filter(|(_, (_, m, _))| window.is_infinite() || (*m >= qm - window && *m <= qm + window))
        .map(|(i, (hv, _, d))| (i as u32, hv.iter().zip(q).map(|(&a, &b)| a as i32 * b as i32).sum(), *d))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

fn search_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EA5C4);
    let dims = [256usize, 1024, 2048];
    let mut queries = 0;
    for inst in 0..200 {
        let dim = dims[inst % 3];
        let n = rng.random_range(1..=10_000usize);
        // every third instance draws from a small pool, so ties are common
        let pool: Vec<Hypervector> = (0..if inst % 3 == 2 { 7 } else { 0 }).map(|_| random_hv(&mut rng, dim)).collect();
        let hvs: Vec<Hypervector> = (0..n)
            .map(|_| {
                if pool.is_empty() {
                    random_hv(&mut rng, dim)
                } else {
                    pool[rng.random_range(0..pool.len())].clone()
                }
            })
            .collect();
        let masses: Vec<f64> = (0..n).map(|_| (rng.random_range(50_000..60_000) as f64) / 100.0).collect();
        let decoy: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let bipolar: Vec<(Vec<i8>, f64, bool)> = hvs
            .iter()
            .zip(&masses)
            .zip(&decoy)
            .map(|((h, &m), &d)| (h.to_bipolar(), m, d))
            .collect();
        let entries = hvs
            .into_iter()
            .enumerate()
            .map(|(i, hv)| ReferenceEntry {
                id: format!("r{i}"),
                precursor_mass: masses[i],
                is_decoy: decoy[i],
                peptide: None,
                hv,
            })
            .collect();
        let index = ReferenceIndex::build(dim, entries).unwrap();
        for qi in 0..3 {
            let q = if pool.is_empty() || qi == 0 {
                random_hv(&mut rng, dim)
            } else {
                pool[rng.random_range(0..pool.len())].clone()
            };
            let qm = rng.random_range(490.0..610.0);
            let window = [f64::INFINITY, 20.0, 1.0, 0.05][rng.random_range(0..4)];
            let k = rng.random_range(1..=20);
            let got: Vec<(u32, i32, bool)> = index
                .search(qi, &q, qm, &SearchConfig { window, k })
                .unwrap()
                .iter()
                .map(|m| (m.reference, m.similarity, m.is_decoy))
                .collect();
            let want = brute_force(&bipolar, &q.to_bipolar(), qm, window, k);
            if got != want {
                return verdict(
                    false,
                    format!("instance {inst} query {qi} (D={dim}, n={n}, window={window}, k={k}) differs"),
                );
            }
            queries += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        secs < 60.0,
        format!("200 instances, {queries} queries identical to brute force, {secs:.1} s (limit 60 s)"),
    )
}

// ---------------------------------------------------------------- crossbar

fn crossbar_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC805);
    let mut worst = 0f64;
    for n in 1..=3u8 {
        let cfg = RramConfig {
            bits_per_cell: n,
            g_max: 150e-6,
            v_ref: 0.3,
            v_pulse: 0.2,
            ..RramConfig::ideal()
        };
        for pair in 0..1000u64 {
            let dim = [64usize, 256, 1024][pair as usize % 3];
            let a = random_hv(&mut rng, dim);
            let b = random_hv(&mut rng, dim);
            let (ab, bb) = (a.to_bipolar(), b.to_bipolar());
            let exact: i64 = ab.iter().zip(&bb).map(|(&x, &y)| x as i64 * y as i64).sum();
            let out = crossbar_dot(&a, &b, &cfg, pair).unwrap();
            // each sensing cycle covers the next `active_rows` rows
            let mut row = 0;
            for s in &out.sensed {
                let n_rows = s.active_rows;
                let partial: i64 = (row..row + n_rows).map(|r| ab[r] as i64 * bb[r] as i64).sum();
                let expected = cfg.v_ref + cfg.v_pulse * partial as f64 / n_rows as f64;
                worst = worst.max((s.voltages[0] - expected).abs());
                row += n_rows;
            }
            worst = worst.max((out.mac[0] - exact as f64).abs());
            if row != dim || out.rounded()[0] != exact || worst > 1e-10 {
                return verdict(
                    false,
                    format!("n={n} pair {pair}: dot {exact}, decoded {}, analog error {worst:e}", out.mac[0]),
                );
            }
        }
    }
    verdict(
        true,
        format!("3000 pairs exact after decode, max analog error {worst:.1e} (limit 1e-10)"),
    )
}

fn differential_identities() -> Verdict {
    let mut worst = 0f64;
    for (w_max, g_max) in [(1.0, 1.0), (4.0, 100e-6), (7.0, 2.5)] {
        for (w, want) in [(w_max, (g_max, 0.0)), (-w_max, (0.0, g_max)), (0.0, (g_max / 2.0, g_max / 2.0))] {
            let (p, m) = map_differential(w, w_max, g_max).unwrap();
            worst = worst.max((p - want.0).abs()).max((m - want.1).abs());
        }
    }
    let endpoints_ok = worst <= 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1FF);
    let mut sum_err = 0f64;
    let mut pairs = 0;
    for _ in 0..20 {
        let (rows, cols, w_max, g_max) = (64, 32, 4.0, rng.random_range(0.1..10.0));
        let w: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-w_max..=w_max)).collect();
        let tile = CrossbarTile::differential(rows, cols, &w, w_max, g_max).unwrap();
        for r in 0..rows {
            for c in 0..cols {
                let (p, m) = tile.pair(r, c);
                sum_err = sum_err.max((p + m - g_max).abs() / g_max);
                pairs += 1;
            }
        }
    }
    // programmed through a full array with noise-free cells
    let cfg = RramConfig::ideal();
    let w: Vec<f64> = (0..300 * 40).map(|_| rng.random_range(-3.0..=3.0)).collect();
    let mut array = CrossbarArray::new(300, 40, &w, 3.0, &cfg).unwrap();
    array.program(&cfg).unwrap();
    for tile in array.tiles() {
        for r in 0..tile.logical_rows() {
            for c in 0..tile.cols() {
                let (p, m) = tile.pair(r, c);
                sum_err = sum_err.max((p + m - cfg.g_max).abs());
                pairs += 1;
            }
        }
    }
    verdict(
        endpoints_ok && sum_err <= 1e-12,
        format!("endpoint/midpoint error {worst:.1e}, max |g+ + g- - g_max| {sum_err:.1e} over {pairs} pairs (limit 1e-12)"),
    )
}

fn storage_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5704);
    let dim = 1024;
    for n in 1..=3u8 {
        for i in 0..10_000 {
            let h = random_hv(&mut rng, dim);
            let back = read_hypervector(&store_hypervector(&h, n, 1.0).unwrap(), n, dim, 1.0).unwrap();
            if back != h {
                return verdict(false, format!("n={n}: hypervector {i} not recovered"));
            }
        }
    }
    let mut table = Vec::new();
    for n in 1..=3u8 {
        let row: Vec<f64> = TimeBucket::ALL
            .iter()
            .map(|&time_bucket| {
                let cfg = RramConfig {
                    bits_per_cell: n,
                    time_bucket,
                    ..RramConfig::default()
                };
                measure_ber(&cfg, dim, 2000).unwrap().ber()
            })
            .collect();
        table.push(row);
    }
    let by_levels = (0..4).all(|t| table[0][t] < table[1][t] && table[1][t] < table[2][t]);
    let by_time = table.iter().all(|row| row.windows(2).all(|w| w[0] <= w[1]));
    let text: Vec<String> = table
        .iter()
        .enumerate()
        .map(|(i, r)| {
            format!(
                "n={}: {}",
                i + 1,
                r.iter().map(|b| format!("{b:.2e}")).collect::<Vec<_>>().join("/")
            )
        })
        .collect();
    verdict(
        by_levels && by_time,
        format!("3x10^4 noiseless round trips exact; BER t0/30min/60min/1day {}", text.join(", ")),
    )
}

// ---------------------------------------------------------------- desk-scale benchmark

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Default)]
struct DeskScale {
    clean3: Vec<f64>,
    ber10_3: Vec<f64>,
    ber10_1: Vec<f64>,
    chunked_clean: Vec<f64>,
    /// retrieval at 5% BER for D = 512, 2048, 8192
    dim_sweep: [Vec<f64>; 3],
    accepted_clean: Vec<usize>,
    accepted_ber10: Vec<usize>,
    robustness_time: Duration,
}

fn desk_scale() -> &'static DeskScale {
    static CELL: OnceLock<DeskScale> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = SyntheticBenchSpec::default();
        let search = SearchConfig::default();
        let mut out = DeskScale::default();
        for seed in SEEDS {
            let t = Instant::now();
            let data = generate(&spec, seed).unwrap();
            let bench = prepare(&data, &PreprocessConfig::default(), &BinConfig::default(), seed).unwrap();
            drop(data);
            let cfg = |dim: usize, id_bits: u8, chunked: bool| EncoderConfig {
                dim,
                id_bits,
                chunked,
                chunk_count: 64,
                seed,
                ..EncoderConfig::default()
            };
            let enc = encode_bench(&bench, &cfg(8192, 3, false)).unwrap();
            let clean = evaluate(&bench, &enc, 0.0, seed, &search, 0.01).unwrap();
            let noisy = evaluate(&bench, &enc, 0.1, seed, &search, 0.01).unwrap();
            out.robustness_time += t.elapsed();
            out.clean3.push(clean.retrieval_rate);
            out.ber10_3.push(noisy.retrieval_rate);
            out.accepted_clean.push(clean.accepted_count);
            out.accepted_ber10.push(noisy.accepted_count);
            out.dim_sweep[2].push(evaluate(&bench, &enc, 0.05, seed, &search, 0.01).unwrap().retrieval_rate);
            drop(enc);

            let enc = encode_bench(&bench, &cfg(8192, 1, false)).unwrap();
            out.ber10_1
                .push(evaluate(&bench, &enc, 0.1, seed, &search, 0.01).unwrap().retrieval_rate);
            drop(enc);

            let enc = encode_bench(&bench, &cfg(8192, 3, true)).unwrap();
            out.chunked_clean
                .push(evaluate(&bench, &enc, 0.0, seed, &search, 0.01).unwrap().retrieval_rate);
            drop(enc);

            for (slot, dim) in [(0, 512), (1, 2048)] {
                let enc = encode_bench(&bench, &cfg(dim, 3, false)).unwrap();
                out.dim_sweep[slot].push(evaluate(&bench, &enc, 0.05, seed, &search, 0.01).unwrap().retrieval_rate);
            }
            eprintln!("  desk-scale seed {seed} done in {:.0} s", t.elapsed().as_secs_f64());
        }
        out
    })
}

fn robustness() -> Verdict {
    let d = desk_scale();
    let (clean, noisy) = (mean(&d.clean3), mean(&d.ber10_3));
    let secs = d.robustness_time.as_secs_f64();
    let acc_clean = d.accepted_clean.iter().sum::<usize>() as f64 / 5.0;
    let acc_noisy = d.accepted_ber10.iter().sum::<usize>() as f64 / 5.0;
    verdict(
        noisy >= 0.9 * clean && secs < 900.0,
        format!(
            "100k targets + decoys, 1k queries, D=8192, 3-bit IDs: retrieval clean {clean:.4}, 10% BER {noisy:.4} (ratio {:.4}, limit 0.9); accepted {acc_clean:.1} -> {acc_noisy:.1}; {secs:.0} s (limit 900 s)",
            noisy / clean
        ),
    )
}

fn multi_bit_benefit() -> Verdict {
    let d = desk_scale();
    let (three, one) = (mean(&d.ber10_3), mean(&d.ber10_1));
    verdict(
        three >= one,
        format!("10% BER, D=8192: 3-bit {three:.4} vs 1-bit {one:.4}, margin {:+.4}", three - one),
    )
}

fn dimension_trend() -> Verdict {
    let d = desk_scale();
    let m: Vec<f64> = d.dim_sweep.iter().map(|v| mean(v)).collect();
    verdict(
        m[0] <= m[1] && m[1] <= m[2],
        format!("5% BER: D=512 {:.4}, D=2048 {:.4}, D=8192 {:.4}", m[0], m[1], m[2]),
    )
}

fn chunked_equivalence() -> Verdict {
    let d = desk_scale();
    let diff = (mean(&d.chunked_clean) - mean(&d.clean3)).abs() * 100.0;

    // cycle count of in-memory encoding, same spectrum, naive vs chunked
    let spectrum = generate(
        &SyntheticBenchSpec {
            library_size: 1,
            query_count: 1,
            ..SyntheticBenchSpec::default()
        },
        0,
    )
    .unwrap()
    .library
    .remove(0);
    let binning = BinConfig::default();
    let v = bin(&preprocess(&spectrum, &PreprocessConfig::default()).unwrap(), &binning);
    let mut cycles = [0usize; 2];
    let mut hvs = Vec::new();
    for (i, chunked) in [false, true].into_iter().enumerate() {
        let cfg = EncoderConfig {
            chunked,
            chunk_count: 64,
            ..EncoderConfig::default()
        };
        let encoder = Encoder::new(cfg, binning.num_bins()).unwrap();
        let xe = CrossbarEncoder::new(&encoder, RramConfig::ideal()).unwrap();
        let (hv, c) = xe.encode(&v).unwrap();
        if hv != encoder.encode(&v).unwrap() {
            return verdict(false, format!("crossbar encoding (chunked={chunked}) differs from digital"));
        }
        cycles[i] = c;
        hvs.push(hv);
    }
    let ratio_exact = cycles[0] * 64 == cycles[1] * 8192;
    verdict(
        diff < 2.0 && ratio_exact,
        format!(
            "retrieval chunked {:.4} vs unchunked {:.4}, difference {diff:.2} pp (limit 2); cycles {} / {} = {} (D/chunks = 128)",
            mean(&d.chunked_clean),
            mean(&d.clean3),
            cycles[0],
            cycles[1],
            cycles[0] as f64 / cycles[1] as f64
        ),
    )
}

// ---------------------------------------------------------------- FDR

fn fdr_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFD12);
    let thresholds = [0.001, 0.01, 0.05, 0.1, 0.2, 0.34, 0.5, 0.9];
    for mix in 0..100 {
        let n = rng.random_range(1..300);
        let decoy_share = rng.random_range(0.0..0.8);
        let spread = rng.random_range(3..200);
        let matches: Vec<ScoredMatch> = (0..n)
            .map(|i| {
                let is_decoy = rng.random_bool(decoy_share);
                let base = if is_decoy { 0 } else { rng.random_range(0..spread) };
                ScoredMatch {
                    query: i as u32,
                    reference: i as u32,
                    similarity: base + rng.random_range(0..spread),
                    is_decoy,
                }
            })
            .collect();
        let q = q_values(&matches);
        let mut previous: Option<(Option<i32>, Vec<u32>, f64)> = None;
        for &t in &thresholds {
            let r = fdr_filter(&matches, t).unwrap();
            // exhaustive scan over every possible cut
            let mut cuts: Vec<i32> = matches.iter().map(|m| m.similarity).collect();
            cuts.sort_unstable();
            cuts.dedup();
            let chosen = cuts.iter().copied().find(|&s| {
                let targets = matches.iter().filter(|m| !m.is_decoy && m.similarity >= s).count();
                let decoys = matches.iter().filter(|m| m.is_decoy && m.similarity >= s).count();
                targets > 0 && decoys as f64 / targets.max(1) as f64 <= t
            });
            let want: Vec<u32> = match chosen {
                Some(s) => matches
                    .iter()
                    .filter(|m| !m.is_decoy && m.similarity >= s)
                    .map(|m| m.query)
                    .collect(),
                None => Vec::new(),
            };
            let got: Vec<u32> = r.accepted.iter().map(|m| m.query).collect();
            if r.score_threshold != chosen || got != want || r.achieved_fdr > t {
                return verdict(
                    false,
                    format!("mixture {mix}, threshold {t}: filter {:?} vs scan {chosen:?}", r.score_threshold),
                );
            }
            let via_q: Vec<u32> = matches
                .iter()
                .zip(&q)
                .filter(|(m, &q)| !m.is_decoy && q <= t)
                .map(|(m, _)| m.query)
                .collect();
            if via_q != got {
                return verdict(false, format!("mixture {mix}, threshold {t}: q-values disagree with the filter"));
            }
            if let Some((prev_s, prev_acc, prev_fdr)) = &previous {
                let nested = prev_acc.iter().all(|a| got.contains(a));
                let cut_ok = match (prev_s, r.score_threshold) {
                    (Some(a), Some(b)) => b <= *a && (b == *a || r.achieved_fdr >= *prev_fdr),
                    (Some(_), None) => false,
                    _ => true,
                };
                if !nested || !cut_ok {
                    return verdict(false, format!("mixture {mix}: monotonicity broken at threshold {t}"));
                }
            }
            previous = Some((r.score_threshold, got, r.achieved_fdr));
        }
    }
    verdict(
        true,
        format!(
            "100 mixtures x {} thresholds agree with the exhaustive scan; nesting and FDR monotonicity hold",
            thresholds.len()
        ),
    )
}

// ---------------------------------------------------------------- determinism

fn hdoms(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hdoms"))
        .args(args)
        .arg("--quiet")
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("hdoms {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = generate(
        &SyntheticBenchSpec {
            library_size: 400,
            query_count: 60,
            ..SyntheticBenchSpec::default()
        },
        7,
    )
    .unwrap();
    let mut lib = Vec::new();
    write_mgf(&mut lib, &data.library).unwrap();
    std::fs::write(d.join("lib.mgf"), lib).unwrap();
    let mut qs = Vec::new();
    write_mgf(&mut qs, &data.queries).unwrap();
    std::fs::write(d.join("q.mgf"), qs).unwrap();
    std::fs::write(d.join("cfg.toml"), "[encoder]\ndim = 1024\n").unwrap();
    std::fs::write(
        d.join("sim.toml"),
        "[encoder]\ndim = 512\n[hardware.simulate]\nbits_per_cell = 2\nmax_active_rows = 32\n",
    )
    .unwrap();
    std::fs::write(
        d.join("sweep.toml"),
        "kind = \"robustness\"\nseeds = [0, 1, 2]\ndims = [256]\nbers = [0.0, 0.1]\nid_bits = [1, 3]\n[dataset.synthetic]\nlibrary_size = 300\nquery_count = 40\n",
    )
    .unwrap();

    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec!["-c", "cfg.toml", "encode", "lib.mgf", "--decoys", "-o", "{}lib.hdv"],
            vec!["lib.hdv"],
        ),
        (vec!["-c", "cfg.toml", "encode", "q.mgf", "-o", "{}q.hdv"], vec!["q.hdv"]),
        (
            vec![
                "-c", "cfg.toml", "search", "--queries", "q.mgf", "--references", "lib.mgf", "-o", "{}res.csv", "--peptides", "{}pep.csv",
            ],
            vec!["res.csv", "pep.csv"],
        ),
        (
            vec![
                "-c", "cfg.toml", "-k", "3", "search", "--queries", "{}q.hdv", "--references", "{}lib.hdv", "-o", "{}store_res.csv",
            ],
            vec!["store_res.csv"],
        ),
        (
            vec![
                "-c", "sim.toml", "search", "--queries", "q.mgf", "--references", "lib.mgf", "-o", "{}sim_res.csv",
            ],
            vec!["sim_res.csv"],
        ),
        (vec!["sweep", "sweep.toml", "-o", "{}sweep.csv"], vec!["sweep.csv"]),
        (
            vec!["simulate", "--seeds", "0,1,2", "--dim", "256", "--trials", "20", "-o", "{}sim.csv"],
            vec!["sim.csv"],
        ),
        (vec!["--seed", "3", "decoys", "lib.mgf", "-o", "{}decoys.mgf"], vec!["decoys.mgf"]),
    ];
    let mut checked = 0;
    for threads in ["1", "3"] {
        let prefix = format!("t{threads}_");
        for (args, _) in &commands {
            let args: Vec<String> = args.iter().map(|a| a.replace("{}", &prefix)).collect();
            let mut full = vec!["--threads", threads];
            full.extend(args.iter().map(String::as_str));
            if let Err(e) = hdoms(&full, d) {
                return verdict(false, e);
            }
        }
    }
    // a repeat with the same thread count as well
    if let Err(e) = hdoms(
        &[
            "-c", "cfg.toml", "search", "--queries", "q.mgf", "--references", "lib.mgf", "-o", "again.csv",
        ],
        d,
    ) {
        return verdict(false, e);
    }
    for (_, outputs) in &commands {
        for o in outputs {
            let a = std::fs::read(d.join(format!("t1_{o}"))).unwrap();
            let b = std::fs::read(d.join(format!("t3_{o}"))).unwrap();
            if a != b || a.is_empty() {
                return verdict(false, format!("{o} differs between --threads 1 and --threads 3"));
            }
            checked += 1;
        }
    }
    if std::fs::read(d.join("again.csv")).unwrap() != std::fs::read(d.join("t1_res.csv")).unwrap() {
        return verdict(false, "repeated search differs");
    }
    verdict(
        true,
        format!("{checked} outputs of encode/search/sweep/simulate/decoys byte-identical across reruns and thread counts"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 10] = [
        ("search oracle", search_oracle),
        ("crossbar oracle", crossbar_oracle),
        ("differential mapping identities", differential_identities),
        ("storage round trip and BER ordering", storage_round_trip),
        ("robustness at 10% BER", robustness),
        ("multi-bit ID benefit", multi_bit_benefit),
        ("dimension trend", dimension_trend),
        ("chunked level equivalence", chunked_equivalence),
        ("FDR filter oracle", fdr_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, run) in criteria {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        ran += 1;
        failed += !v.pass as usize;
        println!(
            "{} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("\n{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
