//! Single crossbar tile: programming, differential weights and
//! open-circuit voltage sensing.

use rand::Rng;
use rand_distr::StandardNormal;

use super::RramConfig;
use crate::error::{Error, Result};

/// Splits a signed weight over a differential pair:
/// `g+ = (1 + W/W_max) g_max / 2`, `g- = (1 - W/W_max) g_max / 2`.
pub fn map_differential(w: f64, w_max: f64, g_max: f64) -> Result<(f64, f64)> {
    if !(w_max > 0.0) || !(w.abs() <= w_max) {
        return Err(Error::Domain(format!("weight {w} outside [-{w_max}, {w_max}]")));
    }
    let r = w / w_max;
    Ok((0.5 * (1.0 + r) * g_max, 0.5 * (1.0 - r) * g_max))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TileMode {
    /// Row pairs `(2i, 2i+1)` hold `g+` and `g-` of logical row `i`.
    Differential,
    /// One cell per value.
    Direct,
}

/// Conductance matrix of one array tile, row-major over physical rows.
#[derive(Clone, Debug)]
pub struct CrossbarTile {
    rows: usize,
    cols: usize,
    g_max: f64,
    g: Vec<f64>,
    targets: Vec<f64>,
    mode: TileMode,
}

/// Sense-line voltages of one cycle, plus ADC codes when the ADC is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseOutput {
    pub voltages: Vec<f64>,
    pub codes: Option<Vec<u32>>,
    /// Rows driven in this cycle, `N` in the sensing equation.
    pub active_rows: usize,
}

impl CrossbarTile {
    /// Tile with targets given per physical cell.
    pub fn direct(rows: usize, cols: usize, targets: Vec<f64>, g_max: f64) -> Result<Self> {
        if targets.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: targets.len(),
            });
        }
        if let Some(t) = targets.iter().find(|t| !(0.0..=g_max).contains(*t)) {
            return Err(Error::Domain(format!("target conductance {t} outside [0, {g_max}]")));
        }
        Ok(CrossbarTile {
            rows,
            cols,
            g_max,
            g: targets.clone(),
            targets,
            mode: TileMode::Direct,
        })
    }

    /// Differential tile for a `logical_rows x cols` weight matrix.
    pub fn differential(logical_rows: usize, cols: usize, weights: &[f64], w_max: f64, g_max: f64) -> Result<Self> {
        if weights.len() != logical_rows * cols {
            return Err(Error::DimensionMismatch {
                expected: logical_rows * cols,
                found: weights.len(),
            });
        }
        let rows = 2 * logical_rows;
        let mut targets = vec![0.0; rows * cols];
        for r in 0..logical_rows {
            for c in 0..cols {
                let (gp, gm) = map_differential(weights[r * cols + c], w_max, g_max)?;
                targets[2 * r * cols + c] = gp;
                targets[(2 * r + 1) * cols + c] = gm;
            }
        }
        Ok(CrossbarTile {
            rows,
            cols,
            g_max,
            g: targets.clone(),
            targets,
            mode: TileMode::Differential,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn logical_rows(&self) -> usize {
        match self.mode {
            TileMode::Differential => self.rows / 2,
            TileMode::Direct => self.rows,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> TileMode {
        self.mode
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn conductances(&self) -> &[f64] {
        &self.g
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.g[row * self.cols + col]
    }

    /// `(g+, g-)` of a logical row in a differential tile.
    pub fn pair(&self, logical_row: usize, col: usize) -> (f64, f64) {
        debug_assert_eq!(self.mode, TileMode::Differential);
        (self.cell(2 * logical_row, col), self.cell(2 * logical_row + 1, col))
    }

    /// Re-programs every cell: `g = clip(target + N(0, sigma * g_max), 0, g_max)`.
    pub fn program(&mut self, sigma: f64, rng: &mut impl Rng) {
        perturb(&mut self.g, &self.targets, sigma, self.g_max, rng);
    }

    /// One sensing cycle over logical rows `first .. first + x.len()`.
    ///
    /// Steady state: `V_SL = V_ref + V_pulse * sum_i x_i (g+_i - g-_i) / (N g_max)`
    /// with `N = x.len()` driven rows. Inputs must be -1, 0 or +1.
    pub fn mvm_sense(&self, first: usize, x: &[i8], cfg: &RramConfig) -> Result<SenseOutput> {
        self.sense_columns(first, x, 0..self.cols, cfg)
    }

    /// As [`mvm_sense`](Self::mvm_sense) but only evaluates `columns`.
    pub fn sense_columns(&self, first: usize, x: &[i8], columns: std::ops::Range<usize>, cfg: &RramConfig) -> Result<SenseOutput> {
        if self.mode != TileMode::Differential {
            return Err(Error::Config("sensing needs a differential tile".into()));
        }
        let n = x.len();
        if n > cfg.max_active_rows {
            return Err(Error::RowLimitExceeded {
                requested: n,
                limit: cfg.max_active_rows,
            });
        }
        if n == 0 || first + n > self.logical_rows() || columns.end > self.cols {
            return Err(Error::Domain(format!(
                "rows {first}..{} / columns {columns:?} outside a {}x{} tile",
                first + n,
                self.logical_rows(),
                self.cols
            )));
        }
        if let Some(v) = x.iter().find(|v| v.abs() > 1) {
            return Err(Error::Domain(format!("input pulse {v} is not -1, 0 or +1")));
        }

        let mut voltages = Vec::with_capacity(columns.len());
        for c in columns {
            let mut diff = 0.0;
            let mut total = 0.0;
            for (i, &xi) in x.iter().enumerate() {
                let (gp, gm) = self.pair(first + i, c);
                diff += xi as f64 * (gp - gm);
                total += gp + gm;
            }
            voltages.push(line_voltage(diff, total, n, self.g_max, cfg));
        }
        let codes = (cfg.adc_bits > 0).then(|| voltages.iter().map(|&v| adc_code(v, cfg)).collect());
        Ok(SenseOutput {
            voltages,
            codes,
            active_rows: n,
        })
    }
}

/// Sense-line voltage for a column with `diff = sum x_i (g+_i - g-_i)` and
/// `total = sum (g+_i + g-_i)` over `n` driven rows.
pub fn line_voltage(diff: f64, total: f64, n: usize, g_max: f64, cfg: &RramConfig) -> f64 {
    let mut swing = diff / (n as f64 * g_max) * cfg.v_pulse;
    if let Some(t) = cfg.settle_time {
        swing *= 1.0 - (-t * total / cfg.capacitance).exp();
    }
    cfg.v_ref + swing
}

/// Uniform mid-rise ADC over `[V_ref - V_pulse, V_ref + V_pulse]`.
pub fn adc_code(v: f64, cfg: &RramConfig) -> u32 {
    let levels = 1u64 << cfg.adc_bits;
    let lo = cfg.v_ref - cfg.v_pulse;
    let pos = ((v - lo) / (2.0 * cfg.v_pulse) * levels as f64).floor();
    pos.clamp(0.0, (levels - 1) as f64) as u32
}

/// Centre voltage of an ADC code.
pub fn adc_voltage(code: u32, cfg: &RramConfig) -> f64 {
    let step = 2.0 * cfg.v_pulse / (1u64 << cfg.adc_bits) as f64;
    cfg.v_ref - cfg.v_pulse + (code as f64 + 0.5) * step
}

/// Passes a voltage through the ADC, or returns it unchanged when the ADC is ideal.
pub fn digitize(v: f64, cfg: &RramConfig) -> f64 {
    if cfg.adc_bits == 0 {
        v
    } else {
        adc_voltage(adc_code(v, cfg), cfg)
    }
}

/// Inverts the sensing equation: `MAC = (V - V_ref) / V_pulse * N * W_max`.
pub fn decode_voltage(v: f64, n: usize, w_max: f64, cfg: &RramConfig) -> f64 {
    (v - cfg.v_ref) / cfg.v_pulse * n as f64 * w_max
}

/// Re-samples conductances: `g = clip(target + N(0, sigma * g_max), 0, g_max)`.
pub fn perturb(g: &mut [f64], targets: &[f64], sigma: f64, g_max: f64, rng: &mut impl Rng) {
    let scale = sigma * g_max;
    for (g, &t) in g.iter_mut().zip(targets) {
        *g = if scale > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            (t + scale * z).clamp(0.0, g_max)
        } else {
            t
        };
    }
}

impl SenseOutput {
    /// Read-out voltages after the ADC (the analog values when it is ideal).
    pub fn read_voltages(&self, cfg: &RramConfig) -> Vec<f64> {
        match &self.codes {
            Some(codes) => codes.iter().map(|&c| adc_voltage(c, cfg)).collect(),
            None => self.voltages.clone(),
        }
    }

    /// Decoded MAC per column.
    pub fn decode_mac(&self, cfg: &RramConfig, w_max: f64) -> Vec<f64> {
        self.read_voltages(cfg)
            .into_iter()
            .map(|v| decode_voltage(v, self.active_rows, w_max, cfg))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ideal() -> RramConfig {
        RramConfig::ideal()
    }

    #[test]
    fn differential_endpoints() {
        assert_eq!(map_differential(1.0, 1.0, 1.0).unwrap(), (1.0, 0.0));
        assert_eq!(map_differential(0.0, 1.0, 1.0).unwrap(), (0.5, 0.5));
        let (p, m) = map_differential(-2.0, 4.0, 2.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12 && (m - 1.5).abs() < 1e-12);
        assert!(matches!(map_differential(1.5, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_input_reads_reference() {
        let tile = CrossbarTile::differential(4, 3, &[1.0; 12], 1.0, 1.0).unwrap();
        let cfg = RramConfig { v_ref: 0.3, ..ideal() };
        let out = tile.mvm_sense(0, &[0, 0, 0, 0], &cfg).unwrap();
        assert!(out.voltages.iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn single_row_full_swing() {
        let tile = CrossbarTile::differential(1, 1, &[1.0], 1.0, 1.0).unwrap();
        let cfg = RramConfig {
            v_ref: 0.2,
            v_pulse: 0.5,
            ..ideal()
        };
        let out = tile.mvm_sense(0, &[1], &cfg).unwrap();
        assert!((out.voltages[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn row_limit_and_bad_inputs() {
        let tile = CrossbarTile::differential(80, 1, &[1.0; 80], 1.0, 1.0).unwrap();
        let cfg = ideal();
        assert!(matches!(
            tile.mvm_sense(0, &[1; 65], &cfg),
            Err(Error::RowLimitExceeded { requested: 65, limit: 64 })
        ));
        assert!(matches!(tile.mvm_sense(0, &[2], &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn noiseless_program_is_exact_and_noise_is_clipped() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut tile = CrossbarTile::direct(10, 10, vec![0.0; 100], 1.0).unwrap();
        tile.program(0.0, &mut rng);
        assert_eq!(tile.conductances(), tile.targets());
        tile.program(0.3, &mut rng);
        assert!(tile.conductances().iter().all(|&g| (0.0..=1.0).contains(&g)));
    }

    #[test]
    fn programmed_noise_has_requested_spread() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut tile = CrossbarTile::direct(100, 200, vec![0.5; 20_000], 1.0).unwrap();
        let sigma = 0.05;
        tile.program(sigma, &mut rng);
        let g = tile.conductances();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (g.len() - 1) as f64;
        assert!((var.sqrt() - sigma).abs() < 0.1 * sigma, "std {}", var.sqrt());
    }

    #[test]
    fn pairs_sum_to_gmax() {
        let w: Vec<f64> = (0..64).map(|i| (i as f64 - 32.0) / 8.0).collect();
        let tile = CrossbarTile::differential(8, 8, &w, 4.0, 1.0).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let (p, m) = tile.pair(r, c);
                assert!((p + m - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adc_codes_are_monotone_and_bounded() {
        let cfg = RramConfig { adc_bits: 4, ..ideal() };
        let codes: Vec<u32> = (-20..=20).map(|i| adc_code(i as f64 / 10.0, &cfg)).collect();
        assert!(codes.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(codes[0], 0);
        assert_eq!(*codes.last().unwrap(), 15);
        assert!((adc_voltage(0, &cfg) - (-1.0 + 1.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn settling_scales_swing() {
        let tile = CrossbarTile::differential(1, 1, &[1.0], 1.0, 1.0).unwrap();
        let cfg = RramConfig {
            settle_time: Some(1.0),
            capacitance: 1.0,
            ..ideal()
        };
        let v = tile.mvm_sense(0, &[1], &cfg).unwrap().voltages[0];
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }
}
