use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time elapsed between programming and reading a cell.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimeBucket {
    #[serde(rename = "t0")]
    T0,
    #[serde(rename = "30min")]
    Min30,
    #[serde(rename = "60min")]
    Min60,
    #[serde(rename = "1day")]
    Day1,
}

impl TimeBucket {
    pub const ALL: [TimeBucket; 4] = [TimeBucket::T0, TimeBucket::Min30, TimeBucket::Min60, TimeBucket::Day1];

    pub fn name(self) -> &'static str {
        match self {
            TimeBucket::T0 => "t0",
            TimeBucket::Min30 => "30min",
            TimeBucket::Min60 => "60min",
            TimeBucket::Day1 => "1day",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TimeBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TimeBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TimeBucket::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown time bucket `{s}` (expected t0, 30min, 60min or 1day)")))
    }
}

/// Per-cell Gaussian relaxation noise, indexed by levels per cell and time
/// bucket. Sigmas are fractions of `g_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    table: BTreeMap<u32, [f64; 4]>,
}

impl Default for NoiseModel {
    /// Calibration table for 2/4/8-level cells. Relaxation grows quickly
    /// after programming and then saturates.
    fn default() -> Self {
        NoiseModel::from_rows([
            (2, [0.040, 0.050, 0.055, 0.060]),
            (4, [0.045, 0.055, 0.060, 0.065]),
            (8, [0.050, 0.060, 0.065, 0.070]),
        ])
        .expect("default table is valid")
    }
}

impl NoiseModel {
    pub fn from_rows(rows: impl IntoIterator<Item = (u32, [f64; 4])>) -> Result<Self> {
        let table: BTreeMap<u32, [f64; 4]> = rows.into_iter().collect();
        for (levels, sigmas) in &table {
            if ![2, 4, 8].contains(levels) {
                return Err(Error::Config(format!("noise table: {levels} levels per cell is not 2, 4 or 8")));
            }
            if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::Config(format!("noise table: negative sigma for {levels} levels")));
            }
            if sigmas.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config(format!(
                    "noise table: sigma for {levels} levels must not decrease with time"
                )));
            }
        }
        Ok(NoiseModel { table })
    }

    /// Noise-free cells.
    pub fn noiseless() -> Self {
        NoiseModel::from_rows([(2, [0.0; 4]), (4, [0.0; 4]), (8, [0.0; 4])]).unwrap()
    }

    /// Same sigma for every level count and bucket.
    pub fn uniform(sigma: f64) -> Result<Self> {
        NoiseModel::from_rows([(2, [sigma; 4]), (4, [sigma; 4]), (8, [sigma; 4])])
    }

    pub fn sigma(&self, levels: u32, bucket: TimeBucket) -> Result<f64> {
        self.table
            .get(&levels)
            .map(|row| row[bucket.index()])
            .ok_or_else(|| Error::Config(format!("noise table has no entry for {levels} levels per cell")))
    }

    /// Parses the key-value noise file:
    ///
    /// ```text
    /// [levels.4]
    /// t0 = 0.045
    /// 30min = 0.055
    /// 60min = 0.060
    /// 1day = 0.065
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            levels: BTreeMap<String, BTreeMap<String, f64>>,
        }
        let file: File = toml::from_str(text).map_err(|e| Error::Config(format!("noise file: {e}")))?;
        let mut rows = Vec::new();
        for (levels, buckets) in file.levels {
            let levels: u32 = levels
                .parse()
                .map_err(|_| Error::Config(format!("noise file: `{levels}` is not a level count")))?;
            let mut row = [f64::NAN; 4];
            for (name, sigma) in buckets {
                row[name.parse::<TimeBucket>()?.index()] = sigma;
            }
            if let Some(i) = row.iter().position(|s| s.is_nan()) {
                return Err(Error::Config(format!(
                    "noise file: {levels} levels is missing bucket {}",
                    TimeBucket::ALL[i]
                )));
            }
            rows.push((levels, row));
        }
        NoiseModel::from_rows(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NoiseModel::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# relaxation sigma as a fraction of g_max\n");
        for (levels, row) in &self.table {
            out.push_str(&format!("\n[levels.{levels}]\n"));
            for b in TimeBucket::ALL {
                out.push_str(&format!("{} = {}\n", b.name(), row[b.index()]));
            }
        }
        out
    }
}

impl Serialize for NoiseModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.table.len()))?;
        for (levels, row) in &self.table {
            let named: BTreeMap<&str, f64> = TimeBucket::ALL.iter().map(|b| (b.name(), row[b.index()])).collect();
            map.serialize_entry(&levels.to_string(), &named)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NoiseModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, BTreeMap<String, f64>>::deserialize(d)?;
        let mut text = String::new();
        for (levels, buckets) in raw {
            text.push_str(&format!("[levels.{levels}]\n"));
            for (b, s) in buckets {
                text.push_str(&format!("\"{b}\" = {s}\n"));
            }
        }
        NoiseModel::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Crossbar and sensing parameters. Voltages and conductances are
/// normalized (`g_max = 1`, `v_pulse = 1`) unless overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RramConfig {
    /// Bits stored per cell, `n`; the cell has `2^n` levels.
    pub bits_per_cell: u8,
    pub g_max: f64,
    pub noise: NoiseModel,
    /// Read time after programming used for computation.
    pub time_bucket: TimeBucket,
    /// ADC resolution; 0 selects an ideal continuous read-out.
    pub adc_bits: u8,
    pub v_ref: f64,
    pub v_pulse: f64,
    /// Rows that may be driven in one sensing cycle, `N`.
    pub max_active_rows: usize,
    /// Sense-line capacitance, only used with `settle_time`.
    pub capacitance: f64,
    /// Finite integration time; `None` reads the steady state.
    pub settle_time: Option<f64>,
    /// Physical tile shape.
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub seed: u64,
}

impl Default for RramConfig {
    fn default() -> Self {
        RramConfig {
            bits_per_cell: 3,
            g_max: 1.0,
            noise: NoiseModel::default(),
            time_bucket: TimeBucket::Day1,
            adc_bits: 8,
            v_ref: 0.0,
            v_pulse: 1.0,
            max_active_rows: 64,
            capacitance: 1.0,
            settle_time: None,
            tile_rows: 256,
            tile_cols: 256,
            seed: 0,
        }
    }
}

impl RramConfig {
    pub fn levels_per_cell(&self) -> u32 {
        1 << self.bits_per_cell
    }

    pub fn sigma(&self) -> Result<f64> {
        self.noise.sigma(self.levels_per_cell(), self.time_bucket)
    }

    /// Noise-free cells and an ideal ADC.
    pub fn ideal() -> Self {
        RramConfig {
            noise: NoiseModel::noiseless(),
            adc_bits: 0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.bits_per_cell) {
            return fail(format!("bits_per_cell must be 1..=3, got {}", self.bits_per_cell));
        }
        if !(self.g_max > 0.0) || !(self.v_pulse > 0.0) || !(self.capacitance > 0.0) {
            return fail("g_max, v_pulse and capacitance must be positive".into());
        }
        if self.tile_rows < 2 || self.tile_rows % 2 != 0 || self.tile_cols == 0 {
            return fail(format!("tile shape {}x{} invalid", self.tile_rows, self.tile_cols));
        }
        if self.max_active_rows == 0 || self.max_active_rows > 64 || self.max_active_rows > self.tile_rows / 2 {
            return fail(format!(
                "max_active_rows must be in 1..=min(64, tile_rows/2), got {}",
                self.max_active_rows
            ));
        }
        if self.adc_bits > 24 {
            return fail(format!("adc_bits must be at most 24, got {}", self.adc_bits));
        }
        if let Some(t) = self.settle_time {
            if !(t > 0.0) {
                return fail(format!("settle_time must be positive, got {t}"));
            }
        }
        self.sigma().map(|_| ())
    }
}
