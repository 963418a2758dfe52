//! Settings merged from defaults, an optional TOML file and command-line flags.

use std::path::Path;

use hdoms::pipeline::{Hardware, PipelineConfig};
use hdoms::search::WindowMode;
use hdoms::{Error, Result};

/// Flags that override file settings.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub window: Option<f64>,
    pub k: Option<usize>,
    pub fdr: Option<f64>,
}

/// Accepts a number of Da, `inf`, `open` or `standard`.
pub fn parse_window(s: &str) -> std::result::Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "none" => Ok(f64::INFINITY),
        "open" => Ok(WindowMode::Open.half_width()),
        "standard" => Ok(WindowMode::Standard.half_width()),
        other => match other.parse::<f64>() {
            Ok(w) if w >= 0.0 => Ok(w),
            _ => Err(format!("expected a non-negative number, `inf`, `open` or `standard`, got `{s}`")),
        },
    }
}

pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = flags.seed {
        cfg.encoder.seed = seed;
        cfg.decoy_seed = seed;
        if let Hardware::Simulate(rram) = &mut cfg.hardware {
            rram.seed = seed;
        }
    }
    if let Some(w) = flags.window {
        cfg.search.window = w;
    }
    if let Some(k) = flags.k {
        cfg.search.k = k;
    }
    if let Some(t) = flags.fdr {
        cfg.fdr_threshold = t;
    }
    cfg.validate()?;
    Ok(cfg)
}
