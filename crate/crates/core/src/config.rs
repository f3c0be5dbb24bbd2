//! JSON run configuration shared by the CLI subcommands.
//!
//! Every field is optional; missing fields take the defaults below.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "stage1_weights": {"white_noise": 10, "background_noise": 60},
//!   "stage2_weights": {"first_only": 1},
//!   "noise_files": ["noise/babble.wav"],
//!   "adapters": {"opus": "opusenc {in} x.opus && opusdec x.opus {out}"},
//!   "workers": 4
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::degradation::adapter::{AdapterCommand, DEFAULT_TIMEOUT};
use crate::degradation::execute::AdapterSet;
use crate::degradation::plan::{
    tencent_first_step, tencent_second_step, Impairment, ParamRanges, Processing, WeightTable,
};
use crate::error::{Error, Result};
use crate::mapping::DEFAULT_GRID_POINTS;
use crate::metrics::RmseDenominator;
use crate::ratings::DEFAULT_MOS_BINS;

pub const DEFAULT_MIN_VOTES: usize = 1;
pub const ADAPTER_NAMES: [&str; 4] = ["amr", "opus", "ns", "plc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// First-step impairment weights by row tag; `None` uses the Tencent table.
    pub stage1_weights: Option<BTreeMap<String, f64>>,
    /// Second-step processing weights by row tag; `None` uses the Tencent table.
    pub stage2_weights: Option<BTreeMap<String, f64>>,
    pub snr_range_db: [f64; 2],
    pub lowpass_hz: f64,
    pub highpass_hz: f64,
    pub clip_threshold_range: [f64; 2],
    /// Background noise WAVs, relative to the config file.
    pub noise_files: Vec<PathBuf>,
    pub adapters: BTreeMap<String, String>,
    pub adapter_timeout_secs: f64,
    pub workers: Option<usize>,
    pub rmse_denominator: RmseDenominator,
    pub weight_by_clip_count: bool,
    pub mos_bins: usize,
    pub min_votes: usize,
    pub grid_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        let r = ParamRanges::default();
        Config {
            seed: 0,
            stage1_weights: None,
            stage2_weights: None,
            snr_range_db: r.snr_db,
            lowpass_hz: r.lowpass_hz,
            highpass_hz: r.highpass_hz,
            clip_threshold_range: r.clip_threshold,
            noise_files: Vec::new(),
            adapters: BTreeMap::new(),
            adapter_timeout_secs: DEFAULT_TIMEOUT.as_secs_f64(),
            workers: None,
            rmse_denominator: RmseDenominator::default(),
            weight_by_clip_count: false,
            mos_bins: DEFAULT_MOS_BINS,
            min_votes: DEFAULT_MIN_VOTES,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves `noise_files` against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for f in &mut cfg.noise_files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.param_ranges().validate()?;
        self.first_step_weights()?;
        self.second_step_weights()?;
        self.adapter_set()?;
        if !(self.adapter_timeout_secs > 0.0 && self.adapter_timeout_secs.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "adapter_timeout_secs {} must be positive",
                self.adapter_timeout_secs
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::OutOfRange("workers must be at least 1".into()));
        }
        if self.mos_bins == 0 || self.min_votes == 0 {
            return Err(Error::OutOfRange(
                "mos_bins and min_votes must be at least 1".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::OutOfRange("grid_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn first_step_weights(&self) -> Result<WeightTable<Impairment>> {
        match &self.stage1_weights {
            Some(map) => WeightTable::from_tags(map),
            None => Ok(tencent_first_step()),
        }
    }

    pub fn second_step_weights(&self) -> Result<WeightTable<Processing>> {
        match &self.stage2_weights {
            Some(map) => WeightTable::from_tags(map),
            None => Ok(tencent_second_step()),
        }
    }

    pub fn param_ranges(&self) -> ParamRanges {
        ParamRanges {
            snr_db: self.snr_range_db,
            lowpass_hz: self.lowpass_hz,
            highpass_hz: self.highpass_hz,
            clip_threshold: self.clip_threshold_range,
        }
    }

    pub fn adapter_set(&self) -> Result<AdapterSet> {
        let timeout = Duration::from_secs_f64(self.adapter_timeout_secs.max(0.0));
        let mut set = AdapterSet::default();
        for (name, template) in &self.adapters {
            let cmd = Some(AdapterCommand::new(template.clone())?.with_timeout(timeout));
            match name.as_str() {
                "amr" => set.amr = cmd,
                "opus" => set.opus = cmd,
                "ns" => set.ns = cmd,
                "plc" => set.plc = cmd,
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown adapter `{other}` (expected one of {})",
                        ADAPTER_NAMES.join(", ")
                    )))
                }
            }
        }
        Ok(set)
    }
}
