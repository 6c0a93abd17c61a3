//! TOML experiment configuration.
//!
//! ```toml
//! base_seed = 1                  # overridden by GRASSLINK_SEED
//! schemes = ["fat", "coherent_analog", "coherent_digital"]
//! n_train = 200                  # training samples per trial
//! n_test = 2000                  # test samples per trial
//! trials = 10
//! target_error = 0.05            # overhead sweep only
//!
//! [mog]
//! num_classes = 2
//! sample_dim = 48
//! deviation_variance = 1.0
//! parametric_ratio_db = 15.0
//! # class_means = [[[re, im], ...], ...]   optional; generated per trial if absent
//!
//! [channel]
//! n_tx = 2
//! n_rx = 4
//! normalized_doppler = 0.01      # used when sweeping SNR
//! snr_db = 15.0                  # P / noise variance; used when sweeping Doppler
//! tx_power = 1.0
//!
//! [frame]                        # coherent baselines; all keys optional
//! pilot_slots = 2                # default n_tx
//! data_slots = 24                # D for the error sweep; default ceil(L / n_tx)
//! max_search_data_slots = 96     # overhead search bound; default per-sample data slots
//!
//! [sweep]
//! variable = "doppler"           # or "snr" (values in dB)
//! values = [0.001, 0.01]
//! ```

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::fading::ChannelConfig;
use crate::grassmann::block_length;
use crate::links::{FrameConfig, Scheme};
use crate::mog::MoGConfig;
use crate::scalar::db_to_linear;

/// Name that resolves to the built-in defaults.
pub const PAPER_DEFAULTS: &str = "paper_defaults";
pub const PAPER_DEFAULTS_TOML: &str = include_str!("../../configs/paper_defaults.toml");
pub const SEED_ENV: &str = "GRASSLINK_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Doppler,
    Snr,
}

impl SweepVariable {
    pub fn id(self) -> &'static str {
        match self {
            SweepVariable::Doppler => "doppler",
            SweepVariable::Snr => "snr",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "doppler" => Some(SweepVariable::Doppler),
            "snr" => Some(SweepVariable::Snr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MogSection {
    pub num_classes: usize,
    pub sample_dim: usize,
    pub deviation_variance: f64,
    pub parametric_ratio_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_means: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub n_tx: usize,
    pub n_rx: usize,
    pub normalized_doppler: f64,
    pub snr_db: f64,
    #[serde(default = "one")]
    pub tx_power: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub pilot_slots: Option<usize>,
    pub data_slots: Option<usize>,
    pub max_search_data_slots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_seed: u64,
    pub schemes: Vec<Scheme>,
    pub n_train: usize,
    pub n_test: usize,
    pub trials: usize,
    #[serde(default = "default_target")]
    pub target_error: f64,
    pub mog: MogSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub frame: FrameSection,
    pub sweep: SweepSection,
}

fn default_target() -> f64 {
    0.05
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; the name `paper_defaults` (with or without
    /// `.toml`) resolves to the built-in defaults when no such file exists.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        if !path.exists() {
            let stem = path.to_str().map(|s| s.trim_end_matches(".toml"));
            if stem == Some(PAPER_DEFAULTS) {
                return Self::from_toml_str(PAPER_DEFAULTS_TOML);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn paper_defaults() -> Self {
        Self::from_toml_str(PAPER_DEFAULTS_TOML).expect("built-in defaults are valid")
    }

    /// Replaces `base_seed` with `value` if it is given, for `GRASSLINK_SEED`.
    pub fn with_seed_override(mut self, value: Option<&str>) -> Result<Self, ExperimentError> {
        if let Some(v) = value {
            self.base_seed = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer")))?;
        }
        Ok(self)
    }

    pub fn with_env_seed(self) -> Result<Self, ExperimentError> {
        let v = std::env::var(SEED_ENV).ok();
        self.with_seed_override(v.as_deref())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.schemes.is_empty() {
            return Err(invalid("at least one scheme is required"));
        }
        let mut sorted = self.schemes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.schemes.len() {
            return Err(invalid("schemes must not repeat"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n_train < self.mog.num_classes {
            return Err(invalid("n_train must cover every class at least once"));
        }
        if self.n_test == 0 {
            return Err(invalid("n_test must be positive"));
        }
        if !(self.target_error > 0.0 && self.target_error < 1.0) {
            return Err(invalid("target_error must lie in (0, 1)"));
        }
        self.mog_config().validate().map_err(|e| invalid(e.to_string()))?;
        if !self.channel.snr_db.is_finite() || !(self.channel.tx_power > 0.0) {
            return Err(invalid("channel snr_db must be finite and tx_power positive"));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sweep values must be finite and strictly ascending"));
        }
        for &v in values {
            self.channel_at(v).validate().map_err(|e| invalid(e.to_string()))?;
        }
        for &s in &self.schemes {
            if s.is_coherent() {
                self.frame_for(s).validate(self.channel.n_tx).map_err(|e| invalid(e.to_string()))?;
                if self.max_search_data_slots(s) == 0 {
                    return Err(invalid("max_search_data_slots must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Source model; means are left empty unless given explicitly.
    pub fn mog_config(&self) -> MoGConfig<f64> {
        let m = &self.mog;
        let mut cfg = MoGConfig::new(m.num_classes, m.sample_dim, m.deviation_variance, m.parametric_ratio_db);
        if let Some(means) = &m.class_means {
            cfg.class_means = means
                .iter()
                .map(|v| v.iter().map(|&[re, im]| Complex::new(re, im)).collect())
                .collect();
        }
        cfg
    }

    /// Channel with the sweep variable set to `value`.
    pub fn channel_at(&self, value: f64) -> ChannelConfig<f64> {
        let c = &self.channel;
        let (doppler, snr_db) = match self.sweep.variable {
            SweepVariable::Doppler => (value, c.snr_db),
            SweepVariable::Snr => (c.normalized_doppler, value),
        };
        ChannelConfig {
            n_tx: c.n_tx,
            n_rx: c.n_rx,
            normalized_doppler: doppler,
            noise_variance: c.tx_power / db_to_linear(snr_db),
            tx_power: c.tx_power,
        }
    }

    /// Frame used by the error sweep.
    pub fn frame_for(&self, scheme: Scheme) -> FrameConfig {
        if !scheme.is_coherent() {
            return FrameConfig::fat();
        }
        FrameConfig {
            pilot_slots: self.frame.pilot_slots.unwrap_or(self.channel.n_tx),
            data_slots_per_frame: self
                .frame
                .data_slots
                .unwrap_or_else(|| block_length(self.mog.sample_dim, self.channel.n_tx)),
            scheme,
        }
    }

    /// Upper end of the overhead search over `D`.
    pub fn max_search_data_slots(&self, scheme: Scheme) -> usize {
        self.frame
            .max_search_data_slots
            .unwrap_or_else(|| scheme.data_slots(self.mog.sample_dim, self.channel.n_tx))
    }
}
