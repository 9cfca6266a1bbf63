//! Experiment configuration, read from TOML.
//!
//! Every section and key is optional; missing values fall back to the
//! defaults below. See `configs/default.toml` at the repository root for the
//! full schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::activation::StrategyKind;
use crate::units::{dbm_per_hz_to_watt, GainConvention, THERMAL_NOISE_DBM_HZ};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_side_m: f64,
    pub grid_dim: usize,
    pub bs_height_m: f64,
    pub repeater_height_m: f64,
    pub ue_height_m: f64,
    pub carrier_frequency_hz: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side_m: 1000.0,
            grid_dim: 4,
            bs_height_m: 25.0,
            repeater_height_m: 15.0,
            ue_height_m: 1.5,
            carrier_frequency_hz: 3e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    pub k_factor_db: f64,
    pub los_paths: usize,
    pub nlos_paths: usize,
    pub los_excess_delay_mean_s: f64,
    pub nlos_excess_delay_mean_s: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            los_exponent: 2.2,
            nlos_exponent: 3.6,
            k_factor_db: 10.0,
            los_paths: 6,
            nlos_paths: 10,
            los_excess_delay_mean_s: 100e-9,
            nlos_excess_delay_mean_s: 300e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TapConfig {
    /// Taps appended after the last arrival.
    pub guard_taps: usize,
    /// Taps reserved before the first arrival for the sinc precursors.
    /// Trimmed first when the window does not fit in the cyclic prefix.
    pub pre_guard_taps: usize,
    pub repeater_delay_ns: f64,
}

impl Default for TapConfig {
    fn default() -> Self {
        Self {
            guard_taps: 20,
            pre_guard_taps: 80,
            repeater_delay_ns: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub noise_figure_db: f64,
    pub n0_override_dbm_hz: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            noise_figure_db: 7.0,
            n0_override_dbm_hz: None,
        }
    }
}

impl NoiseConfig {
    /// Noise PSD N0 in W/Hz.
    pub fn n0(&self) -> f64 {
        let dbm_hz = self
            .n0_override_dbm_hz
            .unwrap_or(THERMAL_NOISE_DBM_HZ + self.noise_figure_db);
        dbm_per_hz_to_watt(dbm_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Transmit PSD in W/Hz; equals the average power per time-domain symbol.
    pub signal_psd_w_per_hz: f64,
    pub subcarrier_spacing_hz: f64,
    /// Relative floor applied to covariance eigenvalues before inversion.
    pub eigen_floor: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            // 20 mW/MHz
            signal_psd_w_per_hz: 2e-8,
            subcarrier_spacing_hz: 150e3,
            eigen_floor: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivationConfig {
    pub alpha_db: f64,
    pub rand_count: usize,
    pub gain_convention: GainConvention,
}

impl Default for ActivationConfig {
    fn default() -> Self {
        Self {
            alpha_db: 30.0,
            rand_count: 3,
            gain_convention: GainConvention::Amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub bandwidths_hz: Vec<f64>,
    pub alpha_db: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            bandwidths_hz: vec![7.5e6, 15e6, 30e6],
            alpha_db: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub subcarriers: usize,
    pub bandwidth_hz: f64,
    pub alpha_db: Vec<f64>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            subcarriers: 256,
            bandwidth_hz: 15e6,
            alpha_db: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub drops: usize,
    pub realizations: usize,
    pub strategies: Vec<StrategyKind>,
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub taps: TapConfig,
    pub noise: NoiseConfig,
    pub link: LinkConfig,
    pub activation: ActivationConfig,
    pub fig1: Fig1Config,
    pub fig2: Fig2Config,
    /// CSV destination; `None` skips writing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2025,
            drops: 5,
            realizations: 3,
            strategies: StrategyKind::ALL.to_vec(),
            scenario: ScenarioConfig::default(),
            channel: ChannelConfig::default(),
            taps: TapConfig::default(),
            noise: NoiseConfig::default(),
            link: LinkConfig::default(),
            activation: ActivationConfig::default(),
            fig1: Fig1Config::default(),
            fig2: Fig2Config::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    /// Full-scale protocol: 25 drops, 10 realizations, 1000 subcarriers.
    pub fn full_scale() -> Self {
        Self {
            drops: 25,
            realizations: 10,
            fig2: Fig2Config {
                subcarriers: 1000,
                ..Fig2Config::default()
            },
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| e.context(format!("loading {}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.drops == 0 || self.realizations == 0 {
            return fail("drops and realizations must be at least 1");
        }
        let s = &self.scenario;
        if !(s.area_side_m >= 0.0 && s.area_side_m.is_finite()) {
            return fail("scenario.area_side_m must be finite and non-negative");
        }
        if !(s.carrier_frequency_hz > 0.0) {
            return fail("scenario.carrier_frequency_hz must be positive");
        }
        if [s.bs_height_m, s.repeater_height_m, s.ue_height_m].iter().any(|h| !(*h >= 0.0)) {
            return fail("heights must be non-negative");
        }
        let c = &self.channel;
        if c.los_paths == 0 || c.nlos_paths == 0 {
            return fail("channel path counts must be at least 1");
        }
        if !(c.los_excess_delay_mean_s > 0.0 && c.nlos_excess_delay_mean_s > 0.0) {
            return fail("channel delay-spread means must be positive");
        }
        if !(self.link.subcarrier_spacing_hz > 0.0 && self.link.signal_psd_w_per_hz >= 0.0) {
            return fail("link.subcarrier_spacing_hz must be positive and signal PSD non-negative");
        }
        if !self.activation.alpha_db.is_finite() && self.activation.alpha_db != f64::NEG_INFINITY {
            return fail("activation.alpha_db must be finite or -inf");
        }
        if self.fig2.subcarriers == 0 || !(self.fig2.bandwidth_hz > 0.0) {
            return fail("fig2 needs a positive subcarrier count and bandwidth");
        }
        if !(self.taps.repeater_delay_ns >= 0.0) {
            return fail("taps.repeater_delay_ns must be non-negative");
        }
        Ok(())
    }
}
