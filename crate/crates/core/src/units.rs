use serde::{Deserialize, Serialize};

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watt(dbm_hz: f64) -> f64 {
    db_to_power(dbm_hz - 30.0)
}

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// How a repeater gain quoted in dB maps to the linear amplitude factor
/// applied to the signal taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainConvention {
    /// `alpha = 10^(dB/20)`; the dB value is the repeater power gain.
    #[default]
    Amplitude,
    /// `alpha = 10^(dB/10)`; the dB value is read directly as the amplitude
    /// factor, i.e. the power gain is twice the quoted dB.
    Power,
}

impl GainConvention {
    pub fn to_linear(self, db: f64) -> f64 {
        match self {
            GainConvention::Amplitude => 10f64.powf(db / 20.0),
            GainConvention::Power => 10f64.powf(db / 10.0),
        }
    }
}
