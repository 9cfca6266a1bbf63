//! Stochastic multipath profiles.
//!
//! Repeater links are Rician: a line-of-sight path carrying `K/(K+1)` of the
//! link power plus reflected paths with exponentially distributed excess
//! delays and an exponential power-delay profile. The direct UE-BS link is
//! NLOS with Rayleigh path amplitudes. Every profile is normalized so that
//! its total power equals the log-distance pathloss of the link.
//!
//! Path phases come from the carrier term `exp(-j 2 pi f_c tau)` of the tap
//! formulas; each scattered path gets a sub-wavelength delay jitter
//! uniform over one carrier period, which makes its phase uniform.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::ChannelConfig;
use crate::geometry::{pathloss_distance, Position3D, Scenario};
use crate::rng::{label, StreamKey};
use crate::units::db_to_power;
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    /// Amplitude attenuation in `[0, 1]`.
    pub attenuation: f64,
    /// Absolute propagation delay in seconds.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkProfile {
    pub paths: Vec<PathComponent>,
    pub is_los: bool,
}

impl LinkProfile {
    pub fn single(attenuation: f64, delay: f64, is_los: bool) -> Self {
        Self {
            paths: vec![PathComponent { attenuation, delay }],
            is_los,
        }
    }

    /// Sum of squared attenuations.
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.attenuation * p.attenuation).sum()
    }

    pub fn first_delay(&self) -> Option<f64> {
        self.paths.first().map(|p| p.delay)
    }

    pub fn delay_range(&self) -> Option<(f64, f64)> {
        let lo = self.paths.iter().map(|p| p.delay).reduce(f64::min)?;
        let hi = self.paths.iter().map(|p| p.delay).reduce(f64::max)?;
        Some((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub direct: LinkProfile,
    pub ue_to_rep: Vec<LinkProfile>,
    pub rep_to_bs: Vec<LinkProfile>,
}

impl ChannelRealization {
    pub fn num_repeaters(&self) -> usize {
        self.ue_to_rep.len()
    }
}

/// Channel-model constants resolved against a carrier frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub carrier_frequency: f64,
    /// Friis gain at the 1 m reference distance, `(lambda / 4 pi)^2`.
    pub reference_gain: f64,
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    /// Rician K-factor, linear.
    pub k_factor: f64,
    pub los_paths: usize,
    pub nlos_paths: usize,
    pub los_excess_delay_mean: f64,
    pub nlos_excess_delay_mean: f64,
}

impl ChannelModel {
    pub fn new(cfg: &ChannelConfig, carrier_frequency: f64) -> Self {
        let wavelength = SPEED_OF_LIGHT / carrier_frequency;
        let friis = wavelength / (4.0 * std::f64::consts::PI);
        Self {
            carrier_frequency,
            reference_gain: friis * friis,
            los_exponent: cfg.los_exponent,
            nlos_exponent: cfg.nlos_exponent,
            k_factor: db_to_power(cfg.k_factor_db),
            los_paths: cfg.los_paths,
            nlos_paths: cfg.nlos_paths,
            los_excess_delay_mean: cfg.los_excess_delay_mean_s,
            nlos_excess_delay_mean: cfg.nlos_excess_delay_mean_s,
        }
    }

    /// Log-distance pathloss `beta_0 (d / 1 m)^-n` as a linear power gain.
    pub fn pathloss(&self, distance: f64, is_los: bool) -> Result<f64> {
        let exponent = if is_los { self.los_exponent } else { self.nlos_exponent };
        pathloss_with_exponent(self.reference_gain, distance, exponent)
    }

    pub fn generate_link<R: Rng + ?Sized>(
        &self,
        tx: &Position3D,
        rx: &Position3D,
        is_los: bool,
        rng: &mut R,
    ) -> Result<LinkProfile> {
        let distance = pathloss_distance(tx, rx);
        let gain = self.pathloss(distance, is_los)?;
        let los_delay = distance / SPEED_OF_LIGHT;
        let period = 1.0 / self.carrier_frequency;

        let (fractions, delays) = if is_los {
            self.los_profile(los_delay, period, rng)
        } else {
            self.nlos_profile(los_delay, period, rng)
        };

        let mut paths: Vec<PathComponent> = fractions
            .iter()
            .zip(&delays)
            .map(|(&f, &delay)| PathComponent {
                attenuation: (gain * f).sqrt(),
                delay,
            })
            .collect();
        paths.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        Ok(LinkProfile { paths, is_los })
    }

    fn los_profile<R: Rng + ?Sized>(&self, los_delay: f64, period: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let reflected = self.los_paths.saturating_sub(1);
        if reflected == 0 {
            return (vec![1.0], vec![los_delay]);
        }
        let exp = Exp::new(1.0 / self.los_excess_delay_mean).expect("positive delay mean");
        let excess: Vec<f64> = (0..reflected).map(|_| exp.sample(rng)).collect();
        let weights: Vec<f64> = excess
            .iter()
            .map(|e| (-e / self.los_excess_delay_mean).exp())
            .collect();
        let weight_sum: f64 = weights.iter().sum();
        let scattered_budget = 1.0 / (self.k_factor + 1.0);

        let mut fractions = Vec::with_capacity(self.los_paths);
        let mut delays = Vec::with_capacity(self.los_paths);
        fractions.push(self.k_factor / (self.k_factor + 1.0));
        delays.push(los_delay);
        for (e, w) in excess.iter().zip(&weights) {
            fractions.push(scattered_budget * w / weight_sum);
            delays.push(los_delay + e + period * rng.random::<f64>());
        }
        (fractions, delays)
    }

    fn nlos_profile<R: Rng + ?Sized>(&self, los_delay: f64, period: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let exp = Exp::new(1.0 / self.nlos_excess_delay_mean).expect("positive delay mean");
        let mut powers = Vec::with_capacity(self.nlos_paths);
        let mut delays = Vec::with_capacity(self.nlos_paths);
        for _ in 0..self.nlos_paths {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            // squared Rayleigh amplitude
            powers.push(re * re + im * im);
            delays.push(los_delay + exp.sample(rng) + period * rng.random::<f64>());
        }
        let total: f64 = powers.iter().sum();
        let fractions = powers.into_iter().map(|p| p / total).collect();
        (fractions, delays)
    }

    /// Direct NLOS link plus one LOS profile pair per repeater, each drawn
    /// from its own sub-stream of `key`.
    pub fn generate_realization(
        &self,
        scenario: &Scenario,
        ue: &Position3D,
        key: StreamKey,
    ) -> Result<ChannelRealization> {
        let direct = self.generate_link(ue, &scenario.bs, false, &mut key.child(label::DIRECT_LINK).rng())?;
        let mut ue_to_rep = Vec::with_capacity(scenario.num_repeaters());
        let mut rep_to_bs = Vec::with_capacity(scenario.num_repeaters());
        for (l, rep) in scenario.repeaters.iter().enumerate() {
            let l = l as u64;
            let mut up = key.child(label::UE_TO_REPEATER + l).rng();
            let mut down = key.child(label::REPEATER_TO_BS + l).rng();
            ue_to_rep.push(self.generate_link(ue, rep, true, &mut up)?);
            rep_to_bs.push(self.generate_link(rep, &scenario.bs, true, &mut down)?);
        }
        Ok(ChannelRealization {
            direct,
            ue_to_rep,
            rep_to_bs,
        })
    }
}

pub fn pathloss_with_exponent(reference_gain: f64, distance: f64, exponent: f64) -> Result<f64> {
    if !(distance >= 1.0) {
        return Err(Error::DistanceBelowReference(distance));
    }
    Ok(reference_gain * distance.powf(-exponent))
}
