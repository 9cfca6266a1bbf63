//! Repeater activation strategies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Position3D, Scenario};
use crate::taps::AmplificationVector;
use crate::units::GainConvention;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Direct link only.
    None,
    /// Every repeater at the common gain.
    All,
    /// Only the repeater closest to the UE.
    ClosestOne,
    /// The closest repeater plus `rand_count` others drawn uniformly.
    #[serde(rename = "closeby_plus_rand")]
    CloseByPlusRand,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::None,
        StrategyKind::All,
        StrategyKind::ClosestOne,
        StrategyKind::CloseByPlusRand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::All => "all",
            StrategyKind::ClosestOne => "closest_one",
            StrategyKind::CloseByPlusRand => "closeby_plus_rand",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub alpha_db: f64,
    pub rand_count: usize,
    pub convention: GainConvention,
}

impl Strategy {
    pub fn new(kind: StrategyKind, alpha_db: f64) -> Self {
        Self {
            kind,
            alpha_db,
            rand_count: 3,
            convention: GainConvention::Amplitude,
        }
    }

    pub fn linear_gain(&self) -> f64 {
        self.convention.to_linear(self.alpha_db)
    }

    /// Amplification vector for a UE at `ue`. Only `CloseByPlusRand` draws
    /// from `rng`.
    pub fn select<R: Rng + ?Sized>(&self, scenario: &Scenario, ue: &Position3D, rng: &mut R) -> Result<AmplificationVector> {
        let l = scenario.num_repeaters();
        let gain = self.linear_gain();
        let needed = match self.kind {
            StrategyKind::None => 0,
            StrategyKind::All | StrategyKind::ClosestOne => 1,
            StrategyKind::CloseByPlusRand => self.rand_count + 1,
        };
        if needed > l {
            return Err(Error::NotEnoughRepeaters { needed, available: l });
        }
        let mut alpha = vec![0.0; l];
        match self.kind {
            StrategyKind::None => {}
            StrategyKind::All => alpha.fill(gain),
            StrategyKind::ClosestOne | StrategyKind::CloseByPlusRand => {
                let closest = scenario.closest_repeater(ue).expect("at least one repeater");
                alpha[closest] = gain;
                if self.kind == StrategyKind::CloseByPlusRand {
                    for pick in rand::seq::index::sample(rng, l - 1, self.rand_count) {
                        let idx = if pick >= closest { pick + 1 } else { pick };
                        alpha[idx] = gain;
                    }
                }
            }
        }
        AmplificationVector::new(alpha)
    }
}

pub fn select<R: Rng + ?Sized>(
    strategy: &Strategy,
    scenario: &Scenario,
    ue: &Position3D,
    rng: &mut R,
) -> Result<AmplificationVector> {
    strategy.select(scenario, ue, rng)
}

#[cfg(test)]
mod tests {
    #[test]
    fn serde_names_match_display() {
        #[derive(serde::Deserialize, serde::Serialize)]
        struct W {
            s: Vec<super::StrategyKind>,
        }
        let text = toml::to_string(&W { s: super::StrategyKind::ALL.to_vec() }).unwrap();
        assert_eq!(text.trim(), r#"s = ["none", "all", "closest_one", "closeby_plus_rand"]"#);
        let back: W = toml::from_str(&text).unwrap();
        assert_eq!(back.s, super::StrategyKind::ALL);
    }

    use super::*;
    use crate::config::ScenarioConfig;
    use crate::rng::StreamKey;
    use proptest::prelude::{prop_assert_eq, proptest};

    fn scenario() -> Scenario {
        Scenario::new(&ScenarioConfig::default())
    }

    fn support(a: &AmplificationVector) -> Vec<usize> {
        (0..a.len()).filter(|&i| a.is_active(i)).collect()
    }

    #[test]
    fn none_is_zero() {
        let s = scenario();
        let ue = Position3D::new(10.0, 900.0, 1.5);
        let a = Strategy::new(StrategyKind::None, 30.0).select(&s, &ue, &mut StreamKey::root(0).rng()).unwrap();
        assert_eq!(a, AmplificationVector::zeros(16));
    }

    #[test]
    fn all_at_30_db() {
        let s = scenario();
        let ue = Position3D::new(10.0, 900.0, 1.5);
        let a = Strategy::new(StrategyKind::All, 30.0).select(&s, &ue, &mut StreamKey::root(0).rng()).unwrap();
        assert!(a.as_slice().iter().all(|&v| (v - 31.622776601683793).abs() < 1e-12));
        let zero = Strategy::new(StrategyKind::All, f64::NEG_INFINITY)
            .select(&s, &ue, &mut StreamKey::root(0).rng())
            .unwrap();
        assert_eq!(zero, AmplificationVector::zeros(16));
    }

    #[test]
    fn closest_under_repeater() {
        let s = scenario();
        let r5 = s.repeaters[5];
        let ue = Position3D::new(r5.x, r5.y, 1.5);
        let a = Strategy::new(StrategyKind::ClosestOne, 30.0).select(&s, &ue, &mut StreamKey::root(0).rng()).unwrap();
        assert_eq!(support(&a), vec![5]);
    }

    #[test]
    fn closeby_plus_rand_support() {
        let s = scenario();
        let ue = Position3D::new(130.0, 120.0, 1.5);
        for seed in 0..50 {
            let a = Strategy::new(StrategyKind::CloseByPlusRand, 30.0)
                .select(&s, &ue, &mut StreamKey::root(seed).rng())
                .unwrap();
            let sup = support(&a);
            assert_eq!(sup.len(), 4);
            assert!(sup.contains(&0));
        }
    }

    #[test]
    fn not_enough_repeaters() {
        let cfg = ScenarioConfig {
            grid_dim: 2,
            ..ScenarioConfig::default()
        };
        let s = Scenario::new(&cfg);
        let ue = Position3D::new(1.0, 1.0, 1.5);
        let mut strat = Strategy::new(StrategyKind::CloseByPlusRand, 30.0);
        assert!(strat.select(&s, &ue, &mut StreamKey::root(0).rng()).is_ok());
        strat.rand_count = 4;
        assert!(matches!(
            strat.select(&s, &ue, &mut StreamKey::root(0).rng()),
            Err(Error::NotEnoughRepeaters { needed: 5, available: 4 })
        ));
        let empty = Scenario::new(&ScenarioConfig {
            grid_dim: 0,
            ..ScenarioConfig::default()
        });
        assert!(Strategy::new(StrategyKind::All, 0.0).select(&empty, &ue, &mut StreamKey::root(0).rng()).is_err());
        assert!(Strategy::new(StrategyKind::None, 0.0).select(&empty, &ue, &mut StreamKey::root(0).rng()).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.as_str().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("most".parse::<StrategyKind>().is_err());
    }

    proptest! {
        #[test]
        fn support_sizes(x in 0.0f64..1000.0, y in 0.0f64..1000.0, seed in 0u64..10_000) {
            let s = scenario();
            let ue = Position3D::new(x, y, 1.5);
            let sizes = [(StrategyKind::None, 0), (StrategyKind::All, 16), (StrategyKind::ClosestOne, 1), (StrategyKind::CloseByPlusRand, 4)];
            for (kind, n) in sizes {
                let a = Strategy::new(kind, 20.0).select(&s, &ue, &mut StreamKey::root(seed).rng()).unwrap();
                prop_assert_eq!(a.active_count(), n);
            }
        }

        #[test]
        fn closest_is_scale_invariant(x in 0.0f64..1000.0, y in 0.0f64..1000.0, k in 0.1f64..10.0) {
            let s = scenario();
            let ue = Position3D::new(x, y, 1.5);
            let scaled = Scenario {
                repeaters: s.repeaters.iter().map(|r| Position3D::new(r.x * k, r.y * k, r.z * k)).collect(),
                ..s.clone()
            };
            let ue_scaled = Position3D::new(x * k, y * k, 1.5 * k);
            prop_assert_eq!(s.closest_repeater(&ue), scaled.closest_repeater(&ue_scaled));
        }
    }
}
