//! Deployment geometry: BS at the area centre, a cell-centred repeater grid
//! and uniformly dropped UEs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= 0.0
    }

    pub fn horizontal_distance(&self, other: &Position3D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

pub fn distance3d(a: &Position3D, b: &Position3D) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance used by the pathloss model: 3D distance with a 1 m floor.
pub fn pathloss_distance(a: &Position3D, b: &Position3D) -> f64 {
    distance3d(a, b).max(1.0)
}

/// Repeaters at the centres of a `grid_dim x grid_dim` partition of the
/// square `[0, area_side]^2`, row-major in (y, x).
pub fn place_repeaters_grid(area_side: f64, grid_dim: usize, height: f64) -> Vec<Position3D> {
    debug_assert!(area_side > 0.0 && grid_dim >= 1);
    let coord = |i: usize| area_side * (2 * i + 1) as f64 / (2 * grid_dim) as f64;
    (0..grid_dim)
        .flat_map(|iy| (0..grid_dim).map(move |ix| Position3D::new(coord(ix), coord(iy), height)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub area_side: f64,
    pub bs: Position3D,
    pub repeaters: Vec<Position3D>,
    pub bs_height: f64,
    pub repeater_height: f64,
    pub ue_height: f64,
    pub carrier_frequency: f64,
}

impl Scenario {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let repeaters = if cfg.grid_dim == 0 {
            Vec::new()
        } else {
            place_repeaters_grid(cfg.area_side_m, cfg.grid_dim, cfg.repeater_height_m)
        };
        Self::with_repeaters(cfg, repeaters)
    }

    pub fn with_repeaters(cfg: &ScenarioConfig, repeaters: Vec<Position3D>) -> Self {
        let half = cfg.area_side_m / 2.0;
        Self {
            area_side: cfg.area_side_m,
            bs: Position3D::new(half, half, cfg.bs_height_m),
            repeaters,
            bs_height: cfg.bs_height_m,
            repeater_height: cfg.repeater_height_m,
            ue_height: cfg.ue_height_m,
            carrier_frequency: cfg.carrier_frequency_hz,
        }
    }

    pub fn num_repeaters(&self) -> usize {
        self.repeaters.len()
    }

    pub fn wavelength(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn contains(&self, p: &Position3D) -> bool {
        p.is_valid() && (0.0..=self.area_side).contains(&p.x) && (0.0..=self.area_side).contains(&p.y)
    }

    pub fn drop_ue<R: Rng + ?Sized>(&self, rng: &mut R) -> Position3D {
        drop_ue(self, rng)
    }

    /// Index of the repeater closest to `ue`; ties go to the lowest index.
    pub fn closest_repeater(&self, ue: &Position3D) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.repeaters.iter().enumerate() {
            let d = distance3d(ue, r);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

pub fn drop_ue<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Position3D {
    let side = scenario.area_side;
    let x = side * rng.random::<f64>();
    let y = side * rng.random::<f64>();
    Position3D::new(x, y, scenario.ue_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;

    fn scenario() -> Scenario {
        Scenario::new(&ScenarioConfig::default())
    }

    #[test]
    fn sixteen_repeater_grid() {
        let grid = place_repeaters_grid(1000.0, 4, 15.0);
        assert_eq!(grid.len(), 16);
        let expected = [125.0, 375.0, 625.0, 875.0];
        for p in &grid {
            assert!(expected.contains(&p.x) && expected.contains(&p.y));
            assert_eq!(p.z, 15.0);
        }
        assert_eq!(grid[1], Position3D::new(375.0, 125.0, 15.0));
    }

    #[test]
    fn single_and_small_grids() {
        assert_eq!(place_repeaters_grid(1000.0, 1, 15.0), vec![Position3D::new(500.0, 500.0, 15.0)]);
        let g = place_repeaters_grid(500.0, 2, 15.0);
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|p| [125.0, 375.0].contains(&p.x) && [125.0, 375.0].contains(&p.y)));
    }

    #[test]
    fn distances() {
        let o = Position3D::new(0.0, 0.0, 0.0);
        assert_eq!(distance3d(&o, &Position3D::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(distance3d(&o, &o), 0.0);
        assert_eq!(
            distance3d(&Position3D::new(0.0, 0.0, 25.0), &Position3D::new(0.0, 0.0, 1.5)),
            23.5
        );
        assert_eq!(pathloss_distance(&o, &o), 1.0);
    }

    #[test]
    fn bs_at_centre() {
        let s = scenario();
        assert_eq!(s.bs, Position3D::new(500.0, 500.0, 25.0));
        assert_eq!(s.num_repeaters(), 16);
        assert!(s.repeaters.iter().all(|r| s.contains(r)));
    }

    #[test]
    fn degenerate_area_drop() {
        let cfg = ScenarioConfig {
            area_side_m: 0.0,
            grid_dim: 0,
            ..ScenarioConfig::default()
        };
        let s = Scenario::new(&cfg);
        let ue = s.drop_ue(&mut StreamKey::root(1).rng());
        assert_eq!(ue, Position3D::new(0.0, 0.0, 1.5));
    }

    #[test]
    fn seeded_drop_is_reproducible() {
        let s = scenario();
        let a = s.drop_ue(&mut StreamKey::root(42).rng());
        let b = s.drop_ue(&mut StreamKey::root(42).rng());
        assert_eq!(a, b);
        assert!(s.contains(&a));
        assert_eq!(a.z, 1.5);
    }

    #[test]
    fn drop_mean_is_centred() {
        let s = scenario();
        let mut rng = StreamKey::root(9).rng();
        let n = 10_000;
        let mean_x = (0..n).map(|_| s.drop_ue(&mut rng).x).sum::<f64>() / n as f64;
        assert!((mean_x - 500.0).abs() < 0.05 * 500.0, "mean x {mean_x}");
    }

    #[test]
    fn closest_repeater_ties_to_lowest_index() {
        let s = scenario();
        // Equidistant from repeaters 0 (125,125) and 1 (375,125).
        let ue = Position3D::new(250.0, 125.0, 1.5);
        assert_eq!(s.closest_repeater(&ue), Some(0));
        let ue = Position3D::new(375.0, 375.0, 1.5);
        assert_eq!(s.closest_repeater(&ue), Some(5));
    }

    proptest! {
        #[test]
        fn grid_is_symmetric_under_axis_swap(side in 1.0f64..5000.0, dim in 1usize..8) {
            let grid = place_repeaters_grid(side, dim, 15.0);
            prop_assert_eq!(grid.len(), dim * dim);
            for p in &grid {
                let swapped = Position3D::new(p.y, p.x, p.z);
                prop_assert!(grid.contains(&swapped));
                prop_assert!(p.x > 0.0 && p.x < side && p.y > 0.0 && p.y < side);
            }
        }

        #[test]
        fn distance_is_symmetric(ax in -1e3f64..1e3, ay in -1e3f64..1e3, bx in -1e3f64..1e3, bz in 0.0f64..50.0) {
            let a = Position3D::new(ax, ay, 1.5);
            let b = Position3D::new(bx, 0.0, bz);
            prop_assert_eq!(distance3d(&a, &b), distance3d(&b, &a));
        }
    }
}
