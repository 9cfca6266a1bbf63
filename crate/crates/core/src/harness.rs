//! Monte-Carlo experiment driver.
//!
//! One *trial* is a (drop, realization) pair: a UE position and a channel
//! realization, both drawn from index-derived streams. Every strategy and
//! every sweep point of a trial reuses the same UE and channel, so strategy
//! comparisons are paired and the `none` baseline does not move along an
//! amplification sweep.

use std::collections::BTreeMap;
use std::path::Path;

use log::debug;

use crate::activation::{Strategy, StrategyKind};
use crate::capacity;
use crate::channel::{ChannelModel, ChannelRealization};
use crate::config::ExperimentConfig;
use crate::geometry::{Position3D, Scenario};
use crate::noise::NoiseModel;
use crate::par::{self, Schedule};
use crate::rng::{label, StreamKey};
use crate::taps::{select_reference_and_length, GuardTaps, TapSet};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "strategy",
    "bandwidth_hz",
    "alpha_db",
    "drop",
    "realization",
    "capacity_bps",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub strategy: StrategyKind,
    pub bandwidth_hz: f64,
    pub alpha_db: f64,
    pub drop: usize,
    pub realization: usize,
    pub capacity_bps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub alpha_db: f64,
}

impl SweepPoint {
    /// Point whose subcarrier count follows from the bandwidth and spacing.
    pub fn from_spacing(bandwidth_hz: f64, spacing_hz: f64, alpha_db: f64) -> Result<Self> {
        let ratio = bandwidth_hz / spacing_hz;
        let subcarriers = ratio.round();
        if !(subcarriers >= 1.0) || (ratio - subcarriers).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::BandwidthSpacingMismatch {
                bandwidth: bandwidth_hz,
                spacing: spacing_hz,
            });
        }
        Ok(Self {
            bandwidth_hz,
            subcarriers: subcarriers as usize,
            alpha_db,
        })
    }
}

/// Everything derived from the configuration once per run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    pub model: ChannelModel,
    pub n0: f64,
    pub repeater_delays: Vec<f64>,
}

/// UE drop and channel realization for one (drop, realization) index pair.
#[derive(Debug, Clone)]
pub struct Trial {
    pub drop: usize,
    pub realization: usize,
    pub ue: Position3D,
    pub channel: ChannelRealization,
    activation_key: StreamKey,
}

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let scenario = Scenario::new(&config.scenario);
        let model = ChannelModel::new(&config.channel, config.scenario.carrier_frequency_hz);
        let n0 = config.noise.n0();
        let repeater_delays = vec![config.taps.repeater_delay_ns * 1e-9; scenario.num_repeaters()];
        Ok(Self {
            config,
            scenario,
            model,
            n0,
            repeater_delays,
        })
    }

    fn root(&self) -> StreamKey {
        StreamKey::root(self.config.seed)
    }

    pub fn ue_position(&self, drop: usize) -> Position3D {
        let mut rng = self.root().child(label::UE_DROP).child(drop as u64).rng();
        self.scenario.drop_ue(&mut rng)
    }

    pub fn trial(&self, drop: usize, realization: usize) -> Result<Trial> {
        let ue = self.ue_position(drop);
        let key = self.root().child(label::REALIZATION).child(drop as u64).child(realization as u64);
        let channel = self
            .model
            .generate_realization(&self.scenario, &ue, key)
            .map_err(|e| e.context(format!("drop {drop}, realization {realization}")))?;
        let activation_key = self.root().child(label::ACTIVATION).child(drop as u64).child(realization as u64);
        Ok(Trial {
            drop,
            realization,
            ue,
            channel,
            activation_key,
        })
    }

    pub fn strategy(&self, kind: StrategyKind, alpha_db: f64) -> Strategy {
        Strategy {
            kind,
            alpha_db,
            rand_count: self.config.activation.rand_count,
            convention: self.config.activation.gain_convention,
        }
    }

    /// Capacity of every strategy in `strategies` at one sweep point.
    pub fn evaluate(&self, trial: &Trial, point: SweepPoint, strategies: &[StrategyKind]) -> Result<Vec<f64>> {
        let guard = GuardTaps {
            pre: self.config.taps.pre_guard_taps,
            post: self.config.taps.guard_taps,
        };
        let full = select_reference_and_length(&trial.channel, &self.repeater_delays, point.bandwidth_hz, guard)?;
        let window = full.fit(point.subcarriers - 1, guard.pre, point.bandwidth_hz);
        if window != full {
            debug!(
                "drop {} realization {}: tap count {} reduced to {}",
                trial.drop, trial.realization, full.tap_count, window.tap_count
            );
        }
        let f_c = self.scenario.carrier_frequency;
        let taps = TapSet::synthesize(
            &trial.channel,
            window,
            point.bandwidth_hz,
            f_c,
            self.repeater_delays.clone(),
        )?;
        let noise = NoiseModel::new(&trial.channel.rep_to_bs, point.subcarriers, point.bandwidth_hz, f_c, self.n0);

        strategies
            .iter()
            .map(|&kind| {
                let strategy = self.strategy(kind, point.alpha_db);
                let alpha = strategy.select(&self.scenario, &trial.ue, &mut trial.activation_key.rng())?;
                let h = taps.effective_taps(&alpha)?;
                let d = noise.total(&alpha)?;
                let result = capacity::evaluate(
                    &h,
                    &d,
                    point.bandwidth_hz,
                    self.config.link.signal_psd_w_per_hz,
                    self.config.link.eigen_floor,
                )?;
                Ok(result.capacity_bps)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.context(format!("drop {}, realization {}", trial.drop, trial.realization)))
    }

    fn row(
        &self,
        experiment: &str,
        kind: StrategyKind,
        point: SweepPoint,
        (drop, realization): (usize, usize),
        capacity_bps: f64,
    ) -> ResultRow {
        ResultRow {
            experiment: experiment.to_string(),
            strategy: kind,
            bandwidth_hz: point.bandwidth_hz,
            alpha_db: point.alpha_db,
            drop,
            realization,
            capacity_bps,
            seed: self.config.seed,
        }
    }

    /// Runs every (point, drop, realization) task and returns rows ordered
    /// sweep-major, then strategy, drop and realization.
    pub fn run_sweep(&self, experiment: &str, points: &[SweepPoint], schedule: Schedule) -> Result<Vec<ResultRow>> {
        let strategies = &self.config.strategies;
        if strategies.is_empty() || points.is_empty() {
            return Ok(Vec::new());
        }
        let (drops, reals) = (self.config.drops, self.config.realizations);
        let tasks: Vec<(usize, usize)> = (0..drops).flat_map(|d| (0..reals).map(move |r| (d, r))).collect();

        // One task per trial; every sweep point reuses its channel.
        let per_trial = par::map(tasks, schedule, |(drop, realization)| -> Result<Vec<Vec<f64>>> {
            let trial = self.trial(drop, realization)?;
            points
                .iter()
                .map(|&p| self.evaluate(&trial, p, strategies))
                .collect()
        });

        let mut table: BTreeMap<(usize, usize, usize, usize), ResultRow> = BTreeMap::new();
        for (t, caps) in per_trial.into_iter().enumerate() {
            let caps = caps?;
            let (drop, realization) = (t / reals, t % reals);
            for (pi, (point, per_strategy)) in points.iter().zip(caps).enumerate() {
                for (si, (&kind, c)) in strategies.iter().zip(per_strategy).enumerate() {
                    table.insert((pi, si, drop, realization), self.row(experiment, kind, *point, (drop, realization), c));
                }
            }
        }
        Ok(table.into_values().collect())
    }

    pub fn fig1_points(&self) -> Result<Vec<SweepPoint>> {
        let spacing = self.config.link.subcarrier_spacing_hz;
        self.config
            .fig1
            .bandwidths_hz
            .iter()
            .map(|&b| SweepPoint::from_spacing(b, spacing, self.config.fig1.alpha_db))
            .collect()
    }

    pub fn fig2_points(&self) -> Vec<SweepPoint> {
        let f = &self.config.fig2;
        f.alpha_db
            .iter()
            .map(|&a| SweepPoint {
                bandwidth_hz: f.bandwidth_hz,
                subcarriers: f.subcarriers,
                alpha_db: a,
            })
            .collect()
    }
}

/// One evaluation at explicit indices and sweep point.
pub fn run_single(
    config: &ExperimentConfig,
    drop: usize,
    realization: usize,
    strategy: StrategyKind,
    point: SweepPoint,
) -> Result<ResultRow> {
    let pipeline = Pipeline::new(config.clone())?;
    let trial = pipeline.trial(drop, realization)?;
    let capacity = pipeline.evaluate(&trial, point, &[strategy])?[0];
    Ok(pipeline.row("single", strategy, point, (drop, realization), capacity))
}

/// Bandwidth sweep at fixed subcarrier spacing; the transmit PSD is fixed so
/// the total power grows with the bandwidth.
pub fn run_fig1_sweep(config: &ExperimentConfig, schedule: Schedule) -> Result<Vec<ResultRow>> {
    let pipeline = Pipeline::new(config.clone())?;
    let points = pipeline.fig1_points()?;
    pipeline.run_sweep("fig1", &points, schedule)
}

/// Amplification sweep at fixed bandwidth and subcarrier count.
pub fn run_fig2_sweep(config: &ExperimentConfig, schedule: Schedule) -> Result<Vec<ResultRow>> {
    let pipeline = Pipeline::new(config.clone())?;
    let points = pipeline.fig2_points();
    pipeline.run_sweep("fig2", &points, schedule)
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        // `{}` on f64 prints the shortest round-tripping plain decimal
        w.write_record([
            r.experiment.clone(),
            r.strategy.to_string(),
            r.bandwidth_hz.to_string(),
            r.alpha_db.to_string(),
            r.drop.to_string(),
            r.realization.to_string(),
            r.capacity_bps.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |what: &str| Error::Config(format!("{}: malformed {what}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad("header"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record.map_err(csv_err)?;
        let f = |i: usize| rec.get(i).ok_or_else(|| bad("record"));
        rows.push(ResultRow {
            experiment: f(0)?.to_string(),
            strategy: f(1)?.parse()?,
            bandwidth_hz: f(2)?.parse().map_err(|_| bad("bandwidth_hz"))?,
            alpha_db: f(3)?.parse().map_err(|_| bad("alpha_db"))?,
            drop: f(4)?.parse().map_err(|_| bad("drop"))?,
            realization: f(5)?.parse().map_err(|_| bad("realization"))?,
            capacity_bps: f(6)?.parse().map_err(|_| bad("capacity_bps"))?,
            seed: f(7)?.parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub strategy: StrategyKind,
    pub bandwidth_hz: f64,
    pub alpha_db: f64,
    pub drops: usize,
    pub mean_capacity_bps: f64,
}

/// Mean over realizations within each drop, then over drops, per
/// (experiment, sweep point, strategy). Groups keep first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    type Key = (String, StrategyKind, u64, u64);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        let key = (r.experiment.clone(), r.strategy, r.bandwidth_hz.to_bits(), r.alpha_db.to_bits());
        let per_drop = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            BTreeMap::new()
        });
        let slot = per_drop.entry(r.drop).or_insert((0.0, 0));
        slot.0 += r.capacity_bps;
        slot.1 += 1;
    }
    order
        .into_iter()
        .map(|key| {
            let per_drop = &groups[&key];
            let mean = per_drop.values().map(|(sum, n)| sum / *n as f64).sum::<f64>() / per_drop.len() as f64;
            SummaryRow {
                experiment: key.0,
                strategy: key.1,
                bandwidth_hz: f64::from_bits(key.2),
                alpha_db: f64::from_bits(key.3),
                drops: per_drop.len(),
                mean_capacity_bps: mean,
            }
        })
        .collect()
}

/// Mean capacity of one (strategy, bandwidth, alpha) group, if present.
pub fn mean_capacity(summary: &[SummaryRow], strategy: StrategyKind, bandwidth_hz: f64, alpha_db: f64) -> Option<f64> {
    summary
        .iter()
        .find(|s| s.strategy == strategy && s.bandwidth_hz == bandwidth_hz && s.alpha_db == alpha_db)
        .map(|s| s.mean_capacity_bps)
}
