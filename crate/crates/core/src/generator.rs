//! Deterministic random scenario construction.
//!
//! Every cell draws from its own counter-based stream derived from the
//! top-level seed and the cell index, so a cell's population is invariant
//! under adding, removing, or reordering other cells. Within a cell the
//! draw order is fixed: first the device and aux counts, then per device
//! (distance, task size, cycles, deadline, value, processor capacity), then
//! per aux device (distance, capacity, ask scale).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::Error;
use crate::model::{
    AdId, AuxDevice, BackhaulMatrix, CellId, EconParams, EdgeServer, RadioLink, Scenario, Task,
    TaskDevice, TdId, SCHEMA_VERSION,
};

/// Frequency at which the ask scale is anchored: an ask of scale `s` prices
/// a cycle at `s` times the energy cost of computing at 1 GHz.
pub const ASK_REFERENCE_FREQUENCY: f64 = 1e9;

/// A closed numeric range sampled uniformly (degenerate ranges allowed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    fn check(&self, what: &str) -> Result<(), Error> {
        if self.lo.is_finite() && self.hi.is_finite() && 0.0 < self.lo && self.lo <= self.hi {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{what}: bad range [{}, {}]", self.lo, self.hi)))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..self.hi)
        }
    }
}

/// Per-cell device counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CountSpec {
    /// One explicit count per cell.
    Fixed(Vec<usize>),
    /// Independent uniform draw per cell, inclusive on both ends.
    Uniform { lo: usize, hi: usize },
    /// Deterministic arithmetic profile centered on `mean`: adjacent cells
    /// differ by `step`, and the profile is symmetric around the middle
    /// cell, so the average stays at `mean` for any cell count.
    Spread { mean: f64, step: f64 },
}

impl CountSpec {
    fn check(&self, cells: usize, what: &str) -> Result<(), Error> {
        match self {
            CountSpec::Fixed(counts) if counts.len() != cells => Err(Error::InvalidConfig(
                format!("{what}: {} counts for {cells} cells", counts.len()),
            )),
            CountSpec::Uniform { lo, hi } if lo > hi => {
                Err(Error::InvalidConfig(format!("{what}: bad range [{lo}, {hi}]")))
            }
            CountSpec::Spread { mean, step } => {
                let edge = mean - (cells as f64 - 1.0) / 2.0 * step;
                if *step < 0.0 || edge < 0.0 {
                    Err(Error::InvalidConfig(format!(
                        "{what}: spread mean {mean} step {step} goes negative over {cells} cells"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn resolve(&self, cell: usize, cells: usize, rng: &mut impl Rng) -> usize {
        match self {
            CountSpec::Fixed(counts) => counts[cell],
            CountSpec::Uniform { lo, hi } => rng.gen_range(*lo..=*hi),
            CountSpec::Spread { mean, step } => {
                (mean + (cell as f64 - (cells as f64 - 1.0) / 2.0) * step).round() as usize
            }
        }
    }
}

/// How wireless channel gains are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// Log-distance path loss: gain = `reference_gain · d^(−exponent)` at
    /// distance `d` drawn uniformly over the cell disk between
    /// `min_distance` and `cell_radius` (meters).
    PathLoss { reference_gain: f64, exponent: f64, min_distance: f64, cell_radius: f64 },
    /// The same gain for every link (useful in hand-built tests).
    ConstantGain(f64),
}

impl ChannelModel {
    fn check(&self) -> Result<(), Error> {
        match self {
            ChannelModel::PathLoss { reference_gain, exponent, min_distance, cell_radius } => {
                if *reference_gain > 0.0
                    && *exponent > 0.0
                    && *min_distance > 0.0
                    && cell_radius >= min_distance
                {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("bad path-loss parameters".into()))
                }
            }
            ChannelModel::ConstantGain(g) if *g > 0.0 => Ok(()),
            ChannelModel::ConstantGain(g) => {
                Err(Error::InvalidConfig(format!("bad constant gain {g}")))
            }
        }
    }

    fn sample_gain(&self, rng: &mut impl Rng) -> f64 {
        match self {
            ChannelModel::PathLoss { reference_gain, exponent, min_distance, cell_radius } => {
                // Uniform over the annulus area => d² uniform.
                let d2 = rng.gen_range(min_distance * min_distance..cell_radius * cell_radius);
                reference_gain * d2.sqrt().powf(-exponent)
            }
            ChannelModel::ConstantGain(g) => {
                let _ = rng.gen_range(0.0..1.0); // keep stream alignment
                *g
            }
        }
    }
}

/// Full recipe for a generated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub cells: usize,
    pub td_count: CountSpec,
    pub ad_count: CountSpec,
    pub gamma: f64,
    pub noise_power: f64,
    pub bandwidth: f64,
    pub task_size_bits: Range,
    pub task_cycles: Range,
    pub task_deadline: Range,
    pub task_value: Range,
    pub td_capacity: Range,
    pub td_power: f64,
    pub td_energy_coeff: f64,
    pub es_capacity: f64,
    pub es_energy_coeff: f64,
    pub es_power: f64,
    pub ad_capacity: Range,
    /// Ask as a multiple of the reference per-cycle energy price.
    pub ad_ask_scale: Range,
    pub ad_energy_coeff: f64,
    pub backhaul_rate: f64,
    pub channel: ChannelModel,
}

impl GenConfig {
    /// Small instances that keep every run sub-second: tens of devices per
    /// cell against a 10 GHz server, mixing over- and under-loaded cells.
    pub fn desk(seed: u64) -> Self {
        GenConfig {
            seed,
            cells: 5,
            td_count: CountSpec::Uniform { lo: 20, hi: 80 },
            ad_count: CountSpec::Uniform { lo: 5, hi: 15 },
            gamma: 1.0,
            noise_power: 1e-13,
            bandwidth: 20e6,
            task_size_bits: Range::new(200e3, 500e3),
            task_cycles: Range::new(50e6, 500e6),
            task_deadline: Range::new(0.05, 2.0),
            task_value: Range::new(5.0, 10.0),
            td_capacity: Range::new(0.05e9, 1e9),
            td_power: 2.0,
            td_energy_coeff: 5e-27,
            es_capacity: 10e9,
            es_energy_coeff: 5e-27,
            es_power: 10.0,
            ad_capacity: Range::new(0.5e9, 2e9),
            ad_ask_scale: Range::new(1.0, 3.0),
            ad_energy_coeff: 5e-27,
            backhaul_rate: 100e6,
            channel: ChannelModel::PathLoss {
                reference_gain: 1e-4,
                exponent: 3.5,
                min_distance: 10.0,
                cell_radius: 500.0,
            },
        }
    }

    /// Hundreds of devices per cell; same physics, roughly 10× the load.
    pub fn paper(seed: u64) -> Self {
        GenConfig {
            td_count: CountSpec::Uniform { lo: 200, hi: 800 },
            ad_count: CountSpec::Uniform { lo: 20, hi: 40 },
            ..GenConfig::desk(seed)
        }
    }

    fn check(&self) -> Result<(), Error> {
        if self.cells == 0 {
            return Err(Error::InvalidConfig("need at least one cell".into()));
        }
        self.td_count.check(self.cells, "td_count")?;
        self.ad_count.check(self.cells, "ad_count")?;
        for (range, what) in [
            (&self.task_size_bits, "task_size_bits"),
            (&self.task_cycles, "task_cycles"),
            (&self.task_deadline, "task_deadline"),
            (&self.task_value, "task_value"),
            (&self.td_capacity, "td_capacity"),
            (&self.ad_capacity, "ad_capacity"),
            (&self.ad_ask_scale, "ad_ask_scale"),
        ] {
            range.check(what)?;
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!("bad gamma {}", self.gamma)));
        }
        for (v, what) in [
            (self.noise_power, "noise_power"),
            (self.bandwidth, "bandwidth"),
            (self.td_power, "td_power"),
            (self.td_energy_coeff, "td_energy_coeff"),
            (self.es_capacity, "es_capacity"),
            (self.es_energy_coeff, "es_energy_coeff"),
            (self.es_power, "es_power"),
            (self.ad_energy_coeff, "ad_energy_coeff"),
            (self.backhaul_rate, "backhaul_rate"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{what} must be positive, got {v}")));
            }
        }
        self.channel.check()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The independent stream cell `cell` draws from under `seed`.
fn cell_rng(seed: u64, cell: usize) -> ChaCha8Rng {
    let mix = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(cell as u64 + 1);
    ChaCha8Rng::seed_from_u64(splitmix64(mix))
}

/// Builds the scenario `cfg` describes.
pub fn generate(cfg: &GenConfig) -> Result<Scenario, Error> {
    cfg.check()?;
    let mut devices = Vec::new();
    let mut aux_devices = Vec::new();
    for c in 0..cfg.cells {
        let mut rng = cell_rng(cfg.seed, c);
        let n_td = cfg.td_count.resolve(c, cfg.cells, &mut rng);
        let n_ad = cfg.ad_count.resolve(c, cfg.cells, &mut rng);
        for _ in 0..n_td {
            let gain = cfg.channel.sample_gain(&mut rng);
            let task = Task {
                size_bits: cfg.task_size_bits.sample(&mut rng),
                cycles: cfg.task_cycles.sample(&mut rng),
                deadline: cfg.task_deadline.sample(&mut rng),
                value: cfg.task_value.sample(&mut rng),
            };
            devices.push(TaskDevice {
                id: TdId(devices.len()),
                cell: CellId(c),
                task,
                capacity: cfg.td_capacity.sample(&mut rng),
                transmit_power: cfg.td_power,
                energy_coeff: cfg.td_energy_coeff,
                uplink: RadioLink { gain, interference: 0.0 },
            });
        }
        let ask_unit =
            cfg.gamma * cfg.ad_energy_coeff * ASK_REFERENCE_FREQUENCY * ASK_REFERENCE_FREQUENCY;
        for _ in 0..n_ad {
            let gain = cfg.channel.sample_gain(&mut rng);
            aux_devices.push(AuxDevice {
                id: AdId(aux_devices.len()),
                cell: CellId(c),
                capacity: cfg.ad_capacity.sample(&mut rng),
                energy_coeff: cfg.ad_energy_coeff,
                ask: ask_unit * cfg.ad_ask_scale.sample(&mut rng),
                downlink: RadioLink { gain, interference: 0.0 },
            });
        }
    }
    let scenario = Scenario {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        econ: EconParams {
            gamma: cfg.gamma,
            noise_power: cfg.noise_power,
            bandwidth: cfg.bandwidth,
        },
        servers: (0..cfg.cells)
            .map(|c| EdgeServer {
                id: CellId(c),
                capacity: cfg.es_capacity,
                energy_coeff: cfg.es_energy_coeff,
                transmit_power: cfg.es_power,
            })
            .collect(),
        devices,
        aux_devices,
        backhaul: BackhaulMatrix::uniform(cfg.cells, cfg.backhaul_rate),
    };
    scenario.check_structure()?;
    Ok(scenario)
}

/// Writes a scenario as pretty JSON.
pub fn save_scenario(sc: &Scenario, path: &Path) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(sc)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a scenario back and checks its structure.
pub fn load_scenario(path: &Path) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path)?;
    let sc: Scenario = serde_json::from_str(&text)?;
    sc.check_structure()?;
    Ok(sc)
}
