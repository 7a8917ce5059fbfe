//! Metrics over allocation outcomes, parameter sweeps, and CSV export.
//!
//! A sweep varies one knob over a list of values, regenerates a scenario per
//! (value, seed) pair, runs each requested strategy, and emits one
//! [`MetricRow`] per (value, seed, strategy) in that nesting order. Utility
//! columns are bit-reproducible for a given build; the `level*_seconds`
//! columns are wall-clock medians and naturally jitter between runs.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::economics::local_utility;
use crate::error::Error;
use crate::generator::{generate, CountSpec, GenConfig};
use crate::model::{CellId, Scenario};
use crate::pipeline::{run, AllocationOutcome, Strategy};

/// Utility of the do-nothing allocation where every task stays local.
pub fn all_local_utility(sc: &Scenario) -> f64 {
    sc.devices.iter().map(|d| local_utility(d, sc)).sum()
}

/// System utility averaged over cells.
pub fn mean_cell_utility(sc: &Scenario, outcome: &AllocationOutcome) -> f64 {
    outcome.system_utility / sc.cells() as f64
}

/// System utility in excess of leaving every task local.
pub fn utility_gain(sc: &Scenario, outcome: &AllocationOutcome) -> f64 {
    outcome.system_utility - all_local_utility(sc)
}

/// Share of level-1 agreements that still execute away from their device in
/// the final allocation (1 when there were no agreements).
pub fn offloading_ratio(outcome: &AllocationOutcome) -> f64 {
    let agreed = outcome.agreed();
    if agreed == 0 {
        1.0
    } else {
        outcome.offloaded() as f64 / agreed as f64
    }
}

/// Per-cell offloading ratios, in cell order.
pub fn per_cell_offloading_ratios(sc: &Scenario, outcome: &AllocationOutcome) -> Vec<f64> {
    (0..sc.cells())
        .map(|c| {
            let mut agreed = 0usize;
            let mut offloaded = 0usize;
            for d in sc.devices_in_cell(CellId(c)) {
                if outcome.bargains[d.id.0].offload {
                    agreed += 1;
                }
                if outcome.decisions[d.id.0].mode.is_offloaded() {
                    offloaded += 1;
                }
            }
            if agreed == 0 { 1.0 } else { offloaded as f64 / agreed as f64 }
        })
        .collect()
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64
}

/// Median; averages the middle pair for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    match s.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => s[n / 2],
        n => (s[n / 2 - 1] + s[n / 2]) / 2.0,
    }
}

/// Size regime of generated scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    Desk,
    Paper,
}

impl Scale {
    pub fn base_config(self, seed: u64) -> GenConfig {
        match self {
            Scale::Desk => GenConfig::desk(seed),
            Scale::Paper => GenConfig::paper(seed),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::InvalidConfig(format!(
                "unknown scale {other:?} (expected desk or paper)"
            ))),
        }
    }
}

/// The knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    /// Number of cells.
    Cells,
    /// Task devices per cell (every cell gets exactly this count).
    TdCount,
    /// Aux devices per cell (every cell gets exactly this count).
    AdCount,
    /// Energy-cost weight.
    Gamma,
    /// Adjacent-cell difference of a symmetric device-count profile whose
    /// mean stays at the base scale's mean.
    TdSpread,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Cells => "cells",
            SweepParam::TdCount => "td-count",
            SweepParam::AdCount => "ad-count",
            SweepParam::Gamma => "gamma",
            SweepParam::TdSpread => "td-spread",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParam::Cells,
            SweepParam::TdCount,
            SweepParam::AdCount,
            SweepParam::Gamma,
            SweepParam::TdSpread,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown sweep parameter {s:?} (expected cells, td-count, ad-count, gamma, \
                 or td-spread)"
            ))
        })
    }
}

/// A sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub scale: Scale,
    /// Base energy-cost weight (ignored while sweeping `Gamma`).
    pub gamma: f64,
    /// Extra identical runs per point; level timings take the median over
    /// `1 + timing_repeats` runs.
    pub timing_repeats: usize,
}

impl SweepSpec {
    /// Scenario recipe for one swept value at one seed.
    pub fn config_for(&self, value: f64, seed: u64) -> Result<GenConfig, Error> {
        let mut cfg = self.scale.base_config(seed);
        cfg.gamma = self.gamma;
        match self.param {
            SweepParam::Cells => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!("bad cell count {value}")));
                }
                cfg.cells = value as usize;
            }
            SweepParam::TdCount => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!("bad device count {value}")));
                }
                cfg.td_count = CountSpec::Spread { mean: value, step: 0.0 };
            }
            SweepParam::AdCount => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!("bad device count {value}")));
                }
                cfg.ad_count = CountSpec::Spread { mean: value, step: 0.0 };
            }
            SweepParam::Gamma => cfg.gamma = value,
            SweepParam::TdSpread => {
                let mean = match self.scale {
                    Scale::Desk => 50.0,
                    Scale::Paper => 500.0,
                };
                cfg.td_count = CountSpec::Spread { mean, step: value };
            }
        }
        Ok(cfg)
    }
}

/// One measurement: a strategy run on one generated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub param: String,
    pub value: f64,
    pub seed: u64,
    pub strategy: String,
    pub cells: usize,
    pub devices: usize,
    pub aux_devices: usize,
    pub system_utility: f64,
    pub mean_cell_utility: f64,
    pub utility_gain: f64,
    pub esp_utility: f64,
    pub offloading_ratio: f64,
    pub offloading_ratio_variance: f64,
    pub agreed: usize,
    pub offloaded: usize,
    pub moved: usize,
    pub auctioned: usize,
    pub level1_seconds: f64,
    pub level2_seconds: f64,
    pub level3_seconds: f64,
}

/// Builds the row for one finished run.
pub fn metric_row(
    param: &str,
    value: f64,
    sc: &Scenario,
    outcome: &AllocationOutcome,
) -> MetricRow {
    MetricRow {
        param: param.to_string(),
        value,
        seed: sc.seed,
        strategy: outcome.strategy.to_string(),
        cells: sc.cells(),
        devices: sc.devices.len(),
        aux_devices: sc.aux_devices.len(),
        system_utility: outcome.system_utility,
        mean_cell_utility: mean_cell_utility(sc, outcome),
        utility_gain: utility_gain(sc, outcome),
        esp_utility: outcome.esp_utility,
        offloading_ratio: offloading_ratio(outcome),
        offloading_ratio_variance: variance(&per_cell_offloading_ratios(sc, outcome)),
        agreed: outcome.agreed(),
        offloaded: outcome.offloaded(),
        moved: outcome.moves.len(),
        auctioned: outcome.matches.len(),
        level1_seconds: outcome.timing.level1.as_secs_f64(),
        level2_seconds: outcome.timing.level2.as_secs_f64(),
        level3_seconds: outcome.timing.level3.as_secs_f64(),
    }
}

/// Runs the sweep, one row per (value, seed, strategy), in that order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<MetricRow>, Error> {
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &seed in &spec.seeds {
            let cfg = spec.config_for(value, seed)?;
            let sc = generate(&cfg)?;
            for &strategy in &spec.strategies {
                let outcome = run(&sc, strategy)?;
                let mut row = metric_row(spec.param.name(), value, &sc, &outcome);
                if spec.timing_repeats > 0 {
                    let mut l1 = vec![row.level1_seconds];
                    let mut l2 = vec![row.level2_seconds];
                    let mut l3 = vec![row.level3_seconds];
                    for _ in 0..spec.timing_repeats {
                        let again = run(&sc, strategy)?;
                        l1.push(again.timing.level1.as_secs_f64());
                        l2.push(again.timing.level2.as_secs_f64());
                        l3.push(again.timing.level3.as_secs_f64());
                    }
                    row.level1_seconds = median(&l1);
                    row.level2_seconds = median(&l2);
                    row.level3_seconds = median(&l3);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line; column order is the field order
/// of [`MetricRow`].
pub fn write_csv<W: Write>(rows: &[MetricRow], writer: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
