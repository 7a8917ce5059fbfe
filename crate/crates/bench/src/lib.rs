//! Shared helpers for the criterion benchmarks: prebuilt scenarios at a few
//! sizes so individual benches measure the pipeline, not generation.

use edgemarket::generator::{generate, CountSpec, GenConfig};
use edgemarket::Scenario;

/// Desk-physics scenario with exactly `per_cell` task devices in each of
/// `cells` cells.
pub fn sized_scenario(seed: u64, cells: usize, per_cell: usize) -> Scenario {
    let cfg = GenConfig {
        cells,
        td_count: CountSpec::Spread { mean: per_cell as f64, step: 0.0 },
        ..GenConfig::desk(seed)
    };
    generate(&cfg).expect("benchmark scenario")
}
