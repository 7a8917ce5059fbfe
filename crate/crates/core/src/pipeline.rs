//! End-to-end allocation: runs the levels in order for a chosen strategy
//! and settles every task's final decision and every party's utility.
//!
//! Control flow mirrors the multi-level design: level 1 always runs; level 2
//! runs only when at least one cell is overloaded *and* at least one is not
//! (otherwise there is nobody to send or to receive); level 3 runs only in
//! cells still holding unplaced tasks. Tasks nothing could take revert to
//! local execution at zero fee.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::auction::{build_auction_input, run_double_auction, TaskAdMatch};
use crate::bargain::{bargain_all, filter_overloaded, BargainOutcome, CellLoadReport};
use crate::baselines::{round_robin_schedule, stackelberg_bargain, vickrey_rental};
use crate::economics::{ad_utility, esp_utility, td_utility};
use crate::error::Error;
use crate::model::{CellId, Decision, ExecutionMode, Scenario, TdId};
use crate::schedule::{schedule_across_es, Reassignment};

/// An allocation strategy: the full three-level pipeline, a truncation of
/// it, or the pipeline with one level swapped for a baseline mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// All three levels.
    Full,
    /// Level 1 only; spilled tasks revert to local execution.
    ConventionalEdge,
    /// Levels 1 and 2; tasks no server takes revert to local.
    CollaborativeEdge,
    /// Levels 1 and 3; spilled tasks go straight to the cell auction.
    CollaborativeEdgeEnd,
    /// All levels, with level 1 replaced by provider-dictated fees.
    Level1Stackelberg,
    /// All levels, with level 2 replaced by round-robin placement.
    Level2RoundRobin,
    /// All levels, with level 3 replaced by per-task Vickrey rental.
    Level3Vickrey,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Full,
        Strategy::ConventionalEdge,
        Strategy::CollaborativeEdge,
        Strategy::CollaborativeEdgeEnd,
        Strategy::Level1Stackelberg,
        Strategy::Level2RoundRobin,
        Strategy::Level3Vickrey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::ConventionalEdge => "conventional-edge",
            Strategy::CollaborativeEdge => "collaborative-edge",
            Strategy::CollaborativeEdgeEnd => "collaborative-edge-end",
            Strategy::Level1Stackelberg => "level1-stackelberg",
            Strategy::Level2RoundRobin => "level2-round-robin",
            Strategy::Level3Vickrey => "level3-vickrey",
        }
    }

    pub fn uses_level2(self) -> bool {
        !matches!(self, Strategy::ConventionalEdge | Strategy::CollaborativeEdgeEnd)
    }

    pub fn uses_level3(self) -> bool {
        !matches!(self, Strategy::ConventionalEdge | Strategy::CollaborativeEdge)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Strategy::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown strategy {s:?} (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Wall-clock time spent in each level (zero when a level did not run).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LevelTiming {
    pub level1: Duration,
    pub level2: Duration,
    pub level3: Duration,
}

/// Everything a strategy run produced.
#[derive(Debug, Clone)]
pub struct AllocationOutcome {
    pub strategy: Strategy,
    /// Final decision per task device, indexed by device id.
    pub decisions: Vec<Decision>,
    /// Level-1 outcome per task device, indexed by device id.
    pub bargains: Vec<BargainOutcome>,
    /// Per-cell load report after the level-1 capacity filter.
    pub reports: Vec<CellLoadReport>,
    /// Level-2 placements, in placement order.
    pub moves: Vec<Reassignment>,
    /// Level-3 trades, in trade order.
    pub matches: Vec<TaskAdMatch>,
    /// Total reward per aux device, indexed by aux-device id.
    pub ad_rewards: Vec<f64>,
    /// Cycles delegated per aux device, indexed by aux-device id.
    pub ad_cycles: Vec<f64>,
    /// Utility per task device, indexed by device id.
    pub td_utilities: Vec<f64>,
    /// Utility per aux device (rewards minus true costs at the reported
    /// per-cycle price), indexed by aux-device id.
    pub ad_utilities: Vec<f64>,
    /// Provider utility.
    pub esp_utility: f64,
    /// Sum of provider, task-device, and aux-device utilities.
    pub system_utility: f64,
    pub timing: LevelTiming,
}

impl AllocationOutcome {
    /// Devices whose level-1 negotiation agreed to offload.
    pub fn agreed(&self) -> usize {
        self.bargains.iter().filter(|b| b.offload).count()
    }

    /// Devices whose final decision executes away from the device.
    pub fn offloaded(&self) -> usize {
        self.decisions.iter().filter(|d| d.mode.is_offloaded()).count()
    }
}

/// Runs `strategy` on `sc`.
pub fn run(sc: &Scenario, strategy: Strategy) -> Result<AllocationOutcome, Error> {
    sc.check_structure()?;

    let start = Instant::now();
    let bargains: Vec<BargainOutcome> = match strategy {
        Strategy::Level1Stackelberg => {
            sc.devices.iter().map(|d| stackelberg_bargain(d, sc)).collect()
        }
        _ => bargain_all(sc),
    };
    let reports: Vec<CellLoadReport> = (0..sc.cells())
        .map(|c| {
            let cell = CellId(c);
            let outcomes: Vec<&BargainOutcome> =
                sc.devices_in_cell(cell).map(|d| &bargains[d.id.0]).collect();
            filter_overloaded(cell, sc.server(cell).capacity, &outcomes)
        })
        .collect();
    let mut timing = LevelTiming { level1: start.elapsed(), ..Default::default() };

    let n = sc.devices.len();
    let mut decisions = vec![Decision::local(); n];
    for r in &reports {
        for &id in &r.kept {
            decisions[id.0] =
                Decision { mode: ExecutionMode::PrimaryEs, fee: bargains[id.0].fee, reward: 0.0 };
        }
    }

    let any_overloaded = reports.iter().any(|r| r.overloaded());
    let any_spare = reports.iter().any(|r| !r.overloaded());
    let mut moves: Vec<Reassignment> = Vec::new();
    let unplaced: Vec<(CellId, Vec<TdId>)>;
    if strategy.uses_level2() && any_overloaded && any_spare {
        let start = Instant::now();
        let plan = match strategy {
            Strategy::Level2RoundRobin => round_robin_schedule(sc, &bargains, &reports),
            _ => schedule_across_es(sc, &bargains, &reports),
        };
        timing.level2 = start.elapsed();
        for mv in &plan.moves {
            decisions[mv.device.0] = Decision {
                mode: ExecutionMode::NeighborEs(mv.to),
                fee: bargains[mv.device.0].fee,
                reward: 0.0,
            };
        }
        moves = plan.moves;
        unplaced = plan.unplaced;
    } else {
        unplaced = reports
            .iter()
            .filter(|r| r.overloaded())
            .map(|r| (r.cell, r.spilled.clone()))
            .collect();
    }

    let mut matches: Vec<TaskAdMatch> = Vec::new();
    if strategy.uses_level3() && unplaced.iter().any(|(_, tasks)| !tasks.is_empty()) {
        let start = Instant::now();
        for (cell, tasks) in unplaced.iter().filter(|(_, tasks)| !tasks.is_empty()) {
            let input = build_auction_input(sc, *cell, tasks, &bargains);
            let result = match strategy {
                Strategy::Level3Vickrey => vickrey_rental(&input),
                _ => run_double_auction(&input),
            };
            for m in result.matches {
                decisions[m.task.0] = Decision {
                    mode: ExecutionMode::AuxDevice(m.seller),
                    fee: bargains[m.task.0].fee,
                    reward: m.reward,
                };
                matches.push(m);
            }
        }
        timing.level3 = start.elapsed();
    }

    let td_utilities: Vec<f64> = sc
        .devices
        .iter()
        .map(|d| td_utility(d, &decisions[d.id.0], sc))
        .collect();
    let mut ad_rewards = vec![0.0; sc.aux_devices.len()];
    let mut ad_cycles = vec![0.0; sc.aux_devices.len()];
    for m in &matches {
        ad_rewards[m.seller.0] += m.reward;
        ad_cycles[m.seller.0] += sc.device(m.task).task.cycles;
    }
    let ad_utilities: Vec<f64> = sc
        .aux_devices
        .iter()
        .map(|a| ad_utility(a.ask, ad_cycles[a.id.0], ad_rewards[a.id.0]))
        .collect();
    let esp = esp_utility(sc, &decisions)?;
    let system =
        esp + td_utilities.iter().sum::<f64>() + ad_utilities.iter().sum::<f64>();

    Ok(AllocationOutcome {
        strategy,
        decisions,
        bargains,
        reports,
        moves,
        matches,
        ad_rewards,
        ad_cycles,
        td_utilities,
        ad_utilities,
        esp_utility: esp,
        system_utility: system,
        timing,
    })
}
