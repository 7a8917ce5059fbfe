//! Level 2: overloaded edge servers hand spilled tasks to under-loaded
//! neighbor servers over the backhaul.
//!
//! Overloaded servers are served most-overloaded first. Each considers its
//! spilled tasks in the priority order level 1 produced and tries receiving
//! servers in descending backhaul-rate order; a task lands on the first
//! receiver that can still meet the deadline, has the frequency to spare,
//! and leaves the provider a strictly positive margin at the already-agreed
//! fee. Receiver capacity is shared state: earlier placements reduce what
//! later overloaded servers can use.

use crate::bargain::{BargainOutcome, CellLoadReport};
use crate::economics::{required_frequency, transfer_delay};
use crate::model::{CellId, ExecutionMode, Scenario, TdId};

/// One spilled task placed on a neighbor server.
#[derive(Debug, Clone, PartialEq)]
pub struct Reassignment {
    pub device: TdId,
    pub from: CellId,
    pub to: CellId,
    /// Frequency the receiving server commits, in Hz.
    pub frequency: f64,
    /// Provider margin on the task at the receiving server.
    pub margin: f64,
}

/// Outcome of the inter-server scheduling round.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReassignmentPlan {
    pub moves: Vec<Reassignment>,
    /// Spilled tasks no receiver took, per overloaded cell in processing
    /// order; task order within a cell preserves the level-1 priority order.
    pub unplaced: Vec<(CellId, Vec<TdId>)>,
}

/// How far a cell's level-1 demand exceeds its server capacity (negative
/// when under-loaded).
pub fn es_priority(report: &CellLoadReport) -> f64 {
    report.demand - report.capacity
}

/// Runs the scheduling round. `bargains` must hold one entry per task
/// device, indexed by device id; `reports` one entry per cell.
pub fn schedule_across_es(
    sc: &Scenario,
    bargains: &[BargainOutcome],
    reports: &[CellLoadReport],
) -> ReassignmentPlan {
    let mut spare: Vec<f64> = reports.iter().map(|r| r.spare()).collect();

    let mut senders: Vec<&CellLoadReport> =
        reports.iter().filter(|r| r.overloaded()).collect();
    senders.sort_by(|a, b| {
        es_priority(b).partial_cmp(&es_priority(a)).unwrap().then(a.cell.cmp(&b.cell))
    });
    let receivers: Vec<CellId> =
        reports.iter().filter(|r| !r.overloaded()).map(|r| r.cell).collect();

    let mut plan = ReassignmentPlan::default();
    for sender in senders {
        let mut ranked = receivers.clone();
        ranked.sort_by(|&a, &b| {
            sc.backhaul
                .rate(sender.cell, b)
                .partial_cmp(&sc.backhaul.rate(sender.cell, a))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut leftover = Vec::new();
        for &task in &sender.spilled {
            let dev = sc.device(task);
            let fee = bargains[task.0].fee;
            let mut placed = false;
            for &to in &ranked {
                let Ok(frequency) = required_frequency(dev, ExecutionMode::NeighborEs(to), sc)
                else {
                    continue;
                };
                if frequency > spare[to.0] {
                    continue;
                }
                let fwd = transfer_delay(dev.task.size_bits, sc.backhaul.rate(sender.cell, to));
                let gamma = sc.econ.gamma;
                let margin = fee
                    - gamma * sc.server(sender.cell).transmit_power * fwd
                    - gamma * sc.server(to).energy_coeff * frequency * frequency * dev.task.cycles;
                if margin <= 0.0 {
                    continue;
                }
                spare[to.0] -= frequency;
                plan.moves.push(Reassignment { device: task, from: sender.cell, to, frequency, margin });
                placed = true;
                break;
            }
            if !placed {
                leftover.push(task);
            }
        }
        plan.unplaced.push((sender.cell, leftover));
    }
    plan
}
