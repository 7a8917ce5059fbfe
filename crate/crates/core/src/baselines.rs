//! Baseline mechanisms that swap out one level of the pipeline, used as
//! comparison points in experiments.

use crate::auction::{AuctionInput, AuctionResult, TaskAdMatch};
use crate::bargain::{BargainOutcome, CellLoadReport};
use crate::economics::{local_utility, required_frequency, uplink_delay};
use crate::model::{ExecutionMode, Scenario, TaskDevice};
use crate::schedule::{es_priority, Reassignment, ReassignmentPlan};

/// Level-1 substitute: the provider quotes take-it-or-leave-it terms,
/// setting the fee at the device's walk-away ceiling and keeping the whole
/// surplus. The device, indifferent, accepts whenever offloading is at
/// least as good as going local.
pub fn stackelberg_bargain(dev: &TaskDevice, sc: &Scenario) -> BargainOutcome {
    let t_up = uplink_delay(dev, sc);
    let u_loc = local_utility(dev, sc);
    let ceiling = dev.task.value - sc.econ.gamma * dev.transmit_power * t_up - u_loc;
    let (frequency, floor) = match required_frequency(dev, ExecutionMode::PrimaryEs, sc) {
        Ok(f) => {
            let es = sc.server(dev.cell);
            (f, sc.econ.gamma * es.energy_coeff * f * f * dev.task.cycles)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let offload = frequency.is_finite() && floor < ceiling;
    BargainOutcome {
        device: dev.id,
        offload,
        fee: if offload { ceiling } else { 0.0 },
        fee_floor: floor,
        fee_ceiling: ceiling,
        server_frequency: frequency,
        uplink_delay: t_up,
        local_utility: u_loc,
    }
}

/// Level-2 substitute: overloaded servers (most-overloaded first) deal
/// spilled tasks to under-loaded servers cyclically in cell-id order,
/// checking deadline and capacity but ignoring whether the move is
/// profitable.
pub fn round_robin_schedule(
    sc: &Scenario,
    bargains: &[BargainOutcome],
    reports: &[CellLoadReport],
) -> ReassignmentPlan {
    let mut spare: Vec<f64> = reports.iter().map(|r| r.spare()).collect();
    let mut senders: Vec<&CellLoadReport> = reports.iter().filter(|r| r.overloaded()).collect();
    senders.sort_by(|a, b| {
        es_priority(b).partial_cmp(&es_priority(a)).unwrap().then(a.cell.cmp(&b.cell))
    });
    let receivers: Vec<_> = reports.iter().filter(|r| !r.overloaded()).map(|r| r.cell).collect();

    let mut plan = ReassignmentPlan::default();
    let mut cursor = 0usize;
    for sender in senders {
        let mut leftover = Vec::new();
        for &task in &sender.spilled {
            let dev = sc.device(task);
            let mut placed = false;
            for probe in 0..receivers.len() {
                let slot = (cursor + probe) % receivers.len();
                let to = receivers[slot];
                let Ok(frequency) = required_frequency(dev, ExecutionMode::NeighborEs(to), sc)
                else {
                    continue;
                };
                if frequency > spare[to.0] {
                    continue;
                }
                spare[to.0] -= frequency;
                let fee = bargains[task.0].fee;
                let fwd = dev.task.size_bits / sc.backhaul.rate(sender.cell, to);
                let gamma = sc.econ.gamma;
                let margin = fee
                    - gamma * sc.server(sender.cell).transmit_power * fwd
                    - gamma * sc.server(to).energy_coeff * frequency * frequency * dev.task.cycles;
                plan.moves.push(Reassignment { device: task, from: sender.cell, to, frequency, margin });
                cursor = (slot + 1) % receivers.len();
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

/// Level-3 substitute: a per-task second-price (Vickrey) rental. Each task
/// goes to the cheapest seller that can still meet its deadline and has the
/// frequency spare, paying the second-cheapest such seller's ask per cycle.
/// With fewer than two eligible sellers the task is not served. The
/// provider's bid ceiling is ignored, so it can trade at a loss.
pub fn vickrey_rental(input: &AuctionInput) -> AuctionResult {
    let mut result = AuctionResult {
        matches: Vec::new(),
        unmatched: Vec::new(),
        seller_spare: input.sellers.iter().map(|s| s.capacity).collect(),
    };
    for task in &input.tasks {
        let mut eligible: Vec<usize> = (0..input.sellers.len())
            .filter(|&k| {
                task.offers[k]
                    .map(|o| o.frequency <= result.seller_spare[k])
                    .unwrap_or(false)
            })
            .collect();
        eligible.sort_by(|&a, &b| {
            input.sellers[a]
                .ask
                .partial_cmp(&input.sellers[b].ask)
                .unwrap()
                .then(input.sellers[a].device.cmp(&input.sellers[b].device))
        });
        if eligible.len() < 2 {
            result.unmatched.push(task.device);
            continue;
        }
        let winner = eligible[0];
        let price = input.sellers[eligible[1]].ask;
        let offer = task.offers[winner].unwrap();
        result.seller_spare[winner] -= offer.frequency;
        result.matches.push(TaskAdMatch {
            task: task.device,
            seller: input.sellers[winner].device,
            price_per_cycle: price,
            reward: price * task.cycles,
            frequency: offer.frequency,
        });
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::build_auction_input;
    use crate::bargain::{bargain_all, filter_overloaded, nash_bargain};
    use crate::economics::td_utility;
    use crate::model::{
        AdId, AuxDevice, BackhaulMatrix, CellId, Decision, EconParams, EdgeServer, RadioLink,
        Task, TdId, SCHEMA_VERSION,
    };
    use approx::assert_relative_eq;

    fn scenario(
        cells: &[(f64, &[(f64, f64)])],
        asks_caps: &[(f64, f64)],
    ) -> Scenario {
        let mut devices = Vec::new();
        for (c, (_, tasks)) in cells.iter().enumerate() {
            for &(cycles, deadline) in tasks.iter() {
                devices.push(TaskDevice {
                    id: TdId(devices.len()),
                    cell: CellId(c),
                    task: Task { size_bits: 2e5, cycles, deadline, value: 8.0 },
                    capacity: 1e7,
                    transmit_power: 2.0,
                    energy_coeff: 5e-27,
                    uplink: RadioLink { gain: 5e-14, interference: 0.0 },
                });
            }
        }
        Scenario {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            econ: EconParams { gamma: 1.0, noise_power: 1e-13, bandwidth: 20e6 },
            servers: cells
                .iter()
                .enumerate()
                .map(|(c, (cap, _))| EdgeServer {
                    id: CellId(c),
                    capacity: *cap,
                    energy_coeff: 5e-27,
                    transmit_power: 10.0,
                })
                .collect(),
            devices,
            aux_devices: asks_caps
                .iter()
                .enumerate()
                .map(|(k, &(ask, capacity))| AuxDevice {
                    id: AdId(k),
                    cell: CellId(0),
                    capacity,
                    energy_coeff: 5e-27,
                    ask,
                    downlink: RadioLink { gain: 1e-14, interference: 0.0 },
                })
                .collect(),
            backhaul: BackhaulMatrix::uniform(cells.len(), 1e8),
        }
    }

    #[test]
    fn stackelberg_takes_the_whole_surplus() {
        let sc = scenario(&[(10e9, &[(1e8, 1.0)])], &[]);
        let dev = &sc.devices[0];
        let nash = nash_bargain(dev, &sc);
        let stack = stackelberg_bargain(dev, &sc);
        assert_eq!(nash.offload, stack.offload);
        assert!(stack.offload);
        assert_relative_eq!(stack.fee, stack.fee_ceiling, max_relative = 1e-12);
        assert!(stack.fee > nash.fee);
        // The device ends up exactly at its outside option.
        let d = Decision { mode: ExecutionMode::PrimaryEs, fee: stack.fee, reward: 0.0 };
        assert_relative_eq!(td_utility(dev, &d, &sc), stack.local_utility, epsilon = 1e-12);
    }

    #[test]
    fn round_robin_alternates_receivers_and_ignores_profit() {
        // Two spilled tasks, two equally capable receivers: they must split,
        // one each, even though the first receiver could host both.
        let sc = scenario(
            &[(1e7, &[(1e8, 1.0), (1.1e8, 1.0)]), (10e9, &[]), (10e9, &[])],
            &[],
        );
        let mut bargains = bargain_all(&sc);
        // Make every move unprofitable; round-robin must not care.
        for b in bargains.iter_mut() {
            b.fee = 0.01;
        }
        let cell0: Vec<&BargainOutcome> = bargains[..2].iter().collect();
        let reports = vec![
            filter_overloaded(CellId(0), sc.servers[0].capacity, &cell0),
            filter_overloaded(CellId(1), sc.servers[1].capacity, &[]),
            filter_overloaded(CellId(2), sc.servers[2].capacity, &[]),
        ];
        let plan = round_robin_schedule(&sc, &bargains, &reports);
        assert_eq!(plan.moves.len(), 2);
        let targets: Vec<CellId> = plan.moves.iter().map(|m| m.to).collect();
        assert_eq!(targets, vec![CellId(1), CellId(2)]);
        assert!(plan.moves.iter().all(|m| m.margin < 0.0));
    }

    #[test]
    fn vickrey_picks_the_cheapest_and_pays_the_second_ask() {
        let sc = scenario(
            &[(10e9, &[(1e8, 1.0)])],
            &[(1e-9, 1e9), (2e-9, 1e9), (3e-9, 1e9)],
        );
        let mut bargains = bargain_all(&sc);
        bargains[0].fee = 0.5;
        let input = build_auction_input(&sc, CellId(0), &[TdId(0)], &bargains);
        let result = vickrey_rental(&input);
        assert_eq!(result.matches.len(), 1);
        let m = &result.matches[0];
        assert_eq!(m.seller, AdId(0));
        assert_relative_eq!(m.price_per_cycle, 2e-9, max_relative = 1e-12);
        assert_relative_eq!(m.reward, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn vickrey_needs_two_eligible_sellers() {
        // The second seller lacks capacity, leaving one eligible: no trade.
        let sc = scenario(&[(10e9, &[(1e8, 1.0)])], &[(1e-9, 1e9), (2e-9, 1e7)]);
        let mut bargains = bargain_all(&sc);
        bargains[0].fee = 0.5;
        let input = build_auction_input(&sc, CellId(0), &[TdId(0)], &bargains);
        let result = vickrey_rental(&input);
        assert!(result.matches.is_empty());
        assert_eq!(result.unmatched, vec![TdId(0)]);
    }

    #[test]
    fn vickrey_can_trade_above_the_providers_ceiling() {
        // Asks far above the bid: the double auction refuses, Vickrey pays.
        let sc = scenario(&[(10e9, &[(1e8, 1.0)])], &[(6e-9, 1e9), (7e-9, 1e9)]);
        let mut bargains = bargain_all(&sc);
        bargains[0].fee = 0.2; // bid (0.2 − 0.1)/1e8 = 1e-9 < 6e-9
        let input = build_auction_input(&sc, CellId(0), &[TdId(0)], &bargains);
        assert!(crate::auction::run_double_auction(&input).matches.is_empty());
        let result = vickrey_rental(&input);
        assert_eq!(result.matches.len(), 1);
        assert_relative_eq!(result.matches[0].price_per_cycle, 7e-9, max_relative = 1e-12);
    }
}
