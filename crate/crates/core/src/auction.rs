//! Level 3: per-cell sealed double auction renting aux-device compute for
//! tasks no edge server could take.
//!
//! The provider bids on behalf of each task: its unit bid on a given aux
//! device is the agreed fee net of the radio forwarding cost, per task
//! cycle. Sellers are ranked by reported ask. A task buys from the first
//! ranked seller whose *next-ranked neighbor's* ask is strictly below the
//! task's bid and whose spare frequency still meets the deadline; it pays
//! that neighbor's ask per cycle. Trading at the neighboring ask keeps the
//! mechanism individually rational on both sides and leaves no seller an
//! incentive to shade its report; the last-ranked seller never trades.

use crate::bargain::BargainOutcome;
use crate::economics::{required_frequency, transfer_delay, wireless_rate};
use crate::error::ModeInfeasible;
use crate::model::{AdId, CellId, ExecutionMode, Scenario, TdId};

/// A seller in one cell's auction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSeller {
    pub device: AdId,
    /// Reported reservation price in dollars per cycle.
    pub ask: f64,
    /// Spare frequency offered, in Hz.
    pub capacity: f64,
}

/// The provider's terms for running one task on one seller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    /// Highest price per cycle the provider can pay without losing money.
    pub unit_bid: f64,
    /// Frequency the seller would have to commit, in Hz.
    pub frequency: f64,
}

/// A buyer-side entry: one task, with its terms for every seller.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionTask {
    pub device: TdId,
    /// Fee the provider already collects for the task.
    pub fee: f64,
    pub cycles: f64,
    /// Terms per seller, aligned with `AuctionInput::sellers`; `None` when
    /// the seller cannot meet the deadline at any frequency.
    pub offers: Vec<Option<Offer>>,
}

/// One cell's auction: buyers in bidding order, sellers in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInput {
    pub cell: CellId,
    pub tasks: Vec<AuctionTask>,
    pub sellers: Vec<AuctionSeller>,
}

/// A concluded trade.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskAdMatch {
    pub task: TdId,
    pub seller: AdId,
    /// Price per cycle: the ask of the seller ranked after the matched one.
    pub price_per_cycle: f64,
    /// Total payment: price per cycle times the task's cycles.
    pub reward: f64,
    /// Frequency the seller commits, in Hz.
    pub frequency: f64,
}

/// Outcome of one cell's auction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuctionResult {
    pub matches: Vec<TaskAdMatch>,
    /// Tasks that found no seller, in bidding order.
    pub unmatched: Vec<TdId>,
    /// Sellers' remaining frequency, aligned with `AuctionInput::sellers`.
    pub seller_spare: Vec<f64>,
}

/// Most the provider can pay per cycle to run `dev`'s task on `ad` without
/// losing money on the already-agreed `fee`.
pub fn unit_bid(
    dev: &crate::model::TaskDevice,
    ad: &crate::model::AuxDevice,
    fee: f64,
    sc: &Scenario,
) -> Result<f64, ModeInfeasible> {
    required_frequency(dev, ExecutionMode::AuxDevice(ad.id), sc)?;
    let es = sc.server(dev.cell);
    let down = wireless_rate(&ad.downlink, es.transmit_power, &sc.econ);
    let fwd = transfer_delay(dev.task.size_bits, down);
    Ok((fee - sc.econ.gamma * es.transmit_power * fwd) / dev.task.cycles)
}

/// Assembles one cell's auction: the given tasks (reordered to descending
/// fee, ties by device id) against the cell's aux devices.
pub fn build_auction_input(
    sc: &Scenario,
    cell: CellId,
    tasks: &[TdId],
    bargains: &[BargainOutcome],
) -> AuctionInput {
    let sellers: Vec<AuctionSeller> = sc
        .aux_in_cell(cell)
        .map(|a| AuctionSeller { device: a.id, ask: a.ask, capacity: a.capacity })
        .collect();
    let mut ordered: Vec<TdId> = tasks.to_vec();
    ordered.sort_by(|a, b| {
        bargains[b.0]
            .fee
            .partial_cmp(&bargains[a.0].fee)
            .unwrap()
            .then(a.cmp(b))
    });
    let tasks = ordered
        .into_iter()
        .map(|id| {
            let dev = sc.device(id);
            let fee = bargains[id.0].fee;
            let offers = sc
                .aux_in_cell(cell)
                .map(|ad| {
                    let frequency =
                        required_frequency(dev, ExecutionMode::AuxDevice(ad.id), sc).ok()?;
                    let unit_bid = unit_bid(dev, ad, fee, sc).ok()?;
                    Some(Offer { unit_bid, frequency })
                })
                .collect();
            AuctionTask { device: id, fee, cycles: dev.task.cycles, offers }
        })
        .collect();
    AuctionInput { cell, tasks, sellers }
}

/// Clears one cell's auction.
pub fn run_double_auction(input: &AuctionInput) -> AuctionResult {
    let mut result = AuctionResult {
        matches: Vec::new(),
        unmatched: Vec::new(),
        seller_spare: input.sellers.iter().map(|s| s.capacity).collect(),
    };
    // Rank sellers by ask; with fewer than two sellers no price can be
    // quoted and nothing trades.
    let mut rank: Vec<usize> = (0..input.sellers.len()).collect();
    rank.sort_by(|&a, &b| {
        input.sellers[a]
            .ask
            .partial_cmp(&input.sellers[b].ask)
            .unwrap()
            .then(input.sellers[a].device.cmp(&input.sellers[b].device))
    });
    for task in &input.tasks {
        let mut matched = false;
        for j in 0..rank.len().saturating_sub(1) {
            let seller_idx = rank[j];
            let Some(offer) = task.offers[seller_idx] else { continue };
            let price = input.sellers[rank[j + 1]].ask;
            if offer.unit_bid > price && offer.frequency <= result.seller_spare[seller_idx] {
                result.seller_spare[seller_idx] -= offer.frequency;
                result.matches.push(TaskAdMatch {
                    task: task.device,
                    seller: input.sellers[seller_idx].device,
                    price_per_cycle: price,
                    reward: price * task.cycles,
                    frequency: offer.frequency,
                });
                matched = true;
                break;
            }
        }
        if !matched {
            result.unmatched.push(task.device);
        }
    }
    result
}
