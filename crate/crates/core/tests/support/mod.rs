//! Independent oracles for the acceptance and property suites.
//!
//! Everything here recomputes results through deliberately different code
//! paths from the library: physical quantities from raw formulas, orderings
//! by selection instead of sorting, and the bargained fee by brute-force
//! search instead of a closed form. Tests compare library outputs against
//! these re-derivations.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgemarket::auction::AuctionInput;
use edgemarket::bargain::{BargainOutcome, CellLoadReport};
use edgemarket::generator::{generate, CountSpec, GenConfig, Range};
use edgemarket::model::{
    AdId, AuxDevice, CellId, Decision, ExecutionMode, Scenario, TaskDevice, TdId,
};

/// Shannon rate from raw parameters.
fn rate(gain: f64, power: f64, interference: f64, sc: &Scenario) -> f64 {
    let sinr = power * gain / (interference + sc.econ.noise_power);
    sc.econ.bandwidth * (1.0 + sinr).log2()
}

fn uplink_seconds(dev: &TaskDevice, sc: &Scenario) -> f64 {
    dev.task.size_bits / rate(dev.uplink.gain, dev.transmit_power, dev.uplink.interference, sc)
}

fn downlink_seconds(dev: &TaskDevice, ad: &AuxDevice, sc: &Scenario) -> f64 {
    let p = sc.server(dev.cell).transmit_power;
    dev.task.size_bits / rate(ad.downlink.gain, p, ad.downlink.interference, sc)
}

fn local_payoff(dev: &TaskDevice, sc: &Scenario) -> f64 {
    let f = dev.task.cycles / dev.task.deadline;
    if dev.capacity >= f {
        dev.task.value - sc.econ.gamma * dev.energy_coeff * f * f * dev.task.cycles
    } else {
        0.0
    }
}

/// Fee interval the bargaining game admits: (floor, ceiling), or `None`
/// when the home server cannot meet the deadline at all.
pub fn fee_interval(dev: &TaskDevice, sc: &Scenario) -> Option<(f64, f64)> {
    let t_up = uplink_seconds(dev, sc);
    let window = dev.task.deadline - t_up;
    let ceiling = dev.task.value
        - sc.econ.gamma * dev.transmit_power * t_up
        - local_payoff(dev, sc);
    if window <= 0.0 {
        return None;
    }
    let f = dev.task.cycles / window;
    let floor = sc.econ.gamma * sc.server(dev.cell).energy_coeff * f * f * dev.task.cycles;
    Some((floor, ceiling))
}

/// Brute-force Nash solution: walks the fee interval in `step` increments
/// and keeps the first fee maximizing the product of the provider's and the
/// device's gains over their outside options. `None` without an agreement.
pub fn grid_nash_fee(dev: &TaskDevice, sc: &Scenario, step: f64) -> Option<f64> {
    let (floor, ceiling) = fee_interval(dev, sc)?;
    if floor >= ceiling {
        return None;
    }
    let mut best_fee = floor;
    let mut best = f64::NEG_INFINITY;
    let steps = ((ceiling - floor) / step).floor() as u64;
    for k in 0..=steps {
        let fee = floor + k as f64 * step;
        let product = (fee - floor) * (ceiling - fee);
        if product > best {
            best = product;
            best_fee = fee;
        }
    }
    Some(best_fee)
}

fn priority(o: &BargainOutcome) -> f64 {
    (o.fee - o.fee_floor) / o.server_frequency
}

/// Literal re-trace of the overload filter, using repeated selection of the
/// best remaining task instead of a sort.
pub fn trace_filter(
    capacity: f64,
    outcomes: &[&BargainOutcome],
) -> (Vec<TdId>, Vec<TdId>) {
    let agreed: Vec<&BargainOutcome> = outcomes.iter().copied().filter(|o| o.offload).collect();
    let demand: f64 = agreed.iter().map(|o| o.server_frequency).sum();
    if demand <= capacity {
        return (agreed.iter().map(|o| o.device).collect(), Vec::new());
    }
    let mut remaining = agreed;
    let mut kept = Vec::new();
    let mut spilled = Vec::new();
    let mut used = 0.0;
    while !remaining.is_empty() {
        let mut best = 0;
        for i in 1..remaining.len() {
            let (a, b) = (remaining[i], remaining[best]);
            if priority(a) > priority(b)
                || (priority(a) == priority(b) && a.device < b.device)
            {
                best = i;
            }
        }
        let o = remaining.remove(best);
        if used + o.server_frequency <= capacity {
            used += o.server_frequency;
            kept.push(o.device);
        } else {
            spilled.push(o.device);
        }
    }
    (kept, spilled)
}

/// One re-traced placement: (device, from, to, frequency, margin).
pub type TracedMove = (TdId, CellId, CellId, f64, f64);

/// Literal re-trace of the inter-server round from raw formulas.
pub fn trace_schedule(
    sc: &Scenario,
    bargains: &[BargainOutcome],
    reports: &[CellLoadReport],
) -> (Vec<TracedMove>, Vec<TdId>) {
    let mut spare: Vec<f64> = reports.iter().map(|r| r.capacity - r.committed).collect();
    let mut senders: Vec<usize> = (0..reports.len())
        .filter(|&m| reports[m].demand > reports[m].capacity)
        .collect();
    // Selection sort on (overload desc, cell asc).
    for i in 0..senders.len() {
        for j in i + 1..senders.len() {
            let qi = reports[senders[i]].demand - reports[senders[i]].capacity;
            let qj = reports[senders[j]].demand - reports[senders[j]].capacity;
            if qj > qi || (qj == qi && senders[j] < senders[i]) {
                senders.swap(i, j);
            }
        }
    }
    let mut moves = Vec::new();
    let mut unplaced = Vec::new();
    for &m1 in &senders {
        let mut receivers: Vec<usize> = (0..reports.len())
            .filter(|&m| reports[m].demand <= reports[m].capacity)
            .collect();
        for i in 0..receivers.len() {
            for j in i + 1..receivers.len() {
                let ri = sc.backhaul.rates[m1][receivers[i]];
                let rj = sc.backhaul.rates[m1][receivers[j]];
                if rj > ri || (rj == ri && receivers[j] < receivers[i]) {
                    receivers.swap(i, j);
                }
            }
        }
        for &task in &reports[m1].spilled {
            let dev = sc.device(task);
            let fee = bargains[task.0].fee;
            let t_up = uplink_seconds(dev, sc);
            let mut placed = false;
            for &m2 in &receivers {
                let bh = sc.backhaul.rates[m1][m2];
                let window = dev.task.deadline - t_up - dev.task.size_bits / bh;
                if window <= 0.0 {
                    continue;
                }
                let f = dev.task.cycles / window;
                if f > spare[m2] {
                    continue;
                }
                let g = sc.econ.gamma;
                let margin = fee
                    - g * sc.servers[m1].transmit_power * dev.task.size_bits / bh
                    - g * sc.servers[m2].energy_coeff * f * f * dev.task.cycles;
                if margin <= 0.0 {
                    continue;
                }
                spare[m2] -= f;
                moves.push((task, CellId(m1), CellId(m2), f, margin));
                placed = true;
                break;
            }
            if !placed {
                unplaced.push(task);
            }
        }
    }
    (moves, unplaced)
}

/// One re-traced trade: (task, seller, price per cycle, frequency).
pub type TracedTrade = (TdId, AdId, f64, f64);

/// Literal re-trace of one cell's double auction from raw formulas.
pub fn trace_auction(
    sc: &Scenario,
    cell: CellId,
    tasks: &[TdId],
    bargains: &[BargainOutcome],
) -> (Vec<TracedTrade>, Vec<TdId>) {
    let mut sellers: Vec<&AuxDevice> = sc.aux_in_cell(cell).collect();
    for i in 0..sellers.len() {
        for j in i + 1..sellers.len() {
            if sellers[j].ask < sellers[i].ask
                || (sellers[j].ask == sellers[i].ask && sellers[j].id < sellers[i].id)
            {
                sellers.swap(i, j);
            }
        }
    }
    let mut buyers: Vec<TdId> = tasks.to_vec();
    for i in 0..buyers.len() {
        for j in i + 1..buyers.len() {
            let fi = bargains[buyers[i].0].fee;
            let fj = bargains[buyers[j].0].fee;
            if fj > fi || (fj == fi && buyers[j] < buyers[i]) {
                buyers.swap(i, j);
            }
        }
    }
    let mut spare: Vec<f64> = sellers.iter().map(|s| s.capacity).collect();
    let mut trades = Vec::new();
    let mut unmatched = Vec::new();
    for task in buyers {
        let dev = sc.device(task);
        let fee = bargains[task.0].fee;
        let t_up = uplink_seconds(dev, sc);
        let mut matched = false;
        for j in 0..sellers.len().saturating_sub(1) {
            let ad = sellers[j];
            let t_down = downlink_seconds(dev, ad, sc);
            let window = dev.task.deadline - t_up - t_down;
            if window <= 0.0 {
                continue;
            }
            let f = dev.task.cycles / window;
            let g = sc.econ.gamma;
            let bid =
                (fee - g * sc.server(dev.cell).transmit_power * t_down) / dev.task.cycles;
            let quote = sellers[j + 1].ask;
            if bid > quote && f <= spare[j] {
                spare[j] -= f;
                trades.push((task, ad.id, quote, f));
                matched = true;
                break;
            }
        }
        if !matched {
            unmatched.push(task);
        }
    }
    (trades, unmatched)
}

/// System utility re-derived task by task: payments cancel within each
/// task, so each contributes its realized value minus the energy (and
/// priced aux compute) its route consumes.
pub fn expanded_system_utility(sc: &Scenario, decisions: &[Decision]) -> f64 {
    let g = sc.econ.gamma;
    sc.devices
        .iter()
        .zip(decisions)
        .map(|(dev, d)| {
            let t = &dev.task;
            let t_up = uplink_seconds(dev, sc);
            match d.mode {
                ExecutionMode::Local => local_payoff(dev, sc),
                ExecutionMode::PrimaryEs => {
                    let f = t.cycles / (t.deadline - t_up);
                    t.value
                        - g * dev.transmit_power * t_up
                        - g * sc.server(dev.cell).energy_coeff * f * f * t.cycles
                }
                ExecutionMode::NeighborEs(to) => {
                    let bh = sc.backhaul.rate(dev.cell, to);
                    let t_fwd = t.size_bits / bh;
                    let f = t.cycles / (t.deadline - t_up - t_fwd);
                    t.value
                        - g * dev.transmit_power * t_up
                        - g * sc.server(dev.cell).transmit_power * t_fwd
                        - g * sc.server(to).energy_coeff * f * f * t.cycles
                }
                ExecutionMode::AuxDevice(k) => {
                    let ad = sc.aux(k);
                    let t_down = downlink_seconds(dev, ad, sc);
                    t.value
                        - g * dev.transmit_power * t_up
                        - g * sc.server(dev.cell).transmit_power * t_down
                        - ad.ask * t.cycles
                }
            }
        })
        .sum()
}

/// Spearman rank correlation of `xs` against its index order (1, 2, …).
/// With distinct values this is 1 exactly when `xs` strictly increases.
pub fn spearman_against_index(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut ranks = vec![0usize; n];
    for i in 0..n {
        ranks[i] = 1 + xs.iter().filter(|&&y| y < xs[i]).count();
    }
    let d2: f64 = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let d = r as f64 - (i + 1) as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1)) as f64
}

/// A small mixed-load instance: 1–4 cells, at most 12 task devices overall
/// and 6 aux devices per cell, with the server capacity drawn low enough
/// that overload, neighbor moves, and auctions all occur across seeds.
pub fn small_instance(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    let cells = rng.gen_range(1..=4usize);
    let mut td_left = 12usize;
    let mut td_counts = Vec::new();
    for c in 0..cells {
        let hi = td_left.min(6);
        let lo = usize::from(c == 0);
        let n = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        td_counts.push(n);
        td_left -= n;
    }
    let ad_counts: Vec<usize> = (0..cells).map(|_| rng.gen_range(0..=6usize)).collect();
    let cfg = GenConfig {
        seed: rng.gen(),
        cells,
        td_count: CountSpec::Fixed(td_counts),
        ad_count: CountSpec::Fixed(ad_counts),
        es_capacity: rng.gen_range(2e8..1.5e9),
        task_deadline: Range::new(0.02, 1.0),
        ..GenConfig::desk(0)
    };
    generate(&cfg).expect("small instance")
}

/// A single-cell instance whose agreements all spill, so every agreed task
/// reaches the auction: 1–6 buyers against 2–6 sellers.
pub fn auction_instance(seed: u64) -> (Scenario, AuctionInput) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0DDB_A11_F00D_CAFE);
    let tds = rng.gen_range(1..=6usize);
    let ads = rng.gen_range(2..=6usize);
    let cfg = GenConfig {
        seed: rng.gen(),
        cells: 1,
        td_count: CountSpec::Fixed(vec![tds]),
        ad_count: CountSpec::Fixed(vec![ads]),
        es_capacity: 1e6, // effectively no server capacity: everything spills
        ad_capacity: Range::new(0.3e9, 2e9),
        ..GenConfig::desk(0)
    };
    let sc = generate(&cfg).expect("auction instance");
    let bargains = edgemarket::bargain::bargain_all(&sc);
    let outcomes: Vec<&BargainOutcome> = bargains.iter().collect();
    let report = edgemarket::bargain::filter_overloaded(
        CellId(0),
        sc.servers[0].capacity,
        &outcomes,
    );
    let input =
        edgemarket::auction::build_auction_input(&sc, CellId(0), &report.spilled, &bargains);
    (sc, input)
}
