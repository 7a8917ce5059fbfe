//! Physical-layer rates, per-mode resource requirements, and the utility
//! functions of the three parties (task devices, the provider, aux devices).

use crate::error::{Error, ModeInfeasible};
use crate::model::{CostBreakdown, Decision, EconParams, ExecutionMode, RadioLink, Scenario,
    TaskDevice};

/// Shannon rate of a wireless link in bit/s: `W · log2(1 + p·g / (I + N0))`.
pub fn wireless_rate(link: &RadioLink, transmit_power: f64, econ: &EconParams) -> f64 {
    let sinr = transmit_power * link.gain / (link.interference + econ.noise_power);
    econ.bandwidth * (1.0 + sinr).log2()
}

/// Time to move `size_bits` over a link of `rate` bit/s.
pub fn transfer_delay(size_bits: f64, rate: f64) -> f64 {
    size_bits / rate
}

/// Device-to-home-server uplink delay for the device's task.
pub fn uplink_delay(dev: &TaskDevice, sc: &Scenario) -> f64 {
    let rate = wireless_rate(&dev.uplink, dev.transmit_power, &sc.econ);
    transfer_delay(dev.task.size_bits, rate)
}

/// Energy (J) to run `cycles` at frequency `f` with the given coefficient.
fn compute_energy(coeff: f64, frequency: f64, cycles: f64) -> f64 {
    coeff * frequency * frequency * cycles
}

/// Time the executing node has left for computation in `mode`, after all
/// transfers, before the deadline.
fn compute_window(dev: &TaskDevice, mode: ExecutionMode, sc: &Scenario) -> f64 {
    let t = &dev.task;
    match mode {
        ExecutionMode::Local => t.deadline,
        ExecutionMode::PrimaryEs => t.deadline - uplink_delay(dev, sc),
        ExecutionMode::NeighborEs(to) => {
            let fwd = transfer_delay(t.size_bits, sc.backhaul.rate(dev.cell, to));
            t.deadline - uplink_delay(dev, sc) - fwd
        }
        ExecutionMode::AuxDevice(ad) => {
            let ad = sc.aux(ad);
            let down = wireless_rate(&ad.downlink, sc.server(dev.cell).transmit_power, &sc.econ);
            t.deadline - uplink_delay(dev, sc) - transfer_delay(t.size_bits, down)
        }
    }
}

/// Minimum processor frequency that completes the task exactly at its
/// deadline in `mode`. Fails if transfers alone exceed the deadline.
pub fn required_frequency(
    dev: &TaskDevice,
    mode: ExecutionMode,
    sc: &Scenario,
) -> Result<f64, ModeInfeasible> {
    let window = compute_window(dev, mode, sc);
    if window <= 0.0 {
        return Err(ModeInfeasible);
    }
    Ok(dev.task.cycles / window)
}

/// Execution costs of running the device's task in `mode` with the given
/// payments, split by paying party. Costs are those incurred *if* the task
/// runs; capacity limits are not checked here.
pub fn mode_costs(
    dev: &TaskDevice,
    mode: ExecutionMode,
    fee: f64,
    reward: f64,
    sc: &Scenario,
) -> Result<CostBreakdown, ModeInfeasible> {
    let gamma = sc.econ.gamma;
    let t = &dev.task;
    let frequency = required_frequency(dev, mode, sc)?;
    let offload_device_cost = || gamma * dev.transmit_power * uplink_delay(dev, sc) + fee;
    Ok(match mode {
        ExecutionMode::Local => CostBreakdown {
            device: gamma * compute_energy(dev.energy_coeff, frequency, t.cycles),
            home_server: 0.0,
            remote_server: 0.0,
            aux_device: 0.0,
            frequency,
        },
        ExecutionMode::PrimaryEs => {
            let es = sc.server(dev.cell);
            CostBreakdown {
                device: offload_device_cost(),
                home_server: gamma * compute_energy(es.energy_coeff, frequency, t.cycles),
                remote_server: 0.0,
                aux_device: 0.0,
                frequency,
            }
        }
        ExecutionMode::NeighborEs(to) => {
            let home = sc.server(dev.cell);
            let remote = sc.server(to);
            let fwd_delay = transfer_delay(t.size_bits, sc.backhaul.rate(dev.cell, to));
            CostBreakdown {
                device: offload_device_cost(),
                home_server: gamma * home.transmit_power * fwd_delay,
                remote_server: gamma * compute_energy(remote.energy_coeff, frequency, t.cycles),
                aux_device: 0.0,
                frequency,
            }
        }
        ExecutionMode::AuxDevice(ad_id) => {
            let home = sc.server(dev.cell);
            let ad = sc.aux(ad_id);
            let down = wireless_rate(&ad.downlink, home.transmit_power, &sc.econ);
            let fwd_delay = transfer_delay(t.size_bits, down);
            CostBreakdown {
                device: offload_device_cost(),
                home_server: gamma * home.transmit_power * fwd_delay + reward,
                remote_server: 0.0,
                aux_device: gamma * compute_energy(ad.energy_coeff, frequency, t.cycles),
                frequency,
            }
        }
    })
}

/// Utility the device gets from executing locally: task value minus weighted
/// computation energy if it can meet the deadline on its own processor, and
/// exactly zero (no energy spent on a hopeless attempt) otherwise.
pub fn local_utility(dev: &TaskDevice, sc: &Scenario) -> f64 {
    let frequency = dev.task.cycles / dev.task.deadline;
    if dev.capacity >= frequency {
        let energy = compute_energy(dev.energy_coeff, frequency, dev.task.cycles);
        dev.task.value - sc.econ.gamma * energy
    } else {
        0.0
    }
}

/// Task-device utility under a final decision.
pub fn td_utility(dev: &TaskDevice, decision: &Decision, sc: &Scenario) -> f64 {
    match decision.mode {
        ExecutionMode::Local => local_utility(dev, sc),
        _ => {
            let uplink_energy = dev.transmit_power * uplink_delay(dev, sc);
            dev.task.value - sc.econ.gamma * uplink_energy - decision.fee
        }
    }
}

/// Aux-device utility: reward received minus true per-cycle cost of the
/// cycles delegated to it.
pub fn ad_utility(cost_per_cycle: f64, delegated_cycles: f64, reward: f64) -> f64 {
    reward - cost_per_cycle * delegated_cycles
}

/// Provider margin on one task: fee collected minus all provider-side costs
/// (zero for local tasks).
pub fn provider_margin(dev: &TaskDevice, decision: &Decision, sc: &Scenario) -> Result<f64, Error> {
    if decision.mode == ExecutionMode::Local {
        return Ok(0.0);
    }
    check_target(dev, decision.mode, sc)?;
    let costs = mode_costs(dev, decision.mode, decision.fee, decision.reward, sc).map_err(
        |source| Error::InfeasibleDecision { device: dev.id.0, source },
    )?;
    Ok(decision.fee - costs.home_server - costs.remote_server)
}

/// Provider utility over a full decision vector (one entry per task device).
pub fn esp_utility(sc: &Scenario, decisions: &[Decision]) -> Result<f64, Error> {
    let mut total = 0.0;
    for (dev, decision) in sc.devices.iter().zip(decisions) {
        total += provider_margin(dev, decision, sc)?;
    }
    Ok(total)
}

/// System utility: the sum of provider, task-device, and aux-device
/// utilities over a full decision vector. Payments cancel, so this equals
/// task value realized minus weighted energy spent, with aux computation
/// priced at each device's reported per-cycle ask.
pub fn system_utility(sc: &Scenario, decisions: &[Decision]) -> Result<f64, Error> {
    let mut total = esp_utility(sc, decisions)?;
    for (dev, decision) in sc.devices.iter().zip(decisions) {
        total += td_utility(dev, decision, sc);
        if let ExecutionMode::AuxDevice(ad_id) = decision.mode {
            let ad = sc.aux(ad_id);
            total += ad_utility(ad.ask, dev.task.cycles, decision.reward);
        }
    }
    Ok(total)
}

fn check_target(dev: &TaskDevice, mode: ExecutionMode, sc: &Scenario) -> Result<(), Error> {
    let invalid = |reason: String| {
        Err(Error::InvalidDecision { device: dev.id.0, reason })
    };
    match mode {
        ExecutionMode::NeighborEs(to) => {
            if to.0 >= sc.cells() {
                return invalid(format!("neighbor server {to} does not exist"));
            }
            if to == dev.cell {
                return invalid("neighbor server is the home server".into());
            }
        }
        ExecutionMode::AuxDevice(ad) => {
            if ad.0 >= sc.aux_devices.len() {
                return invalid(format!("aux device {ad} does not exist"));
            }
            if sc.aux(ad).cell != dev.cell {
                return invalid(format!("aux device {ad} is outside the home cell"));
            }
        }
        _ => {}
    }
    Ok(())
}
