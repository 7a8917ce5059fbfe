//! Level 1: per-device fee bargaining with the home edge server, and the
//! capacity filter an overloaded server applies to the agreements it made.
//!
//! The fee settles at the Nash bargaining solution of a bilateral game where
//! the provider's disagreement payoff is 0 and the device's is its local
//! utility. With transferable utility both sides' gains are linear in the
//! fee, so the solution is the midpoint of the individually-rational fee
//! interval `[floor, ceiling]`:
//!
//! * `floor`  — the provider's cost of serving the task on the home server;
//! * `ceiling` — the highest fee the device accepts over going local.
//!
//! An agreement exists only when the interval is non-degenerate
//! (`floor < ceiling`, strictly) and the home server can meet the deadline.

use crate::economics::{local_utility, required_frequency, uplink_delay};
use crate::model::{CellId, ExecutionMode, Scenario, TaskDevice, TdId};

/// Result of one device's fee negotiation with its home server.
#[derive(Debug, Clone, PartialEq)]
pub struct BargainOutcome {
    pub device: TdId,
    /// True if device and provider agreed to offload.
    pub offload: bool,
    /// Agreed fee in dollars (0 without an agreement).
    pub fee: f64,
    /// Provider's break-even fee: its home-server execution cost.
    pub fee_floor: f64,
    /// Device's walk-away fee: value minus uplink energy cost minus its
    /// local utility.
    pub fee_ceiling: f64,
    /// Frequency the home server must commit, in Hz (`+inf` when the uplink
    /// alone exceeds the deadline).
    pub server_frequency: f64,
    /// Device-to-server transfer time in seconds.
    pub uplink_delay: f64,
    /// Utility of the device's outside option (executing locally).
    pub local_utility: f64,
}

/// Fee that splits the surplus interval `[floor, ceiling]`: the midpoint,
/// clamped into the interval.
fn settle_fee(floor: f64, ceiling: f64) -> f64 {
    let both = ceiling + floor;
    let half = both / 2.0;
    if half > ceiling {
        ceiling
    } else if half < floor {
        floor
    } else {
        half
    }
}

/// Negotiates the offload fee for one device.
pub fn nash_bargain(dev: &TaskDevice, sc: &Scenario) -> BargainOutcome {
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
        fee: if offload { settle_fee(floor, ceiling) } else { 0.0 },
        fee_floor: floor,
        fee_ceiling: ceiling,
        server_frequency: frequency,
        uplink_delay: t_up,
        local_utility: u_loc,
    }
}

/// Negotiates fees for every device, in device-id order.
pub fn bargain_all(sc: &Scenario) -> Vec<BargainOutcome> {
    sc.devices.iter().map(|d| nash_bargain(d, sc)).collect()
}

/// Scheduling priority of an agreed offload: provider margin per Hz of
/// server frequency the task would occupy.
pub fn task_priority(outcome: &BargainOutcome) -> f64 {
    (outcome.fee - outcome.fee_floor) / outcome.server_frequency
}

/// Total server frequency demanded by the agreements in `outcomes`.
pub fn cell_demand(outcomes: &[&BargainOutcome]) -> f64 {
    outcomes.iter().filter(|o| o.offload).map(|o| o.server_frequency).sum()
}

/// One cell's level-1 load after the capacity filter.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLoadReport {
    pub cell: CellId,
    /// Home server capacity in Hz.
    pub capacity: f64,
    /// Total frequency demanded by all agreements.
    pub demand: f64,
    /// Frequency committed to the kept tasks.
    pub committed: f64,
    /// Agreements the home server keeps.
    pub kept: Vec<TdId>,
    /// Agreements squeezed out by capacity, highest priority first.
    pub spilled: Vec<TdId>,
}

impl CellLoadReport {
    /// Spare capacity after serving the kept tasks.
    pub fn spare(&self) -> f64 {
        self.capacity - self.committed
    }

    /// True if level-1 demand exceeded the home server's capacity.
    pub fn overloaded(&self) -> bool {
        self.demand > self.capacity
    }
}

/// Applies the home server's capacity filter to one cell's agreements.
///
/// If demand fits, every agreement is kept in device-id order. Otherwise
/// agreements are ranked by priority (ties: device id), and the server walks
/// the ranking keeping each task that still fits — a later, smaller task may
/// be kept after a larger one was spilled.
pub fn filter_overloaded(
    cell: CellId,
    capacity: f64,
    outcomes: &[&BargainOutcome],
) -> CellLoadReport {
    let agreed: Vec<&BargainOutcome> = outcomes.iter().copied().filter(|o| o.offload).collect();
    let demand = cell_demand(&agreed);
    if demand <= capacity {
        return CellLoadReport {
            cell,
            capacity,
            demand,
            committed: demand,
            kept: agreed.iter().map(|o| o.device).collect(),
            spilled: Vec::new(),
        };
    }
    let mut ranked = agreed;
    ranked.sort_by(|a, b| {
        task_priority(b)
            .partial_cmp(&task_priority(a))
            .unwrap()
            .then(a.device.cmp(&b.device))
    });
    let mut kept = Vec::new();
    let mut spilled = Vec::new();
    let mut committed = 0.0;
    for o in ranked {
        if committed + o.server_frequency <= capacity {
            committed += o.server_frequency;
            kept.push(o.device);
        } else {
            spilled.push(o.device);
        }
    }
    CellLoadReport { cell, capacity, demand, committed, kept, spilled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        AuxDevice, BackhaulMatrix, EconParams, EdgeServer, RadioLink, Task, SCHEMA_VERSION,
    };
    use approx::assert_relative_eq;

    fn one_cell(dev_capacity: f64, deadline: f64) -> Scenario {
        Scenario {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            econ: EconParams { gamma: 1.0, noise_power: 1e-13, bandwidth: 20e6 },
            servers: vec![EdgeServer {
                id: CellId(0),
                capacity: 10e9,
                energy_coeff: 5e-27,
                transmit_power: 10.0,
            }],
            devices: vec![TaskDevice {
                id: TdId(0),
                cell: CellId(0),
                task: Task { size_bits: 2e5, cycles: 1e8, deadline, value: 8.0 },
                capacity: dev_capacity,
                transmit_power: 2.0,
                energy_coeff: 5e-27,
                uplink: RadioLink { gain: 5e-14, interference: 0.0 },
            }],
            aux_devices: Vec::<AuxDevice>::new(),
            backhaul: BackhaulMatrix::uniform(1, 100e6),
        }
    }

    #[test]
    fn incapable_device_settles_at_the_midpoint() {
        // Device (0.05 GHz) cannot run 1e8 cycles in 1 s, so its outside
        // option is worth 0 and the ceiling is V − γ·p·t_up = 7.98.
        let sc = one_cell(0.5e8, 1.0);
        let o = nash_bargain(&sc.devices[0], &sc);
        assert!(o.offload);
        let f = 1e8 / 0.99;
        assert_relative_eq!(o.fee_floor, 5e-27 * f * f * 1e8, max_relative = 1e-12);
        assert_relative_eq!(o.fee_ceiling, 7.98, max_relative = 1e-12);
        assert_relative_eq!(o.fee, 3.9925508, max_relative = 1e-7);
        assert_relative_eq!(o.fee, (o.fee_floor + o.fee_ceiling) / 2.0, max_relative = 1e-12);
        // Priority equals provider margin per Hz.
        assert_relative_eq!(
            task_priority(&o),
            (o.fee - o.fee_floor) / o.server_frequency,
            max_relative = 1e-12
        );
    }

    #[test]
    fn capable_device_prefers_local_when_server_costs_the_same_energy_rate() {
        // Equal energy coefficients: the server always needs f_pe > f_loc,
        // so its cost exceeds what the device would save: no agreement.
        let sc = one_cell(1e9, 1.0);
        let o = nash_bargain(&sc.devices[0], &sc);
        assert!(!o.offload);
        assert_eq!(o.fee, 0.0);
        assert!(o.fee_floor > o.fee_ceiling);
    }

    #[test]
    fn uplink_past_deadline_means_no_agreement() {
        let sc = one_cell(0.5e8, 0.009); // uplink alone takes 0.01 s
        let o = nash_bargain(&sc.devices[0], &sc);
        assert!(!o.offload);
        assert_eq!(o.server_frequency, f64::INFINITY);
        assert_eq!(o.fee, 0.0);
    }

    #[test]
    fn settle_fee_is_the_clamped_midpoint() {
        assert_eq!(settle_fee(1.0, 3.0), 2.0);
        assert_eq!(settle_fee(2.0, 2.0), 2.0);
        // Inverted intervals (never reached through an agreement) clamp;
        // the ceiling check comes first.
        assert_eq!(settle_fee(3.0, 1.0), 1.0);
        assert_eq!(settle_fee(1.0, -3.0), -3.0);
    }

    fn synthetic(id: usize, frequency: f64, margin: f64) -> BargainOutcome {
        BargainOutcome {
            device: TdId(id),
            offload: true,
            fee: margin,
            fee_floor: 0.0,
            fee_ceiling: 2.0 * margin,
            server_frequency: frequency,
            uplink_delay: 0.0,
            local_utility: 0.0,
        }
    }

    #[test]
    fn filter_keeps_later_smaller_tasks_after_a_spill() {
        // Capacity 10; demands {6, 5, 4} at priorities {3, 2, 1}: the
        // 5-unit task spills, then the 4-unit task still fits.
        let a = synthetic(0, 6.0, 18.0);
        let b = synthetic(1, 5.0, 10.0);
        let c = synthetic(2, 4.0, 4.0);
        let report = filter_overloaded(CellId(0), 10.0, &[&a, &b, &c]);
        assert!(report.overloaded());
        assert_eq!(report.kept, vec![TdId(0), TdId(2)]);
        assert_eq!(report.spilled, vec![TdId(1)]);
        assert_relative_eq!(report.committed, 10.0);
        assert_relative_eq!(report.spare(), 0.0);
    }

    #[test]
    fn filter_breaks_priority_ties_by_device_id() {
        let a = synthetic(2, 6.0, 6.0); // priority 1
        let b = synthetic(0, 6.0, 6.0); // priority 1
        let c = synthetic(1, 6.0, 6.0); // priority 1
        let report = filter_overloaded(CellId(0), 6.0, &[&a, &b, &c]);
        assert_eq!(report.kept, vec![TdId(0)]);
        assert_eq!(report.spilled, vec![TdId(1), TdId(2)]);
    }

    #[test]
    fn underloaded_cell_keeps_everything_in_id_order() {
        let a = synthetic(0, 2.0, 1.0);
        let b = synthetic(1, 3.0, 9.0);
        let report = filter_overloaded(CellId(0), 10.0, &[&a, &b]);
        assert!(!report.overloaded());
        assert_eq!(report.kept, vec![TdId(0), TdId(1)]);
        assert!(report.spilled.is_empty());
        assert_relative_eq!(report.spare(), 5.0);
    }

    #[test]
    fn disagreements_do_not_count_toward_demand() {
        let mut a = synthetic(0, 2.0, 1.0);
        a.offload = false;
        let b = synthetic(1, 3.0, 9.0);
        let report = filter_overloaded(CellId(0), 10.0, &[&a, &b]);
        assert_eq!(report.kept, vec![TdId(1)]);
        assert_relative_eq!(report.demand, 3.0);
    }
}
