//! Feasibility and rationality checks over a final decision vector.
//!
//! Every check recomputes from the scenario and the decisions alone, so the
//! validator also catches pipelines that report utilities inconsistent with
//! what they decided. Monetary checks use [`crate::EPS`]; frequency sums use
//! a tolerance relative to the node's capacity.

use std::fmt;

use crate::economics::{provider_margin, required_frequency, td_utility};
use crate::model::{Decision, ExecutionMode, Scenario};
use crate::EPS;

/// The individual constraints, coded `a` through `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// (a) One decision per task device.
    DecisionShape,
    /// (b) Decision targets exist in the scenario.
    TargetExists,
    /// (c) Local tasks pay no fee and earn no reward.
    LocalSettlesNothing,
    /// (d) Server-executed tasks pay no aux reward.
    ServerPaysNoReward,
    /// (e) A neighbor-server target is a different cell's server.
    NeighborDistinct,
    /// (f) An aux target sits in the task's home cell.
    AuxInHomeCell,
    /// (g) Fees are non-negative.
    FeeNonnegative,
    /// (h) An aux device's reward covers its reported per-cycle price.
    RewardCoversAsk,
    /// (i) No executing node is committed beyond its frequency capacity,
    /// and every placement can still meet its deadline.
    NodeCapacity,
    /// (j) The provider ends with non-negative utility overall.
    ProviderGain,
    /// (k) Every task device ends at or above zero utility.
    DeviceGain,
    /// (l) Every aux device ends at or above zero utility.
    AuxGain,
}

impl Constraint {
    pub fn code(self) -> char {
        match self {
            Constraint::DecisionShape => 'a',
            Constraint::TargetExists => 'b',
            Constraint::LocalSettlesNothing => 'c',
            Constraint::ServerPaysNoReward => 'd',
            Constraint::NeighborDistinct => 'e',
            Constraint::AuxInHomeCell => 'f',
            Constraint::FeeNonnegative => 'g',
            Constraint::RewardCoversAsk => 'h',
            Constraint::NodeCapacity => 'i',
            Constraint::ProviderGain => 'j',
            Constraint::DeviceGain => 'k',
            Constraint::AuxGain => 'l',
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.code())
    }
}

/// One failed check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.constraint, self.detail)
    }
}

/// Checks `decisions` against every constraint; an empty result means the
/// allocation is feasible and individually rational for all parties.
pub fn validate(sc: &Scenario, decisions: &[Decision]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |constraint: Constraint, detail: String| {
        out.push(Violation { constraint, detail });
    };

    if decisions.len() != sc.devices.len() {
        push(
            Constraint::DecisionShape,
            format!("{} decisions for {} task devices", decisions.len(), sc.devices.len()),
        );
        return out;
    }

    let mut es_load = vec![0.0f64; sc.cells()];
    let mut ad_load = vec![0.0f64; sc.aux_devices.len()];
    let mut ad_reward = vec![0.0f64; sc.aux_devices.len()];
    let mut ad_cycles = vec![0.0f64; sc.aux_devices.len()];
    let mut esp_total = 0.0f64;

    for (dev, d) in sc.devices.iter().zip(decisions) {
        let who = format!("device {}", dev.id);
        if d.fee < 0.0 {
            push(Constraint::FeeNonnegative, format!("{who}: fee {} < 0", d.fee));
        }
        // Target shape per mode.
        let mut target_ok = true;
        match d.mode {
            ExecutionMode::Local => {
                if d.fee != 0.0 || d.reward != 0.0 {
                    push(
                        Constraint::LocalSettlesNothing,
                        format!("{who}: local but fee {} reward {}", d.fee, d.reward),
                    );
                }
            }
            ExecutionMode::PrimaryEs => {
                if d.reward != 0.0 {
                    push(
                        Constraint::ServerPaysNoReward,
                        format!("{who}: primary server but reward {}", d.reward),
                    );
                }
            }
            ExecutionMode::NeighborEs(to) => {
                if to.0 >= sc.cells() {
                    push(Constraint::TargetExists, format!("{who}: no server {to}"));
                    target_ok = false;
                } else if to == dev.cell {
                    push(
                        Constraint::NeighborDistinct,
                        format!("{who}: neighbor target is the home server {to}"),
                    );
                    target_ok = false;
                }
                if d.reward != 0.0 {
                    push(
                        Constraint::ServerPaysNoReward,
                        format!("{who}: neighbor server but reward {}", d.reward),
                    );
                }
            }
            ExecutionMode::AuxDevice(ad) => {
                if ad.0 >= sc.aux_devices.len() {
                    push(Constraint::TargetExists, format!("{who}: no aux device {ad}"));
                    target_ok = false;
                } else if sc.aux(ad).cell != dev.cell {
                    push(
                        Constraint::AuxInHomeCell,
                        format!(
                            "{who}: aux device {ad} is in cell {}, not home cell {}",
                            sc.aux(ad).cell,
                            dev.cell
                        ),
                    );
                    target_ok = false;
                }
            }
        }
        if !target_ok {
            continue;
        }

        // Deadline feasibility and node loads.
        if d.mode.is_offloaded() {
            match required_frequency(dev, d.mode, sc) {
                Ok(f) => match d.mode {
                    ExecutionMode::PrimaryEs => es_load[dev.cell.0] += f,
                    ExecutionMode::NeighborEs(to) => es_load[to.0] += f,
                    ExecutionMode::AuxDevice(ad) => {
                        ad_load[ad.0] += f;
                        ad_reward[ad.0] += d.reward;
                        ad_cycles[ad.0] += dev.task.cycles;
                        let floor = sc.aux(ad).ask * dev.task.cycles;
                        if d.reward < floor - EPS {
                            push(
                                Constraint::RewardCoversAsk,
                                format!(
                                    "{who}: reward {} below aux device {ad}'s price {floor}",
                                    d.reward
                                ),
                            );
                        }
                    }
                    ExecutionMode::Local => unreachable!(),
                },
                Err(_) => push(
                    Constraint::NodeCapacity,
                    format!("{who}: mode {} cannot meet the deadline", d.mode),
                ),
            }
            match provider_margin(dev, d, sc) {
                Ok(margin) => esp_total += margin,
                Err(_) => {} // already reported above
            }
        }

        let u = td_utility(dev, d, sc);
        if u < -EPS {
            push(Constraint::DeviceGain, format!("{who}: utility {u} < 0"));
        }
    }

    for (c, load) in es_load.iter().enumerate() {
        let cap = sc.servers[c].capacity;
        if *load > cap * (1.0 + 1e-9) {
            push(
                Constraint::NodeCapacity,
                format!("server {c}: committed {load} Hz exceeds capacity {cap} Hz"),
            );
        }
    }
    for (k, load) in ad_load.iter().enumerate() {
        let cap = sc.aux_devices[k].capacity;
        if *load > cap * (1.0 + 1e-9) {
            push(
                Constraint::NodeCapacity,
                format!("aux device {k}: committed {load} Hz exceeds capacity {cap} Hz"),
            );
        }
    }
    for a in &sc.aux_devices {
        let u = ad_reward[a.id.0] - a.ask * ad_cycles[a.id.0];
        if u < -EPS {
            push(Constraint::AuxGain, format!("aux device {}: utility {u} < 0", a.id));
        }
    }
    if esp_total < -EPS {
        push(Constraint::ProviderGain, format!("provider utility {esp_total} < 0"));
    }
    out
}
