//! Core data model: scenario topology, task and device parameters, and the
//! per-task allocation decision.
//!
//! Unit conventions, used consistently everywhere:
//! bits for task sizes, cycles for task workloads, Hz for processor
//! frequencies, bit/s for link rates, W for transmit and noise powers,
//! seconds for delays and deadlines, dollars for all monetary quantities, and
//! J·s²/cycle·Hz⁻² (so that `coeff · f² · cycles` is Joules) for the
//! computation energy coefficients.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;

/// Scenario files carry this schema version.
pub const SCHEMA_VERSION: u32 = 1;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub usize);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Index of a cell and of its edge server (one server per cell).
    CellId
);
id_type!(
    /// Index of a task device; each task device owns exactly one task, so
    /// this also identifies the task.
    TdId
);
id_type!(
    /// Index of an auxiliary device (global across cells).
    AdId
);

/// Economy-wide parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    /// Weight of energy cost relative to payments (dimensionless).
    pub gamma: f64,
    /// Receiver noise power in W.
    pub noise_power: f64,
    /// Channel bandwidth in Hz (all wireless links).
    pub bandwidth: f64,
}

/// A deadline-bound computation task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// Input size in bits.
    pub size_bits: f64,
    /// Workload in CPU cycles.
    pub cycles: f64,
    /// Completion deadline in seconds, counted from release.
    pub deadline: f64,
    /// Value to the owner of completing within the deadline, in dollars.
    pub value: f64,
}

/// A wireless link's propagation parameters (power is supplied by the sender).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioLink {
    /// Channel power gain |h|² (dimensionless).
    pub gain: f64,
    /// Interference power at the receiver in W.
    pub interference: f64,
}

/// A device holding one task it may execute locally or offload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDevice {
    pub id: TdId,
    /// Home cell.
    pub cell: CellId,
    pub task: Task,
    /// Maximum local processor frequency in Hz.
    pub capacity: f64,
    /// Uplink transmit power in W.
    pub transmit_power: f64,
    /// Computation energy coefficient.
    pub energy_coeff: f64,
    /// Uplink to the home edge server.
    pub uplink: RadioLink,
}

/// A device renting out spare compute through the per-cell auction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxDevice {
    pub id: AdId,
    /// Cell whose auction this device participates in.
    pub cell: CellId,
    /// Maximum processor frequency offered, in Hz.
    pub capacity: f64,
    /// Computation energy coefficient.
    pub energy_coeff: f64,
    /// Reported reservation price in dollars per cycle.
    pub ask: f64,
    /// Downlink from the home edge server to this device.
    pub downlink: RadioLink,
}

/// An edge server (one per cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeServer {
    pub id: CellId,
    /// Total processor frequency available for offloaded tasks, in Hz.
    pub capacity: f64,
    /// Computation energy coefficient.
    pub energy_coeff: f64,
    /// Transmit power in W, used when forwarding task data to aux devices.
    pub transmit_power: f64,
}

/// Wired backhaul rates between edge servers, in bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackhaulMatrix {
    /// `rates[from][to]`; the diagonal is unused.
    pub rates: Vec<Vec<f64>>,
}

impl BackhaulMatrix {
    /// Uniform symmetric backhaul over `cells` servers.
    pub fn uniform(cells: usize, rate: f64) -> Self {
        let mut rates = vec![vec![rate; cells]; cells];
        for (i, row) in rates.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        BackhaulMatrix { rates }
    }

    pub fn rate(&self, from: CellId, to: CellId) -> f64 {
        self.rates[from.0][to.0]
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    /// Seed the scenario was generated from (0 for hand-built scenarios).
    pub seed: u64,
    pub econ: EconParams,
    pub servers: Vec<EdgeServer>,
    pub devices: Vec<TaskDevice>,
    pub aux_devices: Vec<AuxDevice>,
    pub backhaul: BackhaulMatrix,
}

impl Scenario {
    /// Number of cells (= number of edge servers).
    pub fn cells(&self) -> usize {
        self.servers.len()
    }

    pub fn device(&self, id: TdId) -> &TaskDevice {
        &self.devices[id.0]
    }

    pub fn aux(&self, id: AdId) -> &AuxDevice {
        &self.aux_devices[id.0]
    }

    pub fn server(&self, id: CellId) -> &EdgeServer {
        &self.servers[id.0]
    }

    /// Task devices homed in `cell`, in id order.
    pub fn devices_in_cell(&self, cell: CellId) -> impl Iterator<Item = &TaskDevice> {
        self.devices.iter().filter(move |d| d.cell == cell)
    }

    /// Auxiliary devices homed in `cell`, in id order.
    pub fn aux_in_cell(&self, cell: CellId) -> impl Iterator<Item = &AuxDevice> {
        self.aux_devices.iter().filter(move |a| a.cell == cell)
    }

    /// Checks indices, shapes, and sign constraints on physical parameters.
    pub fn check_structure(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if self.servers.is_empty() {
            return bad("no edge servers".into());
        }
        let m = self.cells();
        if !(self.econ.gamma.is_finite() && self.econ.gamma >= 0.0) {
            return bad(format!("gamma must be finite and >= 0, got {}", self.econ.gamma));
        }
        if !(self.econ.noise_power > 0.0) || !(self.econ.bandwidth > 0.0) {
            return bad("noise power and bandwidth must be positive".into());
        }
        for (i, s) in self.servers.iter().enumerate() {
            if s.id.0 != i {
                return bad(format!("server at position {i} has id {}", s.id));
            }
            if !(s.capacity > 0.0 && s.energy_coeff > 0.0 && s.transmit_power > 0.0) {
                return bad(format!("server {i} has a non-positive physical parameter"));
            }
        }
        if self.backhaul.rates.len() != m || self.backhaul.rates.iter().any(|r| r.len() != m) {
            return bad(format!("backhaul matrix must be {m}x{m}"));
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && !(self.backhaul.rates[i][j] > 0.0) {
                    return bad(format!("backhaul rate {i}->{j} must be positive"));
                }
            }
        }
        for (i, d) in self.devices.iter().enumerate() {
            if d.id.0 != i {
                return bad(format!("device at position {i} has id {}", d.id));
            }
            if d.cell.0 >= m {
                return bad(format!("device {i} is homed in unknown cell {}", d.cell));
            }
            let t = &d.task;
            if !(t.size_bits > 0.0 && t.cycles > 0.0 && t.deadline > 0.0 && t.value > 0.0) {
                return bad(format!("device {i} has a non-positive task parameter"));
            }
            if !(d.capacity > 0.0
                && d.transmit_power > 0.0
                && d.energy_coeff > 0.0
                && d.uplink.gain > 0.0
                && d.uplink.interference >= 0.0)
            {
                return bad(format!("device {i} has a non-positive physical parameter"));
            }
        }
        for (i, a) in self.aux_devices.iter().enumerate() {
            if a.id.0 != i {
                return bad(format!("aux device at position {i} has id {}", a.id));
            }
            if a.cell.0 >= m {
                return bad(format!("aux device {i} is homed in unknown cell {}", a.cell));
            }
            if !(a.capacity > 0.0
                && a.energy_coeff > 0.0
                && a.ask >= 0.0
                && a.downlink.gain > 0.0
                && a.downlink.interference >= 0.0)
            {
                return bad(format!("aux device {i} has a non-positive physical parameter"));
            }
        }
        Ok(())
    }
}

/// Where a task executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecutionMode {
    /// On the owning device.
    Local,
    /// On the home cell's edge server.
    PrimaryEs,
    /// On another cell's edge server, forwarded over the backhaul.
    NeighborEs(CellId),
    /// On an auxiliary device in the home cell, forwarded over the air.
    AuxDevice(AdId),
}

impl ExecutionMode {
    /// True for every mode except `Local`.
    pub fn is_offloaded(self) -> bool {
        !matches!(self, ExecutionMode::Local)
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecutionMode::Local => write!(f, "local"),
            ExecutionMode::PrimaryEs => write!(f, "primary-es"),
            ExecutionMode::NeighborEs(c) => write!(f, "neighbor-es({c})"),
            ExecutionMode::AuxDevice(a) => write!(f, "aux-device({a})"),
        }
    }
}

/// Final allocation of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub mode: ExecutionMode,
    /// Offload fee the device pays the provider; 0 when local.
    pub fee: f64,
    /// Reward the provider pays the executing aux device; 0 unless the mode
    /// is `AuxDevice`.
    pub reward: f64,
}

impl Decision {
    pub fn local() -> Self {
        Decision { mode: ExecutionMode::Local, fee: 0.0, reward: 0.0 }
    }
}

/// Execution costs of one task in one mode, split by paying party.
///
/// All monetary fields are energy costs scaled by `gamma`, except that
/// `device` includes the offload fee and `home_server` includes the aux
/// reward, so each party's utility is its gross gain minus its field here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// Paid by the task device: local computation energy, or uplink
    /// transmission energy plus the offload fee.
    pub device: f64,
    /// Paid by the provider at the home server: computation, backhaul
    /// forwarding, or radio forwarding plus the aux reward.
    pub home_server: f64,
    /// Paid by the provider at the executing neighbor server: computation.
    pub remote_server: f64,
    /// Paid by the executing aux device: computation energy.
    pub aux_device: f64,
    /// Processor frequency the executing node must commit, in Hz.
    pub frequency: f64,
}
