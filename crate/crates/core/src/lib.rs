//! Thread-to-node placement for ccNUMA machines.
//!
//! Each scheduling quantum produces an [`AccessMatrix`]: for every thread, the
//! number of DRAM reads it issued to memory homed on each node. A scheduler
//! turns that matrix into the [`Schedule`] for the next quantum, and the
//! [`LatencyModel`] prices a schedule by charging local and remote accesses
//! differently.
//!
//! The crate provides:
//!
//! - the cost model and a fixed block baseline ([`model`]),
//! - an exact Hungarian solver plus a brute-force oracle ([`assignment`]),
//! - three greedy placement heuristics and the optimal placement ([`schedulers`]),
//! - seeded phase-structured synthetic workloads ([`workload`]),
//! - the quantum loop, replication and latency sweeps ([`sim`]).
//!
//! Everything here is pure computation; file formats and the command-line
//! front end live in the `numasched` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assignment;
mod error;
pub mod model;
pub mod schedulers;
pub mod sim;
pub mod workload;

pub use crate::error::Error;
pub use crate::model::{
    baseline_schedule, savings_percent, schedule_cost, AccessMatrix, CostBreakdown, LatencyModel,
    Schedule, Topology,
};
pub use crate::schedulers::Algorithm;
pub use crate::sim::{
    run_replicated, run_simulation, sensitivity_sweep, AggregateCell, AggregateResult,
    ExperimentSpec, QuantumResult, SimulationReport, WorkloadSource,
};
pub use crate::workload::{gen_synth, SynthKind, SynthSpec, Workload, WorkloadKind, WorkloadMeta};

pub type Result<T, E = Error> = core::result::Result<T, E>;
