//! Domain types and the DRAM latency cost model.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Machine shape: `nodes` sockets with `cores_per_node` cores each, running
/// `threads` threads of one application (one thread per core at most).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Topology {
    nodes: usize,
    cores_per_node: usize,
    threads: usize,
}

impl Topology {
    pub fn new(nodes: usize, cores_per_node: usize, threads: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidTopology {
                reason: "at least one node is required",
            });
        }
        if cores_per_node == 0 {
            return Err(Error::InvalidTopology {
                reason: "at least one core per node is required",
            });
        }
        if threads == 0 {
            return Err(Error::InvalidTopology {
                reason: "at least one thread is required",
            });
        }
        match nodes.checked_mul(cores_per_node) {
            Some(slots) if threads <= slots => Ok(Topology {
                nodes,
                cores_per_node,
                threads,
            }),
            _ => Err(Error::InvalidTopology {
                reason: "more threads than cores (threads > nodes * cores_per_node)",
            }),
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn cores_per_node(&self) -> usize {
        self.cores_per_node
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Total number of cores, `nodes * cores_per_node`.
    pub fn slots(&self) -> usize {
        self.nodes * self.cores_per_node
    }
}

impl Default for Topology {
    /// Four sockets with four cores each, fully occupied.
    fn default() -> Self {
        Topology {
            nodes: 4,
            cores_per_node: 4,
            threads: 16,
        }
    }
}

/// Cycles charged per DRAM access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatencyModel {
    local_cycles: u64,
    remote_cycles: u64,
}

impl LatencyModel {
    pub fn new(local_cycles: u64, remote_cycles: u64) -> Result<Self> {
        if local_cycles == 0 || remote_cycles < local_cycles {
            return Err(Error::InvalidLatency {
                local: local_cycles,
                remote: remote_cycles,
            });
        }
        Ok(LatencyModel {
            local_cycles,
            remote_cycles,
        })
    }

    pub fn local_cycles(&self) -> u64 {
        self.local_cycles
    }

    pub fn remote_cycles(&self) -> u64 {
        self.remote_cycles
    }

    /// Cycles for `accesses` issued to `target` by a thread running on `home`.
    #[inline]
    pub fn price(&self, home: usize, target: usize, accesses: u64) -> u64 {
        if home == target {
            accesses * self.local_cycles
        } else {
            accesses * self.remote_cycles
        }
    }
}

impl Default for LatencyModel {
    /// 100 cycles local, 150 cycles remote.
    fn default() -> Self {
        LatencyModel {
            local_cycles: 100,
            remote_cycles: 150,
        }
    }
}

/// Per-quantum DRAM read counters: `get(t, n)` is the number of reads thread
/// `t` issued to memory homed on node `n`.
///
/// The counts do not depend on where a thread runs; placement only decides
/// which of them are local.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AccessMatrix {
    threads: usize,
    nodes: usize,
    counts: Vec<u64>,
}

impl AccessMatrix {
    /// Builds a matrix from row-major counts (`threads` rows of `nodes` entries).
    pub fn new(threads: usize, nodes: usize, counts: Vec<u64>) -> Result<Self> {
        let expected = threads.checked_mul(nodes).ok_or(Error::InvalidSpec {
            reason: "matrix dimensions overflow",
        })?;
        if counts.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "access matrix entries",
                expected,
                found: counts.len(),
            });
        }
        Ok(AccessMatrix {
            threads,
            nodes,
            counts,
        })
    }

    pub fn zeros(threads: usize, nodes: usize) -> Self {
        AccessMatrix {
            threads,
            nodes,
            counts: vec![0; threads * nodes],
        }
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let nodes = rows.first().map_or(0, |r| r.as_ref().len());
        let mut counts = Vec::with_capacity(rows.len() * nodes);
        for row in rows {
            let row = row.as_ref();
            if row.len() != nodes {
                return Err(Error::DimensionMismatch {
                    what: "access matrix row length",
                    expected: nodes,
                    found: row.len(),
                });
            }
            counts.extend_from_slice(row);
        }
        Ok(AccessMatrix {
            threads: rows.len(),
            nodes,
            counts,
        })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn get(&self, thread: usize, node: usize) -> u64 {
        self.counts[thread * self.nodes + node]
    }

    pub fn set(&mut self, thread: usize, node: usize, count: u64) {
        self.counts[thread * self.nodes + node] = count;
    }

    pub fn row(&self, thread: usize) -> &[u64] {
        &self.counts[thread * self.nodes..(thread + 1) * self.nodes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        // chunks_exact panics on zero; an empty-column matrix has no rows worth yielding
        self.counts
            .chunks_exact(self.nodes.max(1))
            .take(self.threads)
    }

    /// Row-major view of all counts.
    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_total(&self, thread: usize) -> u64 {
        self.row(thread).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        AccessMatrix {
            threads: self.threads,
            nodes: self.nodes,
            counts: self.counts.iter().map(|c| c * factor).collect(),
        }
    }

    pub(crate) fn check_topology(&self, topology: &Topology) -> Result<()> {
        if self.threads != topology.threads() {
            return Err(Error::DimensionMismatch {
                what: "access matrix threads",
                expected: topology.threads(),
                found: self.threads,
            });
        }
        if self.nodes != topology.nodes() {
            return Err(Error::DimensionMismatch {
                what: "access matrix nodes",
                expected: topology.nodes(),
                found: self.nodes,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for AccessMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// A total, capacity-respecting mapping from thread to node.
///
/// The only ways to obtain one are [`Schedule::new`], which validates, and the
/// schedulers in this crate, which construct valid placements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schedule {
    placement: Vec<usize>,
}

impl Schedule {
    pub fn new(placement: Vec<usize>, topology: &Topology) -> Result<Self> {
        if placement.len() != topology.threads() {
            return Err(Error::DimensionMismatch {
                what: "schedule threads",
                expected: topology.threads(),
                found: placement.len(),
            });
        }
        let mut load = vec![0usize; topology.nodes()];
        for (thread, &node) in placement.iter().enumerate() {
            if node >= topology.nodes() {
                return Err(Error::NodeOutOfRange {
                    thread,
                    node,
                    nodes: topology.nodes(),
                });
            }
            load[node] += 1;
            if load[node] > topology.cores_per_node() {
                return Err(Error::CapacityExceeded {
                    node,
                    assigned: load[node],
                    capacity: topology.cores_per_node(),
                });
            }
        }
        Ok(Schedule { placement })
    }

    /// For placements built by this crate's own schedulers.
    pub(crate) fn from_valid(placement: Vec<usize>, topology: &Topology) -> Self {
        debug_assert!(Schedule::new(placement.clone(), topology).is_ok());
        Schedule { placement }
    }

    pub fn node_of(&self, thread: usize) -> usize {
        self.placement[thread]
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }

    pub fn threads(&self) -> usize {
        self.placement.len()
    }

    /// Threads placed on `node`, in ascending order.
    pub fn threads_on(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.placement
            .iter()
            .enumerate()
            .filter(move |&(_, &n)| n == node)
            .map(|(t, _)| t)
    }
}

/// Local/remote split and cycle total of one matrix under one schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CostBreakdown {
    pub local_accesses: u64,
    pub remote_accesses: u64,
    pub total_cycles: u64,
}

impl CostBreakdown {
    pub fn accesses(&self) -> u64 {
        self.local_accesses + self.remote_accesses
    }
}

/// Block placement: thread `t` runs on node `t / cores_per_node`.
pub fn baseline_schedule(topology: &Topology) -> Schedule {
    let k = topology.cores_per_node();
    Schedule::from_valid((0..topology.threads()).map(|t| t / k).collect(), topology)
}

/// Prices `matrix` under `schedule`: every access to the thread's own node is
/// charged the local latency, every other access the remote latency.
pub fn schedule_cost(
    matrix: &AccessMatrix,
    schedule: &Schedule,
    lat: &LatencyModel,
) -> Result<CostBreakdown> {
    if matrix.threads() != schedule.threads() {
        return Err(Error::DimensionMismatch {
            what: "schedule threads vs matrix threads",
            expected: matrix.threads(),
            found: schedule.threads(),
        });
    }
    let mut local = 0u64;
    let mut total = 0u64;
    for (thread, row) in matrix.rows().enumerate() {
        let home = schedule.node_of(thread);
        if home >= matrix.nodes() {
            return Err(Error::NodeOutOfRange {
                thread,
                node: home,
                nodes: matrix.nodes(),
            });
        }
        local += row[home];
        total += row.iter().sum::<u64>();
    }
    let remote = total - local;
    Ok(CostBreakdown {
        local_accesses: local,
        remote_accesses: remote,
        total_cycles: local * lat.local_cycles() + remote * lat.remote_cycles(),
    })
}

/// Percentage of baseline cycles saved: `100 * (baseline - algo) / baseline`.
///
/// Negative when the algorithm is worse than the baseline. A zero baseline is
/// only accepted when the algorithm also spent zero cycles (reported as 0%).
pub fn savings_percent(baseline_cycles: u64, algo_cycles: u64) -> Result<f64> {
    if baseline_cycles == 0 {
        return if algo_cycles == 0 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateBaseline { algo_cycles })
        };
    }
    let saved = baseline_cycles as i128 - algo_cycles as i128;
    Ok(100.0 * saved as f64 / baseline_cycles as f64)
}
