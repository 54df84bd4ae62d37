//! Placement policies that map one quantum's counters to the next quantum's
//! schedule.
//!
//! The three greedy policies look only at raw access counts. The optimal
//! policy prices placements with a [`LatencyModel`] and solves the resulting
//! assignment problem exactly.
//!
//! Ties are broken the same way everywhere: higher count first, then lower
//! thread index, then lower node index, then lexicographically smaller group.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::assignment::{assignment_to_schedule, build_slot_costs, hungarian_solve};
use crate::model::{AccessMatrix, LatencyModel, Schedule, Topology};
use crate::{Error, Result};

/// Default cap on `C(N, K) * L` group candidates for [`algo3_group_enumeration`].
pub const DEFAULT_GROUP_BOUND: u64 = 10_000_000;

/// The four placement policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Greedy scan over all (thread, node) counts in descending order.
    SortedPairs,
    /// Nodes in ascending order each take their top-K remaining threads.
    PerNode,
    /// Greedy scan over all (K-thread group, node) sums.
    GroupEnumeration,
    /// Minimum-latency placement via the Hungarian method.
    Hungarian,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::SortedPairs,
        Algorithm::PerNode,
        Algorithm::GroupEnumeration,
        Algorithm::Hungarian,
    ];

    /// 1-based number used in reports and on the command line.
    pub fn number(self) -> u8 {
        match self {
            Algorithm::SortedPairs => 1,
            Algorithm::PerNode => 2,
            Algorithm::GroupEnumeration => 3,
            Algorithm::Hungarian => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Algorithm::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    /// Whether the policy's output depends on the latency model.
    pub fn uses_latency(self) -> bool {
        matches!(self, Algorithm::Hungarian)
    }

    pub fn schedule(
        self,
        matrix: &AccessMatrix,
        topology: &Topology,
        lat: &LatencyModel,
    ) -> Result<Schedule> {
        match self {
            Algorithm::SortedPairs => algo1_sorted_pairs(matrix, topology),
            Algorithm::PerNode => algo2_per_node(matrix, topology),
            Algorithm::GroupEnumeration => algo3_group_enumeration(matrix, topology),
            Algorithm::Hungarian => algo4_hungarian(matrix, topology, lat),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "algo{}", self.number())
    }
}

/// Sort every (thread, node) count in descending order and walk the list,
/// placing a thread on a node the first time it appears while that node still
/// has a free core.
pub fn algo1_sorted_pairs(matrix: &AccessMatrix, topology: &Topology) -> Result<Schedule> {
    matrix.check_topology(topology)?;
    let nodes = topology.nodes();
    let mut pairs: Vec<(usize, usize)> = (0..topology.threads())
        .flat_map(|t| (0..nodes).map(move |n| (t, n)))
        .collect();
    // stable sort keeps (thread, node) ascending among equal counts
    pairs.sort_by_key(|&(t, n)| Reverse(matrix.get(t, n)));

    let mut placement = vec![usize::MAX; topology.threads()];
    let mut load = vec![0usize; nodes];
    let mut remaining = topology.threads();
    for (t, n) in pairs {
        if remaining == 0 {
            break;
        }
        if placement[t] != usize::MAX || load[n] == topology.cores_per_node() {
            continue;
        }
        placement[t] = n;
        load[n] += 1;
        remaining -= 1;
    }
    debug_assert_eq!(remaining, 0);
    Ok(Schedule::from_valid(placement, topology))
}

/// Visit nodes 0..L in order; each takes the K unassigned threads with the
/// most accesses to it.
pub fn algo2_per_node(matrix: &AccessMatrix, topology: &Topology) -> Result<Schedule> {
    matrix.check_topology(topology)?;
    let mut pool: Vec<usize> = (0..topology.threads()).collect();
    let mut placement = vec![0usize; topology.threads()];
    for node in 0..topology.nodes() {
        if pool.is_empty() {
            break;
        }
        pool.sort_by_key(|&t| (Reverse(matrix.get(t, node)), t));
        let take = topology.cores_per_node().min(pool.len());
        for t in pool.drain(..take) {
            placement[t] = node;
        }
        pool.sort_unstable();
    }
    Ok(Schedule::from_valid(placement, topology))
}

/// A group of threads paired with a node, scored by the group's summed
/// accesses to that node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCandidate {
    pub threads: Vec<usize>,
    pub node: usize,
    pub accesses: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of (group, node) candidates algorithm 3 enumerates: `C(N, K) * L`.
pub fn group_candidate_count(topology: &Topology) -> u128 {
    binomial(topology.threads(), topology.cores_per_node()).saturating_mul(topology.nodes() as u128)
}

/// Calls `f` for every `k`-combination of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Scored candidates over a shared table of lexicographically ordered groups.
struct CandidateTable {
    k: usize,
    groups: Vec<usize>,
    /// (accesses, group index, node), sorted into scan order
    entries: Vec<(u64, u32, u32)>,
}

impl CandidateTable {
    fn build(matrix: &AccessMatrix, topology: &Topology, bound: u64) -> Result<Self> {
        matrix.check_topology(topology)?;
        let required = group_candidate_count(topology);
        if required > bound as u128 || required > u32::MAX as u128 {
            return Err(Error::EnumerationBound {
                what: "group enumeration",
                required,
                bound,
            });
        }
        let k = topology.cores_per_node();
        let mut groups = Vec::new();
        let mut entries = Vec::with_capacity(required as usize);
        let mut index = 0u32;
        for_each_combination(topology.threads(), k, |group| {
            groups.extend_from_slice(group);
            for node in 0..topology.nodes() {
                let accesses: u64 = group.iter().map(|&t| matrix.get(t, node)).sum();
                entries.push((accesses, index, node as u32));
            }
            index += 1;
        });
        // group indices follow lexicographic order, so the first thread of a
        // group never decreases with the index
        entries.sort_unstable_by(|a, b| {
            b.0.cmp(&a.0)
                .then_with(|| groups[a.1 as usize * k].cmp(&groups[b.1 as usize * k]))
                .then(a.2.cmp(&b.2))
                .then(a.1.cmp(&b.1))
        });
        Ok(CandidateTable { k, groups, entries })
    }

    fn group(&self, index: u32) -> &[usize] {
        let start = index as usize * self.k;
        &self.groups[start..start + self.k]
    }
}

/// Every (K-thread group, node) pair with its summed count, in scan order.
pub fn enumerate_group_candidates(
    matrix: &AccessMatrix,
    topology: &Topology,
    bound: u64,
) -> Result<Vec<GroupCandidate>> {
    let table = CandidateTable::build(matrix, topology, bound)?;
    Ok(table
        .entries
        .iter()
        .map(|&(accesses, group, node)| GroupCandidate {
            threads: table.group(group).to_vec(),
            node: node as usize,
            accesses,
        })
        .collect())
}

/// Greedy over whole groups: take the best-scoring (group, node) pair whose
/// threads and node are all still free, one group per node.
///
/// When `N` is not a multiple of `K` the leftover `N mod K` threads form a
/// final group that goes to the free node they access most.
pub fn algo3_group_enumeration(matrix: &AccessMatrix, topology: &Topology) -> Result<Schedule> {
    algo3_group_enumeration_bounded(matrix, topology, DEFAULT_GROUP_BOUND)
}

pub fn algo3_group_enumeration_bounded(
    matrix: &AccessMatrix,
    topology: &Topology,
    bound: u64,
) -> Result<Schedule> {
    let table = CandidateTable::build(matrix, topology, bound)?;
    let k = topology.cores_per_node();
    let mut placement = vec![usize::MAX; topology.threads()];
    let mut node_taken = vec![false; topology.nodes()];
    let mut remaining = topology.threads();

    for &(_, group, node) in &table.entries {
        if remaining < k {
            break;
        }
        let node = node as usize;
        let group = table.group(group);
        if node_taken[node] || group.iter().any(|&t| placement[t] != usize::MAX) {
            continue;
        }
        node_taken[node] = true;
        for &t in group {
            placement[t] = node;
        }
        remaining -= k;
    }

    if remaining > 0 {
        let leftover: Vec<usize> = (0..topology.threads())
            .filter(|&t| placement[t] == usize::MAX)
            .collect();
        let node = (0..topology.nodes())
            .filter(|&n| !node_taken[n])
            .max_by_key(|&n| {
                let sum: u64 = leftover.iter().map(|&t| matrix.get(t, n)).sum();
                (sum, Reverse(n))
            })
            .expect("a free node remains for the leftover group");
        for t in leftover {
            placement[t] = node;
        }
    }
    Ok(Schedule::from_valid(placement, topology))
}

/// Optimal placement: the capacity-respecting schedule of least total DRAM
/// latency under `lat`.
pub fn algo4_hungarian(
    matrix: &AccessMatrix,
    topology: &Topology,
    lat: &LatencyModel,
) -> Result<Schedule> {
    let slots = build_slot_costs(matrix, topology, lat)?;
    let assignment = hungarian_solve(slots.costs());
    Ok(assignment_to_schedule(&slots, &assignment, topology))
}
