//! Exact solvers for capacitated thread placement.
//!
//! A node with `K` cores is expanded into `K` interchangeable slots, which
//! turns "place N threads on L nodes of capacity K" into a square assignment
//! problem over `L * K` slots. Missing threads (when `N < L * K`) become
//! phantom rows of zero cost.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{AccessMatrix, LatencyModel, Schedule, Topology};
use crate::{Error, Result};

/// Default cap on the number of placements [`brute_force_optimal`] will visit.
pub const DEFAULT_ORACLE_BOUND: u64 = 10_000_000;

/// Dense square matrix of non-negative integer costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    size: usize,
    costs: Vec<u64>,
}

impl CostMatrix {
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let size = rows.len();
        let mut costs = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != size {
                return Err(Error::NotSquare {
                    rows: size,
                    row: i,
                    len: row.len(),
                });
            }
            costs.extend_from_slice(row);
        }
        Ok(CostMatrix { size, costs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.costs[row * self.size + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.costs[row * self.size..(row + 1) * self.size]
    }

    /// Adds `delta` to every entry of `row`.
    pub fn shift_row(&mut self, row: usize, delta: u64) {
        for c in &mut self.costs[row * self.size..(row + 1) * self.size] {
            *c += delta;
        }
    }
}

/// Slot-expanded placement costs. Column `s` is a core on node
/// `s / cores_per_node`; rows at or beyond `threads` are zero-cost padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotCostMatrix {
    costs: CostMatrix,
    cores_per_node: usize,
    threads: usize,
}

impl SlotCostMatrix {
    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn node_of_slot(&self, slot: usize) -> usize {
        slot / self.cores_per_node
    }
}

/// A perfect matching of rows to columns and its total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `columns[row]` is the column matched to `row`.
    pub columns: Vec<usize>,
    pub total_cost: u64,
}

/// Cost of running thread `thread` on `node` for one quantum.
pub fn placement_cost(
    matrix: &AccessMatrix,
    thread: usize,
    node: usize,
    lat: &LatencyModel,
) -> u64 {
    let row = matrix.row(thread);
    let local = row[node];
    let remote: u64 = row.iter().sum::<u64>() - local;
    local * lat.local_cycles() + remote * lat.remote_cycles()
}

pub fn build_slot_costs(
    matrix: &AccessMatrix,
    topology: &Topology,
    lat: &LatencyModel,
) -> Result<SlotCostMatrix> {
    matrix.check_topology(topology)?;
    let k = topology.cores_per_node();
    let size = topology.slots();
    let mut costs = vec![0u64; size * size];
    for thread in 0..topology.threads() {
        let row = &mut costs[thread * size..(thread + 1) * size];
        for node in 0..topology.nodes() {
            let c = placement_cost(matrix, thread, node, lat);
            row[node * k..(node + 1) * k].fill(c);
        }
    }
    Ok(SlotCostMatrix {
        costs: CostMatrix { size, costs },
        cores_per_node: k,
        threads: topology.threads(),
    })
}

/// Minimum-cost perfect matching via shortest augmenting paths with dual
/// potentials (O(n^3)).
///
/// Rows are inserted one at a time. Among equally reduced-cost columns the
/// lowest index is taken, so the result is deterministic.
pub fn hungarian_solve(costs: &CostMatrix) -> Assignment {
    let n = costs.size();
    if n == 0 {
        return Assignment {
            columns: Vec::new(),
            total_cost: 0,
        };
    }

    // 1-based with column 0 as the virtual root of each search
    let inf = i128::MAX / 4;
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.fill(inf);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = costs.get(i0 - 1, j - 1) as i128 - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0usize; n];
    for j in 1..=n {
        columns[row_of[j] - 1] = j - 1;
    }
    let total_cost = columns
        .iter()
        .enumerate()
        .map(|(r, &c)| costs.get(r, c))
        .sum();
    Assignment {
        columns,
        total_cost,
    }
}

/// Converts a slot matching into a node-level schedule for the real threads.
pub fn assignment_to_schedule(
    slots: &SlotCostMatrix,
    assignment: &Assignment,
    topology: &Topology,
) -> Schedule {
    let placement = assignment.columns[..slots.threads()]
        .iter()
        .map(|&slot| slots.node_of_slot(slot))
        .collect();
    Schedule::from_valid(placement, topology)
}

/// Number of capacity-respecting placements of the topology's threads,
/// saturating at `u128::MAX`.
pub fn count_placements(topology: &Topology) -> u128 {
    let n = topology.threads();
    let k = topology.cores_per_node();

    // binom[m][c] for m <= n
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for m in 0..=n {
        binom[m][0] = 1;
        for c in 1..=m {
            binom[m][c] =
                binom[m - 1][c - 1].saturating_add(if c < m { binom[m - 1][c] } else { 0 });
        }
    }

    // ways[m]: labelled placements of m threads onto the nodes seen so far
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for _ in 0..topology.nodes() {
        let mut next = vec![0u128; n + 1];
        for m in 0..=n {
            for c in 0..=k.min(m) {
                let term = ways[m - c].saturating_mul(binom[m][c]);
                next[m] = next[m].saturating_add(term);
            }
        }
        ways = next;
    }
    ways[n]
}

/// Exhaustive search over every capacity-respecting placement, with the
/// default bound.
pub fn brute_force_optimal(
    matrix: &AccessMatrix,
    topology: &Topology,
    lat: &LatencyModel,
) -> Result<(Schedule, u64)> {
    brute_force_optimal_bounded(matrix, topology, lat, DEFAULT_ORACLE_BOUND)
}

/// Exhaustive search over every capacity-respecting placement.
///
/// Placements are visited in lexicographic order and only a strictly cheaper
/// one replaces the incumbent, so the lexicographically smallest optimum is
/// returned.
pub fn brute_force_optimal_bounded(
    matrix: &AccessMatrix,
    topology: &Topology,
    lat: &LatencyModel,
    bound: u64,
) -> Result<(Schedule, u64)> {
    matrix.check_topology(topology)?;
    let required = count_placements(topology);
    if required > bound as u128 {
        return Err(Error::EnumerationBound {
            what: "brute-force placement search",
            required,
            bound,
        });
    }

    let nodes = topology.nodes();
    let cost: Vec<u64> = (0..topology.threads())
        .flat_map(|t| (0..nodes).map(move |n| (t, n)))
        .map(|(t, n)| placement_cost(matrix, t, n, lat))
        .collect();

    let mut search = Search {
        nodes,
        capacity: topology.cores_per_node(),
        cost: &cost,
        load: vec![0; nodes],
        current: vec![0; topology.threads()],
        best: None,
    };
    search.descend(0, 0);
    let (best_cost, best) = search.best.expect("at least one feasible placement");
    Ok((Schedule::from_valid(best, topology), best_cost))
}

struct Search<'a> {
    nodes: usize,
    capacity: usize,
    cost: &'a [u64],
    load: Vec<usize>,
    current: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, thread: usize, acc: u64) {
        if thread == self.current.len() {
            if self.best.as_ref().is_none_or(|(c, _)| acc < *c) {
                self.best = Some((acc, self.current.clone()));
            }
            return;
        }
        for node in 0..self.nodes {
            if self.load[node] == self.capacity {
                continue;
            }
            self.load[node] += 1;
            self.current[thread] = node;
            self.descend(thread + 1, acc + self.cost[thread * self.nodes + node]);
            self.load[node] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::schedule_cost;

    fn small_instance() -> (AccessMatrix, Topology) {
        let m = AccessMatrix::from_rows(&[[100u64, 90], [95, 0], [94, 0], [0, 10]]).unwrap();
        (m, Topology::new(2, 2, 4).unwrap())
    }

    #[test]
    fn slot_costs_replicate_node_cost() {
        let t = Topology::new(4, 4, 1).unwrap();
        let m = AccessMatrix::from_rows(&[[10u64, 10, 10, 1000]]).unwrap();
        let s = build_slot_costs(&m, &t, &LatencyModel::default()).unwrap();
        assert_eq!(s.costs().size(), 16);
        let mut expect = Vec::new();
        for c in [154_000u64, 154_000, 154_000, 104_500] {
            expect.extend([c; 4]);
        }
        assert_eq!(s.costs().row(0), &expect[..]);
        // padding rows
        for r in 1..16 {
            assert!(s.costs().row(r).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn slot_costs_uniform_under_symmetric_latency() {
        let t = Topology::new(2, 2, 4).unwrap();
        let (m, _) = small_instance();
        let s = build_slot_costs(&m, &t, &LatencyModel::new(120, 120).unwrap()).unwrap();
        for r in 0..4 {
            let total = m.row_total(r) * 120;
            assert!(s.costs().row(r).iter().all(|&c| c == total));
        }
        let zero = AccessMatrix::zeros(4, 2);
        let s = build_slot_costs(&zero, &t, &LatencyModel::default()).unwrap();
        assert!(s.costs().row(0).iter().all(|&c| c == 0));
    }

    #[test]
    fn slot_costs_reject_mismatch() {
        let t = Topology::new(2, 2, 4).unwrap();
        let m = AccessMatrix::zeros(4, 3);
        assert!(matches!(
            build_slot_costs(&m, &t, &LatencyModel::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hungarian_identity_favoring() {
        let c = CostMatrix::from_rows(&[[0u64, 9], [9, 0]]).unwrap();
        let a = hungarian_solve(&c);
        assert_eq!(a.columns, vec![0, 1]);
        assert_eq!(a.total_cost, 0);
    }

    #[test]
    fn hungarian_uniform_returns_identity() {
        let c = CostMatrix::from_rows(&[[7u64; 5]; 5]).unwrap();
        let a = hungarian_solve(&c);
        assert_eq!(a.columns, vec![0, 1, 2, 3, 4]);
        assert_eq!(a.total_cost, 35);
    }

    #[test]
    fn hungarian_small_instance() {
        let (m, t) = small_instance();
        let s = build_slot_costs(&m, &t, &LatencyModel::default()).unwrap();
        let a = hungarian_solve(s.costs());
        assert_eq!(a.total_cost, 43_900);
        let sched = assignment_to_schedule(&s, &a, &t);
        assert_eq!(sched.placement(), &[1, 0, 0, 1]);
    }

    #[test]
    fn hungarian_classic_3x3() {
        let c = CostMatrix::from_rows(&[[4u64, 1, 3], [2, 0, 5], [3, 2, 2]]).unwrap();
        assert_eq!(hungarian_solve(&c).total_cost, 5);
    }

    #[test]
    fn not_square_is_rejected() {
        assert_eq!(
            CostMatrix::from_rows(&[vec![1u64, 2], vec![3]]),
            Err(Error::NotSquare {
                rows: 2,
                row: 1,
                len: 1
            })
        );
        assert!(CostMatrix::from_rows(&[[1u64, 2, 3], [4, 5, 6]]).is_err());
    }

    #[test]
    fn empty_matrix() {
        let c = CostMatrix::from_rows::<[u64; 0]>(&[]).unwrap();
        assert_eq!(hungarian_solve(&c).total_cost, 0);
    }

    #[test]
    fn brute_force_small_instance() {
        let (m, t) = small_instance();
        let (s, cost) = brute_force_optimal(&m, &t, &LatencyModel::default()).unwrap();
        assert_eq!(s.placement(), &[1, 0, 0, 1]);
        assert_eq!(cost, 43_900);
        assert_eq!(
            schedule_cost(&m, &s, &LatencyModel::default())
                .unwrap()
                .total_cycles,
            cost
        );
    }

    #[test]
    fn brute_force_zero_matrix_is_lexicographic() {
        let t = Topology::new(2, 2, 4).unwrap();
        let (s, cost) =
            brute_force_optimal(&AccessMatrix::zeros(4, 2), &t, &LatencyModel::default()).unwrap();
        assert_eq!(s.placement(), &[0, 0, 1, 1]);
        assert_eq!(cost, 0);
    }

    #[test]
    fn brute_force_single_dominant_thread() {
        let t = Topology::new(4, 4, 1).unwrap();
        let m = AccessMatrix::from_rows(&[[10u64, 10, 10, 1000]]).unwrap();
        let (s, cost) = brute_force_optimal(&m, &t, &LatencyModel::default()).unwrap();
        assert_eq!(s.placement(), &[3]);
        assert_eq!(cost, 104_500);
    }

    #[test]
    fn brute_force_bound() {
        let t = Topology::default();
        let m = AccessMatrix::zeros(16, 4);
        let err = brute_force_optimal(&m, &t, &LatencyModel::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::EnumerationBound {
                bound: DEFAULT_ORACLE_BOUND,
                ..
            }
        ));
        let t = Topology::new(2, 2, 4).unwrap();
        assert!(brute_force_optimal_bounded(
            &AccessMatrix::zeros(4, 2),
            &t,
            &LatencyModel::default(),
            5
        )
        .is_err());
        assert!(brute_force_optimal_bounded(
            &AccessMatrix::zeros(4, 2),
            &t,
            &LatencyModel::default(),
            6
        )
        .is_ok());
    }

    #[test]
    fn placement_counts() {
        // 4!/(2!2!)
        assert_eq!(count_placements(&Topology::new(2, 2, 4).unwrap()), 6);
        // 9!/(3!3!3!)
        assert_eq!(count_placements(&Topology::new(3, 3, 9).unwrap()), 1680);
        // 8!/(2!^4)
        assert_eq!(count_placements(&Topology::new(4, 2, 8).unwrap()), 2520);
        // 16!/(4!^4)
        assert_eq!(count_placements(&Topology::default()), 63_063_000);
        // single thread on four nodes
        assert_eq!(count_placements(&Topology::new(4, 4, 1).unwrap()), 4);
        // 3 threads, 2 nodes of 2: 2^3 minus the two all-same placements
        assert_eq!(count_placements(&Topology::new(2, 2, 3).unwrap()), 6);
    }
}
