//! Parallel execution of replicated experiments, and the optimality self-check.

use numasched_core::assignment::brute_force_optimal;
use numasched_core::schedulers::algo4_hungarian;
use numasched_core::sim::{aggregate, run_replication};
use numasched_core::workload::rng_for_seed;
use numasched_core::{
    schedule_cost, AccessMatrix, AggregateResult, ExperimentSpec, LatencyModel, Topology,
};
use rand::Rng;
use rayon::prelude::*;

/// Runs replications on the rayon pool. Results are reduced in replication
/// order, so the output equals [`numasched_core::run_replicated`].
pub fn run_parallel(
    spec: &ExperimentSpec,
    topology: &Topology,
) -> numasched_core::Result<AggregateResult> {
    spec.validate(topology)?;
    let runs = (0..spec.replications)
        .into_par_iter()
        .map(|r| run_replication(spec, topology, r))
        .collect::<numasched_core::Result<Vec<_>>>()?;
    Ok(aggregate(&runs))
}

/// Small topologies on which exhaustive search is cheap.
pub const VERIFY_TOPOLOGIES: [(usize, usize, usize); 3] = [(2, 2, 4), (3, 3, 9), (4, 2, 8)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMismatch {
    pub topology: Topology,
    pub latency: LatencyModel,
    pub matrix: AccessMatrix,
    pub hungarian_cycles: u64,
    pub oracle_cycles: u64,
}

impl std::fmt::Display for OracleMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "optimal scheduler cost {} differs from exhaustive search {} on {}x{} nodes/cores, {} threads, remote latency {}: {:?}",
            self.hungarian_cycles,
            self.oracle_cycles,
            self.topology.nodes(),
            self.topology.cores_per_node(),
            self.topology.threads(),
            self.latency.remote_cycles(),
            self.matrix
        )
    }
}

/// Compares the Hungarian scheduler with exhaustive search on `instances`
/// random matrices per small topology and latency. Returns the number of
/// comparisons made.
pub fn verify_optimality(
    seed: u64,
    instances: usize,
    count_max: u64,
    latencies: &[LatencyModel],
) -> Result<usize, Box<OracleMismatch>> {
    let mut rng = rng_for_seed(seed);
    let mut checked = 0;
    for (nodes, k, threads) in VERIFY_TOPOLOGIES {
        let topology = Topology::new(nodes, k, threads).expect("fixed topology is valid");
        for _ in 0..instances {
            let counts = (0..threads * nodes)
                .map(|_| rng.gen_range(0..=count_max))
                .collect();
            let matrix = AccessMatrix::new(threads, nodes, counts).expect("shape matches");
            for lat in latencies {
                let schedule = algo4_hungarian(&matrix, &topology, lat).expect("shape matches");
                let got = schedule_cost(&matrix, &schedule, lat).expect("shape matches");
                let (_, oracle) =
                    brute_force_optimal(&matrix, &topology, lat).expect("within oracle bound");
                if got.total_cycles != oracle {
                    return Err(Box::new(OracleMismatch {
                        topology,
                        latency: *lat,
                        matrix,
                        hungarian_cycles: got.total_cycles,
                        oracle_cycles: oracle,
                    }));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
