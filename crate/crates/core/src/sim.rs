//! The quantum loop and the experiments built on it.
//!
//! At the end of quantum `q` the scheduler reads that quantum's counters and
//! picks the placement for quantum `q + 1`; quantum 1 runs on the block
//! baseline because no counters exist yet. Every run is priced against the
//! baseline held fixed for all quanta.

use alloc::vec::Vec;

use crate::model::{
    baseline_schedule, savings_percent, schedule_cost, CostBreakdown, LatencyModel, Schedule,
    Topology,
};
use crate::schedulers::Algorithm;
use crate::workload::{gen_synth, SynthSpec, Workload, WorkloadKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumResult {
    /// 0-based quantum index.
    pub quantum_index: usize,
    pub schedule_used: Schedule,
    pub cost: CostBreakdown,
}

/// One algorithm run over one workload at one latency.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub algorithm: Algorithm,
    pub workload: WorkloadKind,
    pub latency: LatencyModel,
    pub per_quantum: Vec<QuantumResult>,
    pub total_cycles: u64,
    pub remote_accesses: u64,
    pub baseline_total_cycles: u64,
    pub baseline_remote_accesses: u64,
    pub savings_percent: f64,
}

impl SimulationReport {
    pub fn schedules(&self) -> impl Iterator<Item = &Schedule> + '_ {
        self.per_quantum.iter().map(|q| &q.schedule_used)
    }
}

fn check_workload(workload: &Workload, topology: &Topology) -> Result<()> {
    if workload.threads() != topology.threads() {
        return Err(Error::DimensionMismatch {
            what: "workload threads",
            expected: topology.threads(),
            found: workload.threads(),
        });
    }
    if workload.nodes() != topology.nodes() {
        return Err(Error::DimensionMismatch {
            what: "workload nodes",
            expected: topology.nodes(),
            found: workload.nodes(),
        });
    }
    Ok(())
}

/// The schedule acting in each quantum: the baseline first, then whatever the
/// algorithm derived from the previous quantum's counters.
pub fn plan_schedules(
    workload: &Workload,
    algorithm: Algorithm,
    topology: &Topology,
    lat: &LatencyModel,
) -> Result<Vec<Schedule>> {
    check_workload(workload, topology)?;
    let mut plan = Vec::with_capacity(workload.len());
    plan.push(baseline_schedule(topology));
    for matrix in &workload.quanta()[..workload.len() - 1] {
        plan.push(algorithm.schedule(matrix, topology, lat)?);
    }
    Ok(plan)
}

/// Prices a precomputed schedule sequence against the block baseline.
pub fn cost_plan(
    workload: &Workload,
    algorithm: Algorithm,
    plan: &[Schedule],
    topology: &Topology,
    lat: &LatencyModel,
) -> Result<SimulationReport> {
    check_workload(workload, topology)?;
    if plan.len() != workload.len() {
        return Err(Error::DimensionMismatch {
            what: "schedule plan length",
            expected: workload.len(),
            found: plan.len(),
        });
    }
    let baseline = baseline_schedule(topology);
    let mut per_quantum = Vec::with_capacity(workload.len());
    let (mut total, mut remote, mut base_total, mut base_remote) = (0u64, 0u64, 0u64, 0u64);
    for (q, (matrix, schedule)) in workload.quanta().iter().zip(plan).enumerate() {
        let cost = schedule_cost(matrix, schedule, lat)?;
        let base = schedule_cost(matrix, &baseline, lat)?;
        total += cost.total_cycles;
        remote += cost.remote_accesses;
        base_total += base.total_cycles;
        base_remote += base.remote_accesses;
        per_quantum.push(QuantumResult {
            quantum_index: q,
            schedule_used: schedule.clone(),
            cost,
        });
    }
    Ok(SimulationReport {
        algorithm,
        workload: workload.meta().kind,
        latency: *lat,
        per_quantum,
        total_cycles: total,
        remote_accesses: remote,
        baseline_total_cycles: base_total,
        baseline_remote_accesses: base_remote,
        savings_percent: savings_percent(base_total, total)?,
    })
}

/// Runs `algorithm` over `workload` quantum by quantum.
pub fn run_simulation(
    workload: &Workload,
    algorithm: Algorithm,
    lat: &LatencyModel,
    topology: &Topology,
) -> Result<SimulationReport> {
    let plan = plan_schedules(workload, algorithm, topology, lat)?;
    cost_plan(workload, algorithm, &plan, topology, lat)
}

/// What to simulate in each replication.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadSource {
    /// Regenerated every replication; the spec's seed is replaced by
    /// `base_seed + replication`.
    Synth(SynthSpec),
    /// The same workload in every replication.
    Fixed(Workload),
}

impl WorkloadSource {
    pub fn kind(&self) -> WorkloadKind {
        match self {
            WorkloadSource::Synth(s) => WorkloadKind::Synth(s.kind),
            WorkloadSource::Fixed(w) => w.meta().kind,
        }
    }

    pub fn instantiate(&self, seed: u64) -> Result<Workload> {
        match self {
            WorkloadSource::Synth(s) => gen_synth(&SynthSpec { seed, ..s.clone() }),
            WorkloadSource::Fixed(w) => Ok(w.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub workloads: Vec<WorkloadSource>,
    pub algorithms: Vec<Algorithm>,
    pub latencies: Vec<LatencyModel>,
    pub replications: usize,
    pub base_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self, topology: &Topology) -> Result<()> {
        if self.workloads.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "no workloads selected",
            });
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "no algorithms selected",
            });
        }
        if self.latencies.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "latency list is empty",
            });
        }
        if self.replications == 0 {
            return Err(Error::InvalidSpec {
                reason: "replications must be at least 1",
            });
        }
        for source in &self.workloads {
            match source {
                WorkloadSource::Synth(s) => {
                    if s.topology != *topology {
                        return Err(Error::InvalidSpec {
                            reason:
                                "synthetic workload topology differs from the experiment topology",
                        });
                    }
                    s.validate()?;
                }
                WorkloadSource::Fixed(w) => check_workload(w, topology)?,
            }
        }
        Ok(())
    }

    /// Seed of replication `r`.
    pub fn replication_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    /// Number of (workload, algorithm, latency) cells per replication.
    pub fn cells(&self) -> usize {
        self.workloads.len() * self.algorithms.len() * self.latencies.len()
    }
}

/// Runs one replication of every (workload, algorithm, latency) cell.
///
/// Reports come back ordered by workload, then algorithm, then latency, in
/// the order given by `spec`. All algorithms see the same matrices.
/// Latency-independent algorithms are planned once and re-priced per latency.
pub fn run_replication(
    spec: &ExperimentSpec,
    topology: &Topology,
    replication: usize,
) -> Result<Vec<SimulationReport>> {
    let seed = spec.replication_seed(replication);
    let mut reports = Vec::with_capacity(spec.cells());
    for source in &spec.workloads {
        let workload = source.instantiate(seed)?;
        for &algorithm in &spec.algorithms {
            let shared = if algorithm.uses_latency() {
                None
            } else {
                Some(plan_schedules(
                    &workload,
                    algorithm,
                    topology,
                    &spec.latencies[0],
                )?)
            };
            for lat in &spec.latencies {
                let report = match &shared {
                    Some(plan) => cost_plan(&workload, algorithm, plan, topology, lat)?,
                    None => run_simulation(&workload, algorithm, lat, topology)?,
                };
                reports.push(report);
            }
        }
    }
    Ok(reports)
}

/// Savings statistics of one (workload, algorithm, latency) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub workload: WorkloadKind,
    pub algorithm: Algorithm,
    pub latency: LatencyModel,
    pub replications: usize,
    pub mean_savings: f64,
    /// Sample standard deviation; 0 for a single replication.
    pub stddev_savings: f64,
    pub min_savings: f64,
    pub max_savings: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateResult {
    pub cells: Vec<AggregateCell>,
}

impl AggregateResult {
    pub fn get(
        &self,
        workload: WorkloadKind,
        algorithm: Algorithm,
        latency: &LatencyModel,
    ) -> Option<&AggregateCell> {
        self.cells
            .iter()
            .find(|c| c.workload == workload && c.algorithm == algorithm && c.latency == *latency)
    }

    /// Distinct latencies in first-seen order.
    pub fn latencies(&self) -> Vec<LatencyModel> {
        let mut out: Vec<LatencyModel> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.latency) {
                out.push(c.latency);
            }
        }
        out
    }
}

fn summarize(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if values.len() > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1.0))
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // rounding in the sum can push the mean a hair outside the sample range
    (mean.clamp(min, max), stddev, min, max)
}

/// Folds per-replication reports (each as returned by [`run_replication`],
/// in replication order) into per-cell statistics.
pub fn aggregate(replications: &[Vec<SimulationReport>]) -> AggregateResult {
    let Some(first) = replications.first() else {
        return AggregateResult::default();
    };
    let cells = first
        .iter()
        .enumerate()
        .map(|(i, head)| {
            let values: Vec<f64> = replications.iter().map(|r| r[i].savings_percent).collect();
            let (mean, stddev, min, max) = summarize(&values);
            AggregateCell {
                workload: head.workload,
                algorithm: head.algorithm,
                latency: head.latency,
                replications: values.len(),
                mean_savings: mean,
                stddev_savings: stddev,
                min_savings: min,
                max_savings: max,
            }
        })
        .collect();
    AggregateResult { cells }
}

/// Runs every replication sequentially and aggregates.
pub fn run_replicated(spec: &ExperimentSpec, topology: &Topology) -> Result<AggregateResult> {
    spec.validate(topology)?;
    let runs = (0..spec.replications)
        .map(|r| run_replication(spec, topology, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&runs))
}

/// [`run_replicated`] split into one result per latency, in the order the
/// latencies appear in `spec`.
pub fn sensitivity_sweep(
    spec: &ExperimentSpec,
    topology: &Topology,
) -> Result<Vec<(LatencyModel, AggregateResult)>> {
    Ok(split_by_latency(&run_replicated(spec, topology)?))
}

pub fn split_by_latency(result: &AggregateResult) -> Vec<(LatencyModel, AggregateResult)> {
    result
        .latencies()
        .into_iter()
        .map(|lat| {
            let cells = result
                .cells
                .iter()
                .filter(|c| c.latency == lat)
                .cloned()
                .collect();
            (lat, AggregateResult { cells })
        })
        .collect()
}
