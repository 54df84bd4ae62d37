//! Command-line parsing. Defaults reproduce the base configuration: four
//! nodes of four cores, sixteen threads, sixteen quanta, 100/150 cycles.

use std::path::PathBuf;

use clap::Parser;
use numasched_core::{
    Algorithm, ExperimentSpec, LatencyModel, SynthKind, SynthSpec, Topology, WorkloadSource,
};
use thiserror::Error;

use crate::report::OutputFormat;
use crate::trace::{read_trace_file, TraceError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkloadArg {
    Synth(Vec<SynthKind>),
    Trace(PathBuf),
}

fn parse_workload(s: &str) -> Result<WorkloadArg, String> {
    if let Some(path) = s.strip_prefix("trace:") {
        if path.is_empty() {
            return Err("trace: needs a file path".into());
        }
        return Ok(WorkloadArg::Trace(PathBuf::from(path)));
    }
    let mut kinds = Vec::new();
    for part in s.split(',') {
        let new: &[SynthKind] = match part.trim() {
            "all" => &SynthKind::ALL,
            "synth1" => &[SynthKind::Synth1],
            "synth2" => &[SynthKind::Synth2],
            "synth3" => &[SynthKind::Synth3],
            other => return Err(format!(
                "unknown workload `{other}` (expected synth1, synth2, synth3, all or trace:<path>)"
            )),
        };
        for k in new {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
    }
    Ok(WorkloadArg::Synth(kinds))
}

/// Comma-separated algorithm selection, deduplicated in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmList(pub Vec<Algorithm>);

fn parse_algorithms(s: &str) -> Result<AlgorithmList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let new: Vec<Algorithm> = match part.trim() {
            "all" => Algorithm::ALL.to_vec(),
            p => {
                let a = p
                    .parse::<u8>()
                    .ok()
                    .and_then(Algorithm::from_number)
                    .ok_or_else(|| {
                        format!("unknown algorithm `{p}` (expected 1, 2, 3, 4 or all)")
                    })?;
                vec![a]
            }
        };
        for a in new {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    Ok(AlgorithmList(out))
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Simulate NUMA-aware thread placement over per-quantum DRAM access counters.
#[derive(Debug, Parser)]
#[command(name = "numasched", version)]
pub struct Cli {
    /// synth1, synth2, synth3, all, or trace:<path>
    #[arg(long, default_value = "all", value_parser = parse_workload)]
    pub workload: WorkloadArg,

    /// 1, 2, 3, 4, all, or a comma list such as 2,4
    #[arg(long, default_value = "all", value_parser = parse_algorithms)]
    pub algo: AlgorithmList,

    /// Number of nodes (sockets) [default: 4]
    #[arg(long, value_parser = parse_positive)]
    pub nodes: Option<usize>,

    #[arg(long, default_value_t = 4, value_parser = parse_positive)]
    pub cores_per_node: usize,

    /// Number of threads [default: 16]
    #[arg(long, value_parser = parse_positive)]
    pub threads: Option<usize>,

    /// Scheduling quanta per synthetic workload [default: 16]
    #[arg(long, value_parser = parse_positive)]
    pub quanta: Option<usize>,

    /// Local DRAM latency in cycles
    #[arg(long, default_value_t = 100)]
    pub local_latency: u64,

    /// Remote DRAM latency in cycles; a comma list runs a sweep
    #[arg(long, default_value = "150", value_delimiter = ',')]
    pub remote_latency: Vec<u64>,

    /// Base seed; replication r uses seed + r
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    pub replications: usize,

    /// Largest access count drawn by the generator [default: 10000]
    #[arg(long)]
    pub count_max: Option<u64>,

    /// Off-preference counts are capped at dominance * count-max [default: 0.01]
    #[arg(long)]
    pub dominance: Option<f64>,

    /// Plant exactly cores-per-node threads on each node [default: true]
    #[arg(long, action = clap::ArgAction::Set)]
    pub balanced_planting: Option<bool>,

    /// Redraw counts every quantum instead of repeating one matrix per phase
    #[arg(long)]
    pub redraw_per_quantum: bool,

    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Cross-check the optimal scheduler against exhaustive search first
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Core(#[from] numasched_core::Error),
    #[error("{path}: {source}")]
    Trace {
        path: PathBuf,
        #[source]
        source: TraceError,
    },
}

/// Everything needed to run and report one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub topology: Topology,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub verify: bool,
}

impl Cli {
    fn generator_flags(&self) -> Vec<&'static str> {
        let mut set = Vec::new();
        if self.quanta.is_some() {
            set.push("--quanta");
        }
        if self.count_max.is_some() {
            set.push("--count-max");
        }
        if self.dominance.is_some() {
            set.push("--dominance");
        }
        if self.balanced_planting.is_some() {
            set.push("--balanced-planting");
        }
        if self.redraw_per_quantum {
            set.push("--redraw-per-quantum");
        }
        set
    }

    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let latencies = self
            .remote_latency
            .iter()
            .map(|&r| LatencyModel::new(self.local_latency, r))
            .collect::<Result<Vec<_>, _>>()?;
        if latencies.is_empty() {
            return Err(CliError::Conflict(
                "--remote-latency needs at least one value".into(),
            ));
        }

        let (workloads, topology) = match &self.workload {
            WorkloadArg::Trace(path) => {
                let flags = self.generator_flags();
                if !flags.is_empty() {
                    return Err(CliError::Conflict(format!(
                        "{} cannot be combined with a trace workload",
                        flags.join(", ")
                    )));
                }
                let workload = read_trace_file(path).map_err(|source| CliError::Trace {
                    path: path.clone(),
                    source,
                })?;
                for (flag, given, actual) in [
                    ("--threads", self.threads, workload.threads()),
                    ("--nodes", self.nodes, workload.nodes()),
                ] {
                    if given.is_some_and(|g| g != actual) {
                        return Err(CliError::Conflict(format!(
                            "{flag} {} disagrees with the trace header ({actual})",
                            given.unwrap()
                        )));
                    }
                }
                let topology =
                    Topology::new(workload.nodes(), self.cores_per_node, workload.threads())?;
                (vec![WorkloadSource::Fixed(workload)], topology)
            }
            WorkloadArg::Synth(kinds) => {
                let topology = Topology::new(
                    self.nodes.unwrap_or(4),
                    self.cores_per_node,
                    self.threads.unwrap_or(16),
                )?;
                let sources = kinds
                    .iter()
                    .map(|&kind| {
                        let mut s = SynthSpec::new(kind, topology, self.seed);
                        s.quanta = self.quanta.unwrap_or(s.quanta);
                        s.count_max = self.count_max.unwrap_or(s.count_max);
                        s.dominance = self.dominance.unwrap_or(s.dominance);
                        s.balanced_planting = self.balanced_planting.unwrap_or(s.balanced_planting);
                        s.redraw_per_quantum = self.redraw_per_quantum;
                        s.validate()?;
                        Ok(WorkloadSource::Synth(s))
                    })
                    .collect::<Result<Vec<_>, numasched_core::Error>>()?;
                (sources, topology)
            }
        };

        let spec = ExperimentSpec {
            workloads,
            algorithms: self.algo.0,
            latencies,
            replications: self.replications,
            base_seed: self.seed,
        };
        spec.validate(&topology)?;
        Ok(RunConfig {
            spec,
            topology,
            format: self.format,
            out: self.out,
            verify: self.verify,
        })
    }
}
