//! Text, CSV and JSON renderings of aggregate results.

use std::fmt::Write as _;

use clap::ValueEnum;
use numasched_core::sim::split_by_latency;
use numasched_core::{
    AggregateResult, Algorithm, ExperimentSpec, Topology, WorkloadKind, WorkloadSource,
};
use serde::{Deserialize, Serialize};

pub const JSON_SCHEMA: &str = "numasched-report/v1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub schema: String,
    pub spec: JsonSpec,
    pub cells: Vec<JsonCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonSpec {
    pub nodes: usize,
    pub cores_per_node: usize,
    pub threads: usize,
    pub workloads: Vec<String>,
    pub algorithms: Vec<u8>,
    pub local_latency: u64,
    pub remote_latencies: Vec<u64>,
    pub replications: usize,
    pub base_seed: u64,
    /// Synthetic generator settings, absent for trace-only runs.
    pub generator: Option<JsonGenerator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonGenerator {
    pub quanta: usize,
    pub count_max: u64,
    pub dominance: f64,
    pub balanced_planting: bool,
    pub redraw_per_quantum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonCell {
    pub workload: String,
    pub algorithm: u8,
    pub local_latency: u64,
    pub remote_latency: u64,
    pub replications: usize,
    pub mean_savings_pct: f64,
    pub stddev_savings_pct: f64,
    pub min_savings_pct: f64,
    pub max_savings_pct: f64,
}

pub fn to_json_report(
    result: &AggregateResult,
    spec: &ExperimentSpec,
    topology: &Topology,
) -> JsonReport {
    let generator = spec.workloads.iter().find_map(|w| match w {
        WorkloadSource::Synth(s) => Some(JsonGenerator {
            quanta: s.quanta,
            count_max: s.count_max,
            dominance: s.dominance,
            balanced_planting: s.balanced_planting,
            redraw_per_quantum: s.redraw_per_quantum,
        }),
        WorkloadSource::Fixed(_) => None,
    });
    JsonReport {
        schema: JSON_SCHEMA.to_string(),
        spec: JsonSpec {
            nodes: topology.nodes(),
            cores_per_node: topology.cores_per_node(),
            threads: topology.threads(),
            workloads: spec
                .workloads
                .iter()
                .map(|w| w.kind().id().to_string())
                .collect(),
            algorithms: spec.algorithms.iter().map(|a| a.number()).collect(),
            local_latency: spec.latencies.first().map_or(0, |l| l.local_cycles()),
            remote_latencies: spec.latencies.iter().map(|l| l.remote_cycles()).collect(),
            replications: spec.replications,
            base_seed: spec.base_seed,
            generator,
        },
        cells: result
            .cells
            .iter()
            .map(|c| JsonCell {
                workload: c.workload.id().to_string(),
                algorithm: c.algorithm.number(),
                local_latency: c.latency.local_cycles(),
                remote_latency: c.latency.remote_cycles(),
                replications: c.replications,
                mean_savings_pct: c.mean_savings,
                stddev_savings_pct: c.stddev_savings,
                min_savings_pct: c.min_savings,
                max_savings_pct: c.max_savings,
            })
            .collect(),
    }
}

pub fn render_csv(result: &AggregateResult) -> String {
    let mut out = String::from(
        "workload,algorithm,remote_latency,replications,mean_savings_pct,stddev_savings_pct\n",
    );
    for c in &result.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.workload.id(),
            c.algorithm,
            c.latency.remote_cycles(),
            c.replications,
            c.mean_savings,
            c.stddev_savings
        );
    }
    out
}

fn distinct<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

/// One table per latency: workloads down, algorithms across.
pub fn render_table(result: &AggregateResult) -> String {
    let mut out = String::new();
    for (i, (lat, slice)) in split_by_latency(result).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "% DRAM cycles saved, remote DRAM latency {} cycles (local {})",
            lat.remote_cycles(),
            lat.local_cycles()
        );
        let workloads: Vec<WorkloadKind> = distinct(slice.cells.iter().map(|c| c.workload));
        let algorithms: Vec<Algorithm> = distinct(slice.cells.iter().map(|c| c.algorithm));

        let mut rows: Vec<Vec<String>> = Vec::with_capacity(workloads.len() + 1);
        let mut head = vec!["Workload".to_string()];
        head.extend(algorithms.iter().map(|a| format!("Algo {}", a.number())));
        rows.push(head);
        for &w in &workloads {
            let mut row = vec![w.label().to_string()];
            for &a in &algorithms {
                row.push(match slice.get(w, a, lat) {
                    Some(c) if c.replications > 1 => {
                        format!("{:.1} ± {:.1}", c.mean_savings, c.stddev_savings)
                    }
                    Some(c) => format!("{:.1}", c.mean_savings),
                    None => "-".to_string(),
                });
            }
            rows.push(row);
        }

        let columns = rows[0].len();
        let widths: Vec<usize> = (0..columns)
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        for row in &rows {
            let mut line = format!("{:<w$}", row[0], w = widths[0]);
            for (cell, &w) in row.iter().zip(&widths).skip(1) {
                let pad = w - cell.chars().count();
                let _ = write!(line, "  {}{cell}", " ".repeat(pad));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out
}

pub fn render_report(
    result: &AggregateResult,
    format: OutputFormat,
    spec: &ExperimentSpec,
    topology: &Topology,
) -> String {
    match format {
        OutputFormat::Table => render_table(result),
        OutputFormat::Csv => render_csv(result),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&to_json_report(result, spec, topology))
                .expect("report is serializable");
            s.push('\n');
            s
        }
    }
}
