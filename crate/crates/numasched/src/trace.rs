//! Line-oriented text format for per-quantum access counters.
//!
//! ```text
//! numasched-trace,v1,<threads>,<nodes>,<quanta>
//! <quantum>,<thread>,<node>,<count>
//! ...
//! ```
//!
//! Quanta are numbered from 1, threads and nodes from 0. Cells with a zero
//! count may be omitted; [`write_trace`] omits all of them and sorts rows by
//! (quantum, thread, node).

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use numasched_core::{AccessMatrix, Workload};
use thiserror::Error;

pub const TRACE_MAGIC: &str = "numasched-trace";
pub const TRACE_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("I/O error reading trace: {0}")]
    Io(#[from] io::Error),
    #[error("empty trace: missing header line")]
    MissingHeader,
    #[error("line {line}: bad header: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("no quanta")]
    NoQuanta,
    #[error("line {line}: malformed row: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: negative count {value}")]
    NegativeCount { line: usize, value: String },
    #[error("line {line}: {field} {value} out of range (must be {range})")]
    OutOfRange {
        line: usize,
        field: &'static str,
        value: u64,
        range: String,
    },
    #[error(
        "line {line}: non-contiguous quantum numbering: quantum {quantum} after quantum {previous}"
    )]
    NonContiguous {
        line: usize,
        quantum: u64,
        previous: u64,
    },
    #[error("line {line}: duplicate entry for quantum {quantum}, thread {thread}, node {node}")]
    Duplicate {
        line: usize,
        quantum: u64,
        thread: u64,
        node: u64,
    },
    #[error("invalid workload: {0}")]
    Workload(#[from] numasched_core::Error),
}

struct Header {
    threads: usize,
    nodes: usize,
    quanta: usize,
}

fn parse_header(line: &str) -> Result<Header, TraceError> {
    let bad = |reason: String| TraceError::BadHeader { line: 1, reason };
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(bad(format!(
            "expected `{TRACE_MAGIC},{TRACE_VERSION},<threads>,<nodes>,<quanta>`, got {} fields",
            fields.len()
        )));
    }
    if fields[0] != TRACE_MAGIC {
        return Err(bad(format!("unknown format tag `{}`", fields[0])));
    }
    if fields[1] != TRACE_VERSION {
        return Err(bad(format!("unsupported version `{}`", fields[1])));
    }
    let num = |name: &str, s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(format!("{name} `{s}` is not a non-negative integer")))
    };
    let header = Header {
        threads: num("threads", fields[2])?,
        nodes: num("nodes", fields[3])?,
        quanta: num("quanta", fields[4])?,
    };
    if header.threads == 0 || header.nodes == 0 {
        return Err(bad("threads and nodes must be positive".into()));
    }
    if header.quanta == 0 {
        return Err(TraceError::NoQuanta);
    }
    Ok(header)
}

fn parse_field(line: usize, name: &'static str, s: &str) -> Result<u64, TraceError> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        if name == "count" && !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(TraceError::NegativeCount {
                line,
                value: s.to_string(),
            });
        }
    }
    s.parse::<u64>().map_err(|_| TraceError::Malformed {
        line,
        reason: format!("{name} `{s}` is not a non-negative integer"),
    })
}

fn check_range(
    line: usize,
    field: &'static str,
    value: u64,
    lo: u64,
    hi: u64,
) -> Result<(), TraceError> {
    if value < lo || value > hi {
        return Err(TraceError::OutOfRange {
            line,
            field,
            value,
            range: format!("{lo}..={hi}"),
        });
    }
    Ok(())
}

/// Reads a trace. Blank lines are ignored.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<Workload, TraceError> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(TraceError::MissingHeader),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break parse_header(line.trim())?;
                }
            }
        }
    };

    let mut quanta = vec![AccessMatrix::zeros(header.threads, header.nodes); header.quanta];
    let mut seen = HashSet::new();
    let mut previous = 0u64;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let quantum = parse_field(line_no, "quantum", fields[0])?;
        let thread = parse_field(line_no, "thread", fields[1])?;
        let node = parse_field(line_no, "node", fields[2])?;
        let count = parse_field(line_no, "count", fields[3])?;
        check_range(line_no, "quantum", quantum, 1, header.quanta as u64)?;
        check_range(line_no, "thread", thread, 0, header.threads as u64 - 1)?;
        check_range(line_no, "node", node, 0, header.nodes as u64 - 1)?;
        if quantum < previous {
            return Err(TraceError::NonContiguous {
                line: line_no,
                quantum,
                previous,
            });
        }
        previous = quantum;
        if !seen.insert((quantum, thread, node)) {
            return Err(TraceError::Duplicate {
                line: line_no,
                quantum,
                thread,
                node,
            });
        }
        quanta[quantum as usize - 1].set(thread as usize, node as usize, count);
    }
    Ok(Workload::from_trace(quanta)?)
}

pub fn read_trace_file(path: &Path) -> Result<Workload, TraceError> {
    let file = File::open(path)?;
    parse_trace(BufReader::new(file))
}

/// Writes `workload` in trace format, omitting zero cells.
pub fn write_trace<W: Write>(workload: &Workload, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "{TRACE_MAGIC},{TRACE_VERSION},{},{},{}",
        workload.threads(),
        workload.nodes(),
        workload.len()
    )?;
    for (q, matrix) in workload.quanta().iter().enumerate() {
        for thread in 0..matrix.threads() {
            for node in 0..matrix.nodes() {
                let count = matrix.get(thread, node);
                if count != 0 {
                    writeln!(out, "{},{thread},{node},{count}", q + 1)?;
                }
            }
        }
    }
    out.flush()
}

pub fn write_trace_file(workload: &Workload, path: &Path) -> io::Result<()> {
    let file = File::create(path)
        .map_err(|e| io::Error::new(e.kind(), format!("cannot create {}: {e}", path.display())))?;
    write_trace(workload, BufWriter::new(file))
}
