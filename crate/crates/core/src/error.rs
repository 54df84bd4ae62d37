use core::fmt;

/// Errors produced by the placement library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Topology parameters that cannot host the requested threads.
    InvalidTopology { reason: &'static str },
    /// Latencies that break the NUMA premise (remote cheaper than local, or zero).
    InvalidLatency { local: u64, remote: u64 },
    /// Two inputs disagree on their shape.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A placement puts more threads on a node than it has cores.
    CapacityExceeded {
        node: usize,
        assigned: usize,
        capacity: usize,
    },
    /// A placement names a node that does not exist.
    NodeOutOfRange {
        thread: usize,
        node: usize,
        nodes: usize,
    },
    /// A cost matrix handed to the assignment solver is not square.
    NotSquare { rows: usize, row: usize, len: usize },
    /// An exhaustive enumeration would exceed its configured bound.
    EnumerationBound {
        what: &'static str,
        required: u128,
        bound: u64,
    },
    /// Savings are undefined against a zero-cycle baseline.
    DegenerateBaseline { algo_cycles: u64 },
    /// Invalid workload or experiment configuration.
    InvalidSpec { reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidTopology { reason } => write!(f, "invalid topology: {reason}"),
            Error::InvalidLatency { local, remote } => write!(
                f,
                "invalid latency model: local={local} remote={remote} (need 0 < local <= remote)"
            ),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {what}: expected {expected}, found {found}"
            ),
            Error::CapacityExceeded {
                node,
                assigned,
                capacity,
            } => write!(
                f,
                "node {node} has {assigned} threads assigned but only {capacity} cores"
            ),
            Error::NodeOutOfRange {
                thread,
                node,
                nodes,
            } => write!(
                f,
                "thread {thread} placed on node {node}, but there are only {nodes} nodes"
            ),
            Error::NotSquare { rows, row, len } => write!(
                f,
                "cost matrix is not square: {rows} rows but row {row} has {len} entries"
            ),
            Error::EnumerationBound {
                what,
                required,
                bound,
            } => write!(
                f,
                "oracle bound exceeded: {what} needs {required} candidates, bound is {bound}"
            ),
            Error::DegenerateBaseline { algo_cycles } => write!(
                f,
                "baseline has zero cycles but the algorithm spent {algo_cycles}"
            ),
            Error::InvalidSpec { reason } => write!(f, "invalid spec: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
