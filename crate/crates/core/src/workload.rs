//! Seeded synthetic workloads with planted phase structure.
//!
//! Quantum 1 is uniformly random. The remaining quanta are split into 1, 2 or
//! 4 phases; each phase plants a thread-to-node grouping and draws a matrix in
//! which every thread's preferred node gets a full-range count while its other
//! entries are suppressed to at most `dominance * count_max`.
//!
//! Random numbers come from xoshiro256++ seeded through SplitMix64, so a
//! [`SynthSpec`] fully determines its [`Workload`].

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::model::{AccessMatrix, Topology};
use crate::{Error, Result};

/// The three synthetic access patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SynthKind {
    /// One pattern for every quantum after the first.
    Synth1,
    /// Two patterns, evenly split over the quanta after the first.
    Synth2,
    /// Four patterns, evenly split over the quanta after the first.
    Synth3,
}

impl SynthKind {
    pub const ALL: [SynthKind; 3] = [SynthKind::Synth1, SynthKind::Synth2, SynthKind::Synth3];

    pub fn phases(self) -> usize {
        match self {
            SynthKind::Synth1 => 1,
            SynthKind::Synth2 => 2,
            SynthKind::Synth3 => 4,
        }
    }
}

/// Where a workload came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WorkloadKind {
    Synth(SynthKind),
    Trace,
}

impl WorkloadKind {
    /// Lower-case identifier (`synth1`, ..., `trace`).
    pub fn id(self) -> &'static str {
        match self {
            WorkloadKind::Synth(SynthKind::Synth1) => "synth1",
            WorkloadKind::Synth(SynthKind::Synth2) => "synth2",
            WorkloadKind::Synth(SynthKind::Synth3) => "synth3",
            WorkloadKind::Trace => "trace",
        }
    }

    /// Display label used in report tables (`Synth1`, ..., `Trace`).
    pub fn label(self) -> &'static str {
        match self {
            WorkloadKind::Synth(SynthKind::Synth1) => "Synth1",
            WorkloadKind::Synth(SynthKind::Synth2) => "Synth2",
            WorkloadKind::Synth(SynthKind::Synth3) => "Synth3",
            WorkloadKind::Trace => "Trace",
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadMeta {
    pub kind: WorkloadKind,
    pub seed: u64,
    /// 0-based indices of the quanta where a new access pattern starts
    /// (quantum index 0 is the first quantum and is never listed).
    pub phase_starts: Vec<usize>,
}

/// A sequence of per-quantum access matrices sharing one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    quanta: Vec<AccessMatrix>,
    meta: WorkloadMeta,
}

impl Workload {
    pub fn new(quanta: Vec<AccessMatrix>, meta: WorkloadMeta) -> Result<Self> {
        let first = quanta.first().ok_or(Error::InvalidSpec {
            reason: "a workload needs at least one quantum",
        })?;
        let (threads, nodes) = (first.threads(), first.nodes());
        for m in &quanta {
            if m.threads() != threads || m.nodes() != nodes {
                return Err(Error::DimensionMismatch {
                    what: "workload quantum shape",
                    expected: threads * nodes,
                    found: m.threads() * m.nodes(),
                });
            }
        }
        let increasing = meta.phase_starts.windows(2).all(|w| w[0] < w[1]);
        if !increasing || meta.phase_starts.iter().any(|&q| q >= quanta.len()) {
            return Err(Error::InvalidSpec {
                reason: "phase starts must be strictly increasing quantum indices",
            });
        }
        Ok(Workload { quanta, meta })
    }

    /// Wraps externally supplied matrices; phase starts are the quanta whose
    /// matrix differs from the previous one.
    pub fn from_trace(quanta: Vec<AccessMatrix>) -> Result<Self> {
        let phase_starts = (1..quanta.len())
            .filter(|&q| quanta[q] != quanta[q - 1])
            .collect();
        Workload::new(
            quanta,
            WorkloadMeta {
                kind: WorkloadKind::Trace,
                seed: 0,
                phase_starts,
            },
        )
    }

    pub fn quanta(&self) -> &[AccessMatrix] {
        &self.quanta
    }

    pub fn len(&self) -> usize {
        self.quanta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quanta.is_empty()
    }

    pub fn meta(&self) -> &WorkloadMeta {
        &self.meta
    }

    pub fn threads(&self) -> usize {
        self.quanta[0].threads()
    }

    pub fn nodes(&self) -> usize {
        self.quanta[0].nodes()
    }

    /// Keeps only the first `quanta` quanta.
    pub fn truncated(&self, quanta: usize) -> Result<Self> {
        let quanta = quanta.min(self.quanta.len());
        let meta = WorkloadMeta {
            phase_starts: self
                .meta
                .phase_starts
                .iter()
                .copied()
                .filter(|&q| q < quanta)
                .collect(),
            ..self.meta.clone()
        };
        Workload::new(self.quanta[..quanta].to_vec(), meta)
    }
}

/// Parameters of a synthetic workload.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub topology: Topology,
    pub quanta: usize,
    pub seed: u64,
    pub count_max: u64,
    /// Off-preference entries are drawn from `[0, floor(dominance * count_max)]`.
    pub dominance: f64,
    /// Plant exactly `cores_per_node` threads per node (via a shuffle) instead
    /// of drawing each thread's preferred node independently.
    pub balanced_planting: bool,
    /// Draw a fresh matrix every quantum of a phase (same planted grouping)
    /// instead of repeating one matrix.
    pub redraw_per_quantum: bool,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, topology: Topology, seed: u64) -> Self {
        SynthSpec {
            kind,
            topology,
            quanta: 16,
            seed,
            count_max: 10_000,
            dominance: 0.01,
            balanced_planting: true,
            redraw_per_quantum: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.quanta < self.kind.phases() + 1 {
            return Err(Error::InvalidSpec {
                reason: "too few quanta: need one random quantum plus one per phase",
            });
        }
        if self.count_max == 0 {
            return Err(Error::InvalidSpec {
                reason: "count_max must be positive",
            });
        }
        if !(self.dominance > 0.0 && self.dominance <= 1.0) {
            return Err(Error::InvalidSpec {
                reason: "dominance must lie in (0, 1]",
            });
        }
        Ok(())
    }

    /// Largest count allowed off the preferred node.
    pub fn off_max(&self) -> u64 {
        // non-negative finite product, so truncation is floor
        (self.dominance * self.count_max as f64) as u64
    }

    /// Lengths of the phases after quantum 1; earlier phases get the extra
    /// quantum when the split is uneven.
    pub fn phase_lengths(&self) -> Vec<usize> {
        let phases = self.kind.phases();
        let rest = self.quanta - 1;
        (0..phases)
            .map(|p| rest / phases + usize::from(p < rest % phases))
            .collect()
    }
}

/// The xoshiro256++ stream used for a given seed.
pub fn rng_for_seed(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn random_matrix<R: Rng>(rng: &mut R, threads: usize, nodes: usize, max: u64) -> AccessMatrix {
    let counts = (0..threads * nodes)
        .map(|_| rng.gen_range(0..=max))
        .collect();
    AccessMatrix::new(threads, nodes, counts).expect("shape matches")
}

fn planted_grouping<R: Rng>(rng: &mut R, spec: &SynthSpec) -> Vec<usize> {
    let topo = &spec.topology;
    if spec.balanced_planting {
        let mut slots: Vec<usize> = (0..topo.nodes())
            .flat_map(|n| core::iter::repeat_n(n, topo.cores_per_node()))
            .collect();
        slots.shuffle(rng);
        slots.truncate(topo.threads());
        slots
    } else {
        (0..topo.threads())
            .map(|_| rng.gen_range(0..topo.nodes()))
            .collect()
    }
}

fn planted_matrix<R: Rng>(rng: &mut R, preferred: &[usize], spec: &SynthSpec) -> AccessMatrix {
    let nodes = spec.topology.nodes();
    let off_max = spec.off_max();
    let mut m = AccessMatrix::zeros(preferred.len(), nodes);
    for (t, &home) in preferred.iter().enumerate() {
        for n in 0..nodes {
            let max = if n == home { spec.count_max } else { off_max };
            m.set(t, n, rng.gen_range(0..=max));
        }
    }
    m
}

/// A synthetic workload together with the groupings planted in each phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedWorkload {
    pub workload: Workload,
    /// `groupings[p][t]` is thread `t`'s preferred node in phase `p`.
    pub groupings: Vec<Vec<usize>>,
}

/// Generates the workload described by `spec`.
pub fn gen_synth(spec: &SynthSpec) -> Result<Workload> {
    gen_synth_planted(spec).map(|p| p.workload)
}

/// Like [`gen_synth`], also returning the planted groupings.
pub fn gen_synth_planted(spec: &SynthSpec) -> Result<PlantedWorkload> {
    spec.validate()?;
    let topo = &spec.topology;
    let mut rng = rng_for_seed(spec.seed);

    let mut quanta = Vec::with_capacity(spec.quanta);
    quanta.push(random_matrix(
        &mut rng,
        topo.threads(),
        topo.nodes(),
        spec.count_max,
    ));

    let mut phase_starts = Vec::new();
    let mut groupings = Vec::new();
    let mut previous: Option<AccessMatrix> = None;
    for len in spec.phase_lengths() {
        phase_starts.push(quanta.len());
        let grouping = planted_grouping(&mut rng, spec);
        if spec.redraw_per_quantum {
            for _ in 0..len {
                quanta.push(planted_matrix(&mut rng, &grouping, spec));
            }
        } else {
            let mut m = planted_matrix(&mut rng, &grouping, spec);
            // adjacent phases must differ; keep drawing from the stream
            while previous.as_ref() == Some(&m) {
                m = planted_matrix(&mut rng, &grouping, spec);
            }
            quanta.extend(core::iter::repeat_n(m.clone(), len));
            previous = Some(m);
        }
        groupings.push(grouping);
    }

    let workload = Workload::new(
        quanta,
        WorkloadMeta {
            kind: WorkloadKind::Synth(spec.kind),
            seed: spec.seed,
            phase_starts,
        },
    )?;
    Ok(PlantedWorkload {
        workload,
        groupings,
    })
}
