//! Timeline assembly: move batches, Rydberg pulses and single-qubit layers.
//!
//! Per stage `k` the order is: single-qubit ops attached to boundary `k`, the
//! batches from the previous layer into stage `k`, the pulse, then the batches
//! out to layer `k`. The ops of the final boundary close the schedule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{plan_transition, MoveBatch, RouteError, RouterParams};
use crate::architecture::{blockade_pairs, ArchitectureConfig, Occupancy};
use crate::circuit::{Circuit, Gate};
use crate::scheduler::StagePlan;
use crate::timing::TimingModel;

pub const SCHEDULE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Batch(MoveBatch),
    RydbergPulse {
        stage: usize,
        /// (gate id, qubit, qubit) for every CZ of the stage.
        gates: Vec<(usize, usize, usize)>,
    },
    SingleQubitOps {
        boundary: usize,
        gates: Vec<Gate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub start_us: f64,
    pub duration_us: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub g1: usize,
    pub g2: usize,
    pub n_trans: usize,
    pub n_res: usize,
    pub n_moves: usize,
    pub n_batches: usize,
    pub n_stages: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QubitTiming {
    /// From the start of the first event touching the qubit to the end of the
    /// last one, µs.
    pub busy_us: f64,
    /// Picks plus drops.
    pub transfers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub version: u32,
    pub n_qubits: usize,
    pub architecture: ArchitectureConfig,
    pub initial: Occupancy,
    pub events: Vec<Event>,
    pub counters: Counters,
    pub qubits: Vec<QubitTiming>,
    pub total_time_us: f64,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScheduleError> {
        let s: Self =
            serde_json::from_str(text).map_err(|e| ScheduleError::Format(e.to_string()))?;
        if s.version != SCHEDULE_VERSION {
            return Err(ScheduleError::Version(s.version));
        }
        Ok(s)
    }

    pub fn batches(&self) -> impl Iterator<Item = &MoveBatch> {
        self.events.iter().filter_map(|e| match &e.kind {
            EventKind::Batch(b) => Some(b),
            _ => None,
        })
    }

    pub fn pulses(&self) -> impl Iterator<Item = (usize, &[(usize, usize, usize)])> {
        self.events.iter().filter_map(|e| match &e.kind {
            EventKind::RydbergPulse { stage, gates } => Some((*stage, gates.as_slice())),
            _ => None,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("expected {expected} placement points, got {got}")]
    PointCount { expected: usize, got: usize },
    #[error("routing point {from} -> {to}: {source}")]
    Route {
        from: usize,
        to: usize,
        #[source]
        source: RouteError,
    },
    #[error("stage {stage}: blockade pairs {found:?} differ from gate pairs {expected:?}")]
    PulseMismatch {
        stage: usize,
        expected: Vec<(usize, usize)>,
        found: Vec<(usize, usize)>,
    },
    #[error("schedule format: {0}")]
    Format(String),
    #[error("unsupported schedule version {0}")]
    Version(u32),
}

struct Timeline {
    now: f64,
    first: Vec<Option<f64>>,
    last: Vec<f64>,
    transfers: Vec<usize>,
    events: Vec<Event>,
}

impl Timeline {
    fn push(&mut self, duration: f64, kind: EventKind, qubits: impl IntoIterator<Item = usize>) {
        for q in qubits {
            self.first[q].get_or_insert(self.now);
            self.last[q] = self.now + duration;
        }
        self.events.push(Event {
            start_us: self.now,
            duration_us: duration,
            kind,
        });
        self.now += duration;
    }
}

/// Routes every transition of `points` (Initial, S0, L0, …, S(K−1), L(K−1))
/// and interleaves pulses and single-qubit layers.
pub fn assemble_schedule(
    circuit: &Circuit,
    plan: &StagePlan,
    points: &[Occupancy],
    config: &ArchitectureConfig,
    timing: &TimingModel,
    router: &RouterParams,
) -> Result<Schedule, ScheduleError> {
    let k_stages = plan.len();
    let expected = 1 + 2 * k_stages;
    if points.len() != expected {
        return Err(ScheduleError::PointCount {
            expected,
            got: points.len(),
        });
    }
    let n = circuit.n_qubits;
    let mut tl = Timeline {
        now: 0.0,
        first: vec![None; n],
        last: vec![0.0; n],
        transfers: vec![0; n],
        events: Vec::new(),
    };
    let mut counters = Counters {
        g1: circuit.single_count(),
        g2: circuit.cz_count(),
        n_stages: k_stages,
        ..Counters::default()
    };

    let route = |tl: &mut Timeline, counters: &mut Counters, a: usize, b: usize| {
        let t =
            plan_transition(&points[a], &points[b], config, timing, router).map_err(|source| {
                ScheduleError::Route {
                    from: a,
                    to: b,
                    source,
                }
            })?;
        for batch in t.batches {
            counters.n_batches += 1;
            counters.n_moves += batch.moves.len();
            let movers: Vec<usize> = batch.moves.iter().map(|m| m.qubit).collect();
            for &q in &movers {
                tl.transfers[q] += 2;
            }
            tl.push(batch.duration_us, EventKind::Batch(batch), movers);
        }
        Ok::<(), ScheduleError>(())
    };

    let singles = |tl: &mut Timeline, boundary: usize| {
        let ids = plan.singles_at(boundary);
        if ids.is_empty() {
            return;
        }
        let mut depth = vec![0usize; n];
        for &g in &ids {
            depth[circuit.gates[g].qubits[0]] += 1;
        }
        let layers = depth.iter().copied().max().unwrap_or(0);
        let gates: Vec<Gate> = ids.iter().map(|&g| circuit.gates[g].clone()).collect();
        let touched: Vec<usize> = (0..n).filter(|&q| depth[q] > 0).collect();
        tl.push(
            layers as f64 * timing.single_qubit_gate_us,
            EventKind::SingleQubitOps { boundary, gates },
            touched,
        );
    };

    for k in 0..k_stages {
        singles(&mut tl, k);
        let stage_pt = 1 + 2 * k;
        route(&mut tl, &mut counters, stage_pt - 1, stage_pt)?;

        let occ = &points[stage_pt];
        let gates: Vec<(usize, usize, usize)> = plan.stages[k]
            .iter()
            .map(|&g| {
                let q = &circuit.gates[g].qubits;
                (g, q[0], q[1])
            })
            .collect();
        let mut want: Vec<(usize, usize)> = gates
            .iter()
            .map(|&(_, a, b)| (a.min(b), a.max(b)))
            .collect();
        want.sort_unstable();
        let found = blockade_pairs(config, occ);
        if found != want {
            return Err(ScheduleError::PulseMismatch {
                stage: k,
                expected: want,
                found,
            });
        }
        let in_gate: Vec<usize> = gates.iter().flat_map(|&(_, a, b)| [a, b]).collect();
        counters.n_res += occ
            .ent_qubits()
            .filter(|(q, _)| !in_gate.contains(q))
            .count();
        tl.push(
            timing.rydberg_pulse_us,
            EventKind::RydbergPulse { stage: k, gates },
            in_gate,
        );

        route(&mut tl, &mut counters, stage_pt, stage_pt + 1)?;
    }
    singles(&mut tl, k_stages);

    counters.n_trans = 2 * counters.n_moves;
    let qubits = (0..n)
        .map(|q| QubitTiming {
            busy_us: tl.first[q].map_or(0.0, |f| tl.last[q] - f),
            transfers: tl.transfers[q],
        })
        .collect();
    Ok(Schedule {
        version: SCHEDULE_VERSION,
        n_qubits: n,
        architecture: config.clone(),
        initial: points[0].clone(),
        events: tl.events,
        counters,
        qubits,
        total_time_us: tl.now,
    })
}
