//! ASAP staging of CZ gates.
//!
//! Single-qubit gates do not take part in staging. Each one is attached to a
//! stage boundary: boundary `k` executes right before stage `k`'s pulse
//! sequence, and boundary `stages.len()` runs after the last stage.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateDag};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StagePlan {
    /// CZ gate ids per stage, in program order within a stage.
    pub stages: Vec<Vec<usize>>,
    /// Single-qubit gate id → boundary index.
    pub single_qubit_attachment: BTreeMap<usize, usize>,
}

impl StagePlan {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn max_width(&self) -> usize {
        self.stages.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Single-qubit gates at `boundary`, in program order.
    pub fn singles_at(&self, boundary: usize) -> Vec<usize> {
        self.single_qubit_attachment
            .iter()
            .filter(|&(_, &b)| b == boundary)
            .map(|(&g, _)| g)
            .collect()
    }

    /// Stage index of every CZ gate (`None` for single-qubit gates).
    pub fn stage_of(&self, n_gates: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_gates];
        for (k, stage) in self.stages.iter().enumerate() {
            for &g in stage {
                if g < n_gates {
                    out[g] = Some(k);
                }
            }
        }
        out
    }

    /// Plain-text report, one stage per line.
    pub fn report(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StagePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stages {}", self.stages.len())?;
        for (k, stage) in self.stages.iter().enumerate() {
            let ids: Vec<String> = stage.iter().map(|g| format!("g{g}")).collect();
            writeln!(f, "stage {k}: {}", ids.join(" "))?;
        }
        Ok(())
    }
}

/// Assigns each CZ gate to the earliest stage after every earlier CZ on its
/// qubits. Gates are visited in program order, so stage contents stay in
/// program order and later non-conflicting gates fill earlier stages.
pub fn asap_schedule(circuit: &Circuit, dag: &GateDag) -> StagePlan {
    let n = circuit.gates.len();
    // Per-gate: the stage that the gate's qubits become free after.
    // For CZ gates this is its own stage + 1; single-qubit gates pass through.
    let mut ready_after: Vec<usize> = vec![0; n];
    let mut stage_of: Vec<Option<usize>> = vec![None; n];
    let mut stages: Vec<Vec<usize>> = Vec::new();

    for gate in &circuit.gates {
        let earliest = dag
            .predecessors(gate.id)
            .iter()
            .map(|&p| ready_after[p])
            .max()
            .unwrap_or(0);
        if gate.is_cz() {
            if stages.len() <= earliest {
                stages.resize_with(earliest + 1, Vec::new);
            }
            stages[earliest].push(gate.id);
            stage_of[gate.id] = Some(earliest);
            ready_after[gate.id] = earliest + 1;
        } else {
            ready_after[gate.id] = earliest;
        }
    }

    // A single-qubit gate runs at the boundary of its qubit's next CZ stage.
    let mut single_qubit_attachment = BTreeMap::new();
    let final_boundary = stages.len();
    let mut next_cz_stage: Vec<usize> = vec![final_boundary; circuit.n_qubits];
    for gate in circuit.gates.iter().rev() {
        match stage_of[gate.id] {
            Some(k) => {
                for &q in &gate.qubits {
                    next_cz_stage[q] = k;
                }
            }
            None => {
                single_qubit_attachment.insert(gate.id, next_cz_stage[gate.qubits[0]]);
            }
        }
    }

    StagePlan {
        stages,
        single_qubit_attachment,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanViolation {
    #[error("gate g{0} is not a CZ gate or does not exist")]
    NotCz(usize),
    #[error("gate g{0} appears in more than one stage slot")]
    DuplicateGate(usize),
    #[error("CZ gate g{0} is missing from the plan")]
    MissingGate(usize),
    #[error("stage {stage}: gates g{first} and g{second} both use qubit q{qubit}")]
    QubitConflict {
        stage: usize,
        qubit: usize,
        first: usize,
        second: usize,
    },
    #[error("dependency g{before} -> g{after} inverted (stages {before_stage} and {after_stage})")]
    DependencyInversion {
        before: usize,
        after: usize,
        before_stage: usize,
        after_stage: usize,
    },
    #[error("single-qubit gate g{gate} attached to boundary {boundary}, must be in {lo}..={hi}")]
    MisplacedSingle {
        gate: usize,
        boundary: usize,
        lo: usize,
        hi: usize,
    },
}

/// Checks every [`StagePlan`] invariant; reports the first violation found.
pub fn validate_stage_plan(
    plan: &StagePlan,
    circuit: &Circuit,
    dag: &GateDag,
) -> Result<(), PlanViolation> {
    let n = circuit.gates.len();
    let mut stage_of: Vec<Option<usize>> = vec![None; n];
    for (k, stage) in plan.stages.iter().enumerate() {
        for &g in stage {
            if g >= n || !circuit.gates[g].is_cz() {
                return Err(PlanViolation::NotCz(g));
            }
            if stage_of[g].is_some() {
                return Err(PlanViolation::DuplicateGate(g));
            }
            stage_of[g] = Some(k);
        }
    }
    if let Some(g) = circuit
        .gates
        .iter()
        .find(|g| g.is_cz() && stage_of[g.id].is_none())
    {
        return Err(PlanViolation::MissingGate(g.id));
    }

    for (k, stage) in plan.stages.iter().enumerate() {
        let mut user: BTreeMap<usize, usize> = BTreeMap::new();
        for &g in stage {
            for &q in &circuit.gates[g].qubits {
                if let Some(&first) = user.get(&q) {
                    return Err(PlanViolation::QubitConflict {
                        stage: k,
                        qubit: q,
                        first,
                        second: g,
                    });
                }
                user.insert(q, g);
            }
        }
    }

    for &(a, b) in &dag.edges {
        if let (Some(ka), Some(kb)) = (stage_of[a], stage_of[b]) {
            if ka >= kb {
                return Err(PlanViolation::DependencyInversion {
                    before: a,
                    after: b,
                    before_stage: ka,
                    after_stage: kb,
                });
            }
        }
    }

    // CZ-to-CZ order through chains of single-qubit gates.
    let mut last_cz: Vec<Option<usize>> = vec![None; circuit.n_qubits];
    let mut single_lo: BTreeMap<usize, usize> = BTreeMap::new();
    for gate in &circuit.gates {
        if let Some(k) = stage_of[gate.id] {
            for &q in &gate.qubits {
                if let Some(prev) = last_cz[q] {
                    let pk = stage_of[prev].unwrap_or(0);
                    if pk >= k {
                        return Err(PlanViolation::DependencyInversion {
                            before: prev,
                            after: gate.id,
                            before_stage: pk,
                            after_stage: k,
                        });
                    }
                }
                last_cz[q] = Some(gate.id);
            }
        } else {
            let q = gate.qubits[0];
            let lo = last_cz[q].and_then(|p| stage_of[p]).map_or(0, |k| k + 1);
            single_lo.insert(gate.id, lo);
        }
    }
    // Upper bound: the next CZ stage on the qubit. Boundaries must also be
    // non-decreasing along each qubit so program order survives.
    let mut next_cz: Vec<usize> = vec![plan.stages.len(); circuit.n_qubits];
    let mut next_boundary: Vec<usize> = vec![plan.stages.len(); circuit.n_qubits];
    for gate in circuit.gates.iter().rev() {
        if let Some(k) = stage_of[gate.id] {
            for &q in &gate.qubits {
                next_cz[q] = k;
                next_boundary[q] = k;
            }
            continue;
        }
        let q = gate.qubits[0];
        let lo = single_lo[&gate.id];
        let hi = next_cz[q].min(next_boundary[q]);
        let boundary = match plan.single_qubit_attachment.get(&gate.id) {
            Some(&b) => b,
            None => return Err(PlanViolation::MissingGate(gate.id)),
        };
        if boundary < lo || boundary > hi {
            return Err(PlanViolation::MisplacedSingle {
                gate: gate.id,
                boundary,
                lo,
                hi,
            });
        }
        next_boundary[q] = boundary;
    }
    Ok(())
}
