use serde::{Deserialize, Serialize};

use super::Circuit;

/// Gate dependency graph with immediate-predecessor edges only.
///
/// An edge `(a, b)` means gate `b` is the next gate after `a` on some shared
/// qubit. Edges always point forward in program order, so the graph is acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateDag {
    pub n_nodes: usize,
    /// Sorted, deduplicated `(earlier, later)` pairs.
    pub edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl GateDag {
    pub fn build(circuit: &Circuit) -> Self {
        let n = circuit.gates.len();
        let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.n_qubits];
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut edges = Vec::new();

        for gate in &circuit.gates {
            for &q in &gate.qubits {
                if let Some(prev) = last_on_qubit[q] {
                    if !preds[gate.id].contains(&prev) {
                        preds[gate.id].push(prev);
                        succs[prev].push(gate.id);
                        edges.push((prev, gate.id));
                    }
                }
                last_on_qubit[q] = Some(gate.id);
            }
        }
        edges.sort_unstable();
        Self {
            n_nodes: n,
            edges,
            preds,
            succs,
        }
    }

    pub fn predecessors(&self, gate: usize) -> &[usize] {
        &self.preds[gate]
    }

    pub fn successors(&self, gate: usize) -> &[usize] {
        &self.succs[gate]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    /// Kahn's algorithm; returns `None` on a cycle (never for built DAGs).
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..self.n_nodes).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n_nodes);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &s in self.succs[v].iter().rev() {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.push(s);
                }
            }
        }
        (order.len() == self.n_nodes).then_some(order)
    }
}
