//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered list of single-qubit gates and CZ gates over
//! logical qubits. Program order is the order of `gates`; gate ids are dense
//! and equal to the gate's position.

mod dag;
mod lexer;
mod parse;
mod qasm;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dag::GateDag;
pub use parse::{parse_circuit, pretty_print};
pub use qasm::parse_qasm;

/// Single-qubit gates understood by the IR and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleGate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    /// Phase gate diag(1, e^{iλ}).
    P,
    /// Native Rabi rotation parameterised by pulse area θ and laser phase φ.
    R,
}

impl SingleGate {
    pub fn name(self) -> &'static str {
        match self {
            SingleGate::H => "h",
            SingleGate::X => "x",
            SingleGate::Y => "y",
            SingleGate::Z => "z",
            SingleGate::S => "s",
            SingleGate::Sdg => "sdg",
            SingleGate::T => "t",
            SingleGate::Tdg => "tdg",
            SingleGate::Rx => "rx",
            SingleGate::Ry => "ry",
            SingleGate::Rz => "rz",
            SingleGate::P => "p",
            SingleGate::R => "r",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "h" => SingleGate::H,
            "x" => SingleGate::X,
            "y" => SingleGate::Y,
            "z" => SingleGate::Z,
            "s" => SingleGate::S,
            "sdg" => SingleGate::Sdg,
            "t" => SingleGate::T,
            "tdg" => SingleGate::Tdg,
            "rx" => SingleGate::Rx,
            "ry" => SingleGate::Ry,
            "rz" => SingleGate::Rz,
            "p" | "u1" => SingleGate::P,
            "r" => SingleGate::R,
            _ => return None,
        })
    }

    /// Number of angle parameters the gate takes.
    pub fn arity(self) -> usize {
        match self {
            SingleGate::Rx | SingleGate::Ry | SingleGate::Rz | SingleGate::P => 1,
            SingleGate::R => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Single { gate: SingleGate, params: Vec<f64> },
    Cz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn is_cz(&self) -> bool {
        matches!(self.kind, GateKind::Cz)
    }

    /// The two qubits of a CZ gate.
    pub fn pair(&self) -> Option<(usize, usize)> {
        match (&self.kind, self.qubits.as_slice()) {
            (GateKind::Cz, [a, b]) => Some((*a, *b)),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GateKind::Cz => write!(f, "cz {} {};", self.qubits[0], self.qubits[1]),
            GateKind::Single { gate, params } => {
                f.write_str(gate.name())?;
                if !params.is_empty() {
                    let joined: Vec<String> = params.iter().map(|p| format!("{p:?}")).collect();
                    write!(f, "({})", joined.join(", "))?;
                }
                write!(f, " {};", self.qubits[0])
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange {
        line: usize,
        index: usize,
        n_qubits: usize,
    },
    #[error("line {line}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, name: String },
    #[error("line {line}: cz requires two distinct qubits, got {qubit} twice")]
    RepeatedQubit { line: usize, qubit: usize },
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

/// An ordered gate list over `n_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        assert!(
            a != b && a < self.n_qubits && b < self.n_qubits,
            "bad cz({a}, {b})"
        );
        let id = self.gates.len();
        self.gates.push(Gate {
            id,
            kind: GateKind::Cz,
            qubits: vec![a, b],
        });
        self
    }

    pub fn single(&mut self, gate: SingleGate, params: &[f64], q: usize) -> &mut Self {
        assert!(q < self.n_qubits, "qubit {q} out of range");
        assert_eq!(
            params.len(),
            gate.arity(),
            "wrong parameter count for {}",
            gate.name()
        );
        let id = self.gates.len();
        self.gates.push(Gate {
            id,
            kind: GateKind::Single {
                gate,
                params: params.to_vec(),
            },
            qubits: vec![q],
        });
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.single(SingleGate::H, &[], q)
    }

    /// CNOT realised as H(target) · CZ · H(target).
    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.h(target).cz(control, target).h(target)
    }

    /// Controlled phase diag(1, 1, 1, e^{iλ}) with two CX.
    pub fn cphase(&mut self, lambda: f64, control: usize, target: usize) -> &mut Self {
        self.single(SingleGate::P, &[lambda / 2.0], control)
            .cx(control, target)
            .single(SingleGate::P, &[-lambda / 2.0], target)
            .cx(control, target)
            .single(SingleGate::P, &[lambda / 2.0], target)
    }

    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.cx(a, b).cx(b, a).cx(a, b)
    }

    /// Toffoli with six CX.
    pub fn ccx(&mut self, a: usize, b: usize, target: usize) -> &mut Self {
        use SingleGate::{Tdg, T};
        let t = target;
        self.h(t)
            .cx(b, t)
            .single(Tdg, &[], t)
            .cx(a, t)
            .single(T, &[], t);
        self.cx(b, t).single(Tdg, &[], t).cx(a, t);
        self.single(T, &[], b).single(T, &[], t).h(t);
        self.cx(a, b).single(T, &[], a).single(Tdg, &[], b).cx(a, b)
    }

    /// Appends a named multi-qubit gate lowered to CZ and single-qubit
    /// gates. The caller has checked arity with [`composite_arity`].
    pub(crate) fn push_composite(&mut self, name: &str, params: &[f64], q: &[usize]) {
        match name {
            "cx" => self.cx(q[0], q[1]),
            "swap" => self.swap(q[0], q[1]),
            "cp" | "cu1" => self.cphase(params[0], q[0], q[1]),
            "ccx" => self.ccx(q[0], q[1], q[2]),
            _ => unreachable!("not a composite gate: {name}"),
        };
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cz()).count()
    }

    pub fn single_count(&self) -> usize {
        self.gates.len() - self.cz_count()
    }

    /// Checks the structural invariants of the gate list.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (pos, gate) in self.gates.iter().enumerate() {
            if gate.id != pos {
                return Err(CircuitError::Invalid(format!(
                    "gate at position {pos} has id {}",
                    gate.id
                )));
            }
            let expected = if gate.is_cz() { 2 } else { 1 };
            if gate.qubits.len() != expected {
                return Err(CircuitError::Invalid(format!(
                    "gate {pos} has {} qubits, expected {expected}",
                    gate.qubits.len()
                )));
            }
            if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
                return Err(CircuitError::Invalid(format!(
                    "gate {pos} uses qubit {q} of {}",
                    self.n_qubits
                )));
            }
            if let Some((a, b)) = gate.pair() {
                if a == b {
                    return Err(CircuitError::Invalid(format!("gate {pos} is cz({a}, {a})")));
                }
            }
            if let GateKind::Single { gate: g, params } = &gate.kind {
                if params.len() != g.arity() {
                    return Err(CircuitError::Invalid(format!(
                        "gate {pos} ({}) has {} params",
                        g.name(),
                        params.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Native,
    Qasm,
}

impl SourceFormat {
    /// `.qasm` files use the interchange importer, everything else the native grammar.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("qasm") => SourceFormat::Qasm,
            _ => SourceFormat::Native,
        }
    }
}

/// (qubits, parameters) of the multi-qubit gates lowered on import.
pub(crate) fn composite_arity(name: &str) -> Option<(usize, usize)> {
    match name {
        "cx" | "swap" => Some((2, 0)),
        "cp" | "cu1" => Some((2, 1)),
        "ccx" => Some((3, 0)),
        _ => None,
    }
}

/// First qubit listed twice, if any.
pub(crate) fn repeated_qubit(qubits: &[usize]) -> Option<usize> {
    qubits
        .iter()
        .enumerate()
        .find(|(i, q)| qubits[..*i].contains(q))
        .map(|(_, &q)| q)
}

pub fn parse_source(text: &str, format: SourceFormat) -> Result<Circuit, CircuitError> {
    match format {
        SourceFormat::Native => parse_circuit(text),
        SourceFormat::Qasm => parse_qasm(text),
    }
}
