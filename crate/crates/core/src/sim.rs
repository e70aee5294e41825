//! Dense statevector oracle for checking compiled schedules.
//!
//! Qubit `q` is bit `q` of the amplitude index. Replaying a schedule moves
//! atoms exactly as the batches say, and at every pulse applies CZ to the pairs
//! that are actually within the blockade radius, so a wrong placement shows up
//! as a wrong state or a pulse mismatch.

use num_complex::Complex64;
use thiserror::Error;

use crate::architecture::{blockade_pairs, Occupancy, Site};
use crate::circuit::{Circuit, Gate, GateKind, SingleGate};
use crate::router::{EventKind, Schedule};

pub const DEFAULT_QUBIT_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{n} qubits exceeds the simulator cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("state dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("stage {stage}: blockade pairs {found:?}, gate pairs {expected:?}")]
    PulseMismatch {
        stage: usize,
        expected: Vec<(usize, usize)>,
        found: Vec<(usize, usize)>,
    },
    #[error("batch moves q{qubit} from {claimed}, but it sits at {actual}")]
    BadPick {
        qubit: usize,
        claimed: Site,
        actual: Site,
    },
    #[error("batch drops q{qubit} onto occupied {site}")]
    BadDrop { qubit: usize, site: Site },
    #[error("malformed gate {0}")]
    BadGate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 unitary of a single-qubit gate.
pub fn gate_matrix(gate: SingleGate, params: &[f64]) -> Result<Mat2, SimError> {
    if params.len() != gate.arity() {
        return Err(SimError::BadGate(format!(
            "{} takes {} parameters",
            gate.name(),
            gate.arity()
        )));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let phase = |a: f64| Complex64::from_polar(1.0, a);
    Ok(match gate {
        SingleGate::H => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
        SingleGate::X => [[z, one], [one, z]],
        SingleGate::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        SingleGate::Z => [[one, z], [z, -one]],
        SingleGate::S => [[one, z], [z, c(0.0, 1.0)]],
        SingleGate::Sdg => [[one, z], [z, c(0.0, -1.0)]],
        SingleGate::T => [[one, z], [z, phase(std::f64::consts::FRAC_PI_4)]],
        SingleGate::Tdg => [[one, z], [z, phase(-std::f64::consts::FRAC_PI_4)]],
        SingleGate::Rx => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        SingleGate::Ry => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        SingleGate::Rz => [[phase(-params[0] / 2.0), z], [z, phase(params[0] / 2.0)]],
        SingleGate::P => [[one, z], [z, phase(params[0])]],
        SingleGate::R => {
            let (theta, phi) = (params[0], params[1]);
            let (s, co) = theta.sin_cos();
            let mi = c(0.0, -1.0);
            [
                [c(co, 0.0), mi * phase(phi) * s],
                [mi * phase(-phi) * s, c(co, 0.0)],
            ]
        }
    })
}

impl StateVector {
    /// |0…0⟩
    pub fn zero(n_qubits: usize, cap: usize) -> Result<Self, SimError> {
        if n_qubits > cap {
            return Err(SimError::CapExceeded { n: n_qubits, cap });
        }
        let mut amplitudes = vec![c(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = c(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply_single(&mut self, m: &Mat2, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        match &gate.kind {
            GateKind::Cz => {
                let (a, b) = gate
                    .pair()
                    .ok_or_else(|| SimError::BadGate(gate.to_string()))?;
                self.apply_cz(a, b);
            }
            GateKind::Single { gate: g, params } => {
                let m = gate_matrix(*g, params)?;
                self.apply_single(&m, gate.qubits[0]);
            }
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64, SimError> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(SimError::DimensionMismatch(
                self.amplitudes.len(),
                other.amplitudes.len(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// |⟨a|b⟩|, the overlap used for equivalence.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64, SimError> {
    Ok(a.inner(b)?.norm())
}

pub fn equivalent_up_to_global_phase(
    a: &StateVector,
    b: &StateVector,
    tol: f64,
) -> Result<bool, SimError> {
    Ok(overlap(a, b)? >= 1.0 - tol)
}

pub fn simulate_circuit(circuit: &Circuit, cap: usize) -> Result<StateVector, SimError> {
    let mut sv = StateVector::zero(circuit.n_qubits, cap)?;
    for g in &circuit.gates {
        sv.apply_gate(g)?;
    }
    Ok(sv)
}

/// Replays moves, pulses and single-qubit layers in event order.
pub fn simulate_schedule(schedule: &Schedule, cap: usize) -> Result<StateVector, SimError> {
    let mut sv = StateVector::zero(schedule.n_qubits, cap)?;
    let config = &schedule.architecture;
    let mut occ: Occupancy = schedule.initial.clone();
    for event in &schedule.events {
        match &event.kind {
            EventKind::Batch(batch) => {
                for (k, m) in batch.moves.iter().enumerate() {
                    let actual = occ.site_of(m.qubit);
                    if actual != m.pick_site {
                        return Err(SimError::BadPick {
                            qubit: m.qubit,
                            claimed: m.pick_site,
                            actual,
                        });
                    }
                    occ.relocate(
                        m.qubit,
                        Site::Storage {
                            row: usize::MAX,
                            col: k,
                        },
                    )
                    .expect("scratch sites are distinct");
                }
                for m in &batch.moves {
                    occ.relocate(m.qubit, m.drop_site)
                        .map_err(|_| SimError::BadDrop {
                            qubit: m.qubit,
                            site: m.drop_site,
                        })?;
                }
            }
            EventKind::RydbergPulse { stage, gates } => {
                let found = blockade_pairs(config, &occ);
                let mut expected: Vec<(usize, usize)> = gates
                    .iter()
                    .map(|&(_, a, b)| (a.min(b), a.max(b)))
                    .collect();
                expected.sort_unstable();
                if found != expected {
                    return Err(SimError::PulseMismatch {
                        stage: *stage,
                        expected,
                        found,
                    });
                }
                for &(a, b) in &found {
                    sv.apply_cz(a, b);
                }
            }
            EventKind::SingleQubitOps { gates, .. } => {
                for g in gates {
                    sv.apply_gate(g)?;
                }
            }
        }
    }
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn unitary(m: &Mat2) -> bool {
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - c(want, 0.0)).norm() > 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn matrices_are_unitary() {
        let all = [
            (SingleGate::H, vec![]),
            (SingleGate::X, vec![]),
            (SingleGate::Y, vec![]),
            (SingleGate::Z, vec![]),
            (SingleGate::S, vec![]),
            (SingleGate::Sdg, vec![]),
            (SingleGate::T, vec![]),
            (SingleGate::Tdg, vec![]),
            (SingleGate::Rx, vec![0.3]),
            (SingleGate::Ry, vec![1.1]),
            (SingleGate::Rz, vec![-2.0]),
            (SingleGate::P, vec![0.7]),
            (SingleGate::R, vec![0.4, 1.3]),
        ];
        for (g, p) in all {
            assert!(unitary(&gate_matrix(g, &p).unwrap()), "{}", g.name());
        }
    }

    #[test]
    fn hadamard_on_zero() {
        let sv = simulate_circuit(&parse_circuit("qubits 1; h 0;").unwrap(), 12).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv.amplitudes[0] - c(r, 0.0)).norm() < 1e-15);
        assert!((sv.amplitudes[1] - c(r, 0.0)).norm() < 1e-15);
        let sv = simulate_circuit(&parse_circuit("qubits 1; h 0; h 0;").unwrap(), 12).unwrap();
        assert!((sv.amplitudes[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sv.amplitudes[1].norm() < 1e-15);
    }

    #[test]
    fn bell_pair_amplitudes() {
        // H(0); H(1) CZ H(1) is CNOT(0 -> 1): (|00> + |11>)/sqrt 2
        let sv = simulate_circuit(
            &parse_circuit("qubits 2; h 0; h 1; cz 0 1; h 1;").unwrap(),
            12,
        )
        .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)];
        for (a, w) in sv.amplitudes.iter().zip(want) {
            assert!((a - w).norm() < 1e-12);
        }
    }

    #[test]
    fn cz_is_symmetric() {
        let a =
            simulate_circuit(&parse_circuit("qubits 3; h 0; h 2; cz 0 2;").unwrap(), 12).unwrap();
        let b =
            simulate_circuit(&parse_circuit("qubits 3; h 0; h 2; cz 2 0;").unwrap(), 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn global_phase_and_orthogonal() {
        let a = StateVector {
            n_qubits: 1,
            amplitudes: vec![c(1.0, 0.0), c(0.0, 0.0)],
        };
        let b = StateVector {
            n_qubits: 1,
            amplitudes: vec![c(0.0, 1.0), c(0.0, 0.0)],
        };
        let o = StateVector {
            n_qubits: 1,
            amplitudes: vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        assert!(equivalent_up_to_global_phase(&a, &b, 1e-12).unwrap());
        assert!(!equivalent_up_to_global_phase(&a, &o, 1e-12).unwrap());
        let two = StateVector::zero(2, 12).unwrap();
        assert!(equivalent_up_to_global_phase(&a, &two, 1e-12).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            StateVector::zero(13, 12),
            Err(SimError::CapExceeded { n: 13, cap: 12 })
        ));
    }
}
