//! Native line-oriented circuit grammar.
//!
//! ```text
//! qubits 3;
//! h 0;
//! rz(pi/4) 1;
//! cz 0 1;   # comments run to end of line, `//` also works
//! cx 1 2;   # cx, swap, cp(λ)/cu1(λ) and ccx are lowered to cz on input
//! ```

use super::lexer::{tokenize, Cursor, Tok};
use super::{composite_arity, repeated_qubit, Circuit, CircuitError, Gate, GateKind, SingleGate};

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut cur = Cursor::new(tokenize(text)?, text);

    let (kw, _) = cur.expect_ident()?;
    if kw != "qubits" {
        return Err(CircuitError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected `qubits N;` header, found `{kw}`"),
        });
    }
    let (n_qubits, _) = cur.expect_int()?;
    cur.expect_sym(';')?;

    let mut circuit = Circuit::new(n_qubits);
    while !cur.at_end() {
        let (name, line) = cur.expect_ident()?;
        let mut params = Vec::new();
        if cur.eat_sym('(') && !cur.eat_sym(')') {
            loop {
                params.push(cur.expr()?);
                if cur.eat_sym(')') {
                    break;
                }
                cur.expect_sym(',')?;
            }
        }
        let mut qubits = Vec::new();
        while matches!(cur.peek().map(|t| &t.tok), Some(Tok::Int(_))) {
            let (q, _) = cur.expect_int()?;
            if q >= n_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    line,
                    index: q,
                    n_qubits,
                });
            }
            qubits.push(q);
        }
        cur.expect_sym(';')?;

        if let Some((n_q, n_p)) = composite_arity(&name) {
            if params.len() != n_p || qubits.len() != n_q {
                return Err(CircuitError::Syntax {
                    line,
                    column: 1,
                    message: format!("{name} takes {n_p} parameter(s) and {n_q} qubits"),
                });
            }
            if let Some(qubit) = repeated_qubit(&qubits) {
                return Err(CircuitError::RepeatedQubit { line, qubit });
            }
            circuit.push_composite(&name, &params, &qubits);
            continue;
        }
        let kind = if name == "cz" {
            if !params.is_empty() || qubits.len() != 2 {
                return Err(CircuitError::Syntax {
                    line,
                    column: 1,
                    message: "cz takes no parameters and exactly two qubits".into(),
                });
            }
            if qubits[0] == qubits[1] {
                return Err(CircuitError::RepeatedQubit {
                    line,
                    qubit: qubits[0],
                });
            }
            GateKind::Cz
        } else {
            let gate =
                SingleGate::from_name(&name).ok_or_else(|| CircuitError::UnsupportedGate {
                    line,
                    name: name.clone(),
                })?;
            if params.len() != gate.arity() || qubits.len() != 1 {
                return Err(CircuitError::Syntax {
                    line,
                    column: 1,
                    message: format!("{name} takes {} parameter(s) and one qubit", gate.arity()),
                });
            }
            GateKind::Single { gate, params }
        };
        let id = circuit.gates.len();
        circuit.gates.push(Gate { id, kind, qubits });
    }
    Ok(circuit)
}

/// Canonical one-gate-per-line rendering; re-parses to an identical circuit.
pub fn pretty_print(circuit: &Circuit) -> String {
    let mut out = format!("qubits {};\n", circuit.n_qubits);
    for gate in &circuit.gates {
        out.push_str(&gate.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cz() {
        let c = parse_circuit("qubits 2; cz 0 1;").unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.gates.len(), 1);
        assert_eq!(c.gates[0].pair(), Some((0, 1)));
    }

    #[test]
    fn repetition_preserved() {
        let c = parse_circuit("qubits 1; h 0; h 0;").unwrap();
        assert_eq!(c.gates.len(), 2);
        assert!(c.gates.iter().all(|g| !g.is_cz()));
        assert_eq!(c.gates[1].id, 1);
    }

    #[test]
    fn params_and_comments() {
        let c =
            parse_circuit("qubits 2;\n# prep\nrz(pi/2) 1; // phase\nr(0.25, -pi) 0;\n").unwrap();
        match &c.gates[0].kind {
            GateKind::Single { gate, params } => {
                assert_eq!(*gate, SingleGate::Rz);
                assert!((params[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
            }
            _ => panic!("expected rz"),
        }
        match &c.gates[1].kind {
            GateKind::Single { params, .. } => assert_eq!(params.len(), 2),
            _ => panic!("expected r"),
        }
    }

    #[test]
    fn out_of_range_qubit() {
        let err = parse_circuit("qubits 2;\ncz 0 2;").unwrap_err();
        assert_eq!(
            err,
            CircuitError::QubitOutOfRange {
                line: 2,
                index: 2,
                n_qubits: 2
            }
        );
    }

    #[test]
    fn unknown_gate() {
        let err = parse_circuit("qubits 3;\ncswap 0 1 2;").unwrap_err();
        assert!(matches!(err, CircuitError::UnsupportedGate { line: 2, .. }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_circuit("qubits 2;\ncz 0 1\nh 0;").unwrap_err();
        match err {
            CircuitError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_circuit("qubits 2; cz 1 1;"),
            Err(CircuitError::RepeatedQubit { qubit: 1, .. })
        ));
        assert!(parse_circuit("h 0;").is_err());
    }

    #[test]
    fn pretty_print_is_stable() {
        let c = parse_circuit("qubits 3; h 0; cz 0 2; rx(0.1) 2;").unwrap();
        let text = pretty_print(&c);
        assert_eq!(text, "qubits 3;\nh 0;\ncz 0 2;\nrx(0.1) 2;\n");
        assert_eq!(parse_circuit(&text).unwrap(), c);
    }
}
