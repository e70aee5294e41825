//! Importer for the common OpenQASM 2 subset: register declarations and
//! flat gate statements. `cx` is lowered to H(target)·CZ·H(target).
//! `creg`, `barrier` and `measure` are accepted and dropped.

use std::collections::HashMap;

use super::lexer::{tokenize, Cursor, Tok};
use super::{composite_arity, repeated_qubit, Circuit, CircuitError, SingleGate};

struct Registers {
    offsets: HashMap<String, (usize, usize)>,
    total: usize,
}

impl Registers {
    fn resolve(&self, cur: &mut Cursor, line: usize) -> Result<Vec<usize>, CircuitError> {
        let (name, _) = cur.expect_ident()?;
        let &(offset, size) = self
            .offsets
            .get(&name)
            .ok_or_else(|| cur.error(format!("unknown register `{name}`")))?;
        if cur.eat_sym('[') {
            let (idx, _) = cur.expect_int()?;
            cur.expect_sym(']')?;
            if idx >= size {
                return Err(CircuitError::QubitOutOfRange {
                    line,
                    index: idx,
                    n_qubits: size,
                });
            }
            Ok(vec![offset + idx])
        } else {
            Ok((offset..offset + size).collect())
        }
    }
}

fn skip_statement(cur: &mut Cursor) -> Result<(), CircuitError> {
    while let Some(t) = cur.next() {
        if t.tok == Tok::Sym(';') {
            return Ok(());
        }
    }
    Err(cur.error("expected `;`"))
}

pub fn parse_qasm(text: &str) -> Result<Circuit, CircuitError> {
    let mut cur = Cursor::new(tokenize(text)?, text);
    let mut regs = Registers {
        offsets: HashMap::new(),
        total: 0,
    };
    // The qubit count is only known once every qreg has been seen.
    let mut ops: Vec<(String, Vec<f64>, Vec<usize>, usize)> = Vec::new();

    while !cur.at_end() {
        let (word, line) = cur.expect_ident()?;
        match word.as_str() {
            "OPENQASM" | "include" | "creg" | "barrier" | "measure" => skip_statement(&mut cur)?,
            "qreg" => {
                let (name, _) = cur.expect_ident()?;
                cur.expect_sym('[')?;
                let (size, _) = cur.expect_int()?;
                cur.expect_sym(']')?;
                cur.expect_sym(';')?;
                if regs.offsets.contains_key(&name) {
                    return Err(CircuitError::Syntax {
                        line,
                        column: 1,
                        message: format!("register `{name}` declared twice"),
                    });
                }
                regs.offsets.insert(name, (regs.total, size));
                regs.total += size;
            }
            "gate" | "opaque" | "if" | "reset" => {
                return Err(CircuitError::UnsupportedGate { line, name: word });
            }
            _ => {
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
                let mut args = vec![regs.resolve(&mut cur, line)?];
                while cur.eat_sym(',') {
                    args.push(regs.resolve(&mut cur, line)?);
                }
                cur.expect_sym(';')?;
                expand(&word, params, args, line, &mut ops)?;
            }
        }
    }

    let mut circuit = Circuit::new(regs.total);
    for (name, params, qubits, line) in ops {
        match name.as_str() {
            "cz" | "cx" | "swap" | "cp" | "cu1" | "ccx" => {
                if let Some(qubit) = repeated_qubit(&qubits) {
                    return Err(CircuitError::RepeatedQubit { line, qubit });
                }
                if name == "cz" {
                    circuit.cz(qubits[0], qubits[1]);
                } else {
                    circuit.push_composite(&name, &params, &qubits);
                }
            }
            _ => {
                let gate = SingleGate::from_name(&name).ok_or(CircuitError::UnsupportedGate {
                    line,
                    name: name.clone(),
                })?;
                if params.len() != gate.arity() {
                    return Err(CircuitError::Syntax {
                        line,
                        column: 1,
                        message: format!("{name} takes {} parameter(s)", gate.arity()),
                    });
                }
                circuit.single(gate, &params, qubits[0]);
            }
        }
    }
    Ok(circuit)
}

/// Expands register broadcasting into one op per qubit tuple.
fn expand(
    name: &str,
    params: Vec<f64>,
    args: Vec<Vec<usize>>,
    line: usize,
    ops: &mut Vec<(String, Vec<f64>, Vec<usize>, usize)>,
) -> Result<(), CircuitError> {
    let (want, n_params) = match name {
        "cz" => (2, 0),
        _ => match composite_arity(name)
            .or_else(|| SingleGate::from_name(name).map(|g| (1, g.arity())))
        {
            Some(arity) => arity,
            None => {
                return Err(CircuitError::UnsupportedGate {
                    line,
                    name: name.to_string(),
                })
            }
        },
    };
    if params.len() != n_params {
        return Err(CircuitError::Syntax {
            line,
            column: 1,
            message: format!("{name} takes {n_params} parameter(s)"),
        });
    }
    if args.len() != want {
        return Err(CircuitError::Syntax {
            line,
            column: 1,
            message: format!("{name} expects {want} argument(s)"),
        });
    }
    let width = args.iter().map(Vec::len).max().unwrap_or(0);
    if args.iter().any(|a| a.len() != 1 && a.len() != width) {
        return Err(CircuitError::Syntax {
            line,
            column: 1,
            message: "register sizes do not match".into(),
        });
    }
    for i in 0..width {
        let qubits = args
            .iter()
            .map(|a| if a.len() == 1 { a[0] } else { a[i] })
            .collect();
        ops.push((name.to_string(), params.clone(), qubits, line));
    }
    Ok(())
}
