//! End-to-end fidelity estimate of a schedule.
//!
//! total = f1^g1 · f2^g2 · f_exc^N_res · f_trans^N_trans · Π_q (1 − (t_q + T_trans,q)/T2)
//!
//! `t_q` is the qubit's busy span on the schedule timeline and `T_trans,q` its
//! transfer count times the per-transfer time, kept disjoint from `t_q`. The
//! product is evaluated as a sum of logarithms.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::router::Schedule;

pub const DEFAULTS_NOTE: &str = "physical parameters are defaults, not measured data";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    pub f1: f64,
    pub f2: f64,
    pub f_exc: f64,
    pub f_trans: f64,
    /// µs
    pub t2: f64,
    /// µs per pick or drop
    pub t_trans_per_op: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            f1: 0.9999,
            f2: 0.995,
            f_exc: 0.9975,
            f_trans: 0.999,
            t2: 1.5e6,
            t_trans_per_op: 15.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), FidelityError> {
        for (name, f) in [
            ("f1", self.f1),
            ("f2", self.f2),
            ("f_exc", self.f_exc),
            ("f_trans", self.f_trans),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(FidelityError::InvalidParam {
                    name: name.into(),
                    value: f,
                });
            }
        }
        for (name, t) in [("t2", self.t2), ("t_trans_per_op", self.t_trans_per_op)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(FidelityError::InvalidParam {
                    name: name.into(),
                    value: t,
                });
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, FidelityError> {
        let p: Self = toml::from_str(text).map_err(|e| FidelityError::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Copy with one named parameter replaced.
    pub fn with(&self, name: &str, value: f64) -> Result<Self, FidelityError> {
        let mut p = *self;
        match name {
            "f1" => p.f1 = value,
            "f2" => p.f2 = value,
            "f_exc" => p.f_exc = value,
            "f_trans" => p.f_trans = value,
            "t2" => p.t2 = value,
            "t_trans_per_op" => p.t_trans_per_op = value,
            _ => return Err(FidelityError::UnknownParam(name.into())),
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FidelityError {
    #[error("q{qubit} is busy {elapsed_us} µs, not below T2 = {t2} µs")]
    Decoherence {
        qubit: usize,
        elapsed_us: f64,
        t2: f64,
    },
    #[error("parameter {name} = {value} is out of range")]
    InvalidParam { name: String, value: f64 },
    #[error("unknown parameter {0}")]
    UnknownParam(String),
    #[error("parameter file: {0}")]
    Parse(String),
}

/// Counters and per-qubit (busy µs, transfers) pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FidelityInputs {
    pub g1: usize,
    pub g2: usize,
    pub n_res: usize,
    pub n_trans: usize,
    pub qubits: Vec<(f64, usize)>,
}

impl FidelityInputs {
    pub fn from_schedule(schedule: &Schedule) -> Self {
        let c = &schedule.counters;
        Self {
            g1: c.g1,
            g2: c.g2,
            n_res: c.n_res,
            n_trans: c.n_trans,
            qubits: schedule
                .qubits
                .iter()
                .map(|q| (q.busy_us, q.transfers))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitTime {
    pub t_us: f64,
    pub t_trans_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub params: PhysicalParams,
    pub g1: usize,
    pub g2: usize,
    pub n_res: usize,
    pub n_trans: usize,
    pub per_qubit_time: Vec<QubitTime>,
    pub gate_term: f64,
    pub crosstalk_term: f64,
    pub transfer_term: f64,
    pub decoherence_term: f64,
    pub log_total: f64,
    pub total: f64,
}

impl FidelityReport {
    /// (term, value) rows for plotting.
    pub fn terms(&self) -> [(&'static str, f64); 5] {
        [
            ("gate", self.gate_term),
            ("crosstalk", self.crosstalk_term),
            ("transfer", self.transfer_term),
            ("decoherence", self.decoherence_term),
            ("total", self.total),
        ]
    }
}

impl fmt::Display for FidelityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {DEFAULTS_NOTE}")?;
        writeln!(
            f,
            "g1 {}  g2 {}  N_res {}  N_trans {}",
            self.g1, self.g2, self.n_res, self.n_trans
        )?;
        writeln!(f, "[terms]")?;
        for (name, v) in self.terms() {
            writeln!(f, "{name} = {v:.12e}")?;
        }
        Ok(())
    }
}

pub fn evaluate_fidelity(
    inputs: &FidelityInputs,
    params: &PhysicalParams,
) -> Result<FidelityReport, FidelityError> {
    params.validate()?;
    let mut per_qubit_time = Vec::with_capacity(inputs.qubits.len());
    let mut log_decoherence = 0.0;
    for (q, &(t, transfers)) in inputs.qubits.iter().enumerate() {
        let t_trans = transfers as f64 * params.t_trans_per_op;
        let elapsed = t + t_trans;
        if elapsed >= params.t2 {
            return Err(FidelityError::Decoherence {
                qubit: q,
                elapsed_us: elapsed,
                t2: params.t2,
            });
        }
        log_decoherence += (-elapsed / params.t2).ln_1p();
        per_qubit_time.push(QubitTime {
            t_us: t,
            t_trans_us: t_trans,
        });
    }
    let log_gate = inputs.g1 as f64 * params.f1.ln() + inputs.g2 as f64 * params.f2.ln();
    let log_crosstalk = inputs.n_res as f64 * params.f_exc.ln();
    let log_transfer = inputs.n_trans as f64 * params.f_trans.ln();
    let log_total = log_gate + log_crosstalk + log_transfer + log_decoherence;
    Ok(FidelityReport {
        params: *params,
        g1: inputs.g1,
        g2: inputs.g2,
        n_res: inputs.n_res,
        n_trans: inputs.n_trans,
        per_qubit_time,
        gate_term: log_gate.exp(),
        crosstalk_term: log_crosstalk.exp(),
        transfer_term: log_transfer.exp(),
        decoherence_term: log_decoherence.exp(),
        log_total,
        total: log_total.exp(),
    })
}

/// One evaluation per grid value of the named parameter.
pub fn sensitivity_sweep(
    inputs: &FidelityInputs,
    params: &PhysicalParams,
    name: &str,
    grid: &[f64],
) -> Result<Vec<(f64, FidelityReport)>, FidelityError> {
    grid.iter()
        .map(|&v| {
            let p = params.with(name, v)?;
            Ok((v, evaluate_fidelity(inputs, &p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_one() {
        let r = evaluate_fidelity(&FidelityInputs::default(), &PhysicalParams::default()).unwrap();
        assert_eq!(r.total, 1.0);
    }

    #[test]
    fn single_cz() {
        let inputs = FidelityInputs {
            g2: 1,
            ..Default::default()
        };
        let r = evaluate_fidelity(&inputs, &PhysicalParams::default()).unwrap();
        assert!((r.total - 0.995).abs() < 1e-15);
    }

    #[test]
    fn worked_example() {
        // 0.9999^2 * 0.995 * 0.999^4 * (1 - 1500/1.5e6), multiplied out by hand
        let expected = 0.99980001 * 0.995 * 0.996005996001 * 0.999;
        let inputs = FidelityInputs {
            g1: 2,
            g2: 1,
            n_res: 0,
            n_trans: 4,
            // 1440 µs busy plus 4 transfers of 15 µs
            qubits: vec![(1440.0, 4)],
        };
        let r = evaluate_fidelity(&inputs, &PhysicalParams::default()).unwrap();
        assert!(
            (r.total - expected).abs() < 1e-14,
            "{} vs {expected}",
            r.total
        );
    }

    #[test]
    fn overflow_is_an_error() {
        let inputs = FidelityInputs {
            qubits: vec![(1.5e6, 0)],
            ..Default::default()
        };
        assert!(matches!(
            evaluate_fidelity(&inputs, &PhysicalParams::default()),
            Err(FidelityError::Decoherence { qubit: 0, .. })
        ));
    }

    #[test]
    fn sweeps() {
        let inputs = FidelityInputs {
            g1: 3,
            g2: 5,
            n_trans: 10,
            qubits: vec![(100.0, 4), (300.0, 6)],
            ..Default::default()
        };
        let p = PhysicalParams::default();
        let f2 = sensitivity_sweep(&inputs, &p, "f2", &[0.99, 0.995, 0.999]).unwrap();
        assert!(f2.windows(2).all(|w| w[0].1.total < w[1].1.total));
        let t2 = sensitivity_sweep(&inputs, &p, "t2", &[1e4, 1e5, 1e6]).unwrap();
        assert!(t2.windows(2).all(|w| w[0].1.total <= w[1].1.total));
        let one = sensitivity_sweep(&inputs, &p, "f1", &[p.f1]).unwrap();
        assert_eq!(one[0].1, evaluate_fidelity(&inputs, &p).unwrap());
        assert!(sensitivity_sweep(&inputs, &p, "f2", &[1.5]).is_err());
        assert!(sensitivity_sweep(&inputs, &p, "bogus", &[0.5]).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let p = PhysicalParams::from_toml("f2 = 0.99\nt2 = 2e6\n").unwrap();
        assert_eq!(p.f2, 0.99);
        assert_eq!(p.f1, 0.9999);
        assert!(PhysicalParams::from_toml("f9 = 1").is_err());
    }
}
